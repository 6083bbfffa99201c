#include "embcmp/error.hpp"
#include "embcmp/workbench/http.hpp"
#include "embcmp/workbench/workbench.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using embcmp::workbench::HttpService;
using embcmp::workbench::json;
using embcmp::workbench::Workbench;
using embcmp::workbench::WorkbenchOptions;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("embcmp_service_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Server {
    Workbench wb;
    HttpService http;
    std::thread thread;
    int port = 0;

    explicit Server(const fs::path& dir, std::size_t workers = 2) : wb(WorkbenchOptions{dir, workers}), http(wb) {
        port = http.bind("127.0.0.1", 0);
        thread = std::thread([this] { http.listen(); });
    }
    ~Server() {
        http.stop();
        thread.join();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(60, 0);
        return c;
    }
};

struct Reply {
    int status = 0;
    json body;
};

Reply get(const Server& s, const std::string& path) {
    auto res = s.client().Get(path);
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
}

Reply post(const Server& s, const std::string& path, const json& body) {
    auto res = s.client().Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
}

const json kBa = {{"kind", "barabasi_albert"}, {"n", 120}, {"ba_m", 2}, {"seed", 4}};
const json kSmallWalks = {{"walks_per_node", 4}, {"walk_length", 20}, {"dimension", 16}, {"epochs", 1}};

void add_ba(const Server& s, const std::string& id = "ba") {
    REQUIRE(post(s, "/api/datasets", {{"id", id}, {"spec", kBa}}).status == 201);
}

json run_job(Server& s, const json& request) {
    const Reply r = post(s, "/api/jobs", request);
    REQUIRE_MESSAGE(r.status / 100 == 2, r.body.dump());
    const auto rec = s.wb.wait(r.body["job_id"].get<std::string>());
    REQUIRE_MESSAGE(rec.status == "done", rec.error_message.value_or(""));
    return r.body;
}

struct Event {
    std::size_t id = 0;
    std::string event;
    json data;
};

std::vector<Event> read_stream(const Server& s, const std::string& job_id, const httplib::Headers& headers = {},
                               const std::string& query = "") {
    auto res = s.client().Get("/api/stream/projection/" + job_id + query, headers);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    CHECK(res->get_header_value("Content-Type").find("text/event-stream") == 0);
    std::vector<Event> out;
    std::istringstream in(res->body);
    std::string line;
    Event cur;
    while (std::getline(in, line)) {
        if (line.empty()) {
            if (!cur.event.empty()) out.push_back(cur);
            cur = {};
        } else if (line.rfind("id: ", 0) == 0) {
            cur.id = std::stoul(line.substr(4));
        } else if (line.rfind("event: ", 0) == 0) {
            cur.event = line.substr(7);
        } else if (line.rfind("data: ", 0) == 0) {
            cur.data = json::parse(line.substr(6));
        }
    }
    return out;
}

} // namespace

TEST_CASE("dataset listing starts empty and grows with posted specs") {
    const auto dir = fresh_dir("datasets");
    Server s(dir);
    CHECK(get(s, "/api/datasets").body == json::array());

    const Reply added = post(s, "/api/datasets", {{"id", "ba"}, {"spec", kBa}});
    CHECK(added.status == 201);
    CHECK(added.body["nodes"] == 120);

    const Reply listed = get(s, "/api/datasets");
    REQUIRE(listed.body.size() == 1);
    CHECK(listed.body[0]["id"] == "ba");
    CHECK(listed.body[0]["source"] == "synthetic");
    CHECK(listed.body[0]["edges"].get<int>() > 0);

    CHECK(post(s, "/api/datasets", {{"id", "ba"}, {"spec", kBa}}).status == 409);
    CHECK(post(s, "/api/datasets", {{"id", "../x"}, {"spec", kBa}}).status == 400);
    CHECK(post(s, "/api/datasets", {{"id", "bad"}, {"spec", {{"kind", "nope"}}}}).status == 400);
    CHECK(post(s, "/api/datasets", {{"id", "tri"}, {"edge_list", "a b\nb c\nc a\n"}}).status == 201);
    CHECK(get(s, "/api/datasets").body.size() == 2);
    // nothing half-written is left behind
    for (const auto& e : fs::directory_iterator(dir / "datasets")) {
        CHECK(e.path().filename().string().front() != '.');
    }
}

TEST_CASE("job submission errors map to status codes") {
    const auto dir = fresh_dir("errors");
    Server s(dir);
    add_ba(s);

    Reply r = post(s, "/api/jobs", {{"dataset", "ba"}, {"kind", "embed"}, {"model", "node2vec"}});
    CHECK(r.status == 400);
    CHECK(r.body["error"]["code"] == "invalid_argument");

    r = post(s, "/api/jobs", {{"dataset", "nope"}, {"kind", "metrics"}});
    CHECK(r.status == 404);

    r = post(s, "/api/jobs", {{"dataset", "ba"}, {"kind", "embed"}, {"model", "deepwalk"}, {"params", {{"bogus", 1}}}});
    CHECK(r.status == 400);

    r = post(s, "/api/jobs", {{"dataset", "ba"}, {"kind", "juggle"}});
    CHECK(r.status == 400);

    r = post(s, "/api/jobs", {{"dataset", "ba"}, {"kind", "project"}, {"model", "deepwalk"}});
    CHECK(r.status == 409);
    CHECK(r.body["error"]["hint"].get<std::string>().find("\"kind\":\"embed\"") != std::string::npos);

    r = get(s, "/api/metrics/ba");
    CHECK(r.status == 409);
    CHECK(r.body["error"]["code"] == "missing_prerequisite");

    CHECK(get(s, "/api/jobs/nope").status == 404);
    CHECK(get(s, "/api/nowhere").status == 404);

    auto bad = s.client().Post("/api/jobs", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
}

TEST_CASE("identical requests share one job") {
    const auto dir = fresh_dir("idempotent");
    Server s(dir, 1);
    add_ba(s);
    const json request = {{"dataset", "ba"}, {"kind", "embed"}, {"model", "deepwalk"}, {"params", kSmallWalks}};

    std::vector<Reply> replies(8);
    std::vector<std::thread> threads;
    for (auto& r : replies) {
        threads.emplace_back([&] { r = post(s, "/api/jobs", request); });
    }
    for (auto& t : threads) t.join();

    int created = 0;
    for (const auto& r : replies) {
        created += r.status == 202;
        CHECK(r.body["job_id"] == replies[0].body["job_id"]);
    }
    CHECK(created == 1);
    CHECK(get(s, "/api/jobs").body.size() == 1);

    const auto id = replies[0].body["job_id"].get<std::string>();
    CHECK(s.wb.wait(id).status == "done");
    const Reply again = post(s, "/api/jobs", request);
    CHECK(again.status == 200);
    CHECK(again.body["job_id"] == id);
    CHECK(s.wb.cache().computations("embedding") == 1);
}

TEST_CASE("job status only moves forward") {
    const auto dir = fresh_dir("forward");
    Server s(dir, 1);
    add_ba(s);
    const Reply r = post(s, "/api/jobs", {{"dataset", "ba"}, {"kind", "embed"}, {"model", "deepwalk"}});
    const std::string id = r.body["job_id"];
    const std::vector<std::string> order = {"queued", "running", "done"};
    std::size_t rank = 0;
    double progress = 0.0;
    for (;;) {
        const json j = get(s, "/api/jobs/" + id).body;
        const auto at = std::find(order.begin(), order.end(), j["status"].get<std::string>());
        REQUIRE(at != order.end());
        CHECK(static_cast<std::size_t>(at - order.begin()) >= rank);
        rank = static_cast<std::size_t>(at - order.begin());
        CHECK(j["progress"].get<double>() >= progress);
        progress = j["progress"].get<double>();
        if (rank == 2) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    CHECK(progress == 1.0);
}

TEST_CASE("a restarted service reuses cached artifacts") {
    const auto dir = fresh_dir("restart");
    const json embed = {{"dataset", "ba"}, {"kind", "embed"}, {"model", "deepwalk"}, {"params", kSmallWalks}};
    const json project = {{"dataset", "ba"}, {"kind", "project"}, {"model", "deepwalk"}, {"params", {{"iterations", 200}}}};
    json first_metrics;
    json first_projection;
    {
        Server s(dir);
        add_ba(s);
        run_job(s, {{"dataset", "ba"}, {"kind", "metrics"}});
        run_job(s, embed);
        run_job(s, project);
        first_metrics = get(s, "/api/metrics/ba").body;
        const Reply view = get(s, "/api/projection/ba?space=deepwalk");
        REQUIRE(view.status == 200);
        CHECK(view.body["iteration"] == 200);
        CHECK(get(s, "/api/projection/ba?space=deepwalk&iterations=300").status == 409);
        first_projection = view.body;
        CHECK(s.wb.cache().computations("metrics") == 1);
        CHECK(s.wb.cache().computations("embedding") == 1);
        CHECK(s.wb.cache().computations("projection") == 1);
    }
    Server s(dir);
    CHECK(get(s, "/api/datasets").body.size() == 1);
    const json rec = run_job(s, {{"dataset", "ba"}, {"kind", "metrics"}});
    CHECK(rec["status"] == "done");
    run_job(s, embed);
    run_job(s, project);
    CHECK(get(s, "/api/metrics/ba").body == first_metrics);
    CHECK(get(s, "/api/projection/ba?space=deepwalk").body == first_projection);
    CHECK(s.wb.cache().computations("metrics") == 0);
    CHECK(s.wb.cache().computations("embedding") == 0);
    CHECK(s.wb.cache().computations("projection") == 0);
    CHECK(s.wb.cache().misses() == 0);
}

TEST_CASE("projection stream delivers snapshots, resumes, and ends with done") {
    const auto dir = fresh_dir("stream");
    Server s(dir);
    add_ba(s);
    run_job(s, {{"dataset", "ba"}, {"kind", "metrics"}});
    const Reply r = post(s, "/api/jobs", {{"dataset", "ba"},
                                           {"kind", "project"},
                                           {"params", {{"iterations", 1000}, {"snapshot_stride", 10}}}});
    REQUIRE(r.status == 202);
    const std::string id = r.body["job_id"];

    // a live reader sees the whole run
    const auto events = read_stream(s, id);
    REQUIRE(events.size() == 101);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(events[i].id == i + 1);
        CHECK(events[i].event == "snapshot");
        CHECK(events[i].data["iteration"] == (i + 1) * 10);
        CHECK(events[i].data["space_id"] == "graph");
        CHECK(events[i].data["coords"].size() == 120);
        CHECK(events[i].data["coords"][0].size() == 2);
    }
    CHECK(events.back().event == "done");
    CHECK(events.back().id == 101);

    const auto resumed = read_stream(s, id, {{"Last-Event-ID", "40"}});
    REQUIRE(resumed.size() == 61);
    CHECK(resumed.front().id == 41);
    CHECK(resumed.front().data["iteration"] == 410);
    CHECK(resumed.front().data == events[40].data);

    const auto by_query = read_stream(s, id, {}, "?last_event_id=99");
    REQUIRE(by_query.size() == 2);
    CHECK(by_query[0].id == 100);
    CHECK(by_query[1].event == "done");

    const json view = get(s, "/api/projection/ba").body;
    CHECK(view["iteration"] == 1000);
    CHECK(view["coords"] == events[99].data["coords"]);
}

TEST_CASE("a cancelled projection streams a single error event") {
    const auto dir = fresh_dir("cancel");
    Server s(dir, 1);
    REQUIRE(post(s, "/api/datasets",
                 {{"id", "big"}, {"spec", {{"kind", "barabasi_albert"}, {"n", 600}, {"ba_m", 2}, {"seed", 1}}}})
                .status == 201);
    run_job(s, {{"dataset", "big"}, {"kind", "metrics"}});
    const Reply r =
        post(s, "/api/jobs", {{"dataset", "big"}, {"kind", "project"}, {"params", {{"iterations", 100000}}}});
    const std::string id = r.body["job_id"];
    while (get(s, "/api/jobs/" + id).body["status"] == "queued") {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    auto del = s.client().Delete("/api/jobs/" + id);
    REQUIRE(del);
    CHECK(del->status == 200);
    const auto rec = s.wb.wait(id);
    CHECK(rec.status == "failed");
    CHECK(rec.error_message == "cancelled");

    const auto events = read_stream(s, id);
    REQUIRE(events.size() == 1);
    CHECK(events[0].event == "error");
    CHECK(events[0].data["message"] == "cancelled");

    // finished jobs cannot be cancelled again
    auto again = s.client().Delete("/api/jobs/" + id);
    REQUIRE(again);
    CHECK(again->status == 409);

    // a retry gets a fresh job
    const Reply retry =
        post(s, "/api/jobs", {{"dataset", "big"}, {"kind", "project"}, {"params", {{"iterations", 100000}}}});
    CHECK(retry.status == 202);
    CHECK(retry.body["job_id"] != id);
    s.wb.cancel(retry.body["job_id"]);
}

TEST_CASE("result views carry version and config hash") {
    const auto dir = fresh_dir("views");
    Server s(dir);
    add_ba(s);
    run_job(s, {{"dataset", "ba"}, {"kind", "metrics"}});
    run_job(s, {{"dataset", "ba"}, {"kind", "embed"}, {"model", "deepwalk"}, {"params", kSmallWalks}});
    json n2v = kSmallWalks;
    n2v["p"] = 256;
    n2v["q"] = 256;
    run_job(s, {{"dataset", "ba"}, {"kind", "embed"}, {"model", "node2vec"}, {"params", n2v}});

    CHECK(get(s, "/api/structure?k=3&model=node2vec_p256_q256").status == 409);
    run_job(s, {{"dataset", "ba"}, {"kind", "structure"}, {"model", "node2vec_p256_q256"}, {"params", {{"k", 3}}}});
    const Reply st = get(s, "/api/structure?k=3&model=node2vec_p256_q256");
    REQUIRE(st.status == 200);
    REQUIRE(st.body["clusters"].size() == 3);
    for (const auto& c : st.body["clusters"]) CHECK(c["average_distance_vector"].is_array());

    const Reply rk = get(s, "/api/rankings?anchor=20&space=deepwalk&measure=euclidean&k=50");
    REQUIRE(rk.status == 200);
    CHECK(rk.body.contains("ndcg"));
    CHECK(rk.body["entries"].size() == 50);
    CHECK(get(s, "/api/rankings?anchor=20&space=deepwalk&measure=manhattan").status == 400);
    CHECK(get(s, "/api/rankings?anchor=nobody&space=deepwalk").status == 404);
    CHECK(get(s, "/api/rankings?anchor=20&space=struc2vec").status == 409);

    run_job(s, {{"dataset", "ba"}, {"kind", "regress"}, {"params", {{"models", {"deepwalk", "node2vec_p256_q256"}}}}});
    const Reply reg = get(s, "/api/regression/ba?models=deepwalk,node2vec_p256_q256");
    REQUIRE(reg.status == 200);

    const Reply gr = get(s, "/api/graph/ba");
    REQUIRE(gr.status == 200);

    const Reply me = get(s, "/api/metrics/ba");
    for (const Reply* r : {&st, &rk, &reg, &gr, &me}) {
        CHECK(r->body["dataset"] == "ba");
        CHECK(r->body["version"].is_string());
        CHECK(r->body["config_hash"].is_string());
    }
    CHECK(me.body["nodes"].size() == 120);

    const json stats = get(s, "/api/stats").body;
    CHECK(stats["cache"]["computations"]["embedding"] == 2);
    CHECK(stats["jobs"] == 5);
}

TEST_CASE("service options come from the environment") {
    ::setenv("WORKBENCH_DATA_DIR", "/tmp/wb", 1);
    ::setenv("WORKBENCH_PORT", "9001", 1);
    ::setenv("WORKBENCH_WORKERS", "3", 1);
    auto o = embcmp::workbench::service_options_from_env();
    CHECK(o.data_dir == "/tmp/wb");
    CHECK(o.port == 9001);
    CHECK(o.workers == 3);
    ::setenv("WORKBENCH_PORT", "eighty", 1);
    CHECK_THROWS_AS(embcmp::workbench::service_options_from_env(), embcmp::InvalidArgument);
    ::unsetenv("WORKBENCH_DATA_DIR");
    ::unsetenv("WORKBENCH_PORT");
    ::unsetenv("WORKBENCH_WORKERS");
    o = embcmp::workbench::service_options_from_env();
    CHECK(o.port == 8789);
    CHECK(o.data_dir == "data");
}

TEST_CASE("query strings are typed") {
    const std::multimap<std::string, std::string> q = {
        {"k", "3"}, {"anchor", "20"}, {"lr", "0.5"}, {"flag", "true"}, {"compare", "a,b"}};
    const json t = embcmp::workbench::typed_query(q, {"anchor"}, {"compare"});
    CHECK(t["k"] == 3);
    CHECK(t["anchor"] == "20");
    CHECK(t["lr"] == 0.5);
    CHECK(t["flag"] == true);
    CHECK(t["compare"] == json::array({"a", "b"}));
}
