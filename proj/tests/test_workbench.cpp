#include "embcmp/error.hpp"
#include "embcmp/workbench/cache.hpp"
#include "embcmp/workbench/params.hpp"
#include "embcmp/workbench/pipeline.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace embcmp::workbench;
using embcmp::InvalidArgument;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("embcmp_wb_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("cache hits return the stored bytes without recomputing") {
    ArtifactCache cache(fresh_dir("cache"));
    const ArtifactKey key{"ds", "metrics", "abc", "csv"};
    CHECK_FALSE(cache.contains(key));
    CHECK_FALSE(cache.read(key));

    int calls = 0;
    const std::string bytes = std::string("a,b\n1,2\n") + '\0' + "tail";
    CHECK(cache.get_or_compute(key, [&] { ++calls; return bytes; }) == bytes);
    CHECK(cache.get_or_compute(key, [&] { ++calls; return std::string("other"); }) == bytes);
    CHECK(calls == 1);
    CHECK(cache.computations("metrics") == 1);
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    CHECK(slurp(cache.path(key)) == bytes);
    CHECK(cache.path(key).filename() == "abc.csv");
}

TEST_CASE("concurrent callers on one key compute once") {
    ArtifactCache cache(fresh_dir("race"));
    const ArtifactKey key{"ds", "embedding", "h", "txt"};
    std::atomic<int> calls{0};
    std::vector<std::thread> threads;
    std::vector<std::string> got(16);
    for (auto& g : got) {
        threads.emplace_back([&] {
            g = cache.get_or_compute(key, [&] {
                ++calls;
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
                return std::string(1 << 16, 'x');
            });
        });
    }
    for (auto& t : threads) t.join();
    CHECK(calls == 1);
    for (const auto& g : got) CHECK(g.size() == (1u << 16));
}

TEST_CASE("failed computations leave nothing behind") {
    const auto dir = fresh_dir("fail");
    ArtifactCache cache(dir);
    const ArtifactKey key{"ds", "projection", "h", "json"};
    CHECK_THROWS(cache.get_or_compute(key, []() -> std::string { throw std::runtime_error("boom"); }));
    CHECK_FALSE(cache.contains(key));
    for (const auto& e : fs::recursive_directory_iterator(dir)) CHECK_FALSE(e.is_regular_file());
}

TEST_CASE("named references") {
    ArtifactCache cache(fresh_dir("refs"));
    CHECK_FALSE(cache.read_ref("ds", "embedding", "deepwalk"));
    cache.write_ref("ds", "embedding", "struc2vec", "h2");
    cache.write_ref("ds", "embedding", "deepwalk", "h1");
    cache.write_ref("ds", "embedding", "deepwalk", "h3");
    CHECK(cache.read_ref("ds", "embedding", "deepwalk") == "h3");
    CHECK(cache.refs("ds", "embedding") == std::vector<std::string>{"deepwalk", "struc2vec"});
}

TEST_CASE("parameter reader is strict") {
    const json j = {{"dimension", 16}, {"lr", 0.5}, {"name", "x"}, {"extra", 1}};
    ParamReader in(j, "params");
    CHECK(in.integer("dimension", 128) == 16);
    CHECK(in.real("lr", 0.025) == 0.5);
    CHECK(in.text("name", "") == "x");
    CHECK(in.integer("missing", 7) == 7);
    CHECK_THROWS_WITH_AS(in.finish(), doctest::Contains("params.extra"), InvalidArgument);

    ParamReader typed(json::parse(R"({"dimension": "sixteen"})"), "params");
    CHECK_THROWS_AS(typed.integer("dimension", 1), InvalidArgument);
    ParamReader negative(json::parse(R"({"dimension": -3})"), "params");
    CHECK_THROWS_AS(negative.integer("dimension", 1), InvalidArgument);
    CHECK_THROWS_AS(ParamReader(json::array(), "params"), InvalidArgument);
}

TEST_CASE("embed requests round-trip and hash by content") {
    const json params = {{"p", 256}, {"q", 0.004}, {"dimension", 32}, {"seed", 9}};
    const auto r = embed_request_from_json("node2vec", params);
    CHECK(r.walk.dimension == 32);
    CHECK(r.node2vec->q == doctest::Approx(0.004));
    const auto back = embed_request_from_json("node2vec", embed_request_to_json(r));
    CHECK(embed_request_to_json(back) == embed_request_to_json(r));
    CHECK(embcmp::space_id(r) == "node2vec_p256_q0.004");

    CHECK_THROWS_WITH_AS(embed_request_from_json("node2vec", json::object()),
                         doctest::Contains("requires p and q"), InvalidArgument);
    CHECK_THROWS_AS(embed_request_from_json("deepwalk", json{{"p", 1}}), InvalidArgument);
    CHECK_THROWS_AS(embed_request_from_json("word2vec", json::object()), InvalidArgument);

    CHECK(hash_text("a") == hash_text("a"));
    CHECK(hash_text("a") != hash_text("b"));
    CHECK(hash_text("").size() == 16);
    CHECK(canonical_real(0.1) == "0.10000000000000001");
}

TEST_CASE("pipeline config parses yaml and rejects unknown keys") {
    const std::string text = R"(
synthetic:
  kind: barabasi_albert
  n: 80
  ba_m: 2
  seed: 3
output: out
seed: 5
walk:
  walks_per_node: 2
  walk_length: 10
  dimension: 8
models:
  - model: deepwalk
  - model: node2vec
    p: 1
    q: 1
regression:
  max_pairs: 500
structure:
  k: 3
projection:
  spaces: [graph, deepwalk]
  iterations: 100
)";
    const json j = yaml_to_json(text);
    CHECK(j["synthetic"]["n"] == 80);
    CHECK(j["projection"]["spaces"][1] == "deepwalk");
    const PipelineConfig c = pipeline_from_json(j);
    REQUIRE(c.synthetic);
    CHECK(c.synthetic->n == 80);
    REQUIRE(c.models.size() == 2);
    CHECK(c.models[0].walk.dimension == 8);
    CHECK(c.models[1].walk.dimension == 8);
    CHECK(c.models[1].node2vec);
    CHECK(c.regression.max_pairs == 500);
    CHECK(c.regression.models == std::vector<std::string>{"deepwalk", "node2vec_p1_q1"});
    REQUIRE(c.structure);
    CHECK(c.structure->k == 3);
    CHECK(c.projection_spaces == std::vector<std::string>{"graph", "deepwalk"});
    CHECK(c.projection.tsne.iterations == 100);

    json bad = j;
    bad["regresion"] = json::object();
    CHECK_THROWS_WITH_AS(pipeline_from_json(bad), doctest::Contains("regresion"), InvalidArgument);
    bad = j;
    bad["walk"]["dimensions"] = 8;
    CHECK_THROWS_AS(pipeline_from_json(bad), InvalidArgument);
    bad = j;
    bad["models"][0]["colour"] = "red";
    CHECK_THROWS_AS(pipeline_from_json(bad), InvalidArgument);
    bad = j;
    bad.erase("synthetic");
    CHECK_THROWS_AS(pipeline_from_json(bad), InvalidArgument);
}

TEST_CASE("pipeline run writes every stage") {
    const auto dir = fresh_dir("pipeline");
    const json j = {{"synthetic", {{"kind", "barabasi_albert"}, {"n", 60}, {"ba_m", 2}, {"seed", 3}}},
                    {"data_dir", (dir / "data").string()},
                    {"output", (dir / "out").string()},
                    {"walk", {{"walks_per_node", 2}, {"walk_length", 10}, {"dimension", 8}, {"epochs", 1}}},
                    {"models", {{{"model", "deepwalk"}}}},
                    {"structure", {{"k", 2}}},
                    {"projection", {{"spaces", {"graph"}}, {"iterations", 60}}}};
    std::ostringstream log;
    const auto result = run_pipeline(pipeline_from_json(j), log);
    for (const char* f : {"metrics.csv", "communities.csv", "embeddings/deepwalk.txt", "regression.json",
                          "table1.csv", "structure/deepwalk.json", "projection/graph.json"}) {
        CHECK_MESSAGE(fs::is_regular_file(dir / "out" / f), f);
    }
    CHECK(result.table_csv == slurp(dir / "out" / "table1.csv"));
    const auto first = slurp(dir / "out" / "embeddings/deepwalk.txt");
    fs::remove_all(dir / "out");
    run_pipeline(pipeline_from_json(j), log);
    CHECK(slurp(dir / "out" / "embeddings/deepwalk.txt") == first);
}
