#include "embcmp/workbench/http.hpp"

#include "embcmp/error.hpp"

#include <httplib.h>

#include <cstdlib>

namespace embcmp::workbench {

namespace {

std::size_t env_size(const char* name, std::size_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (*end != '\0' || v[0] == '-') throw InvalidArgument(std::string(name) + " must be a non-negative integer");
    return static_cast<std::size_t>(x);
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const std::string& hint = {}) {
    json err = {{"code", code}, {"message", message}};
    if (!hint.empty()) err["hint"] = hint;
    send_json(res, {{"error", err}}, status);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) throw InvalidArgument("request body must be a JSON object");
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("malformed JSON: ") + e.what());
    }
}

// Maps the exception taxonomy onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const InvalidArgument& e) {
            send_error(res, 400, "invalid_argument", e.what());
        } catch (const NotFound& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const MissingPrerequisite& e) {
            send_error(res, 409, "missing_prerequisite", e.what(), e.hint);
        } catch (const Conflict& e) {
            send_error(res, 409, "conflict", e.what());
        } catch (const DataError& e) {
            send_error(res, 422, "data_error", e.what());
        } catch (const ComputeError& e) {
            send_error(res, 500, "compute_error", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

const std::vector<std::string> kTextKeys = {"dataset", "space", "model", "anchor", "measure", "order_by"};
const std::vector<std::string> kListKeys = {"models", "compare"};

json query_of(const httplib::Request& req, bool drop_dataset = true) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    if (drop_dataset) params.erase("dataset");
    return typed_query(params, kTextKeys, kListKeys);
}

std::string sse_frame(const StreamEvent& e) {
    return "id: " + std::to_string(e.id) + "\nevent: " + e.event + "\ndata: " + e.data + "\n\n";
}

} // namespace

ServiceOptions service_options_from_env() {
    ServiceOptions o;
    if (const char* dir = std::getenv("WORKBENCH_DATA_DIR"); dir && *dir) o.data_dir = dir;
    const std::size_t port = env_size("WORKBENCH_PORT", static_cast<std::size_t>(o.port));
    if (port > 65535) throw InvalidArgument("WORKBENCH_PORT must be at most 65535");
    o.port = static_cast<int>(port);
    o.workers = env_size("WORKBENCH_WORKERS", o.workers);
    if (o.workers == 0) throw InvalidArgument("WORKBENCH_WORKERS must be positive");
    return o;
}

struct HttpService::Impl {
    explicit Impl(Workbench& wb) : wb(wb) {}
    Workbench& wb;
    httplib::Server server;

    // Dataset from the path capture or the `dataset` query parameter; with a
    // single dataset on file the parameter may be omitted.
    std::string dataset_of(const httplib::Request& req) {
        if (req.matches.size() > 1) return req.matches[1].str();
        if (req.has_param("dataset")) return req.get_param_value("dataset");
        const auto all = wb.datasets().list();
        if (all.size() == 1) return all.front().id;
        throw InvalidArgument("dataset is required");
    }

    void routes();
};

void HttpService::Impl::routes() {
    server.new_task_queue = [] { return new httplib::ThreadPool(32); };

    server.Get("/api/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& d : wb.datasets().list()) {
            out.push_back({{"id", d.id}, {"nodes", d.nodes}, {"edges", d.edges}, {"source", d.source}});
        }
        send_json(res, out);
    }));

    server.Post("/api/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        ParamReader in(body, "");
        const std::string id = in.text("id", "");
        const json spec = in.object("spec");
        const std::string edges = in.text("edge_list", "");
        in.finish();
        if (id.empty()) throw InvalidArgument("id is required");
        if (spec.empty() == edges.empty()) throw InvalidArgument("give exactly one of spec or edge_list");
        const DatasetInfo d =
            spec.empty() ? wb.datasets().add_edge_list(id, edges) : wb.datasets().add_synthetic(id, spec.dump());
        send_json(res, {{"id", d.id}, {"nodes", d.nodes}, {"edges", d.edges}, {"source", d.source}}, 201);
    }));

    server.Post("/api/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
        bool created = false;
        const JobRecord r = wb.submit(parse_body(req), &created);
        send_json(res, r.to_json(), created ? 202 : 200);
    }));

    server.Get("/api/jobs", guarded([this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& r : wb.jobs()) out.push_back(r.to_json());
        send_json(res, out);
    }));

    server.Get(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, wb.job(req.matches[1].str()).to_json());
    }));

    server.Delete(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, wb.cancel(req.matches[1].str()).to_json());
    }));

    auto view = [this](const char* name, json (Workbench::*method)(const std::string&, const json&)) {
        auto handler = guarded([this, method](const httplib::Request& req, httplib::Response& res) {
            send_json(res, (wb.*method)(dataset_of(req), query_of(req)));
        });
        server.Get(std::string("/api/") + name, handler);
        server.Get(std::string("/api/") + name + "/([^/]+)", handler);
    };
    view("metrics", &Workbench::metrics);
    view("regression", &Workbench::regression);
    view("structure", &Workbench::structure);
    view("rankings", &Workbench::rankings);
    view("graph", &Workbench::graph);
    view("projection", &Workbench::projection);

    server.Get("/api/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
        send_json(res, wb.stats());
    }));

    server.Get(R"(/api/stream/projection/([^/]+))", guarded([this](const httplib::Request& req,
                                                                   httplib::Response& res) {
        const std::string job_id = req.matches[1].str();
        std::size_t last = 0;
        const std::string resume = req.has_header("Last-Event-ID") ? req.get_header_value("Last-Event-ID")
                                   : req.has_param("last_event_id") ? req.get_param_value("last_event_id")
                                                                    : "";
        if (!resume.empty()) {
            if (resume.find_first_not_of("0123456789") != std::string::npos || resume.size() > 18) {
                throw InvalidArgument("last event id must be a non-negative integer");
            }
            last = std::stoull(resume);
        }
        // fail fast on unknown or non-projection jobs, before streaming starts
        wb.projection_events(job_id, last, std::chrono::milliseconds(0));
        res.set_header("Cache-Control", "no-cache");
        auto cursor = std::make_shared<std::size_t>(last);
        res.set_chunked_content_provider(
            "text/event-stream", [this, job_id, cursor](std::size_t, httplib::DataSink& sink) {
                const StreamChunk chunk = wb.projection_events(job_id, *cursor, std::chrono::milliseconds(500));
                for (const auto& e : chunk.events) {
                    const std::string frame = sse_frame(e);
                    if (!sink.write(frame.data(), frame.size())) return false;
                    *cursor = e.id;
                }
                if (chunk.finished) {
                    sink.done();
                } else if (chunk.events.empty()) {
                    static const std::string keepalive = ": keepalive\n\n";
                    if (!sink.write(keepalive.data(), keepalive.size())) return false;
                }
                return true;
            });
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 404) {
            send_error(res, 404, "not_found", "no such route");
        } else {
            send_error(res, res.status, "http_" + std::to_string(res.status), "request rejected");
        }
    });
}

HttpService::HttpService(Workbench& workbench) : impl_(std::make_unique<Impl>(workbench)) { impl_->routes(); }

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw ComputeError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw ComputeError("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

} // namespace embcmp::workbench
