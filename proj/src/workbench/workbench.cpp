#include "embcmp/workbench/workbench.hpp"

#include "embcmp/diagnostics.hpp"
#include "embcmp/error.hpp"
#include "embcmp/ranking.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>

namespace embcmp::workbench {

json JobRecord::to_json() const {
    return {{"job_id", job_id},
            {"kind", kind},
            {"dataset", dataset},
            {"model", model},
            {"status", status},
            {"progress", progress},
            {"config_hash", config_hash},
            {"error_message", error_message ? json(*error_message) : json(nullptr)}};
}

std::size_t default_worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 1 ? hw - 1 : 1;
}

struct Workbench::Plan {
    std::string model;
    std::string config_hash;
    /// All present means the job is already satisfied by the cache.
    std::vector<ArtifactKey> outputs;
    std::function<void(Job&)> execute;
    std::function<void()> on_cached;
};

struct Workbench::Job {
    JobRecord record;
    Plan plan;
    std::atomic<bool> cancel{false};
    bool streams = false;
    std::vector<StreamEvent> events;
    bool stream_finished = false;
};

namespace {

const std::vector<std::string> kKinds = {"metrics", "embed", "project", "regress", "structure"};

ArtifactKey metrics_key(const Dataset& d, const std::string& hash) { return {d.id, "metrics", hash, "csv"}; }
ArtifactKey communities_key(const Dataset& d, const std::string& hash) { return {d.id, "communities", hash, "csv"}; }
ArtifactKey embedding_key(const Dataset& d, const std::string& hash) { return {d.id, "embedding", hash, "txt"}; }

json submit_hint(const Dataset& d, const std::string& kind, const std::string& model = {}) {
    json body = {{"dataset", d.id}, {"kind", kind}};
    if (!model.empty()) body["model"] = model;
    return body;
}

MissingPrerequisite missing(const std::string& what, const json& hint) {
    return MissingPrerequisite(what, "POST /api/jobs " + hint.dump());
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

} // namespace

Workbench::Workbench(WorkbenchOptions options)
    : datasets_(options.data_dir), cache_(options.data_dir) {
    const std::size_t n = std::max<std::size_t>(1, options.workers);
    for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Workbench::~Workbench() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        for (auto& [id, job] : jobs_) job->cancel = true;
    }
    queue_ready_.notify_all();
    for (auto& t : workers_) t.join();
}

std::string Workbench::embedding_hash(const Dataset& d, const std::string& space) const {
    const auto hash = cache_.read_ref(d.id, "embedding", space);
    if (hash && cache_.contains(embedding_key(d, *hash))) return *hash;
    std::string model = space;
    if (space.rfind("node2vec", 0) == 0) model = "node2vec";
    throw missing("embedding space " + space + " of " + d.id + " has not been computed",
                  submit_hint(d, "embed", model));
}

std::shared_ptr<const LoadedMetrics> Workbench::load_metrics(const Dataset& d, const MetricsParams& p) {
    const std::string hash = metrics_hash(d.version, p);
    {
        std::lock_guard lock(memo_mutex_);
        if (auto it = metrics_memo_.find(hash); it != metrics_memo_.end()) return it->second;
    }
    const auto csv = cache_.read(metrics_key(d, hash));
    const auto comm = cache_.read(communities_key(d, hash));
    if (!csv || !comm) {
        throw missing("metrics for " + d.id + " have not been computed", submit_hint(d, "metrics"));
    }
    auto m = std::make_shared<const LoadedMetrics>(parse_metrics(d.graph, *csv, *comm));
    std::lock_guard lock(memo_mutex_);
    return metrics_memo_.emplace(hash, std::move(m)).first->second;
}

std::shared_ptr<const EmbeddingMatrix> Workbench::load_embedding(const Dataset& d, const std::string& space) {
    const std::string hash = embedding_hash(d, space);
    {
        std::lock_guard lock(memo_mutex_);
        if (auto it = embedding_memo_.find(hash); it != embedding_memo_.end()) return it->second;
    }
    const auto text = cache_.read(embedding_key(d, hash));
    if (!text) throw missing("embedding space " + space + " is missing", submit_hint(d, "embed"));
    auto e = std::make_shared<const EmbeddingMatrix>(parse_embedding(d.graph, *text, space, hash));
    std::lock_guard lock(memo_mutex_);
    return embedding_memo_.emplace(hash, std::move(e)).first->second;
}

Workbench::Plan Workbench::plan(const std::string& kind, const Dataset& dataset, const std::string& model,
                                const json& params) {
    auto d = datasets_.load(dataset.id);
    Plan plan;
    if (kind == "metrics") {
        if (!model.empty()) throw InvalidArgument("metrics jobs take no model");
        const MetricsParams p = metrics_params_from_json(params);
        plan.config_hash = metrics_hash(d->version, p);
        const auto key = metrics_key(*d, plan.config_hash);
        const auto ckey = communities_key(*d, plan.config_hash);
        plan.outputs = {key, ckey};
        plan.execute = [this, d, p, key, ckey](Job&) {
            cache_.get_or_compute(key, [&] {
                auto a = compute_metrics_artifacts(d->graph, p);
                cache_.write(ckey, a.communities_csv);
                return a.metrics_csv;
            });
        };
    } else if (kind == "embed") {
        if (model.empty()) throw InvalidArgument("embed jobs need a model");
        const EmbedRequest request = embed_request_from_json(model, params);
        const std::string space = space_id(request);
        plan.model = space;
        plan.config_hash = config_hash(d->graph, request);
        const auto key = embedding_key(*d, plan.config_hash);
        plan.outputs = {key};
        const std::string hash = plan.config_hash;
        plan.on_cached = [this, d, space, hash] { cache_.write_ref(d->id, "embedding", space, hash); };
        plan.execute = [this, d, request, space, hash, key](Job& job) {
            cache_.get_or_compute(key, [&] {
                const WalkCorpus corpus = generate_walks(d->graph, request);
                {
                    std::lock_guard lock(mutex_);
                    job.record.progress = 0.5;
                }
                changed_.notify_all();
                EmbeddingMatrix e;
                e.model_id = space;
                e.config_hash = hash;
                e.vectors = train_skipgram(corpus, d->graph.node_count(), request.walk).vectors;
                return embedding_text(d->graph, e);
            });
            cache_.write_ref(d->id, "embedding", space, hash);
        };
    } else if (kind == "project") {
        json merged = params.is_null() ? json::object() : params;
        if (!model.empty()) {
            if (merged.contains("space")) throw InvalidArgument("give the space either as model or params.space");
            merged["space"] = model;
        }
        const ProjectParams p = project_params_from_json(merged);
        plan.model = p.space;
        std::string input_hash;
        if (p.space == kGraphSpace) {
            load_metrics(*d, MetricsParams{p.metrics_seed});
            input_hash = metrics_hash(d->version, MetricsParams{p.metrics_seed});
        } else {
            input_hash = embedding_hash(*d, p.space);
        }
        plan.config_hash = project_hash(input_hash, p);
        const ArtifactKey key{d->id, "projection", plan.config_hash, "json"};
        plan.outputs = {key};
        const std::string hash = plan.config_hash;
        plan.on_cached = [this, d, p, hash] { cache_.write_ref(d->id, "projection", p.space, hash); };
        plan.execute = [this, d, p, key, hash](Job& job) {
            const Matrix x = p.space == kGraphSpace
                                 ? load_metrics(*d, MetricsParams{p.metrics_seed})->normalized
                                 : embedding_as_matrix(load_embedding(*d, p.space)->vectors);
            cache_.get_or_compute(key, [&] {
                ProjectionRun run;
                run.final = tsne(x, p.tsne, [&](const Projection2D& s) {
                    run.snapshots.push_back(s);
                    {
                        std::lock_guard lock(mutex_);
                        job.record.progress = static_cast<double>(s.iteration) / static_cast<double>(p.tsne.iterations);
                    }
                    push_event(job, "snapshot", snapshot_to_json(p.space, s).dump());
                    return !job.cancel.load();
                });
                return projection_json(d->graph, p.space, p, run);
            });
            cache_.write_ref(d->id, "projection", p.space, hash);
        };
    } else if (kind == "regress") {
        json merged = params.is_null() ? json::object() : params;
        if (!model.empty()) {
            if (merged.contains("models")) throw InvalidArgument("give models either as model or params.models");
            merged["models"] = model;
        }
        RegressParams p = regress_params_from_json(merged);
        if (p.models.empty()) p.models = cache_.refs(d->id, "embedding");
        if (p.models.empty()) throw missing("no embedding of " + d->id + " has been computed", submit_hint(*d, "embed"));
        const MetricsParams mp{p.metrics_seed};
        load_metrics(*d, mp);
        std::vector<std::string> hashes;
        for (const auto& space : p.models) hashes.push_back(embedding_hash(*d, space));
        plan.model = join(p.models, ",");
        plan.config_hash = regress_hash(metrics_hash(d->version, mp), hashes, p);
        const ArtifactKey key{d->id, "regression", plan.config_hash, "json"};
        const ArtifactKey table{d->id, "table", plan.config_hash, "csv"};
        plan.outputs = {key, table};
        plan.execute = [this, d, p, mp, key, table](Job&) {
            cache_.get_or_compute(key, [&] {
                const auto metrics = load_metrics(*d, mp);
                std::vector<EmbeddingMatrix> embeddings;
                for (const auto& space : p.models) embeddings.push_back(*load_embedding(*d, space));
                auto a = compute_regression(d->id, *metrics, embeddings, p);
                cache_.write(table, a.table_csv);
                return a.report_json;
            });
        };
    } else if (kind == "structure") {
        json merged = params.is_null() ? json::object() : params;
        if (!model.empty()) {
            if (merged.contains("model")) throw InvalidArgument("give the model once");
            merged["model"] = model;
        }
        const StructureParams p = structure_params_from_json(merged);
        if (p.model.empty()) throw InvalidArgument("structure jobs need an embedding space as model");
        plan.model = p.model;
        plan.config_hash = structure_hash(embedding_hash(*d, p.model), p);
        const ArtifactKey key{d->id, "structure", plan.config_hash, "json"};
        plan.outputs = {key};
        plan.execute = [this, d, p, key](Job&) {
            cache_.get_or_compute(key, [&] { return compute_structure(d->graph, *load_embedding(*d, p.model), p); });
        };
    } else {
        throw InvalidArgument("kind must be one of " + join(kKinds, ", "));
    }
    return plan;
}

JobRecord Workbench::submit(const json& request, bool* created) {
    if (created) *created = false;
    if (!request.is_object()) throw InvalidArgument("job request must be a JSON object");
    ParamReader in(request, "");
    const std::string dataset = in.text("dataset", "");
    const std::string kind = in.text("kind", "");
    const std::string model = in.text("model", "");
    const json params = in.object("params");
    in.finish();
    if (dataset.empty()) throw InvalidArgument("dataset is required");
    if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) {
        throw InvalidArgument("kind must be one of " + join(kKinds, ", "));
    }
    const auto d = datasets_.load(dataset);
    Plan p = plan(kind, *d, model, params);

    const std::string dedupe = kind + ":" + d->id + ":" + p.config_hash;
    std::shared_ptr<Job> job;
    bool cached = false;
    {
        std::lock_guard lock(mutex_);
        if (stopping_) throw ComputeError("workbench is shutting down");
        std::size_t attempt = 1;
        if (auto it = by_hash_.find(dedupe); it != by_hash_.end()) {
            const auto& existing = jobs_.at(it->second);
            if (existing->record.status != "failed") return existing->record;
            for (const auto& id : order_) attempt += jobs_.at(id)->record.config_hash == p.config_hash &&
                                                     jobs_.at(id)->record.kind == kind;
        }
        job = std::make_shared<Job>();
        auto& r = job->record;
        r.job_id = kind + "-" + p.config_hash + (attempt > 1 ? "-" + std::to_string(attempt) : "");
        r.kind = kind;
        r.dataset = d->id;
        r.model = p.model;
        r.config_hash = p.config_hash;
        job->streams = kind == "project";
        cached = std::all_of(p.outputs.begin(), p.outputs.end(), [&](const ArtifactKey& k) { return cache_.contains(k); });
        job->plan = std::move(p);
        jobs_[r.job_id] = job;
        by_hash_[dedupe] = r.job_id;
        order_.push_back(r.job_id);
        if (!cached) {
            queue_.push_back(job);
            if (created) *created = true;
        }
    }
    if (cached) {
        if (job->plan.on_cached) job->plan.on_cached();
        std::optional<std::string> bytes;
        if (job->streams) bytes = cache_.read(job->plan.outputs.front());
        {
            std::lock_guard lock(mutex_);
            if (bytes) {
                const json artifact = json::parse(*bytes);
                for (const auto& s : artifact.at("snapshots")) {
                    job->events.push_back({job->events.size() + 1, "snapshot", s.dump()});
                }
            }
        }
        finish(*job, "done", std::nullopt);
    } else {
        queue_ready_.notify_one();
    }
    return this->job(job->record.job_id);
}

void Workbench::worker_loop() {
    for (;;) {
        std::shared_ptr<Job> job;
        {
            std::unique_lock lock(mutex_);
            queue_ready_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job = queue_.front();
            queue_.pop_front();
            if (job->record.status != "queued") continue;
            job->record.status = "running";
        }
        changed_.notify_all();
        run(job);
    }
}

void Workbench::run(const std::shared_ptr<Job>& job) {
    try {
        job->plan.execute(*job);
        if (job->cancel) {
            finish(*job, "failed", "cancelled");
        } else {
            finish(*job, "done", std::nullopt);
        }
    } catch (const Cancelled&) {
        finish(*job, "failed", "cancelled");
    } catch (const std::exception& e) {
        warn("job " + job->record.job_id + " failed: " + e.what());
        finish(*job, "failed", e.what());
    }
}

void Workbench::push_event(Job& job, std::string event, std::string data) {
    {
        std::lock_guard lock(mutex_);
        job.events.push_back({job.events.size() + 1, std::move(event), std::move(data)});
    }
    changed_.notify_all();
}

void Workbench::finish(Job& job, const std::string& status, std::optional<std::string> error) {
    {
        std::lock_guard lock(mutex_);
        if (job.record.finished()) return;
        job.record.status = status;
        job.record.error_message = std::move(error);
        if (status == "done") job.record.progress = 1.0;
        if (job.streams) {
            if (status == "done") {
                json data = {{"job_id", job.record.job_id}, {"snapshots", job.events.size()}};
                job.events.push_back({job.events.size() + 1, "done", data.dump()});
            } else {
                json data = {{"job_id", job.record.job_id}, {"message", *job.record.error_message}};
                job.events.push_back({job.events.size() + 1, "error", data.dump()});
            }
            job.stream_finished = true;
        }
    }
    changed_.notify_all();
}

std::shared_ptr<Workbench::Job> Workbench::find(const std::string& job_id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFound("unknown job: " + job_id);
    return it->second;
}

JobRecord Workbench::job(const std::string& job_id) const {
    const auto j = find(job_id);
    std::lock_guard lock(mutex_);
    return j->record;
}

std::vector<JobRecord> Workbench::jobs() const {
    std::lock_guard lock(mutex_);
    std::vector<JobRecord> out;
    for (const auto& id : order_) out.push_back(jobs_.at(id)->record);
    return out;
}

JobRecord Workbench::cancel(const std::string& job_id) {
    const auto j = find(job_id);
    bool queued = false;
    {
        std::lock_guard lock(mutex_);
        if (j->record.finished()) throw Conflict("job " + job_id + " has already finished");
        j->cancel = true;
        queued = j->record.status == "queued";
    }
    if (queued) finish(*j, "failed", "cancelled");
    return job(job_id);
}

JobRecord Workbench::wait(const std::string& job_id, std::chrono::milliseconds timeout) const {
    const auto j = find(job_id);
    std::unique_lock lock(mutex_);
    changed_.wait_for(lock, timeout, [&] { return j->record.finished(); });
    return j->record;
}

StreamChunk Workbench::projection_events(const std::string& job_id, std::size_t last_id,
                                         std::chrono::milliseconds timeout) {
    const auto j = find(job_id);
    if (!j->streams) throw NotFound("job " + job_id + " is not a projection job");
    std::unique_lock lock(mutex_);
    StreamChunk chunk;
    // a client arriving after a failure sees only the error
    if (last_id == 0 && j->record.status == "failed") {
        chunk.events.push_back(j->events.back());
        chunk.finished = true;
        return chunk;
    }
    changed_.wait_for(lock, timeout, [&] { return j->events.size() > last_id || stopping_; });
    for (std::size_t i = last_id; i < j->events.size(); ++i) chunk.events.push_back(j->events[i]);
    chunk.finished = j->stream_finished || stopping_;
    return chunk;
}

namespace {

json with_meta(json body, const Dataset& d, const std::string& hash) {
    body["dataset"] = d.id;
    body["version"] = d.version;
    body["config_hash"] = hash;
    return body;
}

std::string read_or_missing(const ArtifactCache& cache, const ArtifactKey& key, const std::string& what,
                            const json& hint) {
    auto bytes = cache.read(key);
    if (!bytes) throw missing(what, hint);
    return *bytes;
}

} // namespace

json Workbench::metrics(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    const MetricsParams p = metrics_params_from_json(query);
    const auto m = load_metrics(*d, p);
    json body = metrics_to_json(d->graph, *m);
    body["seed"] = p.seed;
    return with_meta(std::move(body), *d, metrics_hash(d->version, p));
}

json Workbench::regression(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    RegressParams p = regress_params_from_json(query);
    if (p.models.empty()) p.models = cache_.refs(d->id, "embedding");
    const MetricsParams mp{p.metrics_seed};
    std::vector<std::string> hashes;
    for (const auto& space : p.models) hashes.push_back(embedding_hash(*d, space));
    const std::string hash = regress_hash(metrics_hash(d->version, mp), hashes, p);
    json hint = submit_hint(*d, "regress");
    hint["params"] = {{"models", p.models}};
    const std::string report =
        read_or_missing(cache_, {d->id, "regression", hash, "json"}, "regression has not been computed", hint);
    json body = json::parse(report);
    body["models"] = p.models;
    body["table_csv"] = cache_.read({d->id, "table", hash, "csv"}).value_or("");
    return with_meta(std::move(body), *d, hash);
}

json Workbench::structure(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    const StructureParams p = structure_params_from_json(query);
    if (p.model.empty()) throw InvalidArgument("model is required");
    const std::string hash = structure_hash(embedding_hash(*d, p.model), p);
    json hint = submit_hint(*d, "structure", p.model);
    hint["params"] = {{"k", p.k}, {"seed", p.seed}};
    const std::string text =
        read_or_missing(cache_, {d->id, "structure", hash, "json"}, "structure has not been computed", hint);
    return with_meta(json::parse(text), *d, hash);
}

json Workbench::projection(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    json params = query.is_null() ? json::object() : query;
    bool snapshots = false;
    if (params.contains("snapshots")) {
        if (!params["snapshots"].is_boolean()) throw InvalidArgument("snapshots: expected a boolean");
        snapshots = params["snapshots"].get<bool>();
        params.erase("snapshots");
    }
    const ProjectParams p = project_params_from_json(params);
    params.erase("space");
    // without t-SNE settings, the latest run for the space
    std::optional<std::string> latest;
    if (params.empty()) latest = cache_.read_ref(d->id, "projection", p.space);
    std::string hash;
    if (latest) {
        hash = *latest;
    } else {
        const std::string input = p.space == kGraphSpace ? metrics_hash(d->version, MetricsParams{p.metrics_seed})
                                                         : embedding_hash(*d, p.space);
        hash = project_hash(input, p);
    }
    json hint = submit_hint(*d, "project", p.space);
    json body = json::parse(read_or_missing(cache_, {d->id, "projection", hash, "json"},
                                            "projection has not been computed", hint));
    if (!snapshots) body.erase("snapshots");
    return with_meta(std::move(body), *d, hash);
}

json Workbench::rankings(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    const Graph& g = d->graph;
    ParamReader in(query, "query");
    const std::string anchor_label = in.text("anchor", "");
    const std::string space = in.text("space", std::string(kGraphSpace));
    const Measure measure = parse_measure(in.text("measure", "euclidean"));
    const std::size_t k = in.integer("k", kDefaultRankingLength);
    const GraphOrder order = GraphOrder::parse(in.text("order_by", "shared_friends"));
    const MetricsParams mp{in.integer("metrics_seed", 1)};
    std::vector<std::string> compare = in.text_list("compare");
    in.finish();
    if (anchor_label.empty()) throw InvalidArgument("anchor is required");
    const auto anchor = g.index_of(anchor_label);
    if (!anchor) throw NotFound("unknown anchor label: " + anchor_label);

    const auto metrics = load_metrics(*d, mp);
    if (compare.empty()) compare = cache_.refs(d->id, "embedding");
    if (space != kGraphSpace && std::find(compare.begin(), compare.end(), space) == compare.end()) {
        compare.push_back(space);
    }
    std::string key = "rankings;metrics=" + metrics_hash(d->version, mp) + ";anchor=" + anchor_label +
                      ";space=" + space + ";measure=" + measure_name(measure) + ";k=" + std::to_string(k) +
                      ";order=" + order.name();
    std::vector<std::shared_ptr<const EmbeddingMatrix>> held;
    std::vector<const EmbeddingMatrix*> embeddings;
    for (const auto& s : compare) {
        held.push_back(load_embedding(*d, s));
        embeddings.push_back(held.back().get());
        key += ";" + s + "=" + held.back()->config_hash;
    }
    json body = ranking_view(g, *metrics, *anchor, space, measure, k, order, embeddings);
    return with_meta(std::move(body), *d, hash_text(key));
}

json Workbench::graph(const std::string& dataset, const json& query) {
    const auto d = datasets_.load(dataset);
    const Graph& g = d->graph;
    ParamReader in(query, "query");
    const MetricsParams mp{in.integer("metrics_seed", 1)};
    in.finish();
    std::shared_ptr<const LoadedMetrics> metrics;
    try {
        metrics = load_metrics(*d, mp);
    } catch (const MissingPrerequisite&) {
    }
    json nodes = json::array();
    for (NodeId u = 0; u < g.node_count(); ++u) {
        nodes.push_back({{"node", u},
                         {"label", g.label(u)},
                         {"degree", g.degree(u)},
                         {"community", metrics ? json(metrics->community_of[u]) : json(nullptr)}});
    }
    json edges = json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    json body = {{"source", d->source},
                 {"raw_nodes", d->raw_nodes},
                 {"raw_edges", d->raw_edges},
                 {"nodes", std::move(nodes)},
                 {"edges", std::move(edges)}};
    return with_meta(std::move(body), *d, d->version);
}

json Workbench::stats() const {
    json computations = json::object();
    for (const char* kind : {"metrics", "embedding", "projection", "regression", "structure"}) {
        computations[kind] = cache_.computations(kind);
    }
    std::lock_guard lock(mutex_);
    return {{"workers", workers_.size()},
            {"jobs", order_.size()},
            {"queued", queue_.size()},
            {"cache", {{"hits", cache_.hits()}, {"misses", cache_.misses()}, {"computations", computations}}}};
}

namespace {

json infer(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos && v.size() < 20) {
        return static_cast<std::uint64_t>(std::stoull(v));
    }
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (!v.empty() && end == v.c_str() + v.size()) return x;
    return v;
}

} // namespace

json typed_query(const std::multimap<std::string, std::string>& params, const std::vector<std::string>& text_keys,
                 const std::vector<std::string>& list_keys) {
    json out = json::object();
    for (const auto& [key, value] : params) {
        if (std::find(list_keys.begin(), list_keys.end(), key) != list_keys.end()) {
            if (!out.contains(key)) out[key] = json::array();
            std::size_t start = 0;
            while (start <= value.size()) {
                const auto comma = value.find(',', start);
                const std::string item = value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                if (!item.empty()) out[key].push_back(item);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else if (out.contains(key)) {
            throw InvalidArgument("query parameter given twice: " + key);
        } else if (std::find(text_keys.begin(), text_keys.end(), key) != text_keys.end()) {
            out[key] = value;
        } else {
            out[key] = infer(value);
        }
    }
    return out;
}

} // namespace embcmp::workbench
