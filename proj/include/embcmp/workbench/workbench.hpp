#pragma once

#include "embcmp/workbench/artifacts.hpp"
#include "embcmp/workbench/cache.hpp"
#include "embcmp/workbench/datasets.hpp"
#include "embcmp/workbench/params.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace embcmp::workbench {

struct JobRecord {
    std::string job_id;
    /// metrics, embed, project, regress, structure
    std::string kind;
    std::string dataset;
    /// Model for embed jobs, space id for the others ("" when not applicable).
    std::string model;
    /// queued, running, done, failed
    std::string status = "queued";
    double progress = 0.0;
    std::string config_hash;
    std::optional<std::string> error_message;

    bool finished() const { return status == "done" || status == "failed"; }
    json to_json() const;
};

struct StreamEvent {
    /// 1-based position in the job's stream
    std::size_t id = 0;
    /// snapshot, done or error
    std::string event;
    std::string data;
};

struct StreamChunk {
    std::vector<StreamEvent> events;
    bool finished = false;
};

std::size_t default_worker_count();

struct WorkbenchOptions {
    std::filesystem::path data_dir = "data";
    std::size_t workers = default_worker_count();
};

/// Job orchestration over a dataset store and artifact cache. Requests are
/// validated on the caller's thread; computation runs on a bounded worker
/// pool. Identical requests (same kind and config hash) share one job while
/// it is queued, running or done.
class Workbench {
public:
    explicit Workbench(WorkbenchOptions options);
    ~Workbench();
    Workbench(const Workbench&) = delete;
    Workbench& operator=(const Workbench&) = delete;

    DatasetStore& datasets() { return datasets_; }
    ArtifactCache& cache() { return cache_; }
    std::size_t worker_count() const { return workers_.size(); }

    /// {dataset, kind, model?, params?}. Throws InvalidArgument, NotFound or
    /// MissingPrerequisite. `created` reports whether a new job was queued.
    JobRecord submit(const json& request, bool* created = nullptr);
    JobRecord job(const std::string& job_id) const;
    std::vector<JobRecord> jobs() const;
    /// Queued jobs fail at once; running ones stop at the next checkpoint.
    JobRecord cancel(const std::string& job_id);
    JobRecord wait(const std::string& job_id,
                   std::chrono::milliseconds timeout = std::chrono::hours(1)) const;

    /// Projection events after `last_id`, waiting up to `timeout` for news.
    StreamChunk projection_events(const std::string& job_id, std::size_t last_id,
                                  std::chrono::milliseconds timeout);

    // Result views. `query` holds typed parameters; each response carries
    // dataset, version and config_hash.
    json metrics(const std::string& dataset, const json& query);
    json regression(const std::string& dataset, const json& query);
    json structure(const std::string& dataset, const json& query);
    json projection(const std::string& dataset, const json& query);
    json rankings(const std::string& dataset, const json& query);
    json graph(const std::string& dataset, const json& query);
    json stats() const;

private:
    struct Job;
    struct Plan;

    Plan plan(const std::string& kind, const Dataset& d, const std::string& model, const json& params);
    std::string embedding_hash(const Dataset& d, const std::string& space) const;
    std::shared_ptr<const LoadedMetrics> load_metrics(const Dataset& d, const MetricsParams& p);
    std::shared_ptr<const EmbeddingMatrix> load_embedding(const Dataset& d, const std::string& space);
    void worker_loop();
    void run(const std::shared_ptr<Job>& job);
    void finish(Job& job, const std::string& status, std::optional<std::string> error);
    void push_event(Job& job, std::string event, std::string data);
    std::shared_ptr<Job> find(const std::string& job_id) const;

    DatasetStore datasets_;
    ArtifactCache cache_;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::condition_variable queue_ready_;
    std::deque<std::shared_ptr<Job>> queue_;
    std::map<std::string, std::shared_ptr<Job>> jobs_;
    /// kind:config_hash -> latest job id
    std::map<std::string, std::string> by_hash_;
    std::vector<std::string> order_;
    bool stopping_ = false;

    std::mutex memo_mutex_;
    std::map<std::string, std::shared_ptr<const LoadedMetrics>> metrics_memo_;
    std::map<std::string, std::shared_ptr<const EmbeddingMatrix>> embedding_memo_;

    std::vector<std::thread> workers_;
};

/// Converts HTTP query strings to typed JSON: integers, reals and booleans
/// are recognised except for keys in `text_keys`; comma lists become arrays
/// for keys in `list_keys`.
json typed_query(const std::multimap<std::string, std::string>& params,
                 const std::vector<std::string>& text_keys, const std::vector<std::string>& list_keys = {});

} // namespace embcmp::workbench
