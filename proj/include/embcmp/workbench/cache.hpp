#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace embcmp::workbench {

struct ArtifactKey {
    std::string dataset;
    /// metrics, communities, embedding, projection, regression, table, structure
    std::string kind;
    std::string config_hash;
    std::string extension;
};

/// Files under `<root>/cache/<dataset>/<kind>/<hash>.<ext>`. Writes go to a
/// temporary file that is renamed into place, so readers never see a partial
/// artifact. One writer per key at a time.
class ArtifactCache {
public:
    explicit ArtifactCache(std::filesystem::path root);

    std::filesystem::path path(const ArtifactKey& key) const;
    bool contains(const ArtifactKey& key) const;
    std::optional<std::string> read(const ArtifactKey& key) const;
    void write(const ArtifactKey& key, std::string_view bytes);

    /// Cached bytes, or the result of `compute` stored under `key`. Concurrent
    /// callers on one key run `compute` once.
    std::string get_or_compute(const ArtifactKey& key, const std::function<std::string()>& compute);

    // Named references (e.g. embedding space id -> config hash).
    void write_ref(const std::string& dataset, const std::string& kind, const std::string& name,
                   const std::string& hash);
    std::optional<std::string> read_ref(const std::string& dataset, const std::string& kind,
                                        const std::string& name) const;
    /// Names with a reference, sorted.
    std::vector<std::string> refs(const std::string& dataset, const std::string& kind) const;

    /// Times `compute` ran for `kind` in this process.
    std::size_t computations(const std::string& kind) const;
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    std::shared_ptr<std::mutex> key_lock(const std::string& key);
    static void atomic_write(const std::filesystem::path& target, std::string_view bytes);

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
    std::map<std::string, std::size_t> computations_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

} // namespace embcmp::workbench
