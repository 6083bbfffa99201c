#include "embcmp/workbench/cache.hpp"

#include "embcmp/error.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace fs = std::filesystem;

namespace embcmp::workbench {

ArtifactCache::ArtifactCache(fs::path root) : root_(std::move(root) / "cache") {
    fs::create_directories(root_);
}

fs::path ArtifactCache::path(const ArtifactKey& key) const {
    return root_ / key.dataset / key.kind / (key.config_hash + "." + key.extension);
}

bool ArtifactCache::contains(const ArtifactKey& key) const { return fs::is_regular_file(path(key)); }

std::optional<std::string> ArtifactCache::read(const ArtifactKey& key) const {
    std::ifstream in(path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void ArtifactCache::atomic_write(const fs::path& target, std::string_view bytes) {
    static std::atomic<std::uint64_t> counter{0};
    fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / ("." + target.filename().string() + "." + std::to_string(::getpid()) +
                                                 "." + std::to_string(counter++) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp);
            throw DataError("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

void ArtifactCache::write(const ArtifactKey& key, std::string_view bytes) {
    const auto lock = key_lock(path(key).string());
    std::lock_guard guard(*lock);
    atomic_write(path(key), bytes);
}

std::shared_ptr<std::mutex> ArtifactCache::key_lock(const std::string& key) {
    std::lock_guard lock(mutex_);
    auto& slot = locks_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

std::string ArtifactCache::get_or_compute(const ArtifactKey& key, const std::function<std::string()>& compute) {
    const fs::path p = path(key);
    const auto lock = key_lock(p.string());
    std::lock_guard guard(*lock);
    if (auto bytes = read(key)) {
        ++hits_;
        return *bytes;
    }
    ++misses_;
    {
        std::lock_guard count(mutex_);
        ++computations_[key.kind];
    }
    std::string bytes = compute();
    atomic_write(p, bytes);
    return bytes;
}

void ArtifactCache::write_ref(const std::string& dataset, const std::string& kind, const std::string& name,
                              const std::string& hash) {
    const fs::path p = root_ / dataset / kind / (name + ".ref");
    const auto lock = key_lock(p.string());
    std::lock_guard guard(*lock);
    atomic_write(p, hash + "\n");
}

std::optional<std::string> ArtifactCache::read_ref(const std::string& dataset, const std::string& kind,
                                                   const std::string& name) const {
    std::ifstream in(root_ / dataset / kind / (name + ".ref"));
    std::string hash;
    if (!(in >> hash)) return std::nullopt;
    return hash;
}

std::vector<std::string> ArtifactCache::refs(const std::string& dataset, const std::string& kind) const {
    std::vector<std::string> out;
    const fs::path dir = root_ / dataset / kind;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".ref") out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t ArtifactCache::computations(const std::string& kind) const {
    std::lock_guard lock(mutex_);
    const auto it = computations_.find(kind);
    return it == computations_.end() ? 0 : it->second;
}

} // namespace embcmp::workbench
