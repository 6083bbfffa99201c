#include "embcmp/workbench/datasets.hpp"

#include "embcmp/diagnostics.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/workbench/params.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace embcmp::workbench {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

char hex_digit(unsigned v) { return "0123456789abcdef"[v & 0xf]; }

std::string hex64(std::uint64_t x) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, x >>= 4) s[static_cast<std::size_t>(i)] = hex_digit(static_cast<unsigned>(x));
    return s;
}

} // namespace

bool valid_dataset_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id.front() == '.') return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

Dataset make_dataset(std::string id, std::string source, const Graph& raw) {
    if (raw.empty()) throw DataError("dataset " + id + " has no nodes");
    Dataset d;
    d.id = std::move(id);
    d.source = std::move(source);
    d.raw_nodes = raw.node_count();
    d.raw_edges = raw.edge_count();
    if (raw.is_connected()) {
        d.graph = raw;
    } else {
        d.graph = largest_component(raw).graph;
        warn("dataset " + d.id + ": analysing the largest component (" + std::to_string(d.graph.node_count()) +
             " of " + std::to_string(raw.node_count()) + " nodes)");
    }
    d.version = hex64(d.graph.fingerprint());
    return d;
}

Dataset load_dataset_file(const fs::path& path, std::string id) {
    if (id.empty()) id = path.stem().string();
    if (!fs::is_regular_file(path)) throw NotFound("dataset file not found: " + path.string());
    if (path.extension() == ".json") {
        json spec;
        try {
            spec = json::parse(read_file(path));
        } catch (const json::parse_error& e) {
            throw DataError(path.string() + ": " + e.what());
        }
        return make_dataset(std::move(id), "synthetic", generate(synthetic_from_json(spec)));
    }
    EdgeStats stats;
    Graph g = load_edge_list(path.string(), {}, &stats);
    return make_dataset(std::move(id), "edge_list", g);
}

DatasetStore::DatasetStore(fs::path root) : dir_(std::move(root) / "datasets") {
    fs::create_directories(dir_);
}

fs::path DatasetStore::file_for(const std::string& id) const {
    for (const char* ext : {".edges", ".txt", ".json"}) {
        fs::path p = dir_ / (id + ext);
        if (fs::is_regular_file(p)) return p;
    }
    return {};
}

bool DatasetStore::contains(const std::string& id) const {
    return valid_dataset_id(id) && !file_for(id).empty();
}

std::shared_ptr<const Dataset> DatasetStore::load(const std::string& id) {
    if (!valid_dataset_id(id)) throw NotFound("unknown dataset: " + id);
    {
        std::lock_guard lock(mutex_);
        if (auto it = loaded_.find(id); it != loaded_.end()) return it->second;
    }
    const fs::path file = file_for(id);
    if (file.empty()) throw NotFound("unknown dataset: " + id);
    auto d = std::make_shared<const Dataset>(load_dataset_file(file, id));
    std::lock_guard lock(mutex_);
    return loaded_.emplace(id, std::move(d)).first->second;
}

std::vector<DatasetInfo> DatasetStore::list() {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext != ".edges" && ext != ".txt" && ext != ".json") continue;
        const std::string id = entry.path().stem().string();
        if (valid_dataset_id(id) && file_for(id) == entry.path()) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    std::vector<DatasetInfo> out;
    for (const auto& id : ids) {
        try {
            const auto d = load(id);
            out.push_back({d->id, d->raw_nodes, d->raw_edges, d->source});
        } catch (const std::exception& e) {
            warn("skipping dataset " + id + ": " + e.what());
        }
    }
    return out;
}

DatasetInfo DatasetStore::add_file(const std::string& id, const std::string& filename, const std::string& content) {
    if (!valid_dataset_id(id)) throw InvalidArgument("invalid dataset id: " + id);
    std::lock_guard lock(mutex_);
    if (!file_for(id).empty()) throw Conflict("dataset already exists: " + id);
    const fs::path target = dir_ / filename;
    const fs::path tmp = dir_ / (".partial-" + filename);
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) throw DataError("cannot write " + tmp.string());
    }
    std::shared_ptr<const Dataset> d;
    try {
        d = std::make_shared<const Dataset>(load_dataset_file(tmp, id));
    } catch (...) {
        fs::remove(tmp);
        throw;
    }
    fs::rename(tmp, target);
    loaded_[id] = d;
    return {d->id, d->raw_nodes, d->raw_edges, d->source};
}

DatasetInfo DatasetStore::add_synthetic(const std::string& id, const std::string& spec_json) {
    json spec;
    try {
        spec = json::parse(spec_json);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(std::string("spec: ") + e.what());
    }
    // normalise and validate before anything touches disk
    return add_file(id, id + ".json", synthetic_to_json(synthetic_from_json(spec)).dump(2) + "\n");
}

DatasetInfo DatasetStore::add_edge_list(const std::string& id, const std::string& edge_list) {
    return add_file(id, id + ".edges", edge_list);
}

} // namespace embcmp::workbench
