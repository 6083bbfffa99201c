#pragma once

#include "embcmp/error.hpp"
#include "embcmp/graph.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace embcmp::workbench {

struct NotFound : DataError {
    using DataError::DataError;
};

/// Request conflicts with existing state (duplicate id, finished job).
struct Conflict : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An artifact the request depends on has not been computed.
struct MissingPrerequisite : std::runtime_error {
    MissingPrerequisite(const std::string& what, std::string hint)
        : std::runtime_error(what), hint(std::move(hint)) {}
    std::string hint;
};

/// A loaded graph reduced to its largest connected component.
struct Dataset {
    std::string id;
    /// "edge_list" or "synthetic"
    std::string source;
    std::size_t raw_nodes = 0;
    std::size_t raw_edges = 0;
    Graph graph;
    /// Hex fingerprint of `graph`; changes whenever the analysed graph does.
    std::string version;
};

/// `.json` files hold a synthetic spec, anything else is an edge list.
Dataset load_dataset_file(const std::filesystem::path& path, std::string id = {});
Dataset make_dataset(std::string id, std::string source, const Graph& raw);

bool valid_dataset_id(const std::string& id);

struct DatasetInfo {
    std::string id;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::string source;
};

/// Datasets under `<root>/datasets`: `<id>.edges` or `<id>.txt` edge lists and
/// `<id>.json` synthetic specs. Loaded graphs are kept in memory.
class DatasetStore {
public:
    explicit DatasetStore(std::filesystem::path root);

    std::vector<DatasetInfo> list();
    std::shared_ptr<const Dataset> load(const std::string& id);
    bool contains(const std::string& id) const;

    /// Persists a new dataset; throws Conflict when the id is taken.
    DatasetInfo add_synthetic(const std::string& id, const std::string& spec_json);
    DatasetInfo add_edge_list(const std::string& id, const std::string& edge_list);

private:
    std::filesystem::path file_for(const std::string& id) const;
    DatasetInfo add_file(const std::string& id, const std::string& filename, const std::string& content);

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const Dataset>> loaded_;
};

} // namespace embcmp::workbench
