#pragma once

#include "embcmp/embedding.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/regression.hpp"
#include "embcmp/tsne.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace embcmp::workbench {

using json = nlohmann::json;

/// Reads typed fields from a JSON object and rejects keys nobody asked for.
/// Type errors and leftovers raise InvalidArgument naming the offending key.
class ParamReader {
public:
    ParamReader(const json& object, std::string context);

    bool has(const std::string& key) const;
    double real(const std::string& key, double fallback);
    std::uint64_t integer(const std::string& key, std::uint64_t fallback);
    std::string text(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);
    std::optional<double> optional_real(const std::string& key);
    std::optional<std::uint64_t> optional_integer(const std::string& key);
    std::vector<std::string> text_list(const std::string& key);
    /// Nested object, empty when absent.
    json object(const std::string& key);
    /// Any value, null when absent.
    json raw(const std::string& key);

    /// Throws when any key was never read.
    void finish() const;

private:
    const json* find(const std::string& key);
    std::string where(const std::string& key) const;

    json object_;
    std::string context_;
    std::set<std::string> seen_;
};

/// 16 hex digits of FNV-1a over `text`.
std::string hash_text(std::string_view text);

/// Canonical `%.17g` rendering used inside hashed keys.
std::string canonical_real(double x);

// Embedding requests. `params` holds the walk settings, p/q and struc2vec
// settings; the model name is separate.
EmbedRequest embed_request_from_json(const std::string& model, const json& params);
json embed_request_to_json(const EmbedRequest& request);

SyntheticSpec synthetic_from_json(const json& spec);
json synthetic_to_json(const SyntheticSpec& spec);

struct MetricsParams {
    /// Community detection seed.
    std::uint64_t seed = 1;
};
MetricsParams metrics_params_from_json(const json& params);
std::string metrics_hash(const std::string& graph_version, const MetricsParams& p);

/// Graph space ("graph") or an embedding space id.
inline constexpr std::string_view kGraphSpace = "graph";

struct ProjectParams {
    std::string space{kGraphSpace};
    TsneConfig tsne;
    /// Seed of the metrics artifact read for the graph space.
    std::uint64_t metrics_seed = 1;
};
ProjectParams project_params_from_json(const json& params);
/// `input_hash` is the metrics or embedding hash the projection reads.
std::string project_hash(const std::string& input_hash, const ProjectParams& p);

struct RegressParams {
    /// Embedding space ids; empty = every computed space of the dataset.
    std::vector<std::string> models;
    RegressionOptions options;
    std::optional<std::size_t> max_pairs = kDefaultPairCap;
    std::uint64_t metrics_seed = 1;
};
RegressParams regress_params_from_json(const json& params);
std::string regress_hash(const std::string& metrics_hash, const std::vector<std::string>& embedding_hashes,
                         const RegressParams& p);

struct StructureParams {
    std::string model;
    std::size_t k = 3;
    std::uint64_t seed = 1;
};
StructureParams structure_params_from_json(const json& params);
std::string structure_hash(const std::string& embedding_hash, const StructureParams& p);

} // namespace embcmp::workbench
