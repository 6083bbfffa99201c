#pragma once

#include "embcmp/embedding.hpp"
#include "embcmp/graph.hpp"
#include "embcmp/matrix.hpp"
#include "embcmp/metrics.hpp"

#include <span>
#include <string>
#include <vector>

namespace embcmp {

enum class Measure { cosine, euclidean, graph };

Measure parse_measure(const std::string& name);
std::string measure_name(Measure m);

struct RankingEntry {
    NodeId node;
    double score;
    friend bool operator==(const RankingEntry&, const RankingEntry&) = default;
};

struct RankingList {
    NodeId anchor = 0;
    std::string space_id;
    Measure measure = Measure::graph;
    std::size_t k = 0;
    std::vector<RankingEntry> entries;

    std::vector<NodeId> nodes() const;
    bool contains(NodeId v) const;
    /// |score[i+1] - score[i]| for adjacent entries.
    std::vector<double> deltas() const;
};

/// Graph-space ordering: neighbours by shared friends, or every other node
/// by normalized distance on one metric.
struct GraphOrder {
    enum class Kind { shared_friends, metric_distance } kind = Kind::shared_friends;
    Metric metric = Metric::degree;

    /// "shared_friends" or a metric key/name ("degree", "within_module_degree", ...).
    static GraphOrder parse(const std::string& text);
    std::string name() const;
};

inline constexpr std::size_t kDefaultRankingLength = 50;

/// `normalized` is the N x 11 output of normalize_metrics; only read in
/// metric_distance mode.
RankingList rank_graph_space(const Graph& g, const Matrix& normalized, NodeId anchor,
                             const GraphOrder& order, std::size_t k = kDefaultRankingLength);

/// Every other node by cosine similarity (descending) or Euclidean distance
/// (ascending); equal scores fall back to node index.
RankingList rank_embedding_space(const EmbeddingMatrix& e, NodeId anchor, Measure measure,
                                 std::size_t k = kDefaultRankingLength);

/// Grade of an ideal-list member = |REL| - position, |REL| = min(k, ideal size);
/// both DCG and IDCG use (2^rel - 1) / log2(i + 1). 0 when IDCG is 0.
double ndcg(std::span<const NodeId> presented, std::span<const NodeId> ideal, std::size_t k);
double ndcg(const RankingList& presented, const RankingList& ideal, std::size_t k);

/// Number of lists that contain `node`.
std::size_t cross_space_presence(std::span<const RankingList> lists, NodeId node);

/// Ranking query result: anchor, space, measure, k, ndcg and per-entry
/// label, score, shared friends, presence and normalized metric bars.
std::string ranking_json(const Graph& g, const Matrix& normalized, const RankingList& list,
                         double ndcg_value, std::span<const RankingList> embedding_lists);

} // namespace embcmp
