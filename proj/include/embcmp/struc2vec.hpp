#pragma once

#include "embcmp/alias.hpp"
#include "embcmp/graph.hpp"
#include "embcmp/walks.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace embcmp {

struct Struc2vecConfig {
    /// Number of hierarchy levels (rings 0..layers-1). Truncated to
    /// diameter + 1 with a warning.
    std::size_t layers = 4;
    /// Probability of an intra-layer step; otherwise the walk changes layer.
    double stay_probability = 0.3;
    /// Comparison partners per node in sorted-degree order; 0 = 2*ceil(log2 n).
    std::size_t candidates = 0;

    void validate() const;
};

/// Sorted degree sequences of the BFS rings at hop distance 0..max_depth-1.
/// Ring 0 is the node itself. Stops early when a ring is empty.
std::vector<std::vector<std::uint32_t>> ring_degree_sequences(const Graph& g, NodeId u,
                                                              std::size_t max_depth);

/// Dynamic time warping between two degree sequences with element cost
/// max(a,b)/min(a,b) - 1.
double dtw_degree_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Unordered pairs (u < v) compared by struc2vec: every node against the
/// first per_node nodes met walking outward through degree buckets, starting
/// with its own degree (bucket members in index order).
std::vector<std::pair<NodeId, NodeId>> struc2vec_candidate_pairs(const Graph& g,
                                                                  std::size_t per_node);

/// Cumulative structural distances f_0..f_K for one pair. The vector stops
/// at the first layer where either ring is empty.
std::vector<double> structural_distance(const std::vector<std::vector<std::uint32_t>>& rings_u,
                                        const std::vector<std::vector<std::uint32_t>>& rings_v,
                                        std::size_t layers);

/// Multilayer context graph: per layer a weighted graph over node pairs
/// with weight exp(-f_k), and per node the probability of moving up.
class StructuralLayers {
public:
    struct Link {
        NodeId node;
        double weight;
    };

    std::size_t layer_count() const noexcept { return links_.size(); }
    std::size_t node_count() const noexcept { return node_count_; }

    std::span<const Link> links(std::size_t layer, NodeId u) const { return links_[layer][u]; }
    double average_weight(std::size_t layer) const { return average_weight_[layer]; }
    /// log(Gamma_k(u) + e), Gamma = count of u's links heavier than the
    /// layer average. The downward weight is 1.
    double up_weight(std::size_t layer, NodeId u) const { return up_weight_[layer][u]; }
    double up_probability(std::size_t layer, NodeId u) const;

    /// f_k(u,v) for a candidate pair, or empty when the pair was not compared.
    std::vector<double> distances(NodeId u, NodeId v) const;

    NodeId sample_neighbor(std::size_t layer, NodeId u, Rng& rng) const;

private:
    friend StructuralLayers build_struc2vec_layers(const Graph&, const Struc2vecConfig&);

    std::size_t node_count_ = 0;
    std::vector<std::vector<std::vector<Link>>> links_;
    std::vector<std::vector<AliasTable>> samplers_;
    std::vector<double> average_weight_;
    std::vector<std::vector<double>> up_weight_;
    std::map<std::pair<NodeId, NodeId>, std::vector<double>> distances_;
};

StructuralLayers build_struc2vec_layers(const Graph& g, const Struc2vecConfig& cfg);

/// Walks over the multilayer graph, starting at layer 0. Only intra-layer
/// steps emit nodes.
WalkCorpus walks_struc2vec(const StructuralLayers& layers, const WalkConfig& cfg,
                           const Struc2vecConfig& s2v);

} // namespace embcmp
