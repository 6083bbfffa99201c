#pragma once

#include "embcmp/alias.hpp"
#include "embcmp/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace embcmp {

/// Shared walk and skip-gram settings. Defaults follow the usual DeepWalk /
/// node2vec setup: 10 walks of 80 nodes per start node, window 10, 128
/// dimensions. Epochs, negatives and learning rate follow word2vec.
struct WalkConfig {
    std::size_t walks_per_node = 10;
    std::size_t walk_length = 80;
    std::size_t window = 10;
    std::size_t dimension = 128;
    std::size_t epochs = 5;
    std::size_t negatives = 5;
    double initial_learning_rate = 0.025;
    std::uint64_t seed = 1;
    /// 1 = deterministic single-worker training; >1 = lock-free updates.
    std::size_t workers = 1;

    void validate() const;
};

struct Node2vecParams {
    double p = 1.0;
    double q = 1.0;

    void validate() const;
};

/// Flat storage for variable-length walks.
class WalkCorpus {
public:
    void add(std::span<const NodeId> walk);
    std::size_t size() const noexcept { return offsets_.size() - 1; }
    bool empty() const noexcept { return size() == 0; }
    std::span<const NodeId> walk(std::size_t i) const {
        return {tokens_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t token_count() const noexcept { return tokens_.size(); }
    const std::vector<NodeId>& tokens() const noexcept { return tokens_; }

    friend bool operator==(const WalkCorpus&, const WalkCorpus&) = default;

private:
    std::vector<NodeId> tokens_;
    std::vector<std::size_t> offsets_{0};
};

/// Start-node order for round `round`: a seeded shuffle of all nodes.
std::vector<NodeId> walk_start_order(std::size_t node_count, std::uint64_t seed, std::size_t round);

/// First-order walks; the next node is uniform over the current node's
/// neighbours. `walks_per_node` rounds, each over all start nodes in a
/// shuffled order. Each (round, start) walk uses its own seeded stream.
WalkCorpus walks_uniform(const Graph& g, const WalkConfig& cfg);

/// Precomputed second-order transition tables, one per directed edge
/// (previous -> current).
class Node2vecSampler {
public:
    Node2vecSampler(const Graph& g, Node2vecParams params);

    /// Unnormalised bias of moving to neighbour `next` of `current` having
    /// arrived from `previous`: 1/p for a return, 1 when `next` neighbours
    /// `previous`, 1/q otherwise.
    double bias(NodeId previous, NodeId current, NodeId next) const;

    /// Normalised probabilities over `g.neighbors(current)`.
    std::vector<double> transition_probabilities(NodeId previous, NodeId current) const;

    NodeId sample_next(NodeId previous, NodeId current, Rng& rng) const;

    const Graph& graph() const noexcept { return *graph_; }

private:
    const Graph* graph_;
    Node2vecParams params_;
    // table index for (current, slot of previous in adjacency(current))
    std::vector<std::size_t> base_;
    std::vector<AliasTable> tables_;
};

WalkCorpus walks_node2vec(const Graph& g, const WalkConfig& cfg, Node2vecParams params);

} // namespace embcmp
