#include "embcmp/walks.hpp"

#include "embcmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace embcmp {

void WalkConfig::validate() const {
    if (walks_per_node == 0 || walk_length == 0 || window == 0 || dimension == 0 || epochs == 0 ||
        negatives == 0 || workers == 0) {
        throw InvalidArgument("walk config: all counts must be positive");
    }
    if (!(initial_learning_rate > 0.0) || !std::isfinite(initial_learning_rate)) {
        throw InvalidArgument("walk config: learning rate must be positive");
    }
}

void Node2vecParams::validate() const {
    if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw InvalidArgument("node2vec: p and q must be positive and finite");
    }
}

void WalkCorpus::add(std::span<const NodeId> walk) {
    tokens_.insert(tokens_.end(), walk.begin(), walk.end());
    offsets_.push_back(tokens_.size());
}

std::vector<NodeId> walk_start_order(std::size_t node_count, std::uint64_t seed, std::size_t round) {
    std::vector<NodeId> order(node_count);
    std::iota(order.begin(), order.end(), NodeId{0});
    Rng rng(derive_seed(seed, 0x5eedULL, round));
    shuffle(order.begin(), order.end(), rng);
    return order;
}

namespace {

Rng walk_rng(std::uint64_t seed, std::size_t round, NodeId start) {
    return Rng(derive_seed(seed, round + 1, start));
}

} // namespace

WalkCorpus walks_uniform(const Graph& g, const WalkConfig& cfg) {
    cfg.validate();
    WalkCorpus corpus;
    std::vector<NodeId> walk;
    walk.reserve(cfg.walk_length);
    for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
        for (NodeId start : walk_start_order(g.node_count(), cfg.seed, round)) {
            Rng rng = walk_rng(cfg.seed, round, start);
            walk.assign(1, start);
            while (walk.size() < cfg.walk_length) {
                const auto nbrs = g.neighbors(walk.back());
                if (nbrs.empty()) {
                    break;
                }
                walk.push_back(nbrs[uniform_index(rng, nbrs.size())]);
            }
            corpus.add(walk);
        }
    }
    return corpus;
}

Node2vecSampler::Node2vecSampler(const Graph& g, Node2vecParams params)
    : graph_(&g), params_(params) {
    params_.validate();
    base_.resize(g.node_count() + 1, 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        base_[v + 1] = base_[v] + g.degree(v);
    }
    tables_.resize(base_.back());
    std::vector<double> weights;
    for (NodeId current = 0; current < g.node_count(); ++current) {
        const auto nbrs = g.neighbors(current);
        for (std::size_t slot = 0; slot < nbrs.size(); ++slot) {
            const NodeId previous = nbrs[slot];
            weights.clear();
            for (NodeId next : nbrs) {
                weights.push_back(bias(previous, current, next));
            }
            tables_[base_[current] + slot] = AliasTable(weights);
        }
    }
}

double Node2vecSampler::bias(NodeId previous, NodeId current, NodeId next) const {
    (void)current;
    if (next == previous) {
        return 1.0 / params_.p;
    }
    if (graph_->has_edge(previous, next)) {
        return 1.0;
    }
    return 1.0 / params_.q;
}

std::vector<double> Node2vecSampler::transition_probabilities(NodeId previous, NodeId current) const {
    const auto nbrs = graph_->neighbors(current);
    std::vector<double> probs;
    double total = 0.0;
    for (NodeId next : nbrs) {
        probs.push_back(bias(previous, current, next));
        total += probs.back();
    }
    for (auto& p : probs) {
        p /= total;
    }
    return probs;
}

NodeId Node2vecSampler::sample_next(NodeId previous, NodeId current, Rng& rng) const {
    const auto nbrs = graph_->neighbors(current);
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), previous);
    if (it == nbrs.end() || *it != previous) {
        throw InvalidArgument("node2vec: previous node is not adjacent to current node");
    }
    const auto slot = static_cast<std::size_t>(it - nbrs.begin());
    return nbrs[tables_[base_[current] + slot].sample(rng)];
}

WalkCorpus walks_node2vec(const Graph& g, const WalkConfig& cfg, Node2vecParams params) {
    cfg.validate();
    const Node2vecSampler sampler(g, params);
    WalkCorpus corpus;
    std::vector<NodeId> walk;
    walk.reserve(cfg.walk_length);
    for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
        for (NodeId start : walk_start_order(g.node_count(), cfg.seed, round)) {
            Rng rng = walk_rng(cfg.seed, round, start);
            walk.assign(1, start);
            while (walk.size() < cfg.walk_length) {
                const NodeId cur = walk.back();
                const auto nbrs = g.neighbors(cur);
                if (nbrs.empty()) {
                    break;
                }
                if (walk.size() == 1) {
                    walk.push_back(nbrs[uniform_index(rng, nbrs.size())]);
                } else {
                    walk.push_back(sampler.sample_next(walk[walk.size() - 2], cur, rng));
                }
            }
            corpus.add(walk);
        }
    }
    return corpus;
}

} // namespace embcmp
