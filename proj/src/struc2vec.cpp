#include "embcmp/struc2vec.hpp"

#include "embcmp/diagnostics.hpp"
#include "embcmp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace embcmp {

void Struc2vecConfig::validate() const {
    if (layers < 1) {
        throw InvalidArgument("struc2vec: layers must be >= 1");
    }
    if (!(stay_probability > 0.0 && stay_probability <= 1.0)) {
        throw InvalidArgument("struc2vec: stay_probability must be in (0, 1]");
    }
}

std::vector<std::vector<std::uint32_t>> ring_degree_sequences(const Graph& g, NodeId u,
                                                              std::size_t max_depth) {
    std::vector<std::vector<std::uint32_t>> rings;
    std::vector<NodeId> frontier{u};
    std::vector<char> seen(g.node_count(), 0);
    seen[u] = 1;
    std::vector<NodeId> next;
    while (!frontier.empty() && rings.size() < max_depth) {
        std::vector<std::uint32_t> degrees;
        degrees.reserve(frontier.size());
        next.clear();
        for (NodeId v : frontier) {
            degrees.push_back(static_cast<std::uint32_t>(g.degree(v)));
            for (NodeId w : g.neighbors(v)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    next.push_back(w);
                }
            }
        }
        std::sort(degrees.begin(), degrees.end());
        rings.push_back(std::move(degrees));
        frontier.swap(next);
    }
    return rings;
}

double dtw_degree_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("dtw: empty sequence");
    }
    auto cost = [](std::uint32_t x, std::uint32_t y) {
        const double hi = std::max(x, y);
        const double lo = std::min(x, y);
        // degree-0 only occurs for an isolated node compared with itself
        return lo == 0.0 ? (hi == 0.0 ? 0.0 : hi) : hi / lo - 1.0;
    };
    const std::size_t m = b.size();
    std::vector<double> prev(m + 1, std::numeric_limits<double>::infinity());
    std::vector<double> cur(m + 1);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j <= m; ++j) {
            const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = cost(a[i - 1], b[j - 1]) + best;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::vector<std::pair<NodeId, NodeId>> struc2vec_candidate_pairs(const Graph& g,
                                                                  std::size_t per_node) {
    // Degree buckets in index order. Each node takes the first members of its
    // own bucket, then of the bucket with the closest degree (higher degree on
    // ties), until per_node partners are found.
    const std::size_t n = g.node_count();
    std::map<std::size_t, std::vector<NodeId>> buckets;
    for (NodeId u = 0; u < n; ++u) buckets[g.degree(u)].push_back(u);
    std::vector<std::size_t> degrees;
    std::vector<const std::vector<NodeId>*> members;
    for (const auto& [d, nodes] : buckets) {
        degrees.push_back(d);
        members.push_back(&nodes);
    }
    std::set<std::pair<NodeId, NodeId>> pairs;
    const std::size_t want = std::min(per_node, n == 0 ? 0 : n - 1);
    for (std::size_t b = 0; b < degrees.size(); ++b) {
        for (NodeId u : *members[b]) {
            std::size_t taken = 0;
            auto take_from = [&](std::size_t bucket) {
                for (NodeId v : *members[bucket]) {
                    if (taken == want) return;
                    if (v == u) continue;
                    pairs.insert(std::minmax(u, v));
                    ++taken;
                }
            };
            take_from(b);
            std::size_t below = b;     // next lower bucket is below - 1
            std::size_t above = b + 1; // next higher bucket is above
            while (taken < want && (below > 0 || above < degrees.size())) {
                bool use_below;
                if (below == 0) {
                    use_below = false;
                } else if (above >= degrees.size()) {
                    use_below = true;
                } else {
                    use_below = degrees[b] - degrees[below - 1] < degrees[above] - degrees[b];
                }
                take_from(use_below ? --below : above++);
            }
        }
    }
    return {pairs.begin(), pairs.end()};
}

std::vector<double> structural_distance(const std::vector<std::vector<std::uint32_t>>& rings_u,
                                        const std::vector<std::vector<std::uint32_t>>& rings_v,
                                        std::size_t layers) {
    std::vector<double> f;
    const std::size_t depth = std::min({layers, rings_u.size(), rings_v.size()});
    double acc = 0.0;
    for (std::size_t k = 0; k < depth; ++k) {
        acc += dtw_degree_distance(rings_u[k], rings_v[k]);
        f.push_back(acc);
    }
    return f;
}

double StructuralLayers::up_probability(std::size_t layer, NodeId u) const {
    const double up = up_weight_[layer][u];
    return up / (up + 1.0);
}

std::vector<double> StructuralLayers::distances(NodeId u, NodeId v) const {
    if (u == v) {
        return std::vector<double>(layer_count(), 0.0);
    }
    if (auto it = distances_.find(std::minmax(u, v)); it != distances_.end()) {
        return it->second;
    }
    return {};
}

NodeId StructuralLayers::sample_neighbor(std::size_t layer, NodeId u, Rng& rng) const {
    return links_[layer][u][samplers_[layer][u].sample(rng)].node;
}

StructuralLayers build_struc2vec_layers(const Graph& g, const Struc2vecConfig& cfg) {
    cfg.validate();
    const std::size_t n = g.node_count();
    if (!g.is_connected()) {
        throw InvalidArgument("struc2vec: graph must be connected");
    }

    std::size_t diameter = 0;
    std::vector<std::vector<std::vector<std::uint32_t>>> rings(n);
    for (NodeId u = 0; u < n; ++u) {
        rings[u] = ring_degree_sequences(g, u, cfg.layers);
    }
    // eccentricity bounded by the requested depth is enough to detect truncation
    for (NodeId u = 0; u < n; ++u) {
        diameter = std::max(diameter, rings[u].size() - 1);
    }
    std::size_t layer_count = cfg.layers;
    if (layer_count > diameter + 1) {
        warn("struc2vec: " + std::to_string(cfg.layers) + " layers exceed diameter + 1 = " +
             std::to_string(diameter + 1) + "; truncating");
        layer_count = diameter + 1;
    }

    std::size_t per_node = cfg.candidates;
    if (per_node == 0) {
        per_node = 2 * static_cast<std::size_t>(
                           std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(n)))));
    }

    StructuralLayers out;
    out.node_count_ = n;
    out.links_.assign(layer_count, std::vector<std::vector<StructuralLayers::Link>>(n));
    for (const auto& [u, v] : struc2vec_candidate_pairs(g, per_node)) {
        auto f = structural_distance(rings[u], rings[v], layer_count);
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double w = std::exp(-f[k]);
            out.links_[k][u].push_back({v, w});
            out.links_[k][v].push_back({u, w});
        }
        out.distances_.emplace(std::make_pair(u, v), std::move(f));
    }

    out.samplers_.resize(layer_count);
    out.average_weight_.assign(layer_count, 0.0);
    out.up_weight_.assign(layer_count, std::vector<double>(n, 0.0));
    std::vector<double> weights;
    for (std::size_t k = 0; k < layer_count; ++k) {
        double total = 0.0;
        std::size_t count = 0;
        out.samplers_[k].resize(n);
        for (NodeId u = 0; u < n; ++u) {
            auto& links = out.links_[k][u];
            std::sort(links.begin(), links.end(),
                      [](const auto& a, const auto& b) { return a.node < b.node; });
            weights.clear();
            for (const auto& l : links) {
                weights.push_back(l.weight);
                total += l.weight;
                ++count;
            }
            if (!weights.empty()) {
                out.samplers_[k][u] = AliasTable(weights);
            }
        }
        out.average_weight_[k] = count > 0 ? total / static_cast<double>(count) : 0.0;
        for (NodeId u = 0; u < n; ++u) {
            std::size_t heavy = 0;
            for (const auto& l : out.links_[k][u]) {
                heavy += l.weight > out.average_weight_[k];
            }
            out.up_weight_[k][u] = std::log(static_cast<double>(heavy) + std::exp(1.0));
        }
    }
    return out;
}

WalkCorpus walks_struc2vec(const StructuralLayers& layers, const WalkConfig& cfg,
                           const Struc2vecConfig& s2v) {
    cfg.validate();
    s2v.validate();
    const std::size_t n = layers.node_count();
    WalkCorpus corpus;
    std::vector<NodeId> walk;
    for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
        for (NodeId start : walk_start_order(n, cfg.seed, round)) {
            Rng rng(derive_seed(cfg.seed, round + 1, start));
            walk.assign(1, start);
            NodeId v = start;
            std::size_t layer = 0;
            if (layers.links(0, v).empty()) {
                corpus.add(walk);
                continue;
            }
            while (walk.size() < cfg.walk_length) {
                if (uniform_real(rng) < s2v.stay_probability) {
                    v = layers.sample_neighbor(layer, v, rng);
                    walk.push_back(v);
                } else if (uniform_real(rng) > layers.up_probability(layer, v)) {
                    if (layer > 0) {
                        --layer;
                    }
                } else if (layer + 1 < layers.layer_count() && !layers.links(layer + 1, v).empty()) {
                    ++layer;
                }
            }
            corpus.add(walk);
        }
    }
    return corpus;
}

} // namespace embcmp
