#include "embcmp/metrics.hpp"

#include "embcmp/random.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace embcmp {

double modularity(const Graph& g, const std::vector<std::size_t>& community_of) {
    const double two_m = 2.0 * static_cast<double>(g.edge_count());
    if (two_m == 0.0) {
        return 0.0;
    }
    const std::size_t count =
        community_of.empty() ? 0 : *std::max_element(community_of.begin(), community_of.end()) + 1;
    std::vector<double> inner(count, 0.0);
    std::vector<double> total(count, 0.0);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        total[community_of[u]] += static_cast<double>(g.degree(u));
        for (NodeId v : g.neighbors(u)) {
            if (community_of[u] == community_of[v]) {
                inner[community_of[u]] += 1.0;
            }
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
        q += inner[c] / two_m - (total[c] / two_m) * (total[c] / two_m);
    }
    return q;
}

namespace {

// Weighted graph at one aggregation level. `degree` includes internal
// weight; `links` excludes self-loops.
struct Level {
    std::vector<std::vector<std::pair<std::size_t, double>>> links;
    std::vector<double> degree;
};

Level level_from_graph(const Graph& g) {
    Level level;
    level.links.resize(g.node_count());
    level.degree.resize(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            level.links[u].emplace_back(v, 1.0);
        }
        level.degree[u] = static_cast<double>(g.degree(u));
    }
    return level;
}

// One round of local moving. Returns true when any node changed community.
bool local_moving(const Level& level, double two_m, std::vector<std::size_t>& community,
                  Rng& rng) {
    const std::size_t n = level.links.size();
    std::vector<double> total(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        total[community[i]] += level.degree[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);

    std::vector<double> link_to(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> touched;
    bool any_move = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i : order) {
            const std::size_t current = community[i];
            const double k_i = level.degree[i];
            touched.clear();
            touched.push_back(current);
            seen[current] = 1;
            for (const auto& [j, w] : level.links[i]) {
                const std::size_t c = community[j];
                if (!seen[c]) {
                    seen[c] = 1;
                    touched.push_back(c);
                }
                link_to[c] += w;
            }
            total[current] -= k_i;
            std::size_t best = current;
            double best_gain = link_to[current] - total[current] * k_i / two_m;
            for (std::size_t c : touched) {
                const double gain = link_to[c] - total[c] * k_i / two_m;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            total[best] += k_i;
            community[i] = best;
            if (best != current) {
                improved = true;
                any_move = true;
            }
            for (std::size_t c : touched) {
                link_to[c] = 0.0;
                seen[c] = 0;
            }
        }
    }
    return any_move;
}

// Renumbers `community` densely in order of first appearance.
std::size_t renumber(std::vector<std::size_t>& community) {
    std::unordered_map<std::size_t, std::size_t> remap;
    for (auto& c : community) {
        auto [it, inserted] = remap.emplace(c, remap.size());
        c = it->second;
    }
    return remap.size();
}

Level aggregate(const Level& level, const std::vector<std::size_t>& community, std::size_t count) {
    Level next;
    next.links.resize(count);
    next.degree.assign(count, 0.0);
    std::vector<std::unordered_map<std::size_t, double>> weights(count);
    for (std::size_t i = 0; i < level.links.size(); ++i) {
        const std::size_t ci = community[i];
        next.degree[ci] += level.degree[i];
        for (const auto& [j, w] : level.links[i]) {
            const std::size_t cj = community[j];
            if (ci != cj) {
                weights[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < count; ++c) {
        next.links[c].assign(weights[c].begin(), weights[c].end());
        std::sort(next.links[c].begin(), next.links[c].end());
    }
    return next;
}

} // namespace

CommunityAssignment detect_communities(const Graph& g, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    CommunityAssignment result;
    result.community_of.resize(n);
    std::iota(result.community_of.begin(), result.community_of.end(), std::size_t{0});
    if (n == 0) {
        return result;
    }
    const double two_m = 2.0 * static_cast<double>(g.edge_count());
    if (two_m == 0.0) {
        result.community_count = renumber(result.community_of);
        return result;
    }

    Rng rng(seed);
    Level level = level_from_graph(g);
    // node_of_level[u] = the aggregated node holding original node u
    std::vector<std::size_t> node_of_level(n);
    std::iota(node_of_level.begin(), node_of_level.end(), std::size_t{0});
    for (;;) {
        std::vector<std::size_t> community(level.links.size());
        std::iota(community.begin(), community.end(), std::size_t{0});
        if (!local_moving(level, two_m, community, rng)) {
            break;
        }
        const std::size_t count = renumber(community);
        for (auto& x : node_of_level) {
            x = community[x];
        }
        if (count == level.links.size()) {
            break;
        }
        level = aggregate(level, community, count);
    }
    result.community_of = node_of_level;
    result.community_count = renumber(result.community_of);
    return result;
}

} // namespace embcmp
