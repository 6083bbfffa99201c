#include "embcmp/generators.hpp"

#include "embcmp/error.hpp"
#include "embcmp/random.hpp"

#include <algorithm>

namespace embcmp {

void SyntheticSpec::validate() const {
    if (kind == SyntheticKind::barabasi_albert) {
        if (ba_m < 1) {
            throw InvalidArgument("barabasi_albert: ba_m must be >= 1");
        }
        if (n < ba_m) {
            throw InvalidArgument("barabasi_albert: n must be >= ba_m");
        }
        return;
    }
    if (communities < 1 || n <= communities) {
        throw InvalidArgument("planted_partition: requires n > communities >= 1");
    }
    if (!(intra_p >= 0.0 && intra_p <= 1.0 && inter_p >= 0.0 && inter_p < intra_p)) {
        throw InvalidArgument("planted_partition: requires 0 <= inter_p < intra_p <= 1");
    }
    if (bridges_per_community > 0 && communities < 2) {
        throw InvalidArgument("planted_partition: bridges need at least two communities");
    }
    if (bridges_per_community * communities > n - bridges_per_community) {
        throw InvalidArgument("planted_partition: too many bridge nodes");
    }
}

Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n = n;
    spec.ba_m = m;
    spec.validate();

    Rng rng(seed);
    std::vector<Edge> edges;
    // every edge endpoint appears once per incident edge: sampling from this
    // list is sampling proportionally to degree
    std::vector<NodeId> endpoints;
    for (NodeId u = 0; u < m; ++u) {
        for (NodeId v = u + 1; v < m; ++v) {
            edges.emplace_back(u, v);
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    }
    std::vector<NodeId> targets;
    for (auto u = static_cast<NodeId>(m); u < n; ++u) {
        targets.clear();
        while (targets.size() < m) {
            // the 1-clique seed has no edges yet; fall back to uniform
            const NodeId t = endpoints.empty()
                                 ? static_cast<NodeId>(uniform_index(rng, u))
                                 : endpoints[uniform_index(rng, endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
                targets.push_back(t);
            }
        }
        for (NodeId t : targets) {
            edges.emplace_back(t, u);
            endpoints.push_back(t);
            endpoints.push_back(u);
        }
    }
    return Graph::from_edges(n, edges);
}

PlantedGraph planted_partition(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t n = spec.n;
    const std::size_t c = spec.communities;

    PlantedGraph out;
    out.community_of.resize(n);
    std::vector<std::vector<NodeId>> members(c);
    // sizes differ by at most one when n is not divisible by c
    for (std::size_t block = 0, u = 0; block < c; ++block) {
        const std::size_t size = n / c + (block < n % c ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i, ++u) {
            out.community_of[u] = block;
            members[block].push_back(static_cast<NodeId>(u));
        }
    }

    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            const double p = out.community_of[u] == out.community_of[v] ? spec.intra_p : spec.inter_p;
            if (p > 0.0 && uniform_real(rng) < p) {
                edges.emplace_back(u, v);
            }
        }
    }

    if (spec.bridges_per_community > 0) {
        std::vector<bool> is_bridge(n, false);
        for (std::size_t block = 0; block < c; ++block) {
            auto pool = members[block];
            shuffle(pool.begin(), pool.end(), rng);
            pool.resize(spec.bridges_per_community);
            std::sort(pool.begin(), pool.end());
            for (NodeId b : pool) {
                is_bridge[b] = true;
                out.bridges.push_back(b);
            }
        }
        for (NodeId b : out.bridges) {
            std::vector<NodeId> candidates;
            for (NodeId v = 0; v < n; ++v) {
                if (out.community_of[v] != out.community_of[b] && !is_bridge[v]) {
                    candidates.push_back(v);
                }
            }
            const NodeId target = candidates[uniform_index(rng, candidates.size())];
            edges.emplace_back(b, target);
        }
    }
    out.graph = Graph::from_edges(n, edges);
    return out;
}

Graph generate(const SyntheticSpec& spec) {
    spec.validate();
    Graph g = spec.kind == SyntheticKind::barabasi_albert
                  ? barabasi_albert(spec.n, spec.ba_m, spec.seed)
                  : planted_partition(spec).graph;
    if (spec.require_connected && !g.is_connected()) {
        throw ComputeError("generated graph is disconnected");
    }
    return g;
}

} // namespace embcmp
