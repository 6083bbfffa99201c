#pragma once

#include "embcmp/graph.hpp"

#include <cstdint>
#include <vector>

namespace embcmp {

enum class SyntheticKind { barabasi_albert, planted_partition };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::barabasi_albert;
    std::size_t n = 100;
    std::size_t ba_m = 1;
    std::size_t communities = 2;
    double intra_p = 0.5;
    double inter_p = 0.0;
    std::size_t bridges_per_community = 0;
    std::uint64_t seed = 1;
    bool require_connected = false;

    void validate() const;
};

struct PlantedGraph {
    Graph graph;
    std::vector<std::size_t> community_of;
    std::vector<NodeId> bridges;
};

/// Preferential attachment from an `ba_m`-clique; each new node links to
/// `ba_m` distinct existing nodes chosen proportionally to degree.
Graph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed);

/// Equal-size blocks with independent intra/inter edge draws, then
/// `bridges_per_community` designated nodes per block, each given exactly one
/// edge to a non-bridge node of another block.
PlantedGraph planted_partition(const SyntheticSpec& spec);

/// Dispatches on `spec.kind`. Throws ComputeError when `require_connected`
/// is set and the result is disconnected.
Graph generate(const SyntheticSpec& spec);

} // namespace embcmp
