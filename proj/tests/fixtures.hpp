#pragma once

// Small named graphs shared by the unit tests.

#include "embcmp/graph.hpp"

#include <vector>

namespace fixtures {

using embcmp::Edge;
using embcmp::Graph;
using embcmp::NodeId;

inline Graph star(std::size_t leaves) {
    std::vector<Edge> e;
    for (NodeId i = 1; i <= leaves; ++i) {
        e.emplace_back(0, i);
    }
    return Graph::from_edges(leaves + 1, e);
}

inline Graph path(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i + 1 < n; ++i) {
        e.emplace_back(i, i + 1);
    }
    return Graph::from_edges(n, e);
}

inline Graph cycle(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i) {
        e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
    }
    return Graph::from_edges(n, e);
}

inline Graph complete(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            e.emplace_back(i, j);
        }
    }
    return Graph::from_edges(n, e);
}

// Two k-cliques {0..k-1}, {k..2k-1} joined by the edge (k-1, k).
inline Graph barbell(std::size_t k) {
    std::vector<Edge> e;
    for (NodeId off : {NodeId{0}, static_cast<NodeId>(k)}) {
        for (NodeId i = 0; i < k; ++i) {
            for (NodeId j = i + 1; j < k; ++j) {
                e.emplace_back(off + i, off + j);
            }
        }
    }
    e.emplace_back(static_cast<NodeId>(k - 1), static_cast<NodeId>(k));
    return Graph::from_edges(2 * k, e);
}

} // namespace fixtures
