#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace embcmp {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

struct EdgeStats {
    std::size_t self_loops = 0;
    std::size_t duplicates = 0;
};

/// Immutable undirected simple graph with dense node indices and unique
/// string labels. Adjacency lists are sorted ascending.
class Graph {
public:
    Graph() = default;

    /// Builds from an edge list over `labels.size()` nodes. Self-loops and
    /// duplicate edges (in either orientation) are dropped and counted.
    static Graph from_edges(std::vector<std::string> labels, std::span<const Edge> edges,
                            EdgeStats* stats = nullptr);

    /// Nodes labelled "0".."n-1".
    static Graph from_edges(std::size_t node_count, std::span<const Edge> edges,
                            EdgeStats* stats = nullptr);

    std::size_t node_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    bool empty() const noexcept { return adjacency_.empty(); }

    std::span<const NodeId> neighbors(NodeId u) const { return adjacency_.at(u); }
    std::size_t degree(NodeId u) const { return adjacency_.at(u).size(); }
    bool has_edge(NodeId u, NodeId v) const;

    const std::string& label(NodeId u) const { return labels_.at(u); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::optional<NodeId> index_of(const std::string& label) const;

    /// Edges as (min, max) pairs in lexicographic order.
    std::vector<Edge> edges() const;

    bool is_connected() const;

    /// 64-bit fingerprint over labels and adjacency.
    std::uint64_t fingerprint() const;

    void check_node(NodeId u) const;

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::unordered_map<std::string, NodeId> index_;
    std::size_t edge_count_ = 0;
};

struct ComponentResult {
    Graph graph;
    /// new index -> original index
    std::vector<NodeId> to_original;
    /// original index -> new index, or -1 when the node was dropped
    std::vector<std::int64_t> from_original;
};

/// Induced subgraph on the largest connected component. Ties go to the
/// component containing the smallest original index.
ComponentResult largest_component(const Graph& g);

/// Connected component id per node, numbered by smallest member index.
std::vector<std::size_t> connected_components(const Graph& g);

/// BFS hop distances from `source`; unreachable nodes get -1.
std::vector<int> bfs_distances(const Graph& g, NodeId source);

/// |N(u) ∩ N(v)| excluding u and v.
std::size_t shared_neighbors(const Graph& g, NodeId u, NodeId v);

// Edge-list text format: one `<src> <dst>` per line.

struct EdgeListOptions {
    std::string comment_prefix = "#";
    /// Field separator; whitespace when unset.
    std::optional<char> delimiter;
};

Graph read_edge_list(std::istream& in, const EdgeListOptions& options = {},
                     EdgeStats* stats = nullptr);
Graph load_edge_list(const std::string& path, const EdgeListOptions& options = {},
                     EdgeStats* stats = nullptr);

/// Writes sorted (min,max) label pairs, `\n` terminated. Isolated nodes are
/// not representable in this format and are omitted.
void write_edge_list(const Graph& g, std::ostream& out);
void save_edge_list(const Graph& g, const std::string& path);

} // namespace embcmp
