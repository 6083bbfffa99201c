#include "embcmp/graph.hpp"

#include "embcmp/error.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace embcmp {

Graph Graph::from_edges(std::vector<std::string> labels, std::span<const Edge> edges,
                        EdgeStats* stats) {
    Graph g;
    const std::size_t n = labels.size();
    g.adjacency_.assign(n, {});
    g.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.index_.emplace(labels[i], static_cast<NodeId>(i)).second) {
            throw InvalidArgument("duplicate node label '" + labels[i] + "'");
        }
    }
    g.labels_ = std::move(labels);

    EdgeStats local;
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw InvalidArgument("edge endpoint out of range");
        }
        if (u == v) {
            ++local.self_loops;
            continue;
        }
        g.adjacency_[u].push_back(v);
        g.adjacency_[v].push_back(u);
    }
    std::size_t total = 0;
    for (auto& adj : g.adjacency_) {
        std::sort(adj.begin(), adj.end());
        const auto last = std::unique(adj.begin(), adj.end());
        local.duplicates += static_cast<std::size_t>(adj.end() - last);
        adj.erase(last, adj.end());
        adj.shrink_to_fit();
        total += adj.size();
    }
    // each duplicate was removed from both endpoint lists
    local.duplicates /= 2;
    g.edge_count_ = total / 2;
    if (stats) {
        *stats = local;
    }
    return g;
}

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges, EdgeStats* stats) {
    std::vector<std::string> labels(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
        labels[i] = std::to_string(i);
    }
    return from_edges(std::move(labels), edges, stats);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    const auto& adj = adjacency_.at(u);
    return std::binary_search(adj.begin(), adj.end(), v);
}

std::optional<NodeId> Graph::index_of(const std::string& label) const {
    if (auto it = index_.find(label); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < adjacency_.size(); ++u) {
        for (NodeId v : adjacency_[u]) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

bool Graph::is_connected() const {
    if (adjacency_.empty()) {
        return true;
    }
    const auto dist = bfs_distances(*this, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

std::uint64_t Graph::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t n = adjacency_.size();
    feed(&n, sizeof n);
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
        feed(labels_[i].data(), labels_[i].size());
        const char sep = '\0';
        feed(&sep, 1);
        feed(adjacency_[i].data(), adjacency_[i].size() * sizeof(NodeId));
        const std::uint64_t d = adjacency_[i].size();
        feed(&d, sizeof d);
    }
    return h;
}

void Graph::check_node(NodeId u) const {
    if (u >= adjacency_.size()) {
        throw InvalidArgument("node index " + std::to_string(u) + " out of range (n=" +
                              std::to_string(adjacency_.size()) + ")");
    }
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
    g.check_node(source);
    std::vector<int> dist(g.node_count(), -1);
    std::vector<NodeId> queue;
    queue.reserve(g.node_count());
    dist[source] = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

std::vector<std::size_t> connected_components(const Graph& g) {
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(g.node_count(), unset);
    std::size_t next = 0;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < g.node_count(); ++s) {
        if (comp[s] != unset) {
            continue;
        }
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            for (NodeId v : g.neighbors(u)) {
                if (comp[v] == unset) {
                    comp[v] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return comp;
}

ComponentResult largest_component(const Graph& g) {
    if (g.empty()) {
        throw InvalidArgument("largest_component: empty graph");
    }
    const auto comp = connected_components(g);
    const std::size_t count = *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<std::size_t> sizes(count, 0);
    for (auto c : comp) {
        ++sizes[c];
    }
    // components are numbered in order of their smallest member, so the first
    // maximum is the tie winner
    const auto best = static_cast<std::size_t>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

    ComponentResult result;
    result.from_original.assign(g.node_count(), -1);
    std::vector<std::string> labels;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (comp[u] == best) {
            result.from_original[u] = static_cast<std::int64_t>(result.to_original.size());
            result.to_original.push_back(u);
            labels.push_back(g.label(u));
        }
    }
    std::vector<Edge> edges;
    for (const auto& [u, v] : g.edges()) {
        if (comp[u] == best) {
            edges.emplace_back(static_cast<NodeId>(result.from_original[u]),
                               static_cast<NodeId>(result.from_original[v]));
        }
    }
    result.graph = Graph::from_edges(std::move(labels), edges);
    return result;
}

std::size_t shared_neighbors(const Graph& g, NodeId u, NodeId v) {
    g.check_node(u);
    g.check_node(v);
    const auto a = g.neighbors(u);
    const auto b = g.neighbors(v);
    std::size_t count = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            if (*i != u && *i != v) {
                ++count;
            }
            ++i;
            ++j;
        }
    }
    return count;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, const EdgeListOptions& options) {
    std::vector<std::string> fields;
    if (options.delimiter) {
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, *options.delimiter)) {
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            if (b == std::string::npos) {
                continue;
            }
            fields.push_back(field.substr(b, e - b + 1));
        }
    } else {
        std::istringstream ss(line);
        std::string field;
        while (ss >> field) {
            fields.push_back(field);
        }
    }
    return fields;
}

} // namespace

Graph read_edge_list(std::istream& in, const EdgeListOptions& options, EdgeStats* stats) {
    std::vector<std::string> labels;
    std::unordered_map<std::string, NodeId> index;
    std::vector<Edge> edges;
    auto intern = [&](const std::string& label) {
        auto [it, inserted] = index.emplace(label, static_cast<NodeId>(labels.size()));
        if (inserted) {
            labels.push_back(label);
        }
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        if (!options.comment_prefix.empty() &&
            line.compare(first, options.comment_prefix.size(), options.comment_prefix) == 0) {
            continue;
        }
        const auto fields = split_fields(line, options);
        if (fields.size() != 2) {
            throw ParseError("expected 2 fields, found " + std::to_string(fields.size()), line_no);
        }
        const NodeId u = intern(fields[0]);
        const NodeId v = intern(fields[1]);
        edges.emplace_back(u, v);
    }
    if (labels.empty()) {
        throw DataError("edge list contains no edges");
    }
    return Graph::from_edges(std::move(labels), edges, stats);
}

Graph load_edge_list(const std::string& path, const EdgeListOptions& options, EdgeStats* stats) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open edge list '" + path + "'");
    }
    return read_edge_list(in, options, stats);
}

void write_edge_list(const Graph& g, std::ostream& out) {
    for (const auto& [u, v] : g.edges()) {
        out << g.label(u) << ' ' << g.label(v) << '\n';
    }
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write edge list '" + path + "'");
    }
    write_edge_list(g, out);
}

} // namespace embcmp
