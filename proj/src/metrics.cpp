#include "embcmp/metrics.hpp"

#include "embcmp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace embcmp {

namespace {

constexpr std::array<std::string_view, kMetricCount> kKeys = {
    "degree",   "eccentricity", "closeness", "betweenness", "eigenvector",  "pagerank",
    "clustering", "knn",        "wmd",       "participation", "leverage",
};

constexpr std::array<std::string_view, kMetricCount> kNames = {
    "degree",     "eccentricity", "closeness",           "betweenness",
    "eigenvector", "pagerank",    "clustering_coefficient", "knn",
    "within_module_degree", "participation_coefficient", "leverage_centrality",
};

} // namespace

std::string_view metric_key(Metric m) { return kKeys[index(m)]; }
std::string_view metric_name(Metric m) { return kNames[index(m)]; }

std::optional<Metric> parse_metric(std::string_view name) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        if (kKeys[i] == name || kNames[i] == name) {
            return static_cast<Metric>(i);
        }
    }
    return std::nullopt;
}

MetricsTable::MetricsTable(std::size_t node_count) {
    for (auto& c : columns_) {
        c.assign(node_count, 0.0);
    }
}

// Brandes dependency accumulation. Each unordered pair is counted once.
std::vector<double> betweenness_centrality(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> centrality(n, 0.0);
    std::vector<double> sigma(n);
    std::vector<double> delta(n);
    std::vector<int> dist(n);
    std::vector<NodeId> order;
    order.reserve(n);
    for (NodeId s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        order.push_back(s);
        for (std::size_t head = 0; head < order.size(); ++head) {
            const NodeId v = order[head];
            for (NodeId w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    order.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const NodeId w = *it;
            for (NodeId v : g.neighbors(w)) {
                if (dist[v] == dist[w] - 1) {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if (w != s) {
                centrality[w] += delta[w];
            }
        }
    }
    for (auto& c : centrality) {
        c /= 2.0;
    }
    return centrality;
}

// Power iteration on A + I: same eigenvectors as A, but the Perron root is
// strictly dominant even for bipartite graphs.
std::vector<double> eigenvector_centrality(const Graph& g, double tolerance,
                                           std::size_t max_iterations) {
    const std::size_t n = g.node_count();
    if (n == 0) {
        return {};
    }
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        double norm = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            double acc = x[u];
            for (NodeId v : g.neighbors(u)) {
                acc += x[v];
            }
            next[u] = acc;
            norm += acc * acc;
        }
        norm = std::sqrt(norm);
        double change = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            next[u] /= norm;
            change = std::max(change, std::abs(next[u] - x[u]));
        }
        x.swap(next);
        if (change <= tolerance) {
            break;
        }
    }
    return x;
}

std::vector<double> pagerank(const Graph& g, double damping, double tolerance,
                             std::size_t max_iterations) {
    const std::size_t n = g.node_count();
    if (n == 0) {
        return {};
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> rank(n, inv_n);
    std::vector<double> next(n);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            if (g.degree(u) == 0) {
                dangling += rank[u];
            }
        }
        const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
        for (NodeId u = 0; u < n; ++u) {
            double acc = 0.0;
            for (NodeId v : g.neighbors(u)) {
                acc += rank[v] / static_cast<double>(g.degree(v));
            }
            next[u] = base + damping * acc;
        }
        double change = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            change += std::abs(next[u] - rank[u]);
        }
        rank.swap(next);
        if (change <= tolerance) {
            break;
        }
    }
    const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
    for (auto& r : rank) {
        r /= total;
    }
    return rank;
}

std::vector<double> local_clustering(const Graph& g) {
    std::vector<double> out(g.node_count(), 0.0);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto nbrs = g.neighbors(u);
        const std::size_t k = nbrs.size();
        if (k < 2) {
            continue;
        }
        std::size_t links = 0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                if (g.has_edge(nbrs[i], nbrs[j])) {
                    ++links;
                }
            }
        }
        out[u] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
    }
    return out;
}

MetricsTable compute_metrics(const Graph& g, const CommunityAssignment& communities,
                             const MetricsOptions& options) {
    const std::size_t n = g.node_count();
    if (n == 0) {
        throw InvalidArgument("compute_metrics: empty graph");
    }
    if (communities.community_of.size() != n) {
        throw InvalidArgument("compute_metrics: community assignment does not cover the graph");
    }
    if (!g.is_connected()) {
        throw InvalidArgument("compute_metrics: graph is disconnected; use its largest component");
    }

    MetricsTable t(n);
    auto& degree = t.column(Metric::degree);
    for (NodeId u = 0; u < n; ++u) {
        degree[u] = static_cast<double>(g.degree(u));
    }

    auto& ecc = t.column(Metric::eccentricity);
    auto& closeness = t.column(Metric::closeness);
    for (NodeId u = 0; u < n; ++u) {
        const auto dist = bfs_distances(g, u);
        long long total = 0;
        int far = 0;
        for (int d : dist) {
            total += d;
            far = std::max(far, d);
        }
        ecc[u] = far;
        closeness[u] = total > 0 ? static_cast<double>(n - 1) / static_cast<double>(total) : 0.0;
    }

    t.column(Metric::betweenness) = betweenness_centrality(g);
    t.column(Metric::eigenvector) =
        eigenvector_centrality(g, options.tolerance, options.max_iterations);
    t.column(Metric::pagerank) =
        pagerank(g, options.pagerank_damping, options.tolerance, options.max_iterations);
    t.column(Metric::clustering) = local_clustering(g);

    auto& knn = t.column(Metric::knn);
    auto& leverage = t.column(Metric::leverage);
    for (NodeId u = 0; u < n; ++u) {
        const double k = degree[u];
        if (k == 0.0) {
            continue;
        }
        double sum_k = 0.0;
        double sum_lev = 0.0;
        for (NodeId v : g.neighbors(u)) {
            sum_k += degree[v];
            sum_lev += (k - degree[v]) / (k + degree[v]);
        }
        knn[u] = sum_k / k;
        leverage[u] = sum_lev / k;
    }

    // within-module degree: z-score of the internal degree within the
    // node's community; zero spread gives 0
    const auto& comm = communities.community_of;
    const std::size_t c_count = communities.community_count;
    std::vector<double> internal(n, 0.0);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (comm[v] == comm[u]) {
                internal[u] += 1.0;
            }
        }
    }
    std::vector<double> sum(c_count, 0.0);
    std::vector<double> sum_sq(c_count, 0.0);
    std::vector<double> size(c_count, 0.0);
    for (NodeId u = 0; u < n; ++u) {
        sum[comm[u]] += internal[u];
        size[comm[u]] += 1.0;
    }
    std::vector<double> mean(c_count);
    for (std::size_t c = 0; c < c_count; ++c) {
        mean[c] = size[c] > 0 ? sum[c] / size[c] : 0.0;
    }
    for (NodeId u = 0; u < n; ++u) {
        const double d = internal[u] - mean[comm[u]];
        sum_sq[comm[u]] += d * d;
    }
    auto& wmd = t.column(Metric::within_module_degree);
    for (NodeId u = 0; u < n; ++u) {
        const std::size_t c = comm[u];
        const double sd = std::sqrt(sum_sq[c] / size[c]);
        const double d = internal[u] - mean[c];
        wmd[u] = sd > 1e-12 * std::max(1.0, std::abs(mean[c])) ? d / sd : 0.0;
    }

    auto& participation = t.column(Metric::participation);
    std::vector<double> per_comm(c_count, 0.0);
    std::vector<std::size_t> touched;
    for (NodeId u = 0; u < n; ++u) {
        const double k = degree[u];
        if (k == 0.0) {
            continue;
        }
        touched.clear();
        for (NodeId v : g.neighbors(u)) {
            if (per_comm[comm[v]] == 0.0) {
                touched.push_back(comm[v]);
            }
            per_comm[comm[v]] += 1.0;
        }
        double s = 0.0;
        for (std::size_t c : touched) {
            s += (per_comm[c] / k) * (per_comm[c] / k);
            per_comm[c] = 0.0;
        }
        participation[u] = 1.0 - s;
    }
    return t;
}

Matrix normalize_metrics(const MetricsTable& t) {
    const std::size_t n = t.node_count();
    Matrix out(n, kMetricCount, 0.0);
    for (std::size_t j = 0; j < kMetricCount; ++j) {
        const auto& col = t.column(kAllMetrics[j]);
        if (col.empty()) {
            continue;
        }
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        const double range = *hi - *lo;
        if (!(range > 0.0)) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out(i, j) = (col[i] - *lo) / range;
        }
    }
    return out;
}

void write_metrics_csv(const Graph& g, const MetricsTable& t, std::ostream& out) {
    out << "label";
    for (Metric m : kAllMetrics) {
        out << ',' << metric_key(m);
    }
    out << '\n';
    char buf[64];
    for (NodeId u = 0; u < t.node_count(); ++u) {
        out << g.label(u);
        for (Metric m : kAllMetrics) {
            const double v = t(u, m);
            if (m == Metric::degree || m == Metric::eccentricity) {
                std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(v)));
            } else {
                std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
            }
            out << ',' << buf;
        }
        out << '\n';
    }
}

MetricsTable read_metrics_csv(std::istream& in, std::vector<std::string>* labels) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("metrics csv: missing header");
    }
    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        names.push_back(field);
        std::vector<double> row;
        while (std::getline(ss, field, ',')) {
            row.push_back(std::stod(field));
        }
        if (row.size() != kMetricCount) {
            throw ParseError("metrics csv: expected " + std::to_string(kMetricCount) + " values",
                             line_no);
        }
        rows.push_back(std::move(row));
    }
    MetricsTable t(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < kMetricCount; ++j) {
            t.column(kAllMetrics[j])[i] = rows[i][j];
        }
    }
    if (labels) {
        *labels = std::move(names);
    }
    return t;
}

} // namespace embcmp
