#pragma once

#include "embcmp/graph.hpp"
#include "embcmp/matrix.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace embcmp {

struct CommunityAssignment {
    std::vector<std::size_t> community_of;
    std::size_t community_count = 0;
};

/// Newman modularity Q of a partition.
double modularity(const Graph& g, const std::vector<std::size_t>& community_of);

/// Seeded Louvain: local moving in shuffled node order, then aggregation,
/// repeated until no move improves modularity. Community ids are dense and
/// numbered by smallest member index.
CommunityAssignment detect_communities(const Graph& g, std::uint64_t seed);

enum class Metric : std::size_t {
    degree,
    eccentricity,
    closeness,
    betweenness,
    eigenvector,
    pagerank,
    clustering,
    knn,
    within_module_degree,
    participation,
    leverage,
};

inline constexpr std::size_t kMetricCount = 11;

inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::degree,      Metric::eccentricity, Metric::closeness,
    Metric::betweenness, Metric::eigenvector,  Metric::pagerank,
    Metric::clustering,  Metric::knn,          Metric::within_module_degree,
    Metric::participation, Metric::leverage,
};

/// CSV column key: degree, eccentricity, ..., wmd, participation, leverage.
std::string_view metric_key(Metric m);
/// Report name: degree, ..., within_module_degree, participation_coefficient,
/// leverage_centrality.
std::string_view metric_name(Metric m);
/// Accepts either the key or the report name.
std::optional<Metric> parse_metric(std::string_view name);

constexpr std::size_t index(Metric m) noexcept { return static_cast<std::size_t>(m); }

/// Per-node V1 signature, stored column-wise.
class MetricsTable {
public:
    MetricsTable() = default;
    explicit MetricsTable(std::size_t node_count);

    std::size_t node_count() const noexcept { return columns_[0].size(); }
    std::vector<double>& column(Metric m) { return columns_[index(m)]; }
    const std::vector<double>& column(Metric m) const { return columns_[index(m)]; }
    double operator()(NodeId u, Metric m) const { return columns_[index(m)][u]; }

private:
    std::array<std::vector<double>, kMetricCount> columns_;
};

struct MetricsOptions {
    double pagerank_damping = 0.85;
    double tolerance = 1e-10;
    std::size_t max_iterations = 1'000'000;
};

/// All eleven metrics. Requires a connected graph.
MetricsTable compute_metrics(const Graph& g, const CommunityAssignment& communities,
                             const MetricsOptions& options = {});

// Individual metrics, exposed for tests and reuse.
std::vector<double> betweenness_centrality(const Graph& g);
std::vector<double> eigenvector_centrality(const Graph& g, double tolerance = 1e-10,
                                           std::size_t max_iterations = 1'000'000);
std::vector<double> pagerank(const Graph& g, double damping = 0.85, double tolerance = 1e-10,
                             std::size_t max_iterations = 1'000'000);
std::vector<double> local_clustering(const Graph& g);

/// Min-max scales every column to [0,1]; constant columns map to 0.
/// Returns an N x 11 matrix in kAllMetrics column order.
Matrix normalize_metrics(const MetricsTable& t);

/// CSV with header `label,degree,...,leverage`, reals at 10 significant digits.
void write_metrics_csv(const Graph& g, const MetricsTable& t, std::ostream& out);
MetricsTable read_metrics_csv(std::istream& in, std::vector<std::string>* labels = nullptr);

} // namespace embcmp
