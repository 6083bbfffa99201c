#include "embcmp/structure.hpp"

#include "embcmp/error.hpp"
#include "embcmp/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace embcmp {

const std::array<std::string_view, kEgoFeatureCount> kEgoFeatureNames = {
    "degree", "edges_num", "density", "twoalter_num", "average_alter_alter_num", "average_degree",
    "clustering_coefficient"};

Matrix compute_ego_features(const Graph& g) {
    const std::size_t n = g.node_count();
    Matrix out(n, kEgoFeatureCount);
    std::vector<std::uint32_t> mark(n, 0);
    std::uint32_t stamp = 0;
    for (NodeId u = 0; u < n; ++u) {
        const auto alters = g.neighbors(u);
        const std::size_t k = alters.size();
        if (k == 0) continue;
        ++stamp;
        mark[u] = stamp;
        for (NodeId v : alters) mark[v] = stamp;
        std::size_t links = 0, two_step = 0, alter_degrees = 0;
        for (NodeId v : alters) {
            alter_degrees += g.degree(v);
            for (NodeId w : g.neighbors(v)) {
                if (w == u) continue;
                if (mark[w] == stamp) {
                    if (w > v) ++links;
                } else if (mark[w] != stamp + 1) {
                    mark[w] = stamp + 1;
                    ++two_step;
                }
            }
        }
        ++stamp; // stamp + 1 was used for the two-step set
        const double pairs = static_cast<double>(k) * static_cast<double>(k - 1) / 2.0;
        const double density = k < 2 ? 0.0 : static_cast<double>(links) / pairs;
        out(u, 0) = static_cast<double>(k);
        out(u, 1) = static_cast<double>(links);
        out(u, 2) = density;
        out(u, 3) = static_cast<double>(two_step);
        out(u, 4) = static_cast<double>(alter_degrees) / static_cast<double>(k);
        out(u, 5) = static_cast<double>(alter_degrees + k) / static_cast<double>(k + 1);
        out(u, 6) = density;
    }
    return out;
}

double canberra(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvalidArgument("canberra: length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double den = std::abs(u[i]) + std::abs(v[i]);
        if (den > 0) s += std::abs(u[i] - v[i]) / den;
    }
    return s;
}

namespace {

struct Assignment {
    std::vector<std::size_t> cluster;
    std::vector<double> distance;
    double objective = 0;
};

Assignment assign(const Matrix& x, const Matrix& centroids) {
    Assignment a;
    a.cluster.resize(x.rows());
    a.distance.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double d = canberra(x.row(i), centroids.row(c));
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        a.cluster[i] = arg;
        a.distance[i] = best;
        a.objective += best;
    }
    return a;
}

} // namespace

EgoClustering kmeans_canberra(const Matrix& features, std::size_t k, std::uint64_t seed,
                              std::size_t max_iterations) {
    const std::size_t n = features.rows();
    const std::size_t dim = features.cols();
    if (k == 0 || k > n) throw InvalidArgument("kmeans: k must lie in [1, n]");
    if (max_iterations == 0) throw InvalidArgument("kmeans: max_iterations must be positive");

    EgoClustering out;
    out.k = k;
    out.centroids = Matrix(k, dim);
    Rng rng(derive_seed(seed, 0xc1a55ULL));
    std::size_t pick = uniform_index(rng, n);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < k; ++c) {
        std::copy_n(features.row(pick).begin(), dim, out.centroids.row(c).begin());
        double far = -1;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], canberra(features.row(i), out.centroids.row(c)));
            if (nearest[i] > far) {
                far = nearest[i];
                pick = i;
            }
        }
    }

    Assignment current = assign(features, out.centroids);
    out.objective_trace.push_back(current.objective);
    std::vector<double> mean(dim);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[current.cluster[i]].push_back(i);
        std::vector<double> distortion = current.distance;
        for (std::size_t c = 0; c < k; ++c) {
            if (members[c].empty()) {
                // move to the worst-served point; zero its distortion so a
                // second empty cluster picks a different one
                const auto worst = static_cast<std::size_t>(
                    std::max_element(distortion.begin(), distortion.end()) - distortion.begin());
                std::copy_n(features.row(worst).begin(), dim, out.centroids.row(c).begin());
                distortion[worst] = 0;
                continue;
            }
            std::fill(mean.begin(), mean.end(), 0.0);
            for (std::size_t i : members[c]) {
                for (std::size_t j = 0; j < dim; ++j) mean[j] += features(i, j);
            }
            for (double& m : mean) m /= static_cast<double>(members[c].size());
            double old_cost = 0, new_cost = 0;
            for (std::size_t i : members[c]) {
                old_cost += canberra(features.row(i), out.centroids.row(c));
                new_cost += canberra(features.row(i), mean);
            }
            if (new_cost <= old_cost) std::copy(mean.begin(), mean.end(), out.centroids.row(c).begin());
        }
        Assignment next = assign(features, out.centroids);
        out.objective_trace.push_back(next.objective);
        const bool stable = next.cluster == current.cluster;
        current = std::move(next);
        if (stable) break;
    }
    out.assignment = std::move(current.cluster);
    out.objective = current.objective;
    return out;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: length mismatch");
    const std::size_t n = a.size();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
    std::map<std::size_t, std::size_t> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    auto c2 = [](std::size_t m) { return static_cast<double>(m) * (static_cast<double>(m) - 1) / 2; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [key, m] : joint) index += c2(m);
    for (const auto& [key, m] : ra) sa += c2(m);
    for (const auto& [key, m] : rb) sb += c2(m);
    const double total = c2(n);
    if (total == 0) return 1.0;
    const double expected = sa * sb / total;
    const double max_index = (sa + sb) / 2;
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

std::vector<double> distance_vector(const Graph& g, const EmbeddingVectors& e, NodeId focal) {
    g.check_node(focal);
    if (e.rows() != g.node_count()) throw InvalidArgument("distance_vector: embedding not aligned");
    std::vector<double> out;
    const auto a = e.row(focal);
    for (NodeId v : g.neighbors(focal)) {
        const auto b = e.row(v);
        double s = 0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double d = double(a[c]) - double(b[c]);
            s += d * d;
        }
        out.push_back(std::sqrt(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

AverageDistanceVector average_distance_vector(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) throw InvalidArgument("average_distance_vector: no members");
    AverageDistanceVector out;
    std::size_t len = 0;
    for (const auto& v : vectors) len = std::max(len, v.size());
    out.values.assign(len, 0.0);
    out.supports.assign(len, 0);
    for (const auto& v : vectors) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            out.values[j] += v[j];
            ++out.supports[j];
        }
    }
    for (std::size_t j = 0; j < len; ++j) out.values[j] /= static_cast<double>(out.supports[j]);
    return out;
}

StructureReport analyze_structure(const Graph& g, const EmbeddingMatrix& e, std::size_t k,
                                  std::uint64_t seed) {
    StructureReport r;
    r.model_id = e.model_id;
    r.clustering = kmeans_canberra(compute_ego_features(g), k, seed);
    std::vector<std::vector<std::vector<double>>> per_cluster(k);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        per_cluster[r.clustering.assignment[u]].push_back(distance_vector(g, e.vectors, u));
    }
    for (const auto& vs : per_cluster) {
        r.averages.push_back(vs.empty() ? AverageDistanceVector{} : average_distance_vector(vs));
    }
    return r;
}

std::string structure_json(const Graph& g, const StructureReport& r) {
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < r.clustering.k; ++c) {
        nlohmann::json members = nlohmann::json::array();
        nlohmann::json labels = nlohmann::json::array();
        for (NodeId u = 0; u < r.clustering.assignment.size(); ++u) {
            if (r.clustering.assignment[u] != c) continue;
            members.push_back(u);
            labels.push_back(g.label(u));
        }
        const auto centroid = r.clustering.centroids.row(c);
        clusters.push_back({{"id", c},
                            {"members", members},
                            {"labels", labels},
                            {"centroid", std::vector<double>(centroid.begin(), centroid.end())},
                            {"average_distance_vector", r.averages[c].values},
                            {"supports", r.averages[c].supports}});
    }
    std::vector<std::string> names(kEgoFeatureNames.begin(), kEgoFeatureNames.end());
    return nlohmann::json{{"model_id", r.model_id},
                          {"k", r.clustering.k},
                          {"features", names},
                          {"objective", r.clustering.objective},
                          {"iterations", r.clustering.iterations},
                          {"clusters", clusters}}
        .dump(2);
}

} // namespace embcmp
