#pragma once

#include "embcmp/embedding.hpp"
#include "embcmp/graph.hpp"
#include "embcmp/matrix.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace embcmp {

inline constexpr std::size_t kEgoFeatureCount = 7;

/// degree, edges_num, density, twoalter_num, average_alter_alter_num,
/// average_degree, clustering_coefficient
extern const std::array<std::string_view, kEgoFeatureCount> kEgoFeatureNames;

/// N x 7 ego-network features. Isolated nodes get all zeros.
Matrix compute_ego_features(const Graph& g);

/// sum |u_i - v_i| / (|u_i| + |v_i|), with 0/0 taken as 0.
double canberra(std::span<const double> u, std::span<const double> v);

struct EgoClustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;
    Matrix centroids;
    double objective = 0.0;
    /// Objective after every assignment step.
    std::vector<double> objective_trace;
    std::size_t iterations = 0;
};

/// k-means under Canberra distance. Farthest-point seeding from a random
/// first point; a centroid moves to its cluster mean only when that does not
/// raise the cluster's distortion, so the objective never increases.
EgoClustering kmeans_canberra(const Matrix& features, std::size_t k, std::uint64_t seed,
                              std::size_t max_iterations = 100);

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Sorted Euclidean distances from the focal row to each neighbour's row.
std::vector<double> distance_vector(const Graph& g, const EmbeddingVectors& e, NodeId focal);

struct AverageDistanceVector {
    std::vector<double> values;
    std::vector<std::size_t> supports;
};

/// Ragged per-dimension mean: dimension j averages the vectors longer than j.
AverageDistanceVector average_distance_vector(std::span<const std::vector<double>> vectors);

struct StructureReport {
    std::string model_id;
    EgoClustering clustering;
    std::vector<AverageDistanceVector> averages;
};

StructureReport analyze_structure(const Graph& g, const EmbeddingMatrix& e, std::size_t k,
                                  std::uint64_t seed);

std::string structure_json(const Graph& g, const StructureReport& r);

} // namespace embcmp
