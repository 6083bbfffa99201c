#pragma once

#include "embcmp/matrix.hpp"

#include <cstdint>
#include <functional>
#include <span>

namespace embcmp {

struct TsneConfig {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iterations = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch = 250;
    std::size_t snapshot_stride = 10;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Projection2D {
    Matrix coords; // N x 2
    std::size_t iteration = 0;
    double kl = 0.0;
};

/// Called every snapshot_stride iterations. Returning false stops the run
/// with Cancelled.
using SnapshotCallback = std::function<bool(const Projection2D&)>;

/// Perplexity actually used for n points: min(p, (n - 1) / 3), at least 1.
double effective_perplexity(double perplexity, std::size_t n);

/// Row-stochastic conditional affinities p_{j|i}, each row calibrated by
/// bisection on the Gaussian precision to entropy log2(perplexity) +- 1e-5 bits.
Matrix conditional_affinities(const Matrix& x, double perplexity);

/// Symmetrised joint affinities (P + P^T) / 2n.
Matrix joint_affinities(const Matrix& x, double perplexity);

/// Exact t-SNE. Rows are processed in a canonical (lexicographic) order, so
/// permuting the input permutes the output identically.
Projection2D tsne(const Matrix& x, const TsneConfig& cfg, const SnapshotCallback& on_snapshot = {});

/// sum p log(p / q) in nats with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Trustworthiness of embedding y for input x with k neighbours.
double trustworthiness(const Matrix& x, const Matrix& y, std::size_t k);

} // namespace embcmp
