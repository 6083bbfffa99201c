#pragma once

#include "embcmp/embedding.hpp"
#include "embcmp/matrix.hpp"
#include "embcmp/metrics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace embcmp {

inline constexpr std::size_t kDefaultPairCap = 500'000;

struct PairSampling {
    /// nullopt enumerates every unordered pair.
    std::optional<std::size_t> max_pairs;
    std::uint64_t seed = 1;

    /// Every pair up to kDefaultPairCap, a seeded sample of that size above it.
    static PairSampling capped(std::size_t node_count, std::uint64_t seed);
};

/// One row per node pair: |normalized metric difference| per metric, and
/// the Euclidean distance of the two embedding rows.
struct PairwiseDataset {
    Matrix features;
    std::vector<double> target;
    std::vector<std::pair<NodeId, NodeId>> pairs;

    std::size_t size() const noexcept { return target.size(); }
};

PairwiseDataset build_pairwise_dataset(const MetricsTable& t, const EmbeddingMatrix& e,
                                       const PairSampling& sampling);
/// Same, from an already normalized N x K metric matrix.
PairwiseDataset build_pairwise_dataset(const Matrix& normalized, const EmbeddingVectors& e,
                                       const PairSampling& sampling);

struct TrainTestSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle, first round(fraction * n) rows train. Both halves sorted.
TrainTestSplit split_rows(std::size_t n, double train_fraction, std::uint64_t seed);

/// 1 - SS_res / SS_tot; 0 when the targets have no variance.
double r2_score(std::span<const double> y, std::span<const double> predicted);

struct TreeParams {
    std::size_t max_depth = 10;
    std::size_t min_leaf = 20;
};

/// CART regression tree on squared error.
class RegressionTree {
public:
    struct Node {
        // leaf when feature < 0
        int feature = -1;
        double threshold = 0.0;
        double value = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::size_t samples = 0;
    };

    void fit(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
             const TreeParams& params);

    double predict(std::span<const double> row) const;
    std::vector<double> predict(const Matrix& x, std::span<const std::size_t> rows) const;

    /// Impurity decrease per feature, normalized to sum 1 (all zero without splits).
    const std::vector<double>& importances() const noexcept { return importances_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const noexcept { return depth_; }

private:
    std::vector<Node> nodes_;
    std::vector<double> importances_;
    std::size_t depth_ = 0;
};

struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;

    double predict(std::span<const double> row) const;
};

/// Least squares via normal equations with 1e-10 ridge jitter.
LinearModel fit_ols(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows);

/// Minimises (1/2n)|y - Xb - b0|^2 + lambda |b|_1 by cyclic coordinate descent.
LinearModel fit_lasso(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                      double lambda, double tolerance = 1e-8, std::size_t max_sweeps = 100'000);

struct RegressionOptions {
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    TreeParams tree;
    double lasso_lambda = 1e-3;
    double r2_gate = 0.70;
};

struct RegressorScore {
    double r2_train = 0.0;
    double r2_test = 0.0;
};

struct RegressionReport {
    std::string model_id;
    std::string dataset;
    RegressorScore decision_tree;
    RegressorScore ols;
    RegressorScore lasso;
    std::array<double, kMetricCount> importances{};
    std::array<double, kMetricCount> weighted{};
    LinearModel ols_model;
    LinearModel lasso_model;
    bool selected = false;
};

/// Fits all three regressors on one seeded 80/20 split.
RegressionReport run_regression(const PairwiseDataset& d, const RegressionOptions& options,
                                std::string model_id, std::string dataset);

struct ModelRanking {
    std::string model_id;
    bool ranked = false;
    std::size_t reports_used = 0;
    /// Mean of importance x R2 over gated reports.
    std::array<double, kMetricCount> score{};
    /// Strictly above the median score.
    std::array<bool, kMetricCount> selected{};

    /// Metric with the highest score (lowest index on ties).
    Metric top() const;
};

struct FeatureRanking {
    std::vector<ModelRanking> models;
    /// Union of selected metrics, ordered by descending mean score over ranked models.
    std::vector<Metric> rows;
};

FeatureRanking rank_features(const std::vector<RegressionReport>& reports, double r2_gate = 0.70);

std::string report_json(const RegressionReport& r);
std::string reports_json(const std::vector<RegressionReport>& reports, const FeatureRanking& ranking);
/// Importance table: one row per selected metric, one column per model, percentages.
std::string ranking_csv(const FeatureRanking& ranking);

} // namespace embcmp
