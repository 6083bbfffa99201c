#include "embcmp/regression.hpp"

#include "embcmp/error.hpp"
#include "embcmp/random.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace embcmp {

PairSampling PairSampling::capped(std::size_t node_count, std::uint64_t seed) {
    PairSampling s;
    s.seed = seed;
    const std::size_t total = node_count * (node_count - (node_count > 0)) / 2;
    if (total > kDefaultPairCap) s.max_pairs = kDefaultPairCap;
    return s;
}

namespace {

// Pairs (u, v), u < v, listed by increasing linear index in row-major order.
std::vector<std::pair<NodeId, NodeId>> select_pairs(std::size_t n, const PairSampling& sampling) {
    const std::size_t total = n * (n - 1) / 2;
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (!sampling.max_pairs || *sampling.max_pairs >= total) {
        pairs.reserve(total);
        for (NodeId u = 0; u < n; ++u) {
            for (NodeId v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
        }
        return pairs;
    }
    // Floyd's algorithm: uniform subset without replacement
    const std::size_t m = *sampling.max_pairs;
    Rng rng(derive_seed(sampling.seed, 0x9a125ULL));
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(m * 2);
    for (std::size_t j = total - m; j < total; ++j) {
        const std::size_t t = uniform_index(rng, j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::size_t> idx(chosen.begin(), chosen.end());
    std::sort(idx.begin(), idx.end());
    pairs.reserve(m);
    std::size_t row_start = 0;
    NodeId u = 0;
    for (std::size_t k : idx) {
        while (k >= row_start + (n - 1 - u)) {
            row_start += n - 1 - u;
            ++u;
        }
        pairs.emplace_back(u, static_cast<NodeId>(u + 1 + (k - row_start)));
    }
    return pairs;
}

} // namespace

PairwiseDataset build_pairwise_dataset(const Matrix& normalized, const EmbeddingVectors& e,
                                       const PairSampling& sampling) {
    const std::size_t n = normalized.rows();
    if (n < 2) throw InvalidArgument("pairwise dataset needs at least two nodes");
    if (e.rows() != n) throw InvalidArgument("metrics and embedding are not aligned");
    PairwiseDataset d;
    d.pairs = select_pairs(n, sampling);
    const std::size_t k = normalized.cols();
    d.features = Matrix(d.pairs.size(), k);
    d.target.resize(d.pairs.size());
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
        const auto [u, v] = d.pairs[i];
        for (std::size_t f = 0; f < k; ++f) d.features(i, f) = std::abs(normalized(u, f) - normalized(v, f));
        const auto a = e.row(u);
        const auto b = e.row(v);
        double s = 0;
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double diff = double(a[c]) - double(b[c]);
            s += diff * diff;
        }
        d.target[i] = std::sqrt(s);
        if (!std::isfinite(d.target[i])) throw DataError("non-finite embedding distance");
    }
    return d;
}

PairwiseDataset build_pairwise_dataset(const MetricsTable& t, const EmbeddingMatrix& e,
                                       const PairSampling& sampling) {
    return build_pairwise_dataset(normalize_metrics(t), e.vectors, sampling);
}

TrainTestSplit split_rows(std::size_t n, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidArgument("train fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x5b117ULL));
    shuffle(order.begin(), order.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    TrainTestSplit s;
    s.train.assign(order.begin(), order.begin() + cut);
    s.test.assign(order.begin() + cut, order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

double r2_score(std::span<const double> y, std::span<const double> predicted) {
    if (y.size() != predicted.size()) throw InvalidArgument("r2: length mismatch");
    if (y.empty()) return 0.0;
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (y[i] - predicted[i]) * (y[i] - predicted[i]);
    }
    if (ss_tot <= 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

// ---- decision tree ----

void RegressionTree::fit(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                         const TreeParams& params) {
    if (rows.empty()) throw InvalidArgument("tree: no training rows");
    if (params.min_leaf == 0) throw InvalidArgument("tree: min_leaf must be positive");
    const std::size_t nf = x.cols();
    const std::size_t n = rows.size();
    nodes_.clear();
    importances_.assign(nf, 0.0);
    depth_ = 0;

    // one presorted copy of the rows per feature; ties ordered by target so
    // scan sums do not depend on the input row order
    std::vector<std::vector<std::size_t>> order(nf, std::vector<std::size_t>(rows.begin(), rows.end()));
    for (std::size_t f = 0; f < nf; ++f) {
        std::sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) {
            if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
            if (y[a] != y[b]) return y[a] < y[b];
            return a < b;
        });
    }
    std::vector<char> goes_left(x.rows(), 0);
    std::vector<std::size_t> buffer(n);

    struct Task {
        std::uint32_t node;
        std::size_t lo, hi, depth;
    };
    std::vector<Task> stack;
    nodes_.push_back({});
    stack.push_back({0, 0, n, 0});

    while (!stack.empty()) {
        const Task t = stack.back();
        stack.pop_back();
        const std::size_t count = t.hi - t.lo;
        depth_ = std::max(depth_, t.depth);

        const auto& base = order[0];
        double total = 0, lo_y = y[base[t.lo]], hi_y = lo_y;
        for (std::size_t i = t.lo; i < t.hi; ++i) {
            const double v = y[base[i]];
            total += v;
            lo_y = std::min(lo_y, v);
            hi_y = std::max(hi_y, v);
        }
        Node& node = nodes_[t.node];
        node.samples = count;
        node.value = lo_y == hi_y ? lo_y : total / static_cast<double>(count);

        if (lo_y == hi_y || t.depth >= params.max_depth || count < 2 * params.min_leaf) continue;

        // scan centred targets so the gain is not swamped by the node mean;
        // a candidate must beat the incumbent by a relative margin, which
        // keeps near-ties on the lowest feature and threshold
        const double mean = total / static_cast<double>(count);
        double sse = 0;
        for (std::size_t i = t.lo; i < t.hi; ++i) sse += (y[base[i]] - mean) * (y[base[i]] - mean);
        const double margin = 1e-10 * sse;
        int best_f = -1;
        std::size_t best_k = 0;
        double best_gain = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& o = order[f];
            double s = 0;
            for (std::size_t i = t.lo; i < t.hi; ++i) s += y[o[i]] - mean;
            const double parent = s * s / static_cast<double>(count);
            double left = 0;
            for (std::size_t k = 1; k < count; ++k) {
                left += y[o[t.lo + k - 1]] - mean;
                if (k < params.min_leaf) continue;
                if (count - k < params.min_leaf) break;
                if (!(x(o[t.lo + k - 1], f) < x(o[t.lo + k], f))) continue;
                const double right = s - left;
                const double gain = left * left / static_cast<double>(k) +
                                    right * right / static_cast<double>(count - k) - parent;
                if (gain > best_gain + margin) {
                    best_gain = gain;
                    best_f = static_cast<int>(f);
                    best_k = k;
                }
            }
        }
        if (best_f < 0) continue;

        const auto& ob = order[best_f];
        const double a = x(ob[t.lo + best_k - 1], best_f);
        const double b = x(ob[t.lo + best_k], best_f);
        double threshold = a + (b - a) / 2;
        if (!(threshold < b)) threshold = a;
        for (std::size_t i = t.lo; i < t.hi; ++i) goes_left[ob[i]] = i < t.lo + best_k;
        for (std::size_t f = 0; f < nf; ++f) {
            auto& o = order[f];
            std::size_t l = 0, r = best_k;
            for (std::size_t i = t.lo; i < t.hi; ++i) {
                if (goes_left[o[i]]) buffer[l++] = o[i];
                else buffer[r++] = o[i];
            }
            std::copy(buffer.begin(), buffer.begin() + count, o.begin() + t.lo);
        }
        importances_[best_f] += best_gain;

        const auto left_id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        Node& parent = nodes_[t.node];
        parent.feature = best_f;
        parent.threshold = threshold;
        parent.left = left_id;
        parent.right = left_id + 1;
        stack.push_back({left_id + 1, t.lo + best_k, t.hi, t.depth + 1});
        stack.push_back({left_id, t.lo, t.lo + best_k, t.depth + 1});
    }

    const double sum = std::accumulate(importances_.begin(), importances_.end(), 0.0);
    if (sum > 0) {
        for (double& v : importances_) v /= sum;
    }
}

double RegressionTree::predict(std::span<const double> row) const {
    if (nodes_.empty()) throw InvalidArgument("tree: not fitted");
    std::uint32_t i = 0;
    while (nodes_[i].feature >= 0) {
        i = row[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    }
    return nodes_[i].value;
}

std::vector<double> RegressionTree::predict(const Matrix& x, std::span<const std::size_t> rows) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict(x.row(rows[i]));
    return out;
}

// ---- linear models ----

double LinearModel::predict(std::span<const double> row) const {
    double s = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) s += coefficients[j] * row[j];
    return s;
}

LinearModel fit_ols(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows) {
    if (rows.empty()) throw InvalidArgument("ols: no training rows");
    const std::size_t k = x.cols();
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(k + 1);
    Eigen::VectorXd z(k + 1);
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < k; ++j) z[j] = x(r, j);
        z[k] = 1.0;
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(z);
        xty += y[r] * z;
    }
    xtx = xtx.selfadjointView<Eigen::Lower>();
    xtx.diagonal().array() += 1e-10;
    const Eigen::VectorXd b = xtx.ldlt().solve(xty);
    if (!b.allFinite()) throw ComputeError("ols: singular normal equations");
    LinearModel m;
    m.coefficients.assign(b.data(), b.data() + k);
    m.intercept = b[k];
    return m;
}

LinearModel fit_lasso(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                      double lambda, double tolerance, std::size_t max_sweeps) {
    if (rows.empty()) throw InvalidArgument("lasso: no training rows");
    if (!(lambda >= 0.0)) throw InvalidArgument("lasso: lambda must be non-negative");
    const std::size_t k = x.cols();
    const std::size_t n = rows.size();
    const double nd = static_cast<double>(n);

    std::vector<double> mean_x(k, 0.0);
    double mean_y = 0;
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < k; ++j) mean_x[j] += x(r, j);
        mean_y += y[r];
    }
    for (double& m : mean_x) m /= nd;
    mean_y /= nd;

    // centered, column-major
    std::vector<double> xc(k * n);
    std::vector<double> norm(k, 0.0);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double v = x(rows[i], j) - mean_x[j];
            xc[j * n + i] = v;
            norm[j] += v * v;
        }
        resid[i] = y[rows[i]] - mean_y;
    }

    std::vector<double> b(k, 0.0);
    const double threshold = nd * lambda;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (norm[j] <= 0.0) continue;
            const double* col = &xc[j * n];
            double rho = 0;
            for (std::size_t i = 0; i < n; ++i) rho += col[i] * resid[i];
            rho += norm[j] * b[j];
            double next = 0.0;
            if (rho > threshold) next = (rho - threshold) / norm[j];
            else if (rho < -threshold) next = (rho + threshold) / norm[j];
            const double delta = next - b[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * col[i];
                b[j] = next;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < tolerance) break;
    }
    LinearModel m;
    m.coefficients = b;
    m.intercept = mean_y;
    for (std::size_t j = 0; j < k; ++j) m.intercept -= b[j] * mean_x[j];
    return m;
}

// ---- reports ----

namespace {

template <typename Predict>
RegressorScore score(const PairwiseDataset& d, const TrainTestSplit& s, Predict predict) {
    auto eval = [&](const std::vector<std::size_t>& rows) {
        std::vector<double> truth(rows.size()), pred(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            truth[i] = d.target[rows[i]];
            pred[i] = predict(d.features.row(rows[i]));
        }
        return r2_score(truth, pred);
    };
    return {eval(s.train), eval(s.test)};
}

} // namespace

RegressionReport run_regression(const PairwiseDataset& d, const RegressionOptions& options,
                                std::string model_id, std::string dataset) {
    if (d.size() < 2) throw InvalidArgument("regression needs at least two pairs");
    if (d.features.cols() != kMetricCount) throw InvalidArgument("regression expects one column per metric");
    const TrainTestSplit split = split_rows(d.size(), options.train_fraction, options.seed);
    if (split.train.empty() || split.test.empty()) throw InvalidArgument("split leaves an empty side");

    RegressionReport r;
    r.model_id = std::move(model_id);
    r.dataset = std::move(dataset);

    RegressionTree tree;
    tree.fit(d.features, d.target, split.train, options.tree);
    r.decision_tree = score(d, split, [&](std::span<const double> row) { return tree.predict(row); });
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        r.importances[k] = tree.importances()[k];
        r.weighted[k] = r.importances[k] * r.decision_tree.r2_test;
    }
    r.selected = r.decision_tree.r2_test > options.r2_gate;

    r.ols_model = fit_ols(d.features, d.target, split.train);
    r.ols = score(d, split, [&](std::span<const double> row) { return r.ols_model.predict(row); });
    r.lasso_model = fit_lasso(d.features, d.target, split.train, options.lasso_lambda);
    r.lasso = score(d, split, [&](std::span<const double> row) { return r.lasso_model.predict(row); });
    return r;
}

Metric ModelRanking::top() const {
    const auto it = std::max_element(score.begin(), score.end());
    return kAllMetrics[static_cast<std::size_t>(it - score.begin())];
}

FeatureRanking rank_features(const std::vector<RegressionReport>& reports, double r2_gate) {
    FeatureRanking out;
    for (const auto& r : reports) {
        auto it = std::find_if(out.models.begin(), out.models.end(),
                               [&](const ModelRanking& m) { return m.model_id == r.model_id; });
        if (it == out.models.end()) {
            out.models.push_back({});
            out.models.back().model_id = r.model_id;
            it = out.models.end() - 1;
        }
        if (!(r.decision_tree.r2_test > r2_gate)) continue;
        ++it->reports_used;
        for (std::size_t k = 0; k < kMetricCount; ++k) it->score[k] += r.importances[k] * r.decision_tree.r2_test;
    }
    std::array<double, kMetricCount> overall{};
    for (auto& m : out.models) {
        if (m.reports_used == 0) continue;
        m.ranked = true;
        for (double& s : m.score) s /= static_cast<double>(m.reports_used);
        std::array<double, kMetricCount> sorted = m.score;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[kMetricCount / 2];
        for (std::size_t k = 0; k < kMetricCount; ++k) {
            m.selected[k] = m.score[k] > median;
            overall[k] += m.score[k];
        }
    }
    for (std::size_t k = 0; k < kMetricCount; ++k) {
        const bool any = std::any_of(out.models.begin(), out.models.end(),
                                     [&](const ModelRanking& m) { return m.ranked && m.selected[k]; });
        if (any) out.rows.push_back(kAllMetrics[k]);
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [&](Metric a, Metric b) { return overall[index(a)] > overall[index(b)]; });
    return out;
}

namespace {

nlohmann::json metric_map(const std::array<double, kMetricCount>& v) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t k = 0; k < kMetricCount; ++k) j[std::string(metric_name(kAllMetrics[k]))] = v[k];
    return j;
}

nlohmann::json linear_entry(const RegressionReport& r, const char* name, const RegressorScore& s,
                            const LinearModel& m) {
    std::array<double, kMetricCount> coef{};
    std::copy(m.coefficients.begin(), m.coefficients.end(), coef.begin());
    return {{"model_id", r.model_id}, {"dataset", r.dataset}, {"regressor", name},
            {"r2_train", s.r2_train}, {"r2_test", s.r2_test}, {"coefficients", metric_map(coef)},
            {"intercept", m.intercept}};
}

nlohmann::json report_entries(const RegressionReport& r) {
    nlohmann::json tree = {{"model_id", r.model_id},
                           {"dataset", r.dataset},
                           {"regressor", "decision_tree"},
                           {"r2_train", r.decision_tree.r2_train},
                           {"r2_test", r.decision_tree.r2_test},
                           {"importances", metric_map(r.importances)},
                           {"weighted", metric_map(r.weighted)},
                           {"selected", r.selected}};
    return nlohmann::json::array(
        {tree, linear_entry(r, "ols", r.ols, r.ols_model), linear_entry(r, "lasso", r.lasso, r.lasso_model)});
}

} // namespace

std::string report_json(const RegressionReport& r) { return report_entries(r).dump(2); }

std::string reports_json(const std::vector<RegressionReport>& reports, const FeatureRanking& ranking) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& r : reports) {
        for (auto& e : report_entries(r)) entries.push_back(std::move(e));
    }
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : ranking.models) {
        nlohmann::json selected = nlohmann::json::array();
        for (std::size_t k = 0; k < kMetricCount; ++k) {
            if (m.selected[k]) selected.push_back(std::string(metric_name(kAllMetrics[k])));
        }
        models.push_back({{"model_id", m.model_id},
                          {"ranked", m.ranked},
                          {"reports_used", m.reports_used},
                          {"scores", metric_map(m.score)},
                          {"selected", selected},
                          {"top", m.ranked ? nlohmann::json(std::string(metric_name(m.top()))) : nlohmann::json(nullptr)}});
    }
    nlohmann::json rows = nlohmann::json::array();
    for (Metric m : ranking.rows) rows.push_back(std::string(metric_name(m)));
    return nlohmann::json{{"reports", entries}, {"ranking", {{"models", models}, {"rows", rows}}}}.dump(2);
}

std::string ranking_csv(const FeatureRanking& ranking) {
    std::ostringstream out;
    out << "metric";
    for (const auto& m : ranking.models) out << ',' << m.model_id;
    out << '\n';
    char buf[32];
    for (Metric metric : ranking.rows) {
        out << metric_name(metric);
        for (const auto& m : ranking.models) {
            if (m.ranked) {
                std::snprintf(buf, sizeof buf, "%.2f", 100.0 * m.score[index(metric)]);
                out << ',' << buf;
            } else {
                out << ",";
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace embcmp
