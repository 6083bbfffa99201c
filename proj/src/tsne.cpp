#include "embcmp/tsne.hpp"

#include "embcmp/diagnostics.hpp"
#include "embcmp/error.hpp"
#include "embcmp/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace embcmp {

void TsneConfig::validate() const {
    if (!(perplexity >= 2.0) || !std::isfinite(perplexity)) throw InvalidArgument("tsne: perplexity must be >= 2");
    if (iterations == 0) throw InvalidArgument("tsne: iterations must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("tsne: learning rate must be positive");
    if (!(early_exaggeration >= 1.0)) throw InvalidArgument("tsne: exaggeration must be >= 1");
    if (snapshot_stride == 0) throw InvalidArgument("tsne: snapshot stride must be positive");
    if (!(initial_momentum >= 0.0 && initial_momentum < 1.0 && final_momentum >= 0.0 && final_momentum < 1.0)) {
        throw InvalidArgument("tsne: momentum must lie in [0, 1)");
    }
}

double effective_perplexity(double perplexity, std::size_t n) {
    const double cap = (static_cast<double>(n) - 1.0) / 3.0;
    return std::max(1.0, std::min(perplexity, cap));
}

namespace {

Matrix squared_distances(const Matrix& x) {
    const std::size_t n = x.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double t = x(i, c) - x(j, c);
                s += t * t;
            }
            d(i, j) = d(j, i) = s;
        }
    }
    return d;
}

void check_input(const Matrix& x) {
    if (x.rows() < 3) throw InvalidArgument("tsne: need at least 3 points");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw InvalidArgument("tsne: non-finite input");
    }
}

} // namespace

Matrix conditional_affinities(const Matrix& x, double perplexity) {
    check_input(x);
    const std::size_t n = x.rows();
    const Matrix d = squared_distances(x);
    const double target = std::log2(perplexity);
    Matrix p(n, n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, d(i, j));
        }
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int step = 0; step < 200; ++step) {
            double sum = 0, weighted = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0;
                    continue;
                }
                const double shifted = d(i, j) - dmin;
                row[j] = std::exp(-beta * shifted);
                sum += row[j];
                weighted += shifted * row[j];
            }
            // entropy in bits of the normalised row
            const double entropy = (std::log(sum) + beta * weighted / sum) / std::log(2.0);
            for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2 : (beta + hi) / 2;
            } else {
                hi = beta;
                beta = (beta + lo) / 2;
            }
        }
        std::copy(row.begin(), row.end(), p.row(i).begin());
    }
    return p;
}

Matrix joint_affinities(const Matrix& x, double perplexity) {
    const Matrix c = conditional_affinities(x, perplexity);
    const std::size_t n = c.rows();
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) p(i, j) = (c(i, j) + c(j, i)) / (2.0 * static_cast<double>(n));
    }
    return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("kl: length mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) continue;
        if (q[i] <= 0) throw ComputeError("kl: q is zero where p is positive");
        s += p[i] * std::log(p[i] / q[i]);
    }
    return s;
}

namespace {

std::uint64_t row_hash(std::span<const double> row, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (double v : row) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

// Student-t kernel; returns the normaliser sum over i != j.
double kernel(const Matrix& y, Matrix& num) {
    const std::size_t n = y.rows();
    double z = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num(i, i) = 0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y(i, 0) - y(j, 0);
            const double dy = y(i, 1) - y(j, 1);
            const double v = 1.0 / (1.0 + dx * dx + dy * dy);
            num(i, j) = num(j, i) = v;
            z += 2 * v;
        }
    }
    return z;
}

double current_kl(const Matrix& p, const Matrix& num, double z) {
    double s = 0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0) continue;
            s += p(i, j) * std::log(p(i, j) / (num(i, j) / z));
        }
    }
    return s;
}

} // namespace

Projection2D tsne(const Matrix& x_in, const TsneConfig& cfg, const SnapshotCallback& on_snapshot) {
    cfg.validate();
    check_input(x_in);
    const std::size_t n = x_in.rows();
    const std::size_t dim = x_in.cols();

    // canonical order: lexicographic on row content
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = x_in.row(a);
        const auto rb = x_in.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    Matrix x(n, dim);
    for (std::size_t i = 0; i < n; ++i) std::copy_n(x_in.row(order[i]).begin(), dim, x.row(i).begin());

    const double perplexity = effective_perplexity(cfg.perplexity, n);
    if (perplexity != cfg.perplexity) {
        warn("tsne: perplexity " + std::to_string(cfg.perplexity) + " infeasible for " + std::to_string(n) +
             " points, using " + std::to_string(perplexity));
    }
    const Matrix p = joint_affinities(x, perplexity);

    Matrix y(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(cfg.seed, row_hash(x.row(i), 0)));
        y(i, 0) = 1e-4 * standard_normal(rng);
        y(i, 1) = 1e-4 * standard_normal(rng);
    }

    Matrix update(n, 2), gains(n, 2, 1.0), grad(n, 2), num(n, n);
    auto emit = [&](std::size_t iteration, double kl) {
        Projection2D snap;
        snap.coords = Matrix(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            snap.coords(order[i], 0) = y(i, 0);
            snap.coords(order[i], 1) = y(i, 1);
        }
        snap.iteration = iteration;
        snap.kl = kl;
        return snap;
    };

    // After exaggeration a step that raises KL is rejected: coordinates are
    // restored, velocity and gains reset, and later steps are shortened.
    Matrix previous(n, 2);
    double z = kernel(y, num);
    double accepted_kl = std::numeric_limits<double>::infinity();
    double step_scale = 1.0;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const bool exaggerated = it < cfg.exaggeration_iterations;
        const double exaggeration = exaggerated ? cfg.early_exaggeration : 1.0;
        const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0, gy = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double m = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
                gx += m * (y(i, 0) - y(j, 0));
                gy += m * (y(i, 1) - y(j, 1));
            }
            grad(i, 0) = 4 * gx;
            grad(i, 1) = 4 * gy;
        }
        previous = y;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 2; ++c) {
                double& g = gains(i, c);
                g = (grad(i, c) > 0) != (update(i, c) > 0) ? g + 0.2 : g * 0.8;
                g = std::max(g, 0.01);
                update(i, c) = momentum * update(i, c) - step_scale * cfg.learning_rate * g * grad(i, c);
                y(i, c) += update(i, c);
            }
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += y(i, 0);
            my += y(i, 1);
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y(i, 0) -= mx;
            y(i, 1) -= my;
            if (!std::isfinite(y(i, 0)) || !std::isfinite(y(i, 1))) throw ComputeError("tsne: diverged");
        }
        const std::size_t done = it + 1;
        const bool snapshot = on_snapshot && (done % cfg.snapshot_stride == 0 || done == cfg.iterations);
        z = kernel(y, num);
        double kl = exaggerated && !snapshot ? 0.0 : current_kl(p, num, z);
        if (!exaggerated) {
            if (kl > accepted_kl) {
                y = previous;
                std::fill(update.data().begin(), update.data().end(), 0.0);
                std::fill(gains.data().begin(), gains.data().end(), 1.0);
                step_scale *= 0.5;
                z = kernel(y, num);
                kl = accepted_kl;
            } else {
                step_scale = std::min(1.0, step_scale * 1.05);
            }
            accepted_kl = kl;
        }

        if (snapshot) {
            if (!on_snapshot(emit(done, kl))) throw Cancelled();
        }
    }
    return emit(cfg.iterations, current_kl(p, num, z));
}

double trustworthiness(const Matrix& x, const Matrix& y, std::size_t k) {
    const std::size_t n = x.rows();
    if (y.rows() != n) throw InvalidArgument("trustworthiness: row mismatch");
    if (k == 0 || 2 * k >= n) throw InvalidArgument("trustworthiness: need 0 < k < n / 2");
    const Matrix dx = squared_distances(x);
    const Matrix dy = squared_distances(y);
    double penalty = 0;
    std::vector<std::size_t> idx(n - 1), input_rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto by = [&](const Matrix& d) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) idx[w++] = j;
            }
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
            });
        };
        by(dx);
        for (std::size_t r = 0; r < n - 1; ++r) input_rank[idx[r]] = r + 1;
        by(dy);
        for (std::size_t r = 0; r < k; ++r) {
            const std::size_t j = idx[r];
            if (input_rank[j] > k) penalty += static_cast<double>(input_rank[j] - k);
        }
    }
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

} // namespace embcmp
