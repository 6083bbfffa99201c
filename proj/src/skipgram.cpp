#include "embcmp/embedding.hpp"

#include "embcmp/alias.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace embcmp {

namespace {

inline float sigmoid(float x) {
    x = std::clamp(x, -30.0f, 30.0f);
    return 1.0f / (1.0f + std::exp(-x));
}

// log(1 + e^x)
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline float softplus(float x) {
    return std::max(x, 0.0f) + std::log1p(std::exp(-std::abs(x)));
}

inline float dot(const float* a, const float* b, std::size_t d) {
    float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < d; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

struct Trainer {
    const WalkCorpus& corpus;
    const WalkConfig& cfg;
    const AliasTable& noise;
    EmbeddingVectors& syn0;
    EmbeddingVectors& syn1;
    std::size_t total_tokens;

    struct Tally {
        double loss = 0.0;
        std::size_t pairs = 0;
    };

    // Trains on walks order[begin, end). `processed` counts tokens seen so
    // far in the whole run and drives the learning-rate schedule.
    Tally run(std::span<const std::size_t> order, std::size_t processed, Rng& rng) const {
        const std::size_t d = cfg.dimension;
        std::vector<float> grad(d);
        Tally tally;
        const double floor_fraction = 0.05;
        for (std::size_t w : order) {
            const auto walk = corpus.walk(w);
            const std::size_t len = walk.size();
            for (std::size_t i = 0; i < len; ++i, ++processed) {
                const double progress =
                    std::min(1.0, static_cast<double>(processed) / static_cast<double>(total_tokens));
                const auto alpha = static_cast<float>(cfg.initial_learning_rate *
                                                      (1.0 - (1.0 - floor_fraction) * progress));
                const NodeId center = walk[i];
                const std::size_t reach = cfg.window - uniform_index(rng, cfg.window);
                const std::size_t lo = i >= reach ? i - reach : 0;
                const std::size_t hi = std::min(len - 1, i + reach);
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i) {
                        continue;
                    }
                    float* in = syn0.row(walk[j]).data();
                    std::fill(grad.begin(), grad.end(), 0.0f);
                    float pair_loss = 0.0f;
                    for (std::size_t s = 0; s <= cfg.negatives; ++s) {
                        NodeId target = center;
                        float label = 1.0f;
                        if (s > 0) {
                            target = noise.sample(rng);
                            if (target == center) {
                                continue;
                            }
                            label = 0.0f;
                        }
                        float* out = syn1.row(target).data();
                        const float f = dot(in, out, d);
                        pair_loss += label > 0.0f ? softplus(-f) : softplus(f);
                        const float g = (label - sigmoid(f)) * alpha;
                        for (std::size_t c = 0; c < d; ++c) {
                            grad[c] += g * out[c];
                        }
                        for (std::size_t c = 0; c < d; ++c) {
                            out[c] += g * in[c];
                        }
                    }
                    for (std::size_t c = 0; c < d; ++c) {
                        in[c] += grad[c];
                    }
                    tally.loss += pair_loss;
                    ++tally.pairs;
                }
            }
        }
        return tally;
    }
};

} // namespace

SkipgramResult train_skipgram(const WalkCorpus& corpus, std::size_t vocab_size,
                              const WalkConfig& cfg, EmbeddingVectors* output_vectors) {
    cfg.validate();
    if (corpus.empty() || corpus.token_count() == 0) {
        throw InvalidArgument("train_skipgram: empty corpus");
    }
    std::vector<double> counts(vocab_size, 0.0);
    for (NodeId t : corpus.tokens()) {
        if (t >= vocab_size) {
            throw InvalidArgument("train_skipgram: token outside vocabulary");
        }
        counts[t] += 1.0;
    }
    for (auto& c : counts) {
        c = std::pow(c, 0.75);
    }
    const AliasTable noise(counts);

    const std::size_t d = cfg.dimension;
    SkipgramResult result;
    result.vectors = EmbeddingVectors(vocab_size, d);
    EmbeddingVectors syn1(vocab_size, d, 0.0f);
    {
        Rng init(derive_seed(cfg.seed, 0x1417ULL));
        for (auto& x : result.vectors.data()) {
            x = static_cast<float>((uniform_real(init) - 0.5) / static_cast<double>(d));
        }
    }

    const std::size_t total = cfg.epochs * corpus.token_count();
    const Trainer trainer{corpus, cfg, noise, result.vectors, syn1, total};
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffler(derive_seed(cfg.seed, 0x0bdeULL, epoch));
        shuffle(order.begin(), order.end(), shuffler);
        const std::size_t processed = epoch * corpus.token_count();

        Trainer::Tally tally;
        if (cfg.workers <= 1) {
            Rng rng(derive_seed(cfg.seed, 0x7a1dULL, epoch));
            tally = trainer.run(order, processed, rng);
        } else {
            // lock-free shared updates; results depend on thread scheduling
            const std::size_t workers = std::min(cfg.workers, order.size());
            std::vector<Trainer::Tally> tallies(workers);
            std::vector<std::thread> threads;
            const std::size_t chunk = (order.size() + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w) {
                const std::size_t b = std::min(order.size(), w * chunk);
                const std::size_t e = std::min(order.size(), b + chunk);
                threads.emplace_back([&, w, b, e] {
                    Rng rng(derive_seed(cfg.seed, 0x7a1dULL + w + 1, epoch));
                    std::size_t before = processed;
                    for (std::size_t k = 0; k < b; ++k) {
                        before += corpus.walk(order[k]).size();
                    }
                    tallies[w] = trainer.run(std::span(order).subspan(b, e - b), before, rng);
                });
            }
            for (auto& t : threads) {
                t.join();
            }
            for (const auto& t : tallies) {
                tally.loss += t.loss;
                tally.pairs += t.pairs;
            }
        }
        const double mean = tally.pairs > 0 ? tally.loss / static_cast<double>(tally.pairs) : 0.0;
        if (!std::isfinite(mean)) {
            std::ostringstream msg;
            msg << "train_skipgram: non-finite loss in epoch " << epoch << " (pairs=" << tally.pairs
                << ", initial_learning_rate=" << cfg.initial_learning_rate
                << ", dimension=" << d << ")";
            throw ComputeError(msg.str());
        }
        result.epoch_loss.push_back(mean);
    }
    for (float x : result.vectors.data()) {
        if (!std::isfinite(x)) {
            throw ComputeError("train_skipgram: non-finite embedding entry");
        }
    }
    if (output_vectors) {
        *output_vectors = std::move(syn1);
    }
    return result;
}

double sgns_loss(const EmbeddingVectors& in, const EmbeddingVectors& out,
                 std::span<const std::pair<NodeId, NodeId>> pairs,
                 std::span<const std::vector<NodeId>> negatives) {
    if (pairs.size() != negatives.size()) {
        throw InvalidArgument("sgns_loss: one negative list per pair required");
    }
    const std::size_t d = in.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [center, context] = pairs[i];
        const float* a = in.row(context).data();
        loss += softplus(static_cast<double>(-dot(a, out.row(center).data(), d)));
        for (NodeId neg : negatives[i]) {
            loss += softplus(static_cast<double>(dot(a, out.row(neg).data(), d)));
        }
    }
    return pairs.empty() ? 0.0 : loss / static_cast<double>(pairs.size());
}

} // namespace embcmp
