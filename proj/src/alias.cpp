#include "embcmp/alias.hpp"

#include "embcmp/error.hpp"

#include <cmath>

namespace embcmp {

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) {
        throw InvalidArgument("alias table: no outcomes");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("alias table: weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("alias table: weights sum to zero");
    }
    prob_.resize(n);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : large) {
        prob_[i] = 1.0;
        alias_[i] = i;
    }
    // leftovers from rounding
    for (auto i : small) {
        prob_[i] = 1.0;
        alias_[i] = i;
    }
}

double AliasTable::probability(std::size_t i) const {
    const double n = static_cast<double>(prob_.size());
    double p = prob_[i] / n;
    for (std::size_t j = 0; j < prob_.size(); ++j) {
        if (alias_[j] == i && j != i) {
            p += (1.0 - prob_[j]) / n;
        }
    }
    return p;
}

} // namespace embcmp
