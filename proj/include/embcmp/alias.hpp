#pragma once

#include "embcmp/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace embcmp {

/// Walker/Vose alias table: O(1) draws from a fixed discrete distribution.
class AliasTable {
public:
    AliasTable() = default;
    /// Weights must be finite and non-negative with a positive sum.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return prob_.size(); }
    bool empty() const noexcept { return prob_.empty(); }

    std::uint32_t sample(Rng& rng) const {
        const auto i = static_cast<std::uint32_t>(uniform_index(rng, prob_.size()));
        return uniform_real(rng) < prob_[i] ? i : alias_[i];
    }

    /// Probability mass the table assigns to outcome i (for tests).
    double probability(std::size_t i) const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

} // namespace embcmp
