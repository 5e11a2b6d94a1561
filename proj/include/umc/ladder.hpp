#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "umc/rational.hpp"

namespace umc {

// ============================================================================
// Dist — a distance as a ladder index, never a numeric value
// ============================================================================

/// A distance in a space whose nonzero distances come from a fixed strictly
/// decreasing ladder r_0 > r_1 > ... > r_{m-1} > 0. Encoded as the ladder
/// index, with -1 for the zero distance, so that equality and max are exact
/// integer operations. Value order: ZERO < r_{m-1} < ... < r_0.
struct Dist {
    int idx = -1;  // -1 = ZERO, otherwise a ladder index

    constexpr Dist() = default;
    constexpr explicit Dist(int ladder_index) : idx(ladder_index) {}

    [[nodiscard]] constexpr bool is_zero() const { return idx < 0; }

    static constexpr Dist zero() { return Dist(); }

    // Coarser ladder values (smaller indices) are larger distances.
    [[nodiscard]] constexpr int value_rank() const { return is_zero() ? INT_MIN_RANK : -idx; }

    friend constexpr bool operator==(Dist a, Dist b) {
        return a.is_zero() ? b.is_zero() : a.idx == b.idx;
    }
    friend constexpr std::strong_ordering operator<=>(Dist a, Dist b) {
        return a.value_rank() <=> b.value_rank();
    }

  private:
    static constexpr int INT_MIN_RANK = -(1 << 30);
};

constexpr Dist max_dist(Dist a, Dist b) { return a < b ? b : a; }

// ============================================================================
// DistanceLadder
// ============================================================================

/// Finite strictly decreasing sequence of positive rationals. Models a
/// truncation of a distance sequence that tends to 0; the limit itself is
/// never represented.
class DistanceLadder {
  public:
    explicit DistanceLadder(std::vector<Rational> values) : values_(std::move(values)) {
        if (values_.empty()) throw std::invalid_argument("ladder must be nonempty");
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (values_[j] <= Rational(0))
                throw std::invalid_argument("ladder value " + std::to_string(j) + " not positive");
            if (j > 0 && !(values_[j] < values_[j - 1]))
                throw std::invalid_argument("ladder not strictly decreasing at index " +
                                            std::to_string(j));
        }
    }

    [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
    [[nodiscard]] const Rational& value_at(int idx) const { return values_.at(idx); }
    [[nodiscard]] const std::vector<Rational>& values() const { return values_; }

    [[nodiscard]] bool valid_index(int idx) const { return idx >= 0 && idx < size(); }
    [[nodiscard]] bool valid_dist(Dist d) const { return d.is_zero() || valid_index(d.idx); }

    /// Rational value of a distance; ZERO maps to 0.
    [[nodiscard]] Rational value(Dist d) const {
        return d.is_zero() ? Rational(0) : value_at(d.idx);
    }

    [[nodiscard]] Dist coarsest() const { return Dist(0); }
    [[nodiscard]] Dist finest() const { return Dist(size() - 1); }

    [[nodiscard]] std::string format(Dist d) const {
        return d.is_zero() ? std::string("0") : format_rational(value_at(d.idx));
    }

    friend bool operator==(const DistanceLadder& a, const DistanceLadder& b) {
        return a.values_ == b.values_;
    }

  private:
    std::vector<Rational> values_;
};

}  // namespace umc
