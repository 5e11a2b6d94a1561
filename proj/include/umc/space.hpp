#pragma once

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "umc/ladder.hpp"

namespace umc {

/// Structurally bad input (non-square matrix, out-of-range index, empty
/// point set). Kept distinct from metric violations, which are data.
struct MalformedInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ============================================================================
// FiniteUltrametricSpace
// ============================================================================

enum class ViolationKind { Asymmetry, ZeroDiagonal, StrongTriangle, Indiscernibles };

inline const char* violation_kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::Asymmetry: return "asymmetry";
        case ViolationKind::ZeroDiagonal: return "zero-diagonal";
        case ViolationKind::StrongTriangle: return "strong-triangle";
        case ViolationKind::Indiscernibles: return "indiscernibles";
    }
    return "?";
}

/// First metric violation in deterministic scan order. Re-reading the cited
/// matrix entries reproduces the offence.
struct ViolationWitness {
    ViolationKind kind;
    std::vector<int> points;     // the offending pair or triple
    std::vector<Dist> distances; // the entries involved, in cited order
};

/// Labeled points with a ladder-indexed ultrametric distance matrix.
/// Immutable once built; safe to share read-only across threads.
class FiniteUltrametricSpace {
  public:
    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] const std::string& label(int p) const { return labels_.at(p); }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
    [[nodiscard]] const DistanceLadder& ladder() const { return ladder_; }

    [[nodiscard]] Dist dist(int x, int y) const { return Dist(entries_[flat(x, y)]); }
    [[nodiscard]] Rational dist_value(int x, int y) const { return ladder_.value(dist(x, y)); }

    [[nodiscard]] bool valid_point(int p) const { return p >= 0 && p < n_; }

    /// Matrix as rows of raw indices (-1 = zero), the serialization form.
    [[nodiscard]] std::vector<std::vector<int>> matrix_rows() const {
        std::vector<std::vector<int>> rows(n_, std::vector<int>(n_));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) rows[i][j] = entries_[flat(i, j)];
        return rows;
    }

    /// Construction bypassing metric validation. For internal use where
    /// validity holds by construction, and for negative-control tests.
    static FiniteUltrametricSpace unchecked(std::vector<std::string> labels,
                                            DistanceLadder ladder,
                                            const std::vector<std::vector<int>>& rows) {
        check_shape(labels, ladder, rows);
        return FiniteUltrametricSpace(std::move(labels), std::move(ladder), rows);
    }

    static void check_shape(const std::vector<std::string>& labels, const DistanceLadder& ladder,
                            const std::vector<std::vector<int>>& rows) {
        const auto n = labels.size();
        if (n == 0) throw MalformedInput("space must have at least one point");
        if (rows.size() != n) throw MalformedInput("matrix is not square");
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n) throw MalformedInput("matrix is not square");
            for (std::size_t j = 0; j < n; ++j)
                if (rows[i][j] < -1 || rows[i][j] >= ladder.size())
                    throw MalformedInput("matrix entry (" + std::to_string(i) + "," +
                                         std::to_string(j) + ") is not -1 or a ladder index");
        }
    }

  private:
    FiniteUltrametricSpace(std::vector<std::string> labels, DistanceLadder ladder,
                           const std::vector<std::vector<int>>& rows)
        : labels_(std::move(labels)),
          ladder_(std::move(ladder)),
          n_(static_cast<int>(labels_.size())) {
        entries_.resize(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) entries_[flat(i, j)] = rows[i][j];
    }

    [[nodiscard]] std::size_t flat(int x, int y) const {
        return static_cast<std::size_t>(x) * n_ + y;
    }

    std::vector<std::string> labels_;
    DistanceLadder ladder_;
    int n_;
    std::vector<int> entries_;
};

using ValidationResult = std::variant<FiniteUltrametricSpace, ViolationWitness>;

/// Checks the ultrametric axioms in deterministic scan order: the diagonal,
/// then pairs (symmetry, identity of indiscernibles), then triples
/// (strong triangle inequality), each lexicographically. Returns the space
/// or the first violation found. Structural problems throw MalformedInput.
inline ValidationResult validate_ultrametric(std::vector<std::string> labels,
                                             DistanceLadder ladder,
                                             const std::vector<std::vector<int>>& rows) {
    FiniteUltrametricSpace::check_shape(labels, ladder, rows);
    const int n = static_cast<int>(labels.size());
    const auto d = [&](int x, int y) { return Dist(rows[x][y]); };

    for (int i = 0; i < n; ++i)
        if (!d(i, i).is_zero())
            return ViolationWitness{ViolationKind::ZeroDiagonal, {i}, {d(i, i)}};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (d(i, j) != d(j, i))
                return ViolationWitness{ViolationKind::Asymmetry, {i, j}, {d(i, j), d(j, i)}};
            if (d(i, j).is_zero())
                return ViolationWitness{ViolationKind::Indiscernibles, {i, j}, {d(i, j)}};
        }
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                if (z == x || z == y) continue;
                if (d(x, y) > max_dist(d(x, z), d(y, z)))
                    return ViolationWitness{
                        ViolationKind::StrongTriangle, {x, y, z}, {d(x, y), d(x, z), d(y, z)}};
            }
    return FiniteUltrametricSpace::unchecked(std::move(labels), std::move(ladder), rows);
}

inline std::string describe_violation(const ViolationWitness& w, const DistanceLadder& ladder) {
    std::string s = violation_kind_name(w.kind);
    s += " at (";
    for (std::size_t i = 0; i < w.points.size(); ++i)
        s += (i ? "," : "") + std::to_string(w.points[i]);
    s += "), distances";
    for (const Dist d : w.distances) s += " " + ladder.format(d);
    return s;
}

// ============================================================================
// Balls, diameters, partitions
// ============================================================================

/// A closed ball with its member set cached. Views the space; must not
/// outlive it. The representative is the least member id.
struct Ball {
    const FiniteUltrametricSpace* space = nullptr;
    int center = -1;
    Dist radius;
    std::vector<int> members;  // sorted ascending

    [[nodiscard]] int representative() const { return members.front(); }
    [[nodiscard]] bool contains(int p) const {
        return std::binary_search(members.begin(), members.end(), p);
    }
};

/// Max pairwise distance over a nonempty subset.
inline Dist diameter(const FiniteUltrametricSpace& space, std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("diameter of empty subset");
    Dist best = Dist::zero();
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (!space.valid_point(subset[i])) throw std::invalid_argument("bad point id in subset");
        for (std::size_t j = i + 1; j < subset.size(); ++j)
            best = max_dist(best, space.dist(subset[i], subset[j]));
    }
    return best;
}

inline Ball ball_members(const FiniteUltrametricSpace& space, int center, Dist radius) {
    if (!space.valid_point(center)) throw std::invalid_argument("bad center id");
    if (!space.ladder().valid_dist(radius)) throw std::invalid_argument("bad radius");
    Ball b{&space, center, radius, {}};
    for (int y = 0; y < space.size(); ++y)
        if (space.dist(center, y) <= radius) b.members.push_back(y);
    return b;
}

/// The distinct balls {B(x, r) : x in space}: pairwise disjoint, covering,
/// each ball centered on its least member, sorted by that representative.
inline std::vector<Ball> uniform_value_partition(const FiniteUltrametricSpace& space, Dist r) {
    if (!space.ladder().valid_dist(r)) throw std::invalid_argument("bad radius");
    std::vector<Ball> cells;
    std::vector<char> covered(space.size(), 0);
    for (int p = 0; p < space.size(); ++p) {
        if (covered[p]) continue;
        Ball b = ball_members(space, p, r);
        for (int y : b.members) covered[y] = 1;
        cells.push_back(std::move(b));
    }
    return cells;
}

struct PartitionChooserError : std::runtime_error {
    int point;
    PartitionChooserError(int p, const std::string& msg) : std::runtime_error(msg), point(p) {}
};

/// Greedy sweep in point-id order over `subset`, taking for each uncovered
/// point the ball the chooser assigns it. The chooser must keep each ball
/// inside the subset and clear of the balls already taken; a violation
/// throws PartitionChooserError naming the point.
inline std::vector<Ball> partition_into_balls(const FiniteUltrametricSpace& space,
                                              std::span<const int> subset,
                                              const std::function<Dist(int)>& radius_chooser) {
    if (subset.empty()) throw std::invalid_argument("partition of empty subset");
    std::vector<int> pts(subset.begin(), subset.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<char> in_subset(space.size(), 0);
    for (int p : pts) {
        if (!space.valid_point(p)) throw std::invalid_argument("bad point id in subset");
        in_subset[p] = 1;
    }

    std::vector<Ball> out;
    std::vector<char> covered(space.size(), 0);
    for (int p : pts) {
        if (covered[p]) continue;
        Ball b = ball_members(space, p, radius_chooser(p));
        for (int y : b.members) {
            if (!in_subset[y])
                throw PartitionChooserError(
                    p, "ball chosen for point " + std::to_string(p) + " escapes the subset");
            if (covered[y])
                throw PartitionChooserError(
                    p, "ball chosen for point " + std::to_string(p) +
                           " overlaps a previously chosen ball");
        }
        for (int y : b.members) covered[y] = 1;
        out.push_back(std::move(b));
    }
    return out;
}

// ============================================================================
// Ball-law audit
// ============================================================================

struct BallLawFailure {
    int law;  // 1,3,4,5 as numbered below
    std::string detail;
};

/// Result of the exhaustive ball-law audit. Law (2), clopen-ness, is vacuous
/// at finite scale and recorded as a note instead of being tested.
struct BallLawReport {
    long long checks = 0;
    long long failure_count = 0;
    std::vector<BallLawFailure> failures;  // capped sample of the failures
    std::string clopen_note =
        "law (ii) clopen balls: vacuously true at finite scale (finite spaces are discrete)";

    [[nodiscard]] bool passed() const { return failure_count == 0; }

    static constexpr std::size_t kFailureCap = 64;
    void record(int law, std::string detail) {
        ++failure_count;
        if (failures.size() < kFailureCap) failures.push_back({law, std::move(detail)});
    }
};

/// Exhaustively audits, from the raw matrix entries:
///   (1) unequal legs force the max:  d(x,z) != d(y,z)  =>  d(x,y) = max of them
///   (3) meeting balls nest
///   (4) center invariance: every member of a ball recenters it unchanged
///   (5) radial diameter: max distance from any fixed member equals the diameter
/// over all points, pairs, triples and all ladder radii. A validated space
/// must produce a clean report; the audit recomputes memberships honestly so
/// that corrupted matrices (built via `unchecked`) are caught.
inline BallLawReport check_ball_laws(const FiniteUltrametricSpace& space) {
    BallLawReport report;
    const int n = space.size();
    const int m = space.ladder().size();
    const auto name = [&](Dist d) { return space.ladder().format(d); };

    // (1) isoceles law over ordered triples (x<y, any z).
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                if (z == x || z == y) continue;
                ++report.checks;
                const Dist xz = space.dist(x, z), yz = space.dist(y, z);
                if (xz != yz && space.dist(x, y) != max_dist(xz, yz))
                    report.record(1, "law (i) fails at (" + std::to_string(x) + "," +
                                         std::to_string(y) + "," + std::to_string(z) + ")");
            }

    // Distinct balls per ladder radius, as honest row-scan bitsets.
    using Bitset = boost::dynamic_bitset<std::uint64_t>;
    struct Cell {
        Dist radius;
        int rep;
        Bitset members;
    };
    std::vector<Cell> balls;
    for (int j = 0; j < m; ++j) {
        const Dist r(j);
        std::vector<char> seen(n, 0);
        for (int p = 0; p < n; ++p) {
            if (seen[p]) continue;
            Bitset bs(n);
            for (int y = 0; y < n; ++y)
                if (space.dist(p, y) <= r) bs.set(y);
            for (int y = 0; y < n; ++y)
                if (bs.test(y)) seen[y] = 1;
            balls.push_back({r, p, std::move(bs)});
        }
    }

    // (3) meeting balls nest, across every pair of distinct balls.
    for (std::size_t a = 0; a < balls.size(); ++a)
        for (std::size_t b = a + 1; b < balls.size(); ++b) {
            ++report.checks;
            if (!balls[a].members.intersects(balls[b].members)) continue;
            if (!balls[a].members.is_subset_of(balls[b].members) &&
                !balls[b].members.is_subset_of(balls[a].members))
                report.record(3, "law (iii) fails for B(" + std::to_string(balls[a].rep) + "," +
                                     name(balls[a].radius) + ") and B(" +
                                     std::to_string(balls[b].rep) + "," + name(balls[b].radius) +
                                     ")");
        }

    // (4) center invariance and (5) radial diameter, per ball.
    for (const Cell& cell : balls) {
        std::vector<int> members;
        for (int y = 0; y < n; ++y)
            if (cell.members.test(y)) members.push_back(y);
        Dist diam = Dist::zero();
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j)
                diam = max_dist(diam, space.dist(members[i], members[j]));
        for (int y : members) {
            ++report.checks;
            Bitset from_y(n);
            Dist radial = Dist::zero();
            for (int q = 0; q < n; ++q)
                if (space.dist(y, q) <= cell.radius) from_y.set(q);
            for (int q : members) radial = max_dist(radial, space.dist(y, q));
            if (from_y != cell.members)
                report.record(4, "law (iv) fails: B(" + std::to_string(y) + "," +
                                     name(cell.radius) + ") != B(" + std::to_string(cell.rep) +
                                     "," + name(cell.radius) + ")");
            ++report.checks;
            if (radial != diam)
                report.record(5, "law (v) fails in B(" + std::to_string(cell.rep) + "," +
                                     name(cell.radius) + ") from point " + std::to_string(y));
        }
    }

    return report;
}

}  // namespace umc
