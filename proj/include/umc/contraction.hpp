#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "umc/ladder.hpp"
#include "umc/space.hpp"

namespace umc {

// ============================================================================
// Self-maps
// ============================================================================

/// Total self-map of a point set, stored as a target table.
struct SelfMap {
    std::vector<int> target;

    int operator()(int p) const { return target[static_cast<std::size_t>(p)]; }
    int size() const { return static_cast<int>(target.size()); }

    static SelfMap checked(std::vector<int> targets, int point_count) {
        if (static_cast<int>(targets.size()) != point_count)
            throw MalformedInput("map table length " + std::to_string(targets.size()) +
                                 " does not match point count " + std::to_string(point_count));
        for (int t : targets)
            if (t < 0 || t >= point_count)
                throw MalformedInput("map target " + std::to_string(t) + " out of range");
        return SelfMap{std::move(targets)};
    }
};

/// Sorted, deduplicated image of a point set.
inline std::vector<int> image_of(const SelfMap& f, std::span<const int> points) {
    std::vector<int> out;
    out.reserve(points.size());
    for (int p : points) out.push_back(f(p));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ============================================================================
// Distance-quotient bookkeeping
// ============================================================================

/// Precomputed quotients r_a / r_b of ladder values, indexed by ladder
/// position, plus 0 for a ZERO numerator. Keeps big-rational division out
/// of the per-pair loops: those only ever record index pairs.
class RatioTable {
  public:
    explicit RatioTable(const DistanceLadder& ladder)
        : m_(ladder.size()), table_(static_cast<std::size_t>((m_ + 1) * m_)) {
        for (int a = -1; a < m_; ++a)
            for (int b = 0; b < m_; ++b)
                table_[slot(a, b)] =
                    a < 0 ? Rational(0) : ladder.value_at(a) / ladder.value_at(b);
    }

    /// num may be ZERO; den must be a ladder value.
    const Rational& ratio(Dist num, Dist den) const { return table_[slot(num.idx, den.idx)]; }

  private:
    std::size_t slot(int a, int b) const {
        return static_cast<std::size_t>((a + 1) * m_ + b);
    }

    int m_;
    std::vector<Rational> table_;
};

/// Exact global Lipschitz constant: max over distinct pairs of
/// d(f x, f y) / d(x, y). Zero when the space is a single point.
inline Rational lipschitz_constant(const FiniteUltrametricSpace& space, const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    const int n = space.size();
    const int m = space.ladder().size();
    std::vector<char> seen(static_cast<std::size_t>((m + 1) * m), 0);
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            const int den = space.dist(x, y).idx;
            const int num = space.dist(f(x), f(y)).idx;
            seen[static_cast<std::size_t>((num + 1) * m + den)] = 1;
        }
    RatioTable ratios(space.ladder());
    Rational best(0);
    for (int a = -1; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (seen[static_cast<std::size_t>((a + 1) * m + b)])
                best = std::max(best, ratios.ratio(Dist(a), Dist(b)));
    return best;
}

namespace detail {

/// Per-point radial summary: for each exact distance index b, the largest
/// image distance over the points u with d(x, u) = r_b. The ratio maximum
/// over a bucket shares its denominator, so only the numerator max is kept.
struct RadialBuckets {
    std::vector<Dist> max_num;  // per ladder index; meaningful when occupied
    std::vector<char> occupied;
};

inline RadialBuckets radial_buckets(const FiniteUltrametricSpace& space, const SelfMap& f,
                                    int x) {
    const int m = space.ladder().size();
    RadialBuckets bk{std::vector<Dist>(static_cast<std::size_t>(m), Dist::zero()),
                     std::vector<char>(static_cast<std::size_t>(m), 0)};
    const int fx = f(x);
    for (int u = 0; u < space.size(); ++u) {
        if (u == x) continue;
        const int b = space.dist(x, u).idx;
        const Dist num = space.dist(fx, f(u));
        auto bi = static_cast<std::size_t>(b);
        if (!bk.occupied[bi] || bk.max_num[bi] < num) {
            bk.max_num[bi] = num;
            bk.occupied[bi] = 1;
        }
    }
    return bk;
}

}  // namespace detail

// ============================================================================
// Radial modulus and contractive neighbourhoods
// ============================================================================

/// Radial contraction modulus at x for radius r: the maximum of
/// d(f x, f u) / d(x, u) over u in B(x, r) with u != x. Undefined (none)
/// when that ball is a singleton, in particular for r = ZERO.
inline std::optional<Rational> radial_modulus(const FiniteUltrametricSpace& space,
                                              const SelfMap& f, int x, Dist r) {
    if (!space.valid_point(x)) throw std::invalid_argument("bad point id");
    if (!space.ladder().valid_dist(r)) throw std::invalid_argument("bad radius");
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    if (r.is_zero()) return std::nullopt;
    const auto bk = detail::radial_buckets(space, f, x);
    const RatioTable ratios(space.ladder());
    std::optional<Rational> best;
    for (int b = r.idx; b < space.ladder().size(); ++b) {
        if (!bk.occupied[static_cast<std::size_t>(b)]) continue;
        Rational q = ratios.ratio(bk.max_num[static_cast<std::size_t>(b)], Dist(b));
        if (!best || q > *best) best = std::move(q);
    }
    return best;
}

/// Radial profile of one point: the modulus at every ladder radius and the
/// largest radius whose modulus is defined and below 1. The modulus is
/// non-decreasing in the radius, so the contractive radii form a suffix of
/// the ladder.
struct PointRadial {
    int point = -1;
    bool isolated_at_resolution = false;
    std::vector<std::optional<Rational>> modulus;  // per ladder index; none = singleton ball
    std::optional<Dist> best_radius;
    std::optional<Rational> best_modulus;

    bool has_contractive_ball() const { return best_radius.has_value(); }
};

inline PointRadial find_contractive_nbhd(const FiniteUltrametricSpace& space, const SelfMap& f,
                                         int x) {
    if (!space.valid_point(x)) throw std::invalid_argument("bad point id");
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    const int m = space.ladder().size();
    const auto bk = detail::radial_buckets(space, f, x);
    const RatioTable ratios(space.ladder());
    PointRadial out;
    out.point = x;
    out.isolated_at_resolution = !bk.occupied[static_cast<std::size_t>(m - 1)];
    out.modulus.assign(static_cast<std::size_t>(m), std::nullopt);
    std::optional<Rational> running;
    for (int j = m - 1; j >= 0; --j) {
        if (bk.occupied[static_cast<std::size_t>(j)]) {
            Rational q = ratios.ratio(bk.max_num[static_cast<std::size_t>(j)], Dist(j));
            if (!running || q > *running) running = std::move(q);
        }
        out.modulus[static_cast<std::size_t>(j)] = running;
        if (running && *running < 1) {
            out.best_radius = Dist(j);
            out.best_modulus = running;
        }
    }
    return out;
}

// ============================================================================
// Contractive ball partitions
// ============================================================================

struct ContractiveBall {
    Ball ball;
    Rational modulus;  // radial modulus at the ball's centre and radius, < 1
};

struct ContractivePartition {
    std::vector<ContractiveBall> balls;
};

/// Names the first point (in id order) at which the greedy sweep got stuck.
struct PartitionObstruction {
    int point = -1;
    std::string reason;
};

using PartitionOutcome = std::variant<ContractivePartition, PartitionObstruction>;

/// Greedy cover by contractive balls: sweep point ids ascending, take the
/// largest ball with radial modulus below 1 at each uncovered point, then
/// shrink it until disjoint from the balls already chosen. Singleton balls
/// never count (the identity map must fail here), so the sweep reports an
/// obstruction if shrinking bottoms out.
inline PartitionOutcome contractive_ball_partition(const FiniteUltrametricSpace& space,
                                                   const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    const int n = space.size();
    const int m = space.ladder().size();
    ContractivePartition part;
    std::vector<char> covered(static_cast<std::size_t>(n), 0);
    for (int x = 0; x < n; ++x) {
        if (covered[static_cast<std::size_t>(x)]) continue;
        const PointRadial prof = find_contractive_nbhd(space, f, x);
        if (!prof.has_contractive_ball()) {
            return PartitionObstruction{
                x, prof.isolated_at_resolution
                       ? "point is isolated at the finest scale; only its singleton ball remains"
                       : "no ball around this point has radial modulus below 1"};
        }
        bool placed = false;
        for (int j = prof.best_radius->idx; j < m; ++j) {
            Ball b = ball_members(space, x, Dist(j));
            if (b.members.size() < 2) break;  // balls only shrink from here on
            const bool clash = std::any_of(b.members.begin(), b.members.end(), [&](int p) {
                return covered[static_cast<std::size_t>(p)] != 0;
            });
            if (clash) continue;
            for (int p : b.members) covered[static_cast<std::size_t>(p)] = 1;
            Rational q = *prof.modulus[static_cast<std::size_t>(j)];
            part.balls.push_back(ContractiveBall{std::move(b), std::move(q)});
            placed = true;
            break;
        }
        if (!placed)
            return PartitionObstruction{
                x, "every contractive ball at this point disjoint from earlier balls is a "
                   "singleton"};
    }
    return part;
}

/// Per-ball audit that the partition witnesses contraction: each ball's
/// image diameter must not exceed its modulus times its own diameter.
/// Everything is compared as exact rationals.
struct ShrinkRow {
    int center = -1;
    Dist radius;
    Dist ball_diameter;
    Dist image_diameter;
    Rational modulus;
    bool ok = false;
};

struct ShrinkReport {
    std::vector<ShrinkRow> rows;
    bool all_ok = true;
};

inline ShrinkReport shrink_check(const FiniteUltrametricSpace& space, const SelfMap& f,
                                 const ContractivePartition& part) {
    ShrinkReport report;
    for (const ContractiveBall& cb : part.balls) {
        ShrinkRow row;
        row.center = cb.ball.center;
        row.radius = cb.ball.radius;
        row.ball_diameter = diameter(space, cb.ball.members);
        row.image_diameter = diameter(space, image_of(f, cb.ball.members));
        row.modulus = cb.modulus;
        row.ok = space.ladder().value(row.image_diameter) <=
                 cb.modulus * space.ladder().value(row.ball_diameter);
        report.all_ok = report.all_ok && row.ok;
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ============================================================================
// Level contraction and deficiency certificates
// ============================================================================

/// Level contraction at ladder index t: every ball of the uniform partition
/// at r_t with positive diameter has an image of strictly smaller diameter.
inline bool is_level_contractive(const FiniteUltrametricSpace& space, const SelfMap& f, Dist t) {
    if (t.is_zero() || !space.ladder().valid_dist(t))
        throw std::invalid_argument("level must be a ladder value");
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    for (const Ball& cell : uniform_value_partition(space, t)) {
        const Dist own = diameter(space, cell.members);
        if (own.is_zero()) continue;
        if (!(diameter(space, image_of(f, cell.members)) < own)) return false;
    }
    return true;
}

struct SurjectivityReport {
    bool surjective = false;
    std::vector<int> missed_points;  // ids with no preimage, ascending
};

/// Brute-force surjectivity oracle.
inline SurjectivityReport surjectivity_oracle(const FiniteUltrametricSpace& space,
                                              const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    std::vector<char> hit(static_cast<std::size_t>(space.size()), 0);
    for (int x = 0; x < space.size(); ++x) hit[static_cast<std::size_t>(f(x))] = 1;
    SurjectivityReport rep;
    for (int y = 0; y < space.size(); ++y)
        if (!hit[static_cast<std::size_t>(y)]) rep.missed_points.push_back(y);
    rep.surjective = rep.missed_points.empty();
    return rep;
}

struct MissedBall {
    int representative = -1;  // least member of the missed fine ball
    int witness = -1;         // a point of it with no preimage
};

/// Constructive non-surjectivity certificate.
///
/// coarse_index t and fine_level s describe two uniform partitions: the
/// coarse one at ladder value r_t, the fine one at s, where s is either a
/// ladder value or ZERO (the singleton partition, used when the map
/// collapses every coarse ball to a point). Each coarse ball's image lies
/// inside a single fine ball, its enclosure; with fine_count > coarse_count
/// the pigeonhole principle leaves fine balls that meet no enclosure, and
/// every point of those is outside the image.
struct DeficiencyCertificate {
    int coarse_index = -1;
    Dist fine_level;
    int coarse_count = 0;
    int fine_count = 0;
    Dist max_image_diameter;
    std::vector<std::pair<int, int>> enclosures;  // coarse rep -> fine rep
    std::vector<MissedBall> missed;
};

enum class CertifyStatus {
    Certified,
    NotContractive,     // no level passes the image-diameter gate
    InsufficientDepth,  // some level passes, but no pigeonhole gap appears
};

inline const char* certify_status_name(CertifyStatus s) {
    switch (s) {
        case CertifyStatus::Certified: return "certified";
        case CertifyStatus::NotContractive: return "not-contractive";
        case CertifyStatus::InsufficientDepth: return "insufficient-depth";
    }
    return "?";
}

struct CertifyOutcome {
    CertifyStatus status = CertifyStatus::NotContractive;
    std::optional<DeficiencyCertificate> certificate;
};

/// Search coarse levels t from the top of the ladder down. At each t,
/// compute D = the largest image diameter over the uniform partition at
/// r_t; the level qualifies when D < r_t. The fine scale is then D itself
/// (the largest ladder value at most D, or ZERO when all images are
/// points). A certificate is emitted at the first qualifying t whose fine
/// partition outnumbers the coarse one; each missed ball is re-verified
/// point by point against the brute-force image before returning.
inline CertifyOutcome deficiency_certificate(const FiniteUltrametricSpace& space,
                                             const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    const int m = space.ladder().size();
    bool gate_passed = false;
    for (int t = 0; t < m; ++t) {
        const std::vector<Ball> coarse = uniform_value_partition(space, Dist(t));
        std::vector<std::vector<int>> images;
        images.reserve(coarse.size());
        Dist d_max = Dist::zero();
        for (const Ball& cell : coarse) {
            images.push_back(image_of(f, cell.members));
            d_max = max_dist(d_max, diameter(space, images.back()));
        }
        if (!(d_max < Dist(t))) continue;
        gate_passed = true;

        const Dist fine = d_max;  // largest ladder value <= D; ZERO when D = ZERO
        const std::vector<Ball> fine_cells = uniform_value_partition(space, fine);
        if (static_cast<int>(fine_cells.size()) <= static_cast<int>(coarse.size())) continue;

        std::vector<int> fine_rep_of(static_cast<std::size_t>(space.size()), -1);
        for (const Ball& cell : fine_cells)
            for (int p : cell.members)
                fine_rep_of[static_cast<std::size_t>(p)] = cell.representative();

        DeficiencyCertificate cert;
        cert.coarse_index = t;
        cert.fine_level = fine;
        cert.coarse_count = static_cast<int>(coarse.size());
        cert.fine_count = static_cast<int>(fine_cells.size());
        cert.max_image_diameter = d_max;
        std::vector<char> enclosed(static_cast<std::size_t>(space.size()), 0);
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            const int rep = fine_rep_of[static_cast<std::size_t>(images[i].front())];
            for (int q : images[i])
                if (fine_rep_of[static_cast<std::size_t>(q)] != rep)
                    throw std::logic_error("image of a coarse ball straddles fine balls");
            cert.enclosures.emplace_back(coarse[i].representative(), rep);
            enclosed[static_cast<std::size_t>(rep)] = 1;
        }
        const SurjectivityReport oracle = surjectivity_oracle(space, f);
        for (const Ball& cell : fine_cells) {
            if (enclosed[static_cast<std::size_t>(cell.representative())]) continue;
            for (int p : cell.members)
                if (!std::binary_search(oracle.missed_points.begin(), oracle.missed_points.end(),
                                        p))
                    throw std::logic_error("missed ball contains an image point");
            cert.missed.push_back(MissedBall{cell.representative(), cell.representative()});
        }
        if (cert.missed.empty())
            throw std::logic_error("pigeonhole gap without missed fine balls");
        return CertifyOutcome{CertifyStatus::Certified, std::move(cert)};
    }
    return CertifyOutcome{
        gate_passed ? CertifyStatus::InsufficientDepth : CertifyStatus::NotContractive,
        std::nullopt};
}

// ============================================================================
// Banach iteration
// ============================================================================

struct FixedPointRun {
    int fixed_point = -1;
    int steps = 0;  // applications of f before the fixed point is reached
};

/// Fixed-point iteration for a globally contractive map. Errors when the
/// Lipschitz constant is not below 1; checks that the fixed point is
/// unique and reached within |X| steps from the given start.
inline FixedPointRun banach_fixed_point(const FiniteUltrametricSpace& space, const SelfMap& f,
                                        int start = 0) {
    if (!space.valid_point(start)) throw std::invalid_argument("bad start point");
    const Rational lip = lipschitz_constant(space, f);
    if (!(lip < 1))
        throw std::invalid_argument("map is not a contraction: Lipschitz constant is " +
                                    format_rational(lip));
    int fixed = -1;
    for (int x = 0; x < space.size(); ++x)
        if (f(x) == x) {
            if (fixed >= 0) throw std::logic_error("contraction with two fixed points");
            fixed = x;
        }
    if (fixed < 0) throw std::logic_error("contraction with no fixed point");
    FixedPointRun run;
    int x = start;
    while (f(x) != x) {
        x = f(x);
        if (++run.steps > space.size())
            throw std::logic_error("fixed-point iteration failed to settle");
    }
    if (x != fixed) throw std::logic_error("iteration settled on a second fixed point");
    run.fixed_point = x;
    return run;
}

}  // namespace umc
