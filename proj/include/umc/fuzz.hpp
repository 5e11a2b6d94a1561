#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umc/contraction.hpp"
#include "umc/dynamics.hpp"
#include "umc/rng.hpp"
#include "umc/rtree.hpp"
#include "umc/space.hpp"

namespace umc::fuzz {

// ============================================================================
// Named maps
// ============================================================================

inline SelfMap identity_map(int n) {
    std::vector<int> tg(static_cast<std::size_t>(n));
    std::iota(tg.begin(), tg.end(), 0);
    return SelfMap::checked(std::move(tg), n);
}

inline SelfMap constant_map(int n, int value) {
    return SelfMap::checked(std::vector<int>(static_cast<std::size_t>(n), value), n);
}

inline SelfMap random_permutation_map(int n, SplitMix64& rng) {
    std::vector<int> tg(static_cast<std::size_t>(n));
    std::iota(tg.begin(), tg.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(tg[static_cast<std::size_t>(i)],
                  tg[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i) + 1))]);
    return SelfMap::checked(std::move(tg), n);
}

/// Leaf-path map (u_0, ..., u_{d-1}) -> (0, u_0, ..., u_{d-2}): push the
/// word right and fill with 0. Defined when every shifted word is again a
/// leaf, as on full product trees.
inline SelfMap prepend_zero_map(const RTree& tree) {
    std::vector<int> tg;
    tg.reserve(static_cast<std::size_t>(tree.leaf_count()));
    for (int i = 0; i < tree.leaf_count(); ++i) {
        NodePath to(tree.leaf(i).begin(), tree.leaf(i).end() - 1);
        to.insert(to.begin(), 0);
        const int j = tree.leaf_index(to);
        if (j < 0)
            throw MalformedInput("tree does not support the prepend-zero map at leaf " +
                                 format_node(tree, tree.leaf(i)));
        tg.push_back(j);
    }
    return SelfMap::checked(std::move(tg), tree.leaf_count());
}

/// One-sided shift, truncated cyclically: (u_0, u_1, ..., u_{d-1}) maps to
/// (u_1, ..., u_{d-1}, u_0). On uniform product trees this is a bijection
/// of leaves, so the truncation keeps the shift's surjectivity.
inline SelfMap shift_map(const RTree& tree) {
    std::vector<int> tg;
    tg.reserve(static_cast<std::size_t>(tree.leaf_count()));
    for (int i = 0; i < tree.leaf_count(); ++i) {
        NodePath to(tree.leaf(i).begin() + 1, tree.leaf(i).end());
        to.push_back(tree.leaf(i).front());
        const int j = tree.leaf_index(to);
        if (j < 0)
            throw MalformedInput("tree does not support the shift map at leaf " +
                                 format_node(tree, tree.leaf(i)));
        tg.push_back(j);
    }
    return SelfMap::checked(std::move(tg), tree.leaf_count());
}

// ============================================================================
// Random corpus
// ============================================================================

struct FuzzConfig {
    int max_points = 200;
    int max_depth = 7;
};

/// A few ladder shapes so the corpus does not fixate on powers of two.
inline DistanceLadder random_ladder(SplitMix64& rng, int depth) {
    std::vector<Rational> values;
    values.reserve(static_cast<std::size_t>(depth));
    switch (rng.below(4)) {
        case 0: {
            Rational v(1);
            for (int j = 0; j < depth; ++j, v /= 2) values.push_back(v);
            break;
        }
        case 1: {
            const int p = 2 * rng.range(1, 3) + 1;  // 3, 5, or 7
            Rational v(1);
            for (int j = 0; j < depth; ++j, v /= p) values.push_back(v);
            break;
        }
        case 2:
            for (int j = 0; j < depth; ++j) values.emplace_back(1, j + 1);
            break;
        default: {
            Rational v(rng.range(1, 4));
            for (int j = 0; j < depth; ++j) {
                values.push_back(v);
                const int a = rng.range(1, 3);
                v *= Rational(a, rng.range(a + 1, a + 4));
            }
            break;
        }
    }
    return DistanceLadder(std::move(values));
}

inline int max_uniform_branching(int depth, int max_points) {
    int b = 2;
    for (;;) {
        long long total = 1;
        bool fits = true;
        for (int j = 0; j < depth && fits; ++j) {
            total *= b + 1;
            fits = total <= max_points;
        }
        if (!fits) return b;
        ++b;
    }
}

/// Random perfect truncation within the size budget.
inline RTree random_tree(SplitMix64& rng, const FuzzConfig& cfg) {
    if (cfg.max_points < 4 || cfg.max_depth < 2)
        throw MalformedInput("need max_points >= 4 and max_depth >= 2");
    int max_depth = cfg.max_depth;
    while (max_depth > 2 && (1LL << max_depth) > cfg.max_points) --max_depth;
    const int depth = rng.range(2, max_depth);
    const int cap = max_uniform_branching(depth, cfg.max_points);
    const int b = rng.range(2, std::min(cap, 6));
    return random_perfect(random_ladder(rng, depth), b, rng.next());
}

/// Uniform product tree (constant branching), the shape on which the shift
/// and prepend-zero maps are defined.
inline RTree random_product_tree(SplitMix64& rng, const FuzzConfig& cfg) {
    if (cfg.max_points < 4 || cfg.max_depth < 2)
        throw MalformedInput("need max_points >= 4 and max_depth >= 2");
    int max_depth = cfg.max_depth;
    while (max_depth > 2 && (1LL << max_depth) > cfg.max_points) --max_depth;
    const int depth = rng.range(2, max_depth);
    const int cap = max_uniform_branching(depth, cfg.max_points);
    const int b = rng.range(2, std::min(cap, 9));
    std::vector<int> branching(static_cast<std::size_t>(depth), b);
    return generate_from_ladder(random_ladder(rng, depth), branching);
}

// ============================================================================
// Level-contractive map construction
// ============================================================================

enum class MapMode {
    Collapse,   // constant on every coarse ball
    Arbitrary,  // each coarse ball assigned arbitrarily into a finer target ball
    Squeeze,    // constant per coarse ball, all values inside one finer ball
};

struct LevelMap {
    SelfMap map;
    int level = 0;  // ladder index at which the map is level-contractive by construction
};

/// Build a map that shrinks every ball of the uniform partition at a random
/// coarse level: each ball's image lands inside a ball of strictly smaller
/// diameter. Squeeze mode additionally packs all images into one finer
/// ball, which makes the whole map a contraction in the Lipschitz sense.
inline LevelMap random_level_contractive(const FiniteUltrametricSpace& space, SplitMix64& rng,
                                         MapMode mode) {
    const int m = space.ladder().size();
    const int t = rng.range(0, m - 2);
    const std::vector<Ball> coarse = uniform_value_partition(space, Dist(t));
    std::vector<int> tg(static_cast<std::size_t>(space.size()), -1);
    auto pick = [&rng](const std::vector<int>& v) {
        return v[static_cast<std::size_t>(rng.below(v.size()))];
    };
    switch (mode) {
        case MapMode::Collapse:
            for (const Ball& cell : coarse) {
                const int z = rng.range(0, space.size() - 1);
                for (int p : cell.members) tg[static_cast<std::size_t>(p)] = z;
            }
            break;
        case MapMode::Squeeze: {
            const std::vector<Ball> fine = uniform_value_partition(space, Dist(t + 1));
            const Ball& target = fine[static_cast<std::size_t>(rng.below(fine.size()))];
            for (const Ball& cell : coarse) {
                const int z = pick(target.members);
                for (int p : cell.members) tg[static_cast<std::size_t>(p)] = z;
            }
            break;
        }
        case MapMode::Arbitrary: {
            for (const Ball& cell : coarse) {
                const int tt = rng.range(t + 1, m - 1);
                const std::vector<Ball> fine = uniform_value_partition(space, Dist(tt));
                const Ball& target = fine[static_cast<std::size_t>(rng.below(fine.size()))];
                for (int p : cell.members) tg[static_cast<std::size_t>(p)] = pick(target.members);
            }
            break;
        }
    }
    return LevelMap{SelfMap::checked(std::move(tg), space.size()), t};
}

// ============================================================================
// Trial driver
// ============================================================================

enum class TrialKind {
    Collapse,
    Arbitrary,
    Squeeze,
    Identity,
    Permutation,
    Shift,
};

inline const char* trial_kind_name(TrialKind k) {
    switch (k) {
        case TrialKind::Collapse: return "collapse";
        case TrialKind::Arbitrary: return "arbitrary";
        case TrialKind::Squeeze: return "squeeze";
        case TrialKind::Identity: return "identity";
        case TrialKind::Permutation: return "permutation";
        case TrialKind::Shift: return "shift";
    }
    return "?";
}

inline bool is_positive_kind(TrialKind k) {
    return k == TrialKind::Collapse || k == TrialKind::Arbitrary || k == TrialKind::Squeeze;
}

struct TrialInputs {
    RTree tree;
    FiniteUltrametricSpace space;
    SelfMap map;
    TrialKind kind;
    int level;  // construction level for positive kinds, -1 otherwise
};

inline TrialInputs make_trial(std::uint64_t master_seed, std::uint64_t index,
                              const FuzzConfig& cfg, std::optional<TrialKind> forced = {}) {
    SplitMix64 rng(SplitMix64::mix(master_seed, index));
    static constexpr TrialKind schedule[9] = {
        TrialKind::Collapse, TrialKind::Arbitrary,   TrialKind::Squeeze,
        TrialKind::Collapse, TrialKind::Arbitrary,   TrialKind::Squeeze,
        TrialKind::Identity, TrialKind::Permutation, TrialKind::Shift,
    };
    const TrialKind kind = forced ? *forced : schedule[index % 9];
    RTree tree = kind == TrialKind::Shift ? random_product_tree(rng, cfg) : random_tree(rng, cfg);
    FiniteUltrametricSpace space = realize_space(tree).space;
    const int n = space.size();
    switch (kind) {
        case TrialKind::Identity:
            return TrialInputs{std::move(tree), std::move(space), identity_map(n), kind, -1};
        case TrialKind::Permutation:
            return TrialInputs{std::move(tree), std::move(space),
                               random_permutation_map(n, rng), kind, -1};
        case TrialKind::Shift: {
            SelfMap f = shift_map(tree);
            return TrialInputs{std::move(tree), std::move(space), std::move(f), kind, -1};
        }
        default: {
            const MapMode mode = kind == TrialKind::Collapse    ? MapMode::Collapse
                                 : kind == TrialKind::Arbitrary ? MapMode::Arbitrary
                                                                : MapMode::Squeeze;
            LevelMap lm = random_level_contractive(space, rng, mode);
            return TrialInputs{std::move(tree), std::move(space), std::move(lm.map), kind,
                               lm.level};
        }
    }
}

struct TrialOutcome {
    std::uint64_t index = 0;
    TrialKind kind = TrialKind::Collapse;
    int points = 0;
    int depth = 0;
    CertifyStatus status = CertifyStatus::NotContractive;
    bool certified = false;
    bool partitioned = false;
    bool ok = true;
    std::string detail;
};

namespace detail {

struct Checker {
    TrialOutcome& out;

    void require(bool cond, const std::string& what) {
        if (!cond && out.ok) {
            out.ok = false;
            out.detail = what;
        }
    }
};

inline bool sets_equal(const std::vector<int>& a, const std::vector<int>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace detail

/// Run one (space, map) trial through the full certificate/oracle/dynamics
/// battery. Every claim the certifier makes is recomputed from scratch via
/// the public API; any mismatch fails the trial with a description.
inline TrialOutcome check_trial(const TrialInputs& in, std::uint64_t index) {
    TrialOutcome out;
    out.index = index;
    out.kind = in.kind;
    out.points = in.space.size();
    out.depth = in.tree.depth();
    detail::Checker ck{out};

    const FiniteUltrametricSpace& space = in.space;
    const SelfMap& f = in.map;
    const CertifyOutcome verdict = deficiency_certificate(space, f);
    out.status = verdict.status;
    out.certified = verdict.status == CertifyStatus::Certified;
    const SurjectivityReport oracle = surjectivity_oracle(space, f);

    if (is_positive_kind(in.kind)) {
        ck.require(is_level_contractive(space, f, Dist(in.level)),
                   "constructed map is not level-contractive at its own level");
        ck.require(out.certified, std::string("expected a certificate, got ") +
                                      certify_status_name(verdict.status));
        if (!out.certified) return out;
        const DeficiencyCertificate& cert = *verdict.certificate;

        ck.require(!oracle.surjective, "certified map passes the surjectivity oracle");
        for (const MissedBall& mb : cert.missed)
            ck.require(std::binary_search(oracle.missed_points.begin(),
                                          oracle.missed_points.end(), mb.witness),
                       "certificate witness " + std::to_string(mb.witness) +
                           " has a preimage");

        ck.require(cert.fine_count > cert.coarse_count, "certificate without pigeonhole gap");
        ck.require(static_cast<int>(cert.missed.size()) >= cert.fine_count - cert.coarse_count,
                   "fewer missed balls than the pigeonhole bound");
        ck.require(cert.max_image_diameter < Dist(cert.coarse_index),
                   "certificate gate violated: image diameter not below coarse value");

        // Recompute both partitions and verify counts, enclosures, misses.
        const auto coarse = uniform_value_partition(space, Dist(cert.coarse_index));
        const auto fine = uniform_value_partition(space, cert.fine_level);
        ck.require(static_cast<int>(coarse.size()) == cert.coarse_count, "coarse count drift");
        ck.require(static_cast<int>(fine.size()) == cert.fine_count, "fine count drift");
        std::vector<char> enclosed(static_cast<std::size_t>(space.size()), 0);
        ck.require(cert.enclosures.size() == coarse.size(), "one enclosure per coarse ball");
        for (std::size_t i = 0; i < coarse.size() && i < cert.enclosures.size(); ++i) {
            ck.require(cert.enclosures[i].first == coarse[i].representative(),
                       "enclosure order drift");
            const auto fit = std::find_if(fine.begin(), fine.end(), [&](const Ball& b) {
                return b.representative() == cert.enclosures[i].second;
            });
            ck.require(fit != fine.end(), "enclosure names a non-ball");
            if (fit == fine.end()) continue;
            enclosed[static_cast<std::size_t>(fit->representative())] = 1;
            for (int q : image_of(f, coarse[i].members))
                ck.require(fit->contains(q), "image point outside claimed enclosure");
        }
        for (const MissedBall& mb : cert.missed) {
            ck.require(!enclosed[static_cast<std::size_t>(mb.representative)],
                       "missed ball is also an enclosure");
            const auto bit = std::find_if(fine.begin(), fine.end(), [&](const Ball& b) {
                return b.representative() == mb.representative;
            });
            ck.require(bit != fine.end(), "missed ball is not a fine ball");
            if (bit == fine.end()) continue;
            for (int p : bit->members)
                ck.require(std::binary_search(oracle.missed_points.begin(),
                                              oracle.missed_points.end(), p),
                           "missed ball member has a preimage");
        }

        // Contractive ball partition and the diameter-shrink audit.
        const PartitionOutcome part = contractive_ball_partition(space, f);
        if (const auto* p = std::get_if<ContractivePartition>(&part)) {
            out.partitioned = true;
            std::vector<char> covered(static_cast<std::size_t>(space.size()), 0);
            for (const ContractiveBall& cb : p->balls) {
                ck.require(cb.modulus < 1, "partition ball with modulus at least 1");
                ck.require(cb.ball.members.size() >= 2, "singleton partition ball");
                for (int q : cb.ball.members) {
                    ck.require(!covered[static_cast<std::size_t>(q)], "partition balls overlap");
                    covered[static_cast<std::size_t>(q)] = 1;
                }
            }
            ck.require(std::all_of(covered.begin(), covered.end(),
                                   [](char c) { return c != 0; }),
                       "partition does not cover the space");
            ck.require(shrink_check(space, f, *p).all_ok, "shrink audit failed");
        } else {
            ck.require(in.kind == TrialKind::Arbitrary,
                       "collapse/squeeze map failed to partition: " +
                           std::get<PartitionObstruction>(part).reason);
        }

        // Dynamics chain: certified maps are never minimal.
        const MinimalityVerdict nm = contractive_nonminimality(space, f);
        ck.require(!nm.minimal, "certified map reported minimal");
        ck.require(!nm.invariant_set.empty() &&
                       static_cast<int>(nm.invariant_set.size()) < space.size(),
                   "invariant set not proper");
        for (int p : nm.invariant_set)
            ck.require(std::binary_search(nm.invariant_set.begin(), nm.invariant_set.end(),
                                          f(p)),
                       "invariant set not invariant");
        ck.require(!minimality_check(space, f).minimal,
                   "minimality_check disagrees with certificate");
        ck.require(detail::sets_equal(eventual_image(space, f),
                                      image_of(f, eventual_image(space, f))),
                   "eventual image not a fixed point of the image operator");

        if (in.kind == TrialKind::Squeeze) {
            const Rational lip = lipschitz_constant(space, f);
            ck.require(lip < 1, "squeeze map is not a Lipschitz contraction");
            SplitMix64 pickrng(SplitMix64::mix(0x5eedf00dull, index));
            const int starts[3] = {0, space.size() - 1,
                                   pickrng.range(0, space.size() - 1)};
            int fix = -1;
            for (int s : starts) {
                const FixedPointRun run = banach_fixed_point(space, f, s);
                ck.require(run.steps <= space.size(), "iteration exceeded the point count");
                ck.require(fix < 0 || run.fixed_point == fix, "fixed point depends on start");
                fix = run.fixed_point;
            }
            ck.require(fix >= 0 && f(fix) == fix, "reported fixed point is not fixed");
        }
    } else {
        ck.require(oracle.surjective, std::string(trial_kind_name(in.kind)) +
                                          " map failed the surjectivity oracle");
        ck.require(verdict.status == CertifyStatus::NotContractive,
                   std::string("expected not-contractive for a bijection, got ") +
                       certify_status_name(verdict.status));
        const PartitionOutcome part = contractive_ball_partition(space, f);
        ck.require(std::holds_alternative<PartitionObstruction>(part),
                   "injective map admitted a contractive ball partition");
        const MinimalityVerdict mv = minimality_check(space, f);
        if (mv.minimal) ck.require(oracle.surjective, "minimal but not surjective");
        if (in.kind == TrialKind::Identity && space.size() > 1)
            ck.require(!mv.minimal, "identity reported minimal");
    }
    return out;
}

inline TrialOutcome run_trial(std::uint64_t master_seed, std::uint64_t index,
                              const FuzzConfig& cfg, std::optional<TrialKind> forced = {}) {
    try {
        return check_trial(make_trial(master_seed, index, cfg, forced), index);
    } catch (const std::exception& e) {
        TrialOutcome out;
        out.index = index;
        out.ok = false;
        out.detail = std::string("exception: ") + e.what();
        return out;
    }
}

// ============================================================================
// Validation corpus (spaces plus single-entry corruptions)
// ============================================================================

struct ValidationTrial {
    std::uint64_t index = 0;
    int points = 0;
    bool ok = true;
    std::string detail;
};

/// Generate a perfect truncation, check it validates cleanly and passes the
/// ball-law audit, then corrupt one matrix entry and check a violation
/// witness appears.
inline ValidationTrial run_validation_trial(std::uint64_t master_seed, std::uint64_t index,
                                            const FuzzConfig& cfg) try {
    SplitMix64 rng(SplitMix64::mix(master_seed ^ 0xa5a5a5a5ull, index));
    ValidationTrial out;
    out.index = index;
    const RTree tree = random_tree(rng, cfg);
    const FiniteUltrametricSpace space = realize_space(tree).space;
    out.points = space.size();
    auto fail = [&out](const std::string& what) {
        if (out.ok) {
            out.ok = false;
            out.detail = what;
        }
    };

    if (!is_perfect_truncation(tree)) fail("generated tree is not a perfect truncation");
    const int n = space.size();
    std::vector<std::string> labels;
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < n; ++i) {
        labels.push_back(space.label(i));
        std::vector<int> row;
        for (int j = 0; j < n; ++j) row.push_back(space.dist(i, j).idx);
        rows.push_back(std::move(row));
    }
    if (!std::holds_alternative<FiniteUltrametricSpace>(
            validate_ultrametric(labels, space.ladder(), rows)))
        fail("realized space failed validation");
    const BallLawReport laws = check_ball_laws(space);
    if (!laws.passed()) fail("ball-law audit failed: " + laws.failures.front().detail);

    // Single-entry corruption. A diagonal hit breaks the zero diagonal; an
    // off-diagonal hit leaves its mirror untouched and breaks symmetry.
    const int m = space.ladder().size();
    const int i = rng.range(0, n - 1);
    const bool diagonal = rng.below(4) == 0;
    int j = i;
    if (!diagonal) {
        j = rng.range(0, n - 2);
        if (j >= i) ++j;
    }
    const int old = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    int corrupted = rng.range(-1, m - 1);
    while (corrupted == old) corrupted = rng.range(-1, m - 1);
    rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = corrupted;
    const ValidationResult res = validate_ultrametric(labels, space.ladder(), rows);
    const auto* witness = std::get_if<ViolationWitness>(&res);
    if (witness == nullptr) {
        fail("corrupted matrix validated");
    } else if (diagonal && witness->kind != ViolationKind::ZeroDiagonal) {
        fail("diagonal corruption misclassified");
    } else if (!diagonal && witness->kind != ViolationKind::Asymmetry) {
        fail("off-diagonal corruption misclassified");
    }
    return out;
} catch (const std::exception& e) {
    ValidationTrial out;
    out.index = index;
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
    return out;
}

}  // namespace umc::fuzz
