#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "umc/contraction.hpp"
#include "umc/space.hpp"

namespace umc {

/// Forward orbit of a point. On a finite set every orbit is a rho shape:
/// pre_period steps of tail, then a cycle of length period. iterates lists
/// the distinct states visited, starting at the start point.
struct OrbitRecord {
    int start = -1;
    std::vector<int> iterates;  // distinct, in visit order
    int pre_period = 0;
    int period = 0;
};

inline OrbitRecord orbit(const FiniteUltrametricSpace& space, const SelfMap& f, int start) {
    if (!space.valid_point(start)) throw std::invalid_argument("bad start point");
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    OrbitRecord rec;
    rec.start = start;
    std::vector<int> seen_at(static_cast<std::size_t>(space.size()), -1);
    int x = start;
    while (seen_at[static_cast<std::size_t>(x)] < 0) {
        seen_at[static_cast<std::size_t>(x)] = static_cast<int>(rec.iterates.size());
        rec.iterates.push_back(x);
        x = f(x);
    }
    rec.pre_period = seen_at[static_cast<std::size_t>(x)];
    rec.period = static_cast<int>(rec.iterates.size()) - rec.pre_period;
    return rec;
}

/// Stabilized image: iterate E -> f[E] from the whole space until it stops
/// shrinking. The result satisfies f[E] = E and is proper exactly when f
/// is not surjective.
inline std::vector<int> eventual_image(const FiniteUltrametricSpace& space, const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    std::vector<int> cur(static_cast<std::size_t>(space.size()));
    std::iota(cur.begin(), cur.end(), 0);
    for (;;) {
        std::vector<int> next = image_of(f, cur);
        if (next.size() == cur.size()) return cur;  // image of a set never grows
        cur = std::move(next);
    }
}

struct MinimalityVerdict {
    bool minimal = false;
    /// Empty when minimal; otherwise a nonempty proper subset with
    /// f[E] a subset of E.
    std::vector<int> invariant_set;
    std::string note;
};

/// On a finite discrete system, minimality (every orbit closure is the
/// whole space) holds exactly when f is a permutation consisting of a
/// single cycle. Otherwise some forward-invariant proper subset exists;
/// the verdict carries one.
inline MinimalityVerdict minimality_check(const FiniteUltrametricSpace& space, const SelfMap& f) {
    if (f.size() != space.size()) throw std::invalid_argument("map size mismatch");
    const int n = space.size();
    const SurjectivityReport surj = surjectivity_oracle(space, f);
    if (!surj.surjective) {
        MinimalityVerdict v;
        v.invariant_set = eventual_image(space, f);
        v.note = "map is not surjective; the eventual image is a proper invariant set";
        return v;
    }
    // Surjective on a finite set means bijective. Single cycle <=> the
    // orbit of point 0 has full length.
    const OrbitRecord o = orbit(space, f, 0);
    if (o.period == n) return MinimalityVerdict{true, {}, "map is a single full cycle"};
    MinimalityVerdict v;
    v.invariant_set = o.iterates;  // a shorter cycle through 0
    std::sort(v.invariant_set.begin(), v.invariant_set.end());
    v.note = "map permutes the points in more than one cycle";
    return v;
}

/// Non-minimality by way of a deficiency certificate: a certified map is
/// not surjective, so its eventual image is a proper invariant set and the
/// system cannot be minimal. Errors when no certificate exists.
inline MinimalityVerdict contractive_nonminimality(const FiniteUltrametricSpace& space,
                                                   const SelfMap& f) {
    const CertifyOutcome outcome = deficiency_certificate(space, f);
    if (outcome.status != CertifyStatus::Certified)
        throw std::invalid_argument(std::string("no deficiency certificate for this map (") +
                                    certify_status_name(outcome.status) + ")");
    MinimalityVerdict v;
    v.invariant_set = eventual_image(space, f);
    if (v.invariant_set.empty() || static_cast<int>(v.invariant_set.size()) >= space.size())
        throw std::logic_error("eventual image of a certified map is not proper");
    v.note = "certified non-surjective; eventual image is a proper invariant set";
    return v;
}

}  // namespace umc
