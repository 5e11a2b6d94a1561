// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Thresholds, corpus sizes, and time budgets are pinned here.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "umc/contraction.hpp"
#include "umc/dynamics.hpp"
#include "umc/fuzz.hpp"
#include "umc/rtree.hpp"

using namespace umc;

namespace {

constexpr int kValidationTrials = 1000;
constexpr int kRoundTrips = 500;
constexpr int kPositiveTrials = 500;
constexpr int kPermutationSweep = 1000;
constexpr double kAxiomBudgetSeconds = 10.0;
constexpr double kCertifyBudgetSeconds = 60.0;
constexpr fuzz::FuzzConfig kCorpus{200, 8};

int g_failed = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
    if (!ok) ++g_failed;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Everything carried from the positive corpus into criteria 5 through 8.
struct PositiveRecord {
    fuzz::TrialKind kind;
    FiniteUltrametricSpace space;
    SelfMap map;
    DeficiencyCertificate cert;
};

bool image_inside(const FiniteUltrametricSpace& space, const SelfMap& f,
                  const std::vector<int>& cell, const Ball& enclosure) {
    for (int x : cell)
        if (!enclosure.contains(f(x))) return false;
    return true;
}

}  // namespace

int main() {
    std::vector<PositiveRecord> corpus;
    corpus.reserve(static_cast<std::size_t>(kPositiveTrials));

    // ---- Criterion 1: axiom fuzz with corrupted variants ----
    {
        const auto t0 = std::chrono::steady_clock::now();
        int bad = 0;
        std::string first;
        int max_points = 0;
        for (int i = 0; i < kValidationTrials; ++i) {
            const fuzz::ValidationTrial v =
                fuzz::run_validation_trial(101, static_cast<std::uint64_t>(i), kCorpus);
            max_points = std::max(max_points, v.points);
            if (!v.ok && ++bad == 1)
                first = "trial " + std::to_string(i) + ": " + v.detail;
        }
        const double dt = seconds_since(t0);
        const bool ok = bad == 0 && dt < kAxiomBudgetSeconds && max_points <= 200;
        report(1, ok,
               std::to_string(kValidationTrials) + " spaces validated and " +
                   std::to_string(kValidationTrials) + " corruptions caught, largest " +
                   std::to_string(max_points) + " points, " + std::to_string(dt) + " s" +
                   (bad ? "; first failure: " + first : ""));
    }

    // ---- Criterion 2: isometry round trips ----
    {
        SplitMix64 rng(202);
        int mismatches = 0;
        std::string first;
        for (int i = 0; i < kRoundTrips && mismatches == 0; ++i) {
            const RTree t = fuzz::random_tree(rng, kCorpus);
            const auto realized = realize_space(t);
            if (!(build_tree(realized.space).tree == t)) {
                ++mismatches;
                first = "trial " + std::to_string(i) + ": rebuilt tree differs";
                break;
            }
            // Shuffle the point order so the isometry is not the identity,
            // then check the realized end space agrees entry by entry.
            const int n = realized.space.size();
            std::vector<int> perm(static_cast<std::size_t>(n));
            for (int p = 0; p < n; ++p) perm[static_cast<std::size_t>(p)] = p;
            for (int p = n - 1; p > 0; --p)
                std::swap(perm[static_cast<std::size_t>(p)],
                          perm[rng.below(static_cast<std::uint64_t>(p + 1))]);
            std::vector<std::string> labels(static_cast<std::size_t>(n));
            std::vector<std::vector<int>> rows(static_cast<std::size_t>(n),
                                               std::vector<int>(static_cast<std::size_t>(n)));
            for (int x = 0; x < n; ++x) {
                labels[static_cast<std::size_t>(x)] =
                    realized.space.label(perm[static_cast<std::size_t>(x)]);
                for (int y = 0; y < n; ++y)
                    rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                        realized.space
                            .dist(perm[static_cast<std::size_t>(x)],
                                  perm[static_cast<std::size_t>(y)])
                            .idx;
            }
            const auto shuffled =
                validate_ultrametric(labels, realized.space.ladder(), rows);
            const auto& sp = std::get<FiniteUltrametricSpace>(shuffled);
            const BuildResult built = build_tree(sp);
            const auto back = realize_space(built.tree);
            for (int x = 0; x < n && mismatches == 0; ++x)
                for (int y = 0; y < n; ++y) {
                    const int lx = built.iso.leaf_of_point[static_cast<std::size_t>(x)];
                    const int ly = built.iso.leaf_of_point[static_cast<std::size_t>(y)];
                    if (!(back.space.dist(lx, ly) == sp.dist(x, y))) {
                        ++mismatches;
                        first = "trial " + std::to_string(i) + ": distance (" +
                                std::to_string(x) + "," + std::to_string(y) +
                                ") changed under the isometry";
                        break;
                    }
                }
        }
        report(2, mismatches == 0,
               std::to_string(kRoundTrips) +
                   " tree/space round trips, shuffled isometries included" +
                   (mismatches ? "; " + first : ""));
    }

    // ---- Criterion 3: certified non-surjectivity on the positive corpus ----
    {
        const auto t0 = std::chrono::steady_clock::now();
        static constexpr fuzz::TrialKind cycle[3] = {fuzz::TrialKind::Collapse,
                                                     fuzz::TrialKind::Arbitrary,
                                                     fuzz::TrialKind::Squeeze};
        int bad = 0;
        std::string first;
        for (int i = 0; i < kPositiveTrials; ++i) {
            fuzz::TrialInputs in = fuzz::make_trial(303, static_cast<std::uint64_t>(i), kCorpus,
                                                    cycle[i % 3]);
            const fuzz::TrialOutcome out = fuzz::check_trial(in, static_cast<std::uint64_t>(i));
            if (!out.ok || !out.certified) {
                if (++bad == 1)
                    first = "trial " + std::to_string(i) + " (" +
                            fuzz::trial_kind_name(out.kind) + "): " +
                            (out.detail.empty() ? "no certificate" : out.detail);
                continue;
            }
            const CertifyOutcome co = deficiency_certificate(in.space, in.map);
            corpus.push_back(PositiveRecord{in.kind, std::move(in.space), std::move(in.map),
                                            *co.certificate});
        }
        const double dt = seconds_since(t0);
        const bool ok = bad == 0 && dt < kCertifyBudgetSeconds;
        report(3, ok,
               std::to_string(kPositiveTrials) +
                   " level-contractive maps certified non-surjective, oracle agreed on every "
                   "witness, " +
                   std::to_string(dt) + " s" + (bad ? "; first failure: " + first : ""));
    }

    // ---- Criterion 4: negative controls never certify ----
    {
        int bad = 0;
        int false_certs = 0;
        std::string first;
        for (int m = 2; m <= 10; ++m) {
            const RTree t = cantor(m);
            const auto s = realize_space(t).space;
            const SelfMap f = fuzz::shift_map(t);
            const SurjectivityReport surj = surjectivity_oracle(s, f);
            const CertifyOutcome out = deficiency_certificate(s, f);
            if (out.status == CertifyStatus::Certified) ++false_certs;
            if (!surj.surjective || out.status != CertifyStatus::NotContractive) {
                if (++bad == 1) first = "shift on the depth-" + std::to_string(m) + " tree";
            }
        }
        for (int i = 0; i < kPositiveTrials; ++i) {
            // Same seeded trees as criterion 3, identity map instead.
            const fuzz::TrialOutcome out =
                fuzz::run_trial(303, static_cast<std::uint64_t>(i), kCorpus,
                                fuzz::TrialKind::Identity);
            if (out.certified) ++false_certs;
            if (!out.ok || out.status != CertifyStatus::NotContractive) {
                if (++bad == 1)
                    first = "identity trial " + std::to_string(i) + ": " + out.detail;
            }
        }
        const bool ok = bad == 0 && false_certs == 0;
        report(4, ok,
               "shift maps on depths 2..10 surjective and refused, identity refused on " +
                   std::to_string(kPositiveTrials) + " spaces, " +
                   std::to_string(false_certs) + " false certificates" +
                   (bad ? "; first failure: " + first : ""));
    }

    // ---- Criterion 5: shrink audit on every partition from criterion 3 ----
    {
        int partitions = 0;
        int failures = 0;
        std::string first;
        for (const PositiveRecord& rec : corpus) {
            const PartitionOutcome po = contractive_ball_partition(rec.space, rec.map);
            const auto* part = std::get_if<ContractivePartition>(&po);
            if (part == nullptr) {
                // Only the arbitrary mode may fail to partition.
                if (rec.kind != fuzz::TrialKind::Arbitrary && ++failures == 1)
                    first = "no partition for a " +
                            std::string(fuzz::trial_kind_name(rec.kind)) + " map";
                continue;
            }
            ++partitions;
            if (!shrink_check(rec.space, rec.map, *part).all_ok && ++failures == 1)
                first = "shrink bound violated";
        }
        const bool ok = failures == 0 && partitions > 0 && !corpus.empty();
        report(5, ok,
               "shrink lemma exact on " + std::to_string(partitions) +
                   " contractive partitions" + (failures ? "; " + first : ""));
    }

    // ---- Criterion 6: certified maps are never minimal; permutation sweep ----
    {
        int bad = 0;
        std::string first;
        for (const PositiveRecord& rec : corpus) {
            const MinimalityVerdict v = contractive_nonminimality(rec.space, rec.map);
            const auto& e = v.invariant_set;
            bool fine = !v.minimal && !e.empty() &&
                        static_cast<int>(e.size()) < rec.space.size();
            if (fine) {
                const std::vector<int> img = image_of(rec.map, e);
                fine = std::includes(e.begin(), e.end(), img.begin(), img.end());
            }
            if (!fine && ++bad == 1) first = "certified map with no proper invariant set";
        }
        SplitMix64 rng(606);
        int minimal_seen = 0;
        for (int i = 0; i < kPermutationSweep; ++i) {
            const auto sp = realize_space(fuzz::random_tree(rng, {60, 5})).space;
            const int n = sp.size();
            const SelfMap f = fuzz::random_permutation_map(n, rng);
            // Independent single-cycle detector: walk from 0 and count.
            int len = 0;
            for (int x = 0; len == 0 || x != 0; x = f(x)) ++len;
            const bool single_cycle = len == n;
            const MinimalityVerdict v = minimality_check(sp, f);
            if (v.minimal != single_cycle) {
                if (++bad == 1)
                    first = "sweep trial " + std::to_string(i) + ": verdict disagrees";
            }
            if (v.minimal) ++minimal_seen;
            if (deficiency_certificate(sp, f).status == CertifyStatus::Certified && ++bad == 1)
                first = "sweep trial " + std::to_string(i) + ": bijection certified";
        }
        const bool ok = bad == 0 && !corpus.empty();
        report(6, ok,
               std::to_string(corpus.size()) + " certified maps non-minimal with invariant " +
                   "sets, " + std::to_string(kPermutationSweep) + "-permutation sweep (" +
                   std::to_string(minimal_seen) + " full cycles) matched" +
                   (bad ? "; first failure: " + first : ""));
    }

    // ---- Criterion 7: Banach iteration for every global contraction ----
    {
        int contractions = 0;
        int bad = 0;
        std::string first;
        SplitMix64 rng(707);
        for (const PositiveRecord& rec : corpus) {
            if (!(lipschitz_constant(rec.space, rec.map) < 1)) continue;
            ++contractions;
            int fixed = 0;
            int the_fix = -1;
            for (int x = 0; x < rec.space.size(); ++x)
                if (rec.map(x) == x) {
                    ++fixed;
                    the_fix = x;
                }
            if (fixed != 1) {
                if (++bad == 1)
                    first = "contraction with " + std::to_string(fixed) + " fixed points";
                continue;
            }
            const int n = rec.space.size();
            const int starts[3] = {0, n - 1,
                                   static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))};
            for (int start : starts) {
                const FixedPointRun run = banach_fixed_point(rec.space, rec.map, start);
                if ((run.fixed_point != the_fix || run.steps > n) && ++bad == 1)
                    first = "iteration from " + std::to_string(start) + " misbehaved";
            }
        }
        const bool ok = bad == 0 && contractions >= kPositiveTrials / 3;
        report(7, ok,
               std::to_string(contractions) +
                   " global contractions each reached their unique fixed point from 3 starts" +
                   (bad ? "; first failure: " + first : ""));
    }

    // ---- Criterion 8: pigeonhole arithmetic re-verified per certificate ----
    {
        int bad = 0;
        std::string first;
        for (const PositiveRecord& rec : corpus) {
            const DeficiencyCertificate& c = rec.cert;
            auto fail = [&](const std::string& what) {
                if (++bad == 1) first = what;
            };
            const int gap = c.fine_count - c.coarse_count;
            if (gap < 1) fail("certificate without a pigeonhole gap");
            if (static_cast<int>(c.missed.size()) < gap) fail("fewer missed balls than the gap");

            const auto coarse = uniform_value_partition(rec.space, Dist(c.coarse_index));
            const auto fine = uniform_value_partition(rec.space, c.fine_level);
            if (static_cast<int>(coarse.size()) != c.coarse_count ||
                static_cast<int>(fine.size()) != c.fine_count)
                fail("partition counts drifted");
            if (coarse.size() != c.enclosures.size()) fail("one enclosure per coarse ball");

            for (std::size_t k = 0; k < coarse.size() && k < c.enclosures.size(); ++k) {
                if (c.enclosures[k].first != coarse[k].representative()) {
                    fail("enclosure order does not match the coarse partition");
                    break;
                }
                const auto cell =
                    std::find_if(fine.begin(), fine.end(), [&](const Ball& b) {
                        return b.representative() == c.enclosures[k].second;
                    });
                if (cell == fine.end() ||
                    !image_inside(rec.space, rec.map, coarse[k].members, *cell)) {
                    fail("image escapes its claimed enclosure");
                    break;
                }
            }

            std::vector<char> in_image(static_cast<std::size_t>(rec.space.size()), 0);
            for (int x = 0; x < rec.space.size(); ++x)
                in_image[static_cast<std::size_t>(rec.map(x))] = 1;
            for (const MissedBall& mb : c.missed) {
                const auto cell =
                    std::find_if(fine.begin(), fine.end(), [&](const Ball& b) {
                        return b.representative() == mb.representative;
                    });
                if (cell == fine.end()) {
                    fail("missed ball is not a fine cell");
                    break;
                }
                for (int p : cell->members)
                    if (in_image[static_cast<std::size_t>(p)]) {
                        fail("missed ball intersects the image");
                        break;
                    }
                if (!cell->contains(mb.witness)) {
                    fail("witness outside its missed ball");
                    break;
                }
            }
        }
        const bool ok = bad == 0 && !corpus.empty();
        report(8, ok,
               "pigeonhole bounds and enclosures re-verified on " +
                   std::to_string(corpus.size()) + " certificates" +
                   (bad ? "; first failure: " + first : ""));
    }

    if (g_failed == 0) {
        std::cout << "acceptance: all 8 criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << g_failed << " criteria failed\n";
    return 1;
}
