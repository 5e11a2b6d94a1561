#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <variant>
#include <vector>

#include "umc/fuzz.hpp"
#include "umc/ladder.hpp"
#include "umc/rational.hpp"
#include "umc/rtree.hpp"
#include "umc/space.hpp"

using namespace umc;

namespace {

DistanceLadder dyadic(int m) {
    std::vector<Rational> v;
    Rational r(1);
    for (int j = 0; j < m; ++j, r /= 2) v.push_back(r);
    return DistanceLadder(v);
}

FiniteUltrametricSpace must_validate(std::vector<std::string> labels, DistanceLadder ladder,
                                     const std::vector<std::vector<int>>& rows) {
    ValidationResult res = validate_ultrametric(std::move(labels), std::move(ladder), rows);
    REQUIRE(std::holds_alternative<FiniteUltrametricSpace>(res));
    return std::get<FiniteUltrametricSpace>(std::move(res));
}

ViolationWitness must_reject(std::vector<std::string> labels, DistanceLadder ladder,
                             const std::vector<std::vector<int>>& rows) {
    ValidationResult res = validate_ultrametric(std::move(labels), std::move(ladder), rows);
    REQUIRE(std::holds_alternative<ViolationWitness>(res));
    return std::get<ViolationWitness>(std::move(res));
}

}  // namespace

TEST_CASE("rational parse and format round-trip in lowest terms") {
    CHECK(format_rational(parse_rational("3")) == "3");
    CHECK(format_rational(parse_rational("1/2")) == "1/2");
    CHECK(format_rational(parse_rational("2/4")) == "1/2");
    CHECK(format_rational(parse_rational("10/5")) == "2");
    CHECK(parse_rational("7/3") == Rational(7, 3));
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("a/b"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/2/3"), std::invalid_argument);
}

TEST_CASE("distance ladder validates strict descent and positivity") {
    CHECK(dyadic(3).size() == 3);
    CHECK_THROWS_AS(DistanceLadder({}), std::invalid_argument);
    CHECK_THROWS_AS(DistanceLadder({Rational(1), Rational(1)}), std::invalid_argument);
    CHECK_THROWS_AS(DistanceLadder({Rational(1, 2), Rational(1)}), std::invalid_argument);
    CHECK_THROWS_AS(DistanceLadder({Rational(0)}), std::invalid_argument);
    CHECK_THROWS_AS(DistanceLadder({Rational(1), Rational(-1, 2)}), std::invalid_argument);
}

TEST_CASE("dist ordering follows ladder values, not indices") {
    const DistanceLadder lad = dyadic(3);
    const Dist zero = Dist::zero();
    CHECK(zero < Dist(2));
    CHECK(Dist(2) < Dist(1));
    CHECK(Dist(1) < Dist(0));
    CHECK(max_dist(Dist(2), Dist(0)) == Dist(0));
    CHECK(max_dist(zero, zero) == zero);
    CHECK(lad.value(zero) == Rational(0));
    CHECK(lad.value(Dist(1)) == Rational(1, 2));
    CHECK(lad.format(zero) == "0");
    CHECK(lad.format(Dist(0)) == "1");
}

TEST_CASE("validate accepts a hand ultrametric and rejects each axiom break") {
    const std::vector<std::string> abc = {"a", "b", "c"};
    // d(a,b) = 1/2, d(a,c) = d(b,c) = 1
    const std::vector<std::vector<int>> good = {{-1, 1, 0}, {1, -1, 0}, {0, 0, -1}};
    const FiniteUltrametricSpace s = must_validate(abc, dyadic(2), good);
    CHECK(s.size() == 3);
    CHECK(s.dist(0, 1) == Dist(1));
    CHECK(s.dist_value(0, 2) == Rational(1));
    CHECK(s.matrix_rows() == good);

    SECTION("zero diagonal") {
        auto rows = good;
        rows[1][1] = 0;
        const ViolationWitness w = must_reject(abc, dyadic(2), rows);
        CHECK(w.kind == ViolationKind::ZeroDiagonal);
        CHECK(w.points == std::vector<int>{1});
    }
    SECTION("asymmetry") {
        auto rows = good;
        rows[0][2] = 1;
        const ViolationWitness w = must_reject(abc, dyadic(2), rows);
        CHECK(w.kind == ViolationKind::Asymmetry);
        CHECK(w.points == std::vector<int>{0, 2});
        CHECK(w.distances == std::vector<Dist>{Dist(1), Dist(0)});
    }
    SECTION("indiscernibles") {
        auto rows = good;
        rows[0][1] = rows[1][0] = -1;
        const ViolationWitness w = must_reject(abc, dyadic(2), rows);
        CHECK(w.kind == ViolationKind::Indiscernibles);
        CHECK(w.points == std::vector<int>{0, 1});
    }
    SECTION("strong triangle") {
        // d(a,b) = 1 exceeds max(d(a,c), d(b,c)) = 1/2
        const std::vector<std::vector<int>> rows = {{-1, 0, 1}, {0, -1, 1}, {1, 1, -1}};
        const ViolationWitness w = must_reject(abc, dyadic(2), rows);
        CHECK(w.kind == ViolationKind::StrongTriangle);
        CHECK(w.points == std::vector<int>{0, 1, 2});
        CHECK(w.distances == std::vector<Dist>{Dist(0), Dist(1), Dist(1)});
        CHECK(describe_violation(w, dyadic(2)) ==
              "strong-triangle at (0,1,2), distances 1 1/2 1/2");
    }
    SECTION("structural problems throw instead of witnessing") {
        CHECK_THROWS_AS(validate_ultrametric({}, dyadic(2), {}), MalformedInput);
        CHECK_THROWS_AS(validate_ultrametric(abc, dyadic(2), {{-1, 1}, {1, -1}}),
                        MalformedInput);
        auto rows = good;
        rows[2][0] = 7;
        CHECK_THROWS_AS(validate_ultrametric(abc, dyadic(2), rows), MalformedInput);
        rows[2][0] = -2;
        CHECK_THROWS_AS(validate_ultrametric(abc, dyadic(2), rows), MalformedInput);
    }
}

TEST_CASE("diameter and ball membership on a realized binary tree") {
    const FiniteUltrametricSpace s = realize_space(cantor(3)).space;
    const std::vector<int> all = {0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(diameter(s, all) == Dist(0));
    CHECK(diameter(s, std::vector<int>{0}) == Dist::zero());
    CHECK(diameter(s, std::vector<int>{0, 1}) == Dist(2));
    CHECK(diameter(s, std::vector<int>{0, 2}) == Dist(1));
    CHECK_THROWS_AS(diameter(s, std::vector<int>{}), std::invalid_argument);
    CHECK_THROWS_AS(diameter(s, std::vector<int>{0, 99}), std::invalid_argument);

    CHECK(ball_members(s, 0, Dist::zero()).members == std::vector<int>{0});
    CHECK(ball_members(s, 0, Dist(2)).members == std::vector<int>{0, 1});
    CHECK(ball_members(s, 0, Dist(1)).members == std::vector<int>{0, 1, 2, 3});
    CHECK(ball_members(s, 5, Dist(0)).members == all);
    CHECK(ball_members(s, 5, Dist(2)).representative() == 4);
    CHECK(ball_members(s, 5, Dist(2)).contains(5));
    CHECK_FALSE(ball_members(s, 5, Dist(2)).contains(6));
    CHECK_THROWS_AS(ball_members(s, -1, Dist(0)), std::invalid_argument);
    CHECK_THROWS_AS(ball_members(s, 0, Dist(9)), std::invalid_argument);
}

TEST_CASE("uniform partitions refine as the radius shrinks") {
    const FiniteUltrametricSpace s = realize_space(cantor(3)).space;
    CHECK(uniform_value_partition(s, Dist(0)).size() == 1);
    CHECK(uniform_value_partition(s, Dist(1)).size() == 2);
    CHECK(uniform_value_partition(s, Dist(2)).size() == 4);
    CHECK(uniform_value_partition(s, Dist::zero()).size() == 8);
    const auto cells = uniform_value_partition(s, Dist(2));
    CHECK(cells[1].representative() == 2);
    CHECK(cells[1].members == std::vector<int>{2, 3});

    SplitMix64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sp = realize_space(fuzz::random_tree(rng, {100, 5})).space;
        std::size_t prev = 0;
        for (int j = 0; j < sp.ladder().size(); ++j) {
            const auto part = uniform_value_partition(sp, Dist(j));
            std::size_t total = 0;
            for (const Ball& b : part) total += b.members.size();
            CHECK(total == static_cast<std::size_t>(sp.size()));
            CHECK(part.size() >= std::max<std::size_t>(prev, 1));
            prev = part.size();
        }
        CHECK(uniform_value_partition(sp, Dist::zero()).size() ==
              static_cast<std::size_t>(sp.size()));
    }
}

TEST_CASE("chooser-driven partitions enforce disjointness and containment") {
    const FiniteUltrametricSpace s = realize_space(cantor(3)).space;
    const std::vector<int> all = {0, 1, 2, 3, 4, 5, 6, 7};

    const auto halves = partition_into_balls(s, all, [](int) { return Dist(1); });
    REQUIRE(halves.size() == 2);
    CHECK(halves[0].members == std::vector<int>{0, 1, 2, 3});
    CHECK(halves[1].members == std::vector<int>{4, 5, 6, 7});

    const auto mixed = partition_into_balls(s, all, [](int p) {
        return p == 0 ? Dist(1) : Dist(2);
    });
    REQUIRE(mixed.size() == 3);
    CHECK(mixed[0].radius == Dist(1));

    SECTION("overlap is reported with the offending point") {
        try {
            partition_into_balls(s, all, [](int p) { return p == 2 ? Dist(0) : Dist(2); });
            FAIL("expected PartitionChooserError");
        } catch (const PartitionChooserError& e) {
            CHECK(e.point == 2);
        }
    }
    SECTION("escaping the subset is reported") {
        const std::vector<int> sub = {0, 1, 2};
        try {
            partition_into_balls(s, sub, [](int) { return Dist(1); });
            FAIL("expected PartitionChooserError");
        } catch (const PartitionChooserError& e) {
            CHECK(e.point == 0);
        }
    }
    SECTION("empty subset is structural") {
        CHECK_THROWS_AS(partition_into_balls(s, std::vector<int>{}, [](int) { return Dist(0); }),
                        std::invalid_argument);
    }
}

TEST_CASE("ball-law audit passes on valid spaces and flags corrupted ones") {
    const FiniteUltrametricSpace c3 = realize_space(cantor(3)).space;
    const BallLawReport r1 = check_ball_laws(c3);
    CHECK(r1.passed());
    CHECK(r1.checks > 0);
    CHECK(r1.clopen_note.find("vacuously") != std::string::npos);

    const FiniteUltrametricSpace p32 = realize_space(padic(3, 2)).space;
    CHECK(check_ball_laws(p32).passed());

    // Matrix violating the isoceles law, built behind the validator's back.
    const FiniteUltrametricSpace bad = FiniteUltrametricSpace::unchecked(
        {"a", "b", "c"}, dyadic(2), {{-1, 1, 1}, {1, -1, 0}, {1, 0, -1}});
    const BallLawReport r2 = check_ball_laws(bad);
    CHECK_FALSE(r2.passed());
    REQUIRE(r2.failure_count > 0);
    CHECK(r2.failures.front().law == 1);

    SplitMix64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sp = realize_space(fuzz::random_tree(rng, {80, 5})).space;
        CHECK(check_ball_laws(sp).passed());
    }
}

TEST_CASE("seeded corruption always produces a violation witness") {
    for (std::uint64_t i = 0; i < 40; ++i) {
        const fuzz::ValidationTrial t = fuzz::run_validation_trial(517, i, {120, 6});
        INFO("trial " << i << ": " << t.detail);
        CHECK(t.ok);
    }
}
