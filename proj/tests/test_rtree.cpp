#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "umc/fuzz.hpp"
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

}  // namespace

TEST_CASE("tree construction enforces canonical shape") {
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(2), {}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(2), {{0, 0}, {0, 0}}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(2), {{0, 0}, {1}}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(1), {{0, 0}, {0, 1}}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(1), {{1}, {2}}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(1), {{0}, {2}}), MalformedInput);
    CHECK_THROWS_AS(RTree::from_leaves(dyadic(1), {{0}, {-1}}), MalformedInput);

    const RTree t = RTree::from_leaves(dyadic(2), {{1, 0}, {0, 1}, {0, 0}});
    CHECK(t.leaf_count() == 3);
    CHECK(t.depth() == 2);
    CHECK(t.resolution_index() == 1);
    CHECK(t.leaf(0) == NodePath{0, 0});  // sorted on construction
    CHECK(t.leaf_index({1, 0}) == 2);
    CHECK(t.leaf_index({1, 1}) == -1);
    CHECK(t.is_node({}));
    CHECK(t.is_node({1}));
    CHECK_FALSE(t.is_node({2}));
    CHECK_FALSE(t.is_node({0, 0, 0}));
}

TEST_CASE("end distance reads the first differing coordinate") {
    const RTree t = cantor(3);
    CHECK(end_distance(t, {0, 0, 0}, {0, 0, 1}) == Dist(2));
    CHECK(end_distance(t, {0, 0, 0}, {0, 1, 1}) == Dist(1));
    CHECK(end_distance(t, {0, 0, 0}, {1, 0, 0}) == Dist(0));
    CHECK(end_distance(t, {1, 0, 1}, {1, 0, 1}) == Dist::zero());
    CHECK(end_distance_by_index(t, 0, 4) == Dist(0));
    CHECK_THROWS_AS(end_distance(t, {0, 0}, {0, 0, 1}), MalformedInput);
}

TEST_CASE("incompatibility and cones") {
    const RTree t = cantor(3);
    CHECK(incompatible(t, {0}, {1}));
    CHECK_FALSE(incompatible(t, {0}, {0, 1}));
    CHECK_FALSE(incompatible(t, {}, {1, 0}));
    CHECK_THROWS_AS(incompatible(t, {2}, {0}), MalformedInput);

    CHECK(cone_members(t, {}).size() == 8);
    CHECK(cone_members(t, {0}) == std::vector<int>{0, 1, 2, 3});
    CHECK(cone_members(t, {1, 0}) == std::vector<int>{4, 5});
    CHECK(cone_members(t, {1, 1, 0}) == std::vector<int>{6});
    CHECK_THROWS_AS(cone_members(t, {0, 2}), MalformedInput);
}

TEST_CASE("node counts per level match the leaf structure") {
    const RTree t = cantor(3);
    CHECK(nodes_at_level(t, Dist(0)).size() == 2);
    CHECK(nodes_at_level(t, Dist(1)).size() == 4);
    CHECK(nodes_at_level(t, Dist(2)).size() == 8);  // finest level = leaves
    CHECK(nodes_at_level(t, Dist(1))[2] == NodePath{1, 0});
    CHECK_THROWS_AS(nodes_at_level(t, Dist::zero()), MalformedInput);
    CHECK_THROWS_AS(nodes_at_level(t, Dist(5)), MalformedInput);
}

TEST_CASE("cones realize closed balls one rung below their level") {
    for (const RTree& t : {cantor(3), padic(3, 2)}) {
        const RealizeResult r = realize_space(t);
        const int m = t.ladder().size();
        // A node of word length L spans the closed ball of radius r_L
        // around any of its members (ZERO when L exceeds the ladder).
        for (int L = 0; L <= t.depth(); ++L) {
            std::vector<NodePath> nodes =
                L == 0 ? std::vector<NodePath>{{}} : nodes_at_level(t, Dist(L - 1));
            for (const NodePath& u : nodes) {
                const std::vector<int> cone = cone_members(t, u);
                const Dist radius = L < m ? Dist(L) : Dist::zero();
                CHECK(ball_members(r.space, cone.front(), radius).members == cone);
            }
        }
        // Partition counts at value r_j equal node counts at level r_{j-1}.
        for (int j = 1; j < m; ++j)
            CHECK(uniform_value_partition(r.space, Dist(j)).size() ==
                  nodes_at_level(t, Dist(j - 1)).size());
        CHECK(uniform_value_partition(r.space, Dist(0)).size() == 1);
    }
}

TEST_CASE("build_tree produces the dendrogram with least-member labels") {
    // d(a,b) = 1/2, d(a,c) = d(b,c) = 1
    const std::vector<std::vector<int>> rows = {{-1, 1, 0}, {1, -1, 0}, {0, 0, -1}};
    const auto space = std::get<FiniteUltrametricSpace>(
        validate_ultrametric({"a", "b", "c"}, dyadic(2), rows));
    const BuildResult b = build_tree(space);
    CHECK(b.tree.leaves() == std::vector<NodePath>{{0, 0}, {0, 1}, {1, 0}});
    CHECK(b.iso.leaf_of_point == std::vector<int>{0, 1, 2});
    CHECK(b.iso.point_of_leaf == std::vector<int>{0, 1, 2});
    CHECK(b.tree.depth() == 2);

    // The realized end space is isometric to the input through the leaves.
    const RealizeResult back = realize_space(b.tree);
    for (int p = 0; p < space.size(); ++p)
        for (int q = 0; q < space.size(); ++q)
            CHECK(space.dist(p, q) ==
                  back.space.dist(b.iso.leaf_of_point[p], b.iso.leaf_of_point[q]));
}

TEST_CASE("realized spaces carry path labels and exact matrices") {
    const RealizeResult r = realize_space(cantor(2));
    CHECK(r.space.labels() == std::vector<std::string>{"00", "01", "10", "11"});
    CHECK(r.space.matrix_rows() ==
          std::vector<std::vector<int>>{
              {-1, 1, 0, 0}, {1, -1, 0, 0}, {0, 0, -1, 1}, {0, 0, 1, -1}});
    CHECK(r.iso.leaf_of_point == std::vector<int>{0, 1, 2, 3});

    const RealizeResult wide = realize_space(padic(11, 1));
    CHECK(wide.space.label(10) == "10");
    CHECK(wide.space.label(0) == "0");

    const RealizeResult deep = realize_space(padic(11, 2));
    CHECK(deep.space.label(0) == "0.0");
    CHECK(deep.space.label(120) == "10.10");
    CHECK(format_node(padic(11, 2), {10}) == "10.*");
    CHECK(format_node(cantor(3), {1}) == "1**");
}

TEST_CASE("tree to space to tree is the identity on canonical trees") {
    CHECK(build_tree(realize_space(cantor(3)).space).tree == cantor(3));
    CHECK(build_tree(realize_space(padic(3, 2)).space).tree == padic(3, 2));
    SplitMix64 rng(99);
    for (int i = 0; i < 25; ++i) {
        const RTree t = fuzz::random_tree(rng, {150, 6});
        const RealizeResult r = realize_space(t);
        CHECK(build_tree(r.space).tree == t);
    }
}

TEST_CASE("perfect truncations have no isolated branch") {
    CHECK(is_perfect_truncation(cantor(3)));
    CHECK(is_perfect_truncation(padic(5, 2)));
    CHECK_FALSE(is_perfect_truncation(RTree::from_leaves(dyadic(1), {{0}})));
    CHECK_FALSE(
        is_perfect_truncation(RTree::from_leaves(dyadic(2), {{0, 0}, {1, 0}, {1, 1}})));
    SplitMix64 rng(5);
    for (int i = 0; i < 25; ++i)
        CHECK(is_perfect_truncation(fuzz::random_tree(rng, {150, 6})));
}

TEST_CASE("generators respect branching arithmetic") {
    const RTree g = generate_from_ladder(dyadic(3), std::vector<int>{2, 3, 2});
    CHECK(g.leaf_count() == 12);
    CHECK(g.depth() == 3);
    CHECK_THROWS_AS(generate_from_ladder(dyadic(3), std::vector<int>{2, 2}), MalformedInput);
    CHECK_THROWS_AS(generate_from_ladder(dyadic(2), std::vector<int>{2, 1}), MalformedInput);

    CHECK(cantor(4).leaf_count() == 16);
    CHECK(cantor(1).leaf_count() == 2);
    CHECK(cantor(2).ladder().value_at(1) == Rational(1, 2));
    CHECK_THROWS_AS(cantor(0), MalformedInput);

    CHECK(padic(3, 3).leaf_count() == 27);
    CHECK(padic(5, 2).ladder().value_at(1) == Rational(1, 5));
    CHECK_THROWS_AS(padic(1, 2), MalformedInput);

    const RTree r1 = random_perfect(dyadic(3), 4, 42);
    const RTree r2 = random_perfect(dyadic(3), 4, 42);
    const RTree r3 = random_perfect(dyadic(3), 4, 43);
    CHECK(r1 == r2);
    CHECK_FALSE(r1 == r3);
    CHECK(is_perfect_truncation(r1));
    CHECK_THROWS_AS(random_perfect(dyadic(2), 1, 0), MalformedInput);
}
