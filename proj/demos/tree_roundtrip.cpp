// Walkthrough: a hand-written distance matrix, its dendrogram, and the
// realized end space that reproduces the metric exactly.
#include <iostream>

#include "umc/json_io.hpp"
#include "umc/rtree.hpp"

int main() {
    using namespace umc;

    // Five points, distances drawn from the ladder 1 > 1/2 > 1/4.
    const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
    const DistanceLadder ladder({Rational(1), Rational(1, 2), Rational(1, 4)});
    const std::vector<std::vector<int>> dist = {
        {-1, 2, 1, 0, 0},
        {2, -1, 1, 0, 0},
        {1, 1, -1, 0, 0},
        {0, 0, 0, -1, 1},
        {0, 0, 0, 1, -1},
    };

    const ValidationResult checked = validate_ultrametric(names, ladder, dist);
    if (const auto* w = std::get_if<ViolationWitness>(&checked)) {
        std::cout << "violation: " << describe_violation(*w, ladder) << "\n";
        return 1;
    }
    const auto& space = std::get<FiniteUltrametricSpace>(checked);
    std::cout << "validated " << space.size() << " points\n";

    const BuildResult built = build_tree(space);
    std::cout << "dendrogram leaves:\n";
    for (int i = 0; i < built.tree.leaf_count(); ++i) {
        const int p = built.iso.point_of_leaf[static_cast<std::size_t>(i)];
        std::cout << "  " << format_node(built.tree, built.tree.leaf(i)) << "  <-  "
                  << space.label(p) << "\n";
    }

    const RealizeResult back = realize_space(built.tree);
    bool exact = true;
    for (int x = 0; x < space.size(); ++x)
        for (int y = 0; y < space.size(); ++y) {
            const int lx = built.iso.leaf_of_point[static_cast<std::size_t>(x)];
            const int ly = built.iso.leaf_of_point[static_cast<std::size_t>(y)];
            exact = exact && back.space.dist(lx, ly) == space.dist(x, y);
        }
    std::cout << "metric reproduced exactly: " << (exact ? "yes" : "NO") << "\n";

    std::cout << "\ntree document:\n" << dump_canonical(encode_tree_document(built.tree));
    return exact ? 0 : 1;
}
