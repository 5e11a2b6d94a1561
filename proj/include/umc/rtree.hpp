#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "umc/ladder.hpp"
#include "umc/rng.hpp"
#include "umc/space.hpp"

namespace umc {

/// A node is a word over child labels; the empty word is the root.
using NodePath = std::vector<int>;

/// Rooted label tree of uniform leaf depth paired with a distance ladder.
///
/// Stored as the lex-sorted list of leaf paths. Every leaf has the same
/// length ("depth"), between 1 and the ladder length; a leaf of depth L
/// sits at ladder level L-1 (the finest level the tree reaches). Internal
/// nodes are exactly the proper prefixes of leaves. Child labels are
/// canonical: under any node they run 0..k-1 in order.
class RTree {
  public:
    static RTree from_leaves(DistanceLadder ladder, std::vector<NodePath> leaves) {
        if (leaves.empty())
            throw MalformedInput("tree has no leaves");
        const std::size_t depth = leaves.front().size();
        if (depth < 1)
            throw MalformedInput("leaf paths must be nonempty");
        if (depth > static_cast<std::size_t>(ladder.size()))
            throw MalformedInput("leaf depth " + std::to_string(depth) +
                                 " exceeds ladder length " + std::to_string(ladder.size()));
        for (const NodePath& leaf : leaves) {
            if (leaf.size() != depth)
                throw MalformedInput("leaf depths differ");
            for (int label : leaf)
                if (label < 0)
                    throw MalformedInput("negative child label");
        }
        if (!std::is_sorted(leaves.begin(), leaves.end()))
            std::sort(leaves.begin(), leaves.end());
        for (std::size_t i = 1; i < leaves.size(); ++i)
            if (leaves[i] == leaves[i - 1])
                throw MalformedInput("duplicate leaf path");
        RTree t(std::move(ladder), std::move(leaves));
        t.check_canonical_labels(0, static_cast<int>(t.leaves_.size()), 0);
        return t;
    }

    const DistanceLadder& ladder() const { return ladder_; }
    const std::vector<NodePath>& leaves() const { return leaves_; }
    int leaf_count() const { return static_cast<int>(leaves_.size()); }
    int depth() const { return static_cast<int>(leaves_.front().size()); }

    /// Ladder index of the leaf level.
    int resolution_index() const { return depth() - 1; }

    const NodePath& leaf(int i) const { return leaves_[static_cast<std::size_t>(i)]; }

    /// Lex index of a leaf path, or -1 if absent.
    int leaf_index(const NodePath& path) const {
        auto it = std::lower_bound(leaves_.begin(), leaves_.end(), path);
        if (it == leaves_.end() || *it != path) return -1;
        return static_cast<int>(it - leaves_.begin());
    }

    /// True iff path is a node (a prefix of some leaf; the root counts).
    bool is_node(const NodePath& path) const {
        if (path.size() > static_cast<std::size_t>(depth())) return false;
        auto it = std::lower_bound(leaves_.begin(), leaves_.end(), path);
        return it != leaves_.end() && is_prefix(path, *it);
    }

    /// Half-open range [lo, hi) of leaf indices below the node at path.
    std::pair<int, int> descendant_range(const NodePath& path) const {
        auto lo = std::lower_bound(leaves_.begin(), leaves_.end(), path);
        auto hi = leaves_.end();
        if (!path.empty()) {
            NodePath succ = path;
            ++succ.back();
            hi = std::lower_bound(lo, leaves_.end(), succ);
        }
        return {static_cast<int>(lo - leaves_.begin()), static_cast<int>(hi - leaves_.begin())};
    }

    friend bool operator==(const RTree& a, const RTree& b) {
        return a.ladder_ == b.ladder_ && a.leaves_ == b.leaves_;
    }

    static bool is_prefix(const NodePath& p, const NodePath& q) {
        return p.size() <= q.size() && std::equal(p.begin(), p.end(), q.begin());
    }

  private:
    RTree(DistanceLadder ladder, std::vector<NodePath> leaves)
        : ladder_(std::move(ladder)), leaves_(std::move(leaves)) {}

    void check_canonical_labels(int lo, int hi, int pos) const {
        if (pos == depth()) return;
        int expected = 0;
        int i = lo;
        while (i < hi) {
            const int label = leaves_[static_cast<std::size_t>(i)][static_cast<std::size_t>(pos)];
            if (label != expected)
                throw MalformedInput("child labels not contiguous from 0 under a node at depth " +
                                     std::to_string(pos));
            int j = i;
            while (j < hi &&
                   leaves_[static_cast<std::size_t>(j)][static_cast<std::size_t>(pos)] == label)
                ++j;
            check_canonical_labels(i, j, pos + 1);
            i = j;
            ++expected;
        }
    }

    DistanceLadder ladder_;
    std::vector<NodePath> leaves_;
};

/// End-space distance between two leaves: ZERO if equal, otherwise the
/// ladder value at the first coordinate where the paths differ.
inline Dist end_distance(const RTree& tree, const NodePath& u, const NodePath& v) {
    if (tree.leaf_index(u) < 0 || tree.leaf_index(v) < 0)
        throw MalformedInput("end_distance arguments must be leaves");
    for (int k = 0; k < tree.depth(); ++k)
        if (u[static_cast<std::size_t>(k)] != v[static_cast<std::size_t>(k)])
            return Dist(k);
    return Dist::zero();
}

inline Dist end_distance_by_index(const RTree& tree, int i, int j) {
    const NodePath& u = tree.leaf(i);
    const NodePath& v = tree.leaf(j);
    for (int k = 0; k < tree.depth(); ++k)
        if (u[static_cast<std::size_t>(k)] != v[static_cast<std::size_t>(k)])
            return Dist(k);
    return Dist::zero();
}

/// Two nodes are incompatible when neither is a prefix of the other.
/// Their cones are then disjoint.
inline bool incompatible(const RTree& tree, const NodePath& u, const NodePath& v) {
    if (!tree.is_node(u) || !tree.is_node(v))
        throw MalformedInput("incompatible() arguments must be nodes of the tree");
    return !RTree::is_prefix(u, v) && !RTree::is_prefix(v, u);
}

/// Leaf indices of all leaves extending the node at path.
inline std::vector<int> cone_members(const RTree& tree, const NodePath& path) {
    if (!tree.is_node(path))
        throw MalformedInput("cone_members() argument must be a node of the tree");
    auto [lo, hi] = tree.descendant_range(path);
    std::vector<int> out(static_cast<std::size_t>(hi - lo));
    std::iota(out.begin(), out.end(), lo);
    return out;
}

/// All nodes whose level is the ladder value r, i.e. words of length
/// idx(r)+1, in lex order. Empty when the tree is shallower than r.
inline std::vector<NodePath> nodes_at_level(const RTree& tree, Dist r) {
    if (r.is_zero() || !tree.ladder().valid_dist(r))
        throw MalformedInput("nodes_at_level() expects a ladder value");
    const int len = r.idx + 1;
    std::vector<NodePath> out;
    if (len > tree.depth()) return out;
    const auto& leaves = tree.leaves();
    for (std::size_t i = 0; i < leaves.size();) {
        NodePath prefix(leaves[i].begin(), leaves[i].begin() + len);
        std::size_t j = i;
        while (j < leaves.size() && RTree::is_prefix(prefix, leaves[j])) ++j;
        out.push_back(std::move(prefix));
        i = j;
    }
    return out;
}

/// Point <-> leaf correspondence produced by build_tree / realize_space.
struct TreeIsometry {
    std::vector<int> leaf_of_point;  // point id -> leaf lex index
    std::vector<int> point_of_leaf;  // leaf lex index -> point id

    int points() const { return static_cast<int>(leaf_of_point.size()); }
};

struct BuildResult {
    RTree tree;
    TreeIsometry iso;
};

/// Dendrogram construction. Level L in 1..m splits the classes of
/// d <= r_L (reading r_m as ZERO, so the last step yields singletons);
/// child labels follow least-member order within each parent class.
/// The resulting tree has depth m and its end space is isometric to the
/// input via the returned correspondence.
inline BuildResult build_tree(const FiniteUltrametricSpace& space) {
    const int n = space.size();
    const int m = space.ladder().size();
    std::vector<std::vector<int>> classes{std::vector<int>(static_cast<std::size_t>(n))};
    std::iota(classes.front().begin(), classes.front().end(), 0);
    std::vector<NodePath> path_of_point(static_cast<std::size_t>(n));

    for (int level = 1; level <= m; ++level) {
        const Dist threshold = level < m ? Dist(level) : Dist::zero();
        std::vector<std::vector<int>> next;
        for (const std::vector<int>& cls : classes) {
            std::vector<bool> taken(cls.size(), false);
            int label = 0;
            for (std::size_t a = 0; a < cls.size(); ++a) {
                if (taken[a]) continue;
                std::vector<int> sub;
                for (std::size_t b = a; b < cls.size(); ++b) {
                    if (!taken[b] && space.dist(cls[a], cls[b]) <= threshold) {
                        taken[b] = true;
                        sub.push_back(cls[b]);
                    }
                }
                for (int p : sub) path_of_point[static_cast<std::size_t>(p)].push_back(label);
                next.push_back(std::move(sub));
                ++label;
            }
        }
        classes = std::move(next);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return path_of_point[static_cast<std::size_t>(a)] < path_of_point[static_cast<std::size_t>(b)];
    });
    std::vector<NodePath> leaves;
    leaves.reserve(static_cast<std::size_t>(n));
    TreeIsometry iso;
    iso.leaf_of_point.assign(static_cast<std::size_t>(n), -1);
    iso.point_of_leaf.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int p = order[static_cast<std::size_t>(i)];
        leaves.push_back(std::move(path_of_point[static_cast<std::size_t>(p)]));
        iso.leaf_of_point[static_cast<std::size_t>(p)] = i;
        iso.point_of_leaf.push_back(p);
    }
    return BuildResult{RTree::from_leaves(space.ladder(), std::move(leaves)), std::move(iso)};
}

/// Printable name for a leaf or internal node. Digit concatenation while
/// every label fits one digit ("010", internal "01*"), dotted otherwise
/// ("0.10.3", internal "0.10.*").
inline std::string format_node(const RTree& tree, const NodePath& path) {
    int max_label = 0;
    for (const NodePath& leaf : tree.leaves())
        for (int label : leaf) max_label = std::max(max_label, label);
    std::string out;
    if (max_label <= 9) {
        for (int label : path) out += static_cast<char>('0' + label);
        out.append(static_cast<std::size_t>(tree.depth() - static_cast<int>(path.size())), '*');
    } else {
        for (std::size_t k = 0; k < path.size(); ++k) {
            if (k) out += '.';
            out += std::to_string(path[k]);
        }
        for (int k = static_cast<int>(path.size()); k < tree.depth(); ++k) {
            if (k) out += '.';
            out += '*';
        }
    }
    return out;
}

struct RealizeResult {
    FiniteUltrametricSpace space;
    TreeIsometry iso;
};

/// End space of a tree: one point per leaf in lex order, labelled by its
/// path, with the first-differing-coordinate metric. The matrix is run
/// through full validation before returning.
inline RealizeResult realize_space(const RTree& tree) {
    const int n = tree.leaf_count();
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back(format_node(tree, tree.leaf(i)));
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n),
                                       std::vector<int>(static_cast<std::size_t>(n), -1));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const int idx = end_distance_by_index(tree, i, j).idx;
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = idx;
            rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = idx;
        }
    ValidationResult checked = validate_ultrametric(labels, tree.ladder(), rows);
    if (std::holds_alternative<ViolationWitness>(checked))
        throw std::logic_error("realized end-space matrix failed validation");
    TreeIsometry iso;
    iso.leaf_of_point.resize(static_cast<std::size_t>(n));
    iso.point_of_leaf.resize(static_cast<std::size_t>(n));
    std::iota(iso.leaf_of_point.begin(), iso.leaf_of_point.end(), 0);
    std::iota(iso.point_of_leaf.begin(), iso.point_of_leaf.end(), 0);
    return RealizeResult{std::get<FiniteUltrametricSpace>(std::move(checked)), std::move(iso)};
}

/// True iff every node above leaf level has at least two leaf descendants,
/// i.e. the end space has no point isolated above the leaf scale.
inline bool is_perfect_truncation(const RTree& tree) {
    struct Walker {
        const RTree& t;
        bool walk(int lo, int hi, int pos) const {
            if (pos == t.depth()) return true;
            if (hi - lo < 2) return false;
            int i = lo;
            while (i < hi) {
                const int label = t.leaf(i)[static_cast<std::size_t>(pos)];
                int j = i;
                while (j < hi && t.leaf(j)[static_cast<std::size_t>(pos)] == label) ++j;
                if (!walk(i, j, pos + 1)) return false;
                i = j;
            }
            return true;
        }
    };
    return Walker{tree}.walk(0, tree.leaf_count(), 0);
}

/// Full product tree: branching[j] children at every node of depth j.
/// Requires one branching entry per ladder value, each at least 2, so the
/// result is a perfect truncation realizing every ladder value.
inline RTree generate_from_ladder(const DistanceLadder& ladder, std::span<const int> branching) {
    if (static_cast<int>(branching.size()) != ladder.size())
        throw MalformedInput("branching list length must equal ladder length");
    long long total = 1;
    for (int b : branching) {
        if (b < 2)
            throw MalformedInput("branching factors must be at least 2");
        total *= b;
        if (total > 5'000'000)
            throw MalformedInput("generated tree would be too large");
    }
    std::vector<NodePath> leaves;
    leaves.reserve(static_cast<std::size_t>(total));
    NodePath cur(branching.size(), 0);
    for (;;) {
        leaves.push_back(cur);
        int pos = static_cast<int>(branching.size()) - 1;
        while (pos >= 0 && cur[static_cast<std::size_t>(pos)] + 1 ==
                               branching[static_cast<std::size_t>(pos)]) {
            cur[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++cur[static_cast<std::size_t>(pos)];
    }
    return RTree::from_leaves(ladder, std::move(leaves));
}

/// Binary tree of the given depth over the ladder 1, 1/2, ..., 2^-(depth-1).
inline RTree cantor(int depth) {
    if (depth < 1) throw MalformedInput("cantor() depth must be at least 1");
    std::vector<Rational> values;
    Rational v(1);
    for (int j = 0; j < depth; ++j) {
        values.push_back(v);
        v /= 2;
    }
    std::vector<int> branching(static_cast<std::size_t>(depth), 2);
    return generate_from_ladder(DistanceLadder(values), branching);
}

/// p-ary tree of the given depth over the ladder 1, 1/p, ..., p^-(depth-1).
inline RTree padic(int p, int depth) {
    if (p < 2) throw MalformedInput("padic() base must be at least 2");
    if (depth < 1) throw MalformedInput("padic() depth must be at least 1");
    std::vector<Rational> values;
    Rational v(1);
    for (int j = 0; j < depth; ++j) {
        values.push_back(v);
        v /= p;
    }
    std::vector<int> branching(static_cast<std::size_t>(depth), p);
    return generate_from_ladder(DistanceLadder(values), branching);
}

/// Random perfect truncation of depth |ladder|: every internal node draws
/// its child count uniformly from [2, max_branching], in preorder, so a
/// seed pins the tree exactly.
inline RTree random_perfect(const DistanceLadder& ladder, int max_branching, std::uint64_t seed) {
    if (max_branching < 2)
        throw MalformedInput("random_perfect() needs max_branching at least 2");
    SplitMix64 rng(seed);
    std::vector<NodePath> leaves;
    NodePath cur;
    struct Gen {
        const int depth;
        const int max_b;
        SplitMix64& rng;
        std::vector<NodePath>& out;
        NodePath& cur;
        void walk() {
            if (static_cast<int>(cur.size()) == depth) {
                out.push_back(cur);
                return;
            }
            const int kids = rng.range(2, max_b);
            for (int label = 0; label < kids; ++label) {
                cur.push_back(label);
                walk();
                cur.pop_back();
            }
        }
    };
    Gen{ladder.size(), max_branching, rng, leaves, cur}.walk();
    return RTree::from_leaves(ladder, std::move(leaves));
}

}  // namespace umc
