// umc: ultrametric spaces as trees, contraction analysis, and
// non-surjectivity certificates. Results go to stdout, diagnostics to
// stderr. Exit codes: 0 success/positive verdict, 1 negative verdict
// (violation, no certificate, failed check or fuzz trial), 2 bad input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "umc/contraction.hpp"
#include "umc/dynamics.hpp"
#include "umc/fuzz.hpp"
#include "umc/json_io.hpp"
#include "umc/ladder.hpp"
#include "umc/rtree.hpp"
#include "umc/space.hpp"
#include "umc/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitBadInput = 2;

struct BadInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

umc::Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return umc::parse_json_text(buf.str());
}

struct LoadedSpace {
    umc::FiniteUltrametricSpace space;
    umc::Json doc;
};

/// Decode and fully validate a space document; a metric violation counts
/// as bad input for every subcommand except `validate`.
LoadedSpace load_space(const std::string& path) {
    umc::Json doc = load_json(path);
    umc::SpaceParts parts = umc::decode_space_document(doc);
    umc::ValidationResult res =
        umc::validate_ultrametric(parts.labels, parts.ladder, parts.rows);
    if (const auto* w = std::get_if<umc::ViolationWitness>(&res))
        throw BadInput(path + " is not an ultrametric space: " +
                       umc::describe_violation(*w, parts.ladder));
    return LoadedSpace{std::get<umc::FiniteUltrametricSpace>(std::move(res)), std::move(doc)};
}

struct LoadedMap {
    umc::SelfMap map;
    umc::Json doc;
};

LoadedMap load_map(const std::string& path, int point_count) {
    umc::Json doc = load_json(path);
    std::vector<int> targets = umc::decode_map_document(doc);
    return LoadedMap{umc::SelfMap::checked(std::move(targets), point_count), std::move(doc)};
}

void emit(const umc::Json& doc) { std::cout << umc::dump_canonical(doc); }

// ----------------------------------------------------------------------------

int cmd_validate(const std::string& space_path) {
    umc::SpaceParts parts = umc::decode_space_document(load_json(space_path));
    umc::ValidationResult res =
        umc::validate_ultrametric(parts.labels, parts.ladder, parts.rows);
    if (const auto* w = std::get_if<umc::ViolationWitness>(&res)) {
        std::cout << "violation: " << umc::describe_violation(*w, parts.ladder) << "\n";
        return kExitNegative;
    }
    const auto& space = std::get<umc::FiniteUltrametricSpace>(res);
    const umc::BallLawReport laws = umc::check_ball_laws(space);
    if (!laws.passed()) {
        std::cout << "ball-law failure: " << laws.failures.front().detail << "\n";
        return kExitNegative;
    }
    std::cout << "ok: " << space.size() << " points, ladder depth "
              << space.ladder().size() << ", " << laws.checks << " ball-law checks passed";
    if (!laws.clopen_note.empty()) std::cout << " (" << laws.clopen_note << ")";
    std::cout << "\n";
    return kExitOk;
}

int cmd_gen_tree(const umc::RTree& tree) {
    emit(umc::encode_tree_document(tree));
    return kExitOk;
}

int cmd_build_tree(const std::string& space_path, bool check) {
    LoadedSpace in = load_space(space_path);
    umc::BuildResult built = umc::build_tree(in.space);
    emit(umc::encode_tree_document(built.tree));
    if (check) {
        const umc::RealizeResult back = umc::realize_space(built.tree);
        bool same = back.space.ladder() == in.space.ladder();
        for (int p = 0; same && p < in.space.size(); ++p)
            for (int q = 0; same && q < in.space.size(); ++q)
                same = in.space.dist(p, q) ==
                       back.space.dist(built.iso.leaf_of_point[static_cast<std::size_t>(p)],
                                       built.iso.leaf_of_point[static_cast<std::size_t>(q)]);
        std::cerr << "round trip: " << (same ? "isometric" : "MISMATCH") << "\n";
        if (!same) return kExitNegative;
    }
    return kExitOk;
}

int cmd_realize(const std::string& tree_path, bool check) {
    const umc::RTree tree = umc::decode_tree_document(load_json(tree_path));
    const umc::RealizeResult out = umc::realize_space(tree);
    emit(umc::encode_space_document(out.space));
    if (check) {
        const umc::BuildResult back = umc::build_tree(out.space);
        const bool same = back.tree == tree;
        std::cerr << "round trip: " << (same ? "identical tree" : "MISMATCH") << "\n";
        if (!same) return kExitNegative;
    }
    return kExitOk;
}

int cmd_analyze(const std::string& space_path, const std::string& map_path) {
    LoadedSpace in = load_space(space_path);
    LoadedMap fm = load_map(map_path, in.space.size());
    const auto& space = in.space;
    const auto& f = fm.map;

    std::cout << "points: " << space.size() << ", ladder depth " << space.ladder().size()
              << "\n";
    std::cout << "lipschitz: " << umc::format_rational(umc::lipschitz_constant(space, f))
              << "\n";

    int with_ball = 0;
    int isolated = 0;
    for (int x = 0; x < space.size(); ++x) {
        const umc::PointRadial prof = umc::find_contractive_nbhd(space, f, x);
        if (prof.has_contractive_ball()) ++with_ball;
        if (prof.isolated_at_resolution) ++isolated;
    }
    std::cout << "radial: " << with_ball << "/" << space.size()
              << " points have a contractive ball";
    if (isolated > 0) std::cout << ", " << isolated << " isolated at resolution";
    std::cout << "\n";

    const umc::PartitionOutcome part = umc::contractive_ball_partition(space, f);
    if (const auto* p = std::get_if<umc::ContractivePartition>(&part)) {
        std::cout << "partition: " << p->balls.size() << " contractive balls\n";
        for (const umc::ContractiveBall& cb : p->balls)
            std::cout << "  center " << space.label(cb.ball.center) << " radius "
                      << space.ladder().format(cb.ball.radius) << " size "
                      << cb.ball.members.size() << " modulus "
                      << umc::format_rational(cb.modulus) << "\n";
        const umc::ShrinkReport shrink = umc::shrink_check(space, f, *p);
        std::cout << "shrink check: " << (shrink.all_ok ? "passed" : "FAILED") << "\n";
    } else {
        const auto& obs = std::get<umc::PartitionObstruction>(part);
        std::cout << "partition: none, stuck at point " << space.label(obs.point) << " ("
                  << obs.reason << ")\n";
    }
    return kExitOk;
}

int cmd_certify(const std::string& space_path, const std::string& map_path, bool as_json) {
    LoadedSpace in = load_space(space_path);
    LoadedMap fm = load_map(map_path, in.space.size());
    const auto& space = in.space;
    const umc::CertifyOutcome outcome = umc::deficiency_certificate(space, fm.map);
    if (outcome.status != umc::CertifyStatus::Certified) {
        std::cout << umc::certify_status_name(outcome.status) << "\n";
        return kExitNegative;
    }
    const umc::DeficiencyCertificate& cert = *outcome.certificate;
    if (as_json) {
        emit(umc::encode_certificate_document(cert, space.ladder(),
                                              umc::content_digest(in.doc),
                                              umc::content_digest(fm.doc)));
        return kExitOk;
    }
    std::cout << "certified: map is not surjective\n";
    std::cout << "  coarse level r_" << cert.coarse_index << " = "
              << space.ladder().format(umc::Dist(cert.coarse_index)) << " ("
              << cert.coarse_count << " balls)\n";
    std::cout << "  max image diameter "
              << space.ladder().format(cert.max_image_diameter) << "\n";
    std::cout << "  fine level " << space.ladder().format(cert.fine_level) << " ("
              << cert.fine_count << " balls)\n";
    std::cout << "  missed balls (" << cert.missed.size() << "):";
    for (const umc::MissedBall& mb : cert.missed)
        std::cout << " " << space.label(mb.representative);
    std::cout << "\n";
    return kExitOk;
}

int cmd_dynamics(const std::string& space_path, const std::string& map_path,
                 std::optional<int> orbit_start) {
    LoadedSpace in = load_space(space_path);
    LoadedMap fm = load_map(map_path, in.space.size());
    const auto& space = in.space;
    const auto& f = fm.map;

    const umc::MinimalityVerdict verdict = umc::minimality_check(space, f);
    std::cout << "minimal: " << (verdict.minimal ? "yes" : "no") << " (" << verdict.note
              << ")\n";
    if (!verdict.minimal) {
        std::cout << "invariant set (" << verdict.invariant_set.size() << "):";
        for (int p : verdict.invariant_set) std::cout << " " << space.label(p);
        std::cout << "\n";
    }
    const std::vector<int> e = umc::eventual_image(space, f);
    std::cout << "eventual image (" << e.size() << "):";
    for (int p : e) std::cout << " " << space.label(p);
    std::cout << "\n";
    if (orbit_start) {
        if (!space.valid_point(*orbit_start))
            throw BadInput("orbit start out of range");
        const umc::OrbitRecord rec = umc::orbit(space, f, *orbit_start);
        std::cout << "orbit of " << space.label(rec.start) << ":";
        for (int p : rec.iterates) std::cout << " " << space.label(p);
        std::cout << " (pre-period " << rec.pre_period << ", period " << rec.period << ")\n";
    }
    return kExitOk;
}

int cmd_fuzz(std::uint64_t trials, std::uint64_t seed, int max_points, int max_depth,
             bool verbose) {
    const umc::fuzz::FuzzConfig cfg{max_points, max_depth};
    std::uint64_t failures = 0;
    std::uint64_t certified = 0;
    std::uint64_t partitions = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        const umc::fuzz::TrialOutcome o = umc::fuzz::run_trial(seed, i, cfg);
        certified += o.certified ? 1 : 0;
        partitions += o.partitioned ? 1 : 0;
        if (!o.ok) {
            ++failures;
            std::cout << "FAIL trial " << o.index << " kind "
                      << umc::fuzz::trial_kind_name(o.kind) << " points " << o.points << ": "
                      << o.detail << "\n";
        } else if (verbose) {
            std::cerr << "trial " << o.index << " kind "
                      << umc::fuzz::trial_kind_name(o.kind) << " points " << o.points
                      << " status " << umc::certify_status_name(o.status) << "\n";
        }
    }
    std::cout << "fuzz: " << trials << " trials, " << certified << " certified, "
              << partitions << " partitions, " << failures << " disagreements\n";
    return failures == 0 ? kExitOk : kExitNegative;
}

std::vector<umc::Rational> parse_ladder_list(const std::string& text) {
    std::vector<umc::Rational> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        values.push_back(umc::parse_rational(item));
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite ultrametric spaces, trees, and contraction certificates"};
    app.set_version_flag("--version", std::string(umc::kToolName) + " " + umc::kToolVersion);
    app.require_subcommand(1);

    std::string space_path;
    std::string map_path;
    std::string tree_path;

    auto* validate = app.add_subcommand("validate", "check a space document");
    validate->add_option("space", space_path, "space JSON file")->required();

    auto* gen = app.add_subcommand("gen", "generate trees and named maps");
    gen->require_subcommand(1);
    int depth = 3;
    int base = 3;
    int max_branching = 3;
    std::uint64_t seed = 1;
    std::string ladder_text;
    int constant_target = 0;
    auto* gc = gen->add_subcommand("cantor", "binary tree, dyadic ladder");
    gc->add_option("--depth", depth, "tree depth")->default_val(3);
    auto* gp = gen->add_subcommand("padic", "p-ary tree, 1/p^j ladder");
    gp->add_option("--base", base, "branching and ladder base")->default_val(3);
    gp->add_option("--depth", depth, "tree depth")->default_val(3);
    auto* gr = gen->add_subcommand("random", "random perfect truncation");
    gr->add_option("--depth", depth, "tree depth")->default_val(3);
    gr->add_option("--max-branching", max_branching, "child count upper bound")->default_val(3);
    gr->add_option("--seed", seed, "RNG seed")->default_val(1);
    gr->add_option("--ladder", ladder_text, "comma-separated ladder values (default dyadic)");
    auto* gmp = gen->add_subcommand("map-prepend-zero", "prepend-zero map of a product tree");
    gmp->add_option("tree", tree_path, "tree JSON file")->required();
    auto* gms = gen->add_subcommand("map-shift", "cyclic one-sided shift of a product tree");
    gms->add_option("tree", tree_path, "tree JSON file")->required();
    auto* gmi = gen->add_subcommand("map-identity", "identity map sized to a tree");
    gmi->add_option("tree", tree_path, "tree JSON file")->required();
    auto* gmc = gen->add_subcommand("map-constant", "constant map sized to a tree");
    gmc->add_option("tree", tree_path, "tree JSON file")->required();
    gmc->add_option("--target", constant_target, "leaf index of the constant value")
        ->default_val(0);

    bool check = false;
    auto* build = app.add_subcommand("build-tree", "dendrogram of a space document");
    build->add_option("space", space_path, "space JSON file")->required();
    build->add_flag("--check", check, "realize the tree back and compare");

    auto* realize = app.add_subcommand("realize", "end space of a tree document");
    realize->add_option("tree", tree_path, "tree JSON file")->required();
    realize->add_flag("--check", check, "rebuild the tree from the space and compare");

    auto* analyze = app.add_subcommand("analyze", "contraction analysis of a self-map");
    analyze->add_option("space", space_path, "space JSON file")->required();
    analyze->add_option("map", map_path, "map JSON file")->required();

    bool as_json = false;
    auto* certify = app.add_subcommand("certify", "non-surjectivity certificate search");
    certify->add_option("space", space_path, "space JSON file")->required();
    certify->add_option("map", map_path, "map JSON file")->required();
    certify->add_flag("--json", as_json, "emit the certificate document");

    std::optional<int> orbit_start;
    auto* dynamics = app.add_subcommand("dynamics", "minimality and invariant sets");
    dynamics->add_option("space", space_path, "space JSON file")->required();
    dynamics->add_option("map", map_path, "map JSON file")->required();
    dynamics->add_option("--orbit", orbit_start, "also print the orbit of this point");

    std::uint64_t trials = 100;
    int max_points = 200;
    int max_depth = 7;
    bool verbose = false;
    auto* fuzz = app.add_subcommand("fuzz", "randomized certificate-vs-oracle agreement");
    fuzz->add_option("--trials", trials, "number of trials")->default_val(100);
    fuzz->add_option("--seed", seed, "master seed")->default_val(1);
    fuzz->add_option("--max-points", max_points, "point budget per space")->default_val(200);
    fuzz->add_option("--max-depth", max_depth, "tree depth budget")->default_val(7);
    fuzz->add_flag("--verbose", verbose, "per-trial lines on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (validate->parsed()) return cmd_validate(space_path);
        if (gen->parsed()) {
            if (gc->parsed()) return cmd_gen_tree(umc::cantor(depth));
            if (gp->parsed()) return cmd_gen_tree(umc::padic(base, depth));
            if (gr->parsed()) {
                umc::DistanceLadder ladder =
                    ladder_text.empty()
                        ? umc::cantor(depth).ladder()
                        : umc::DistanceLadder(parse_ladder_list(ladder_text));
                if (ladder.size() != depth)
                    throw BadInput("ladder length must equal the requested depth");
                return cmd_gen_tree(umc::random_perfect(ladder, max_branching, seed));
            }
            const umc::RTree tree = umc::decode_tree_document(load_json(tree_path));
            umc::SelfMap f = gmp->parsed()   ? umc::fuzz::prepend_zero_map(tree)
                             : gms->parsed() ? umc::fuzz::shift_map(tree)
                             : gmi->parsed() ? umc::fuzz::identity_map(tree.leaf_count())
                                             : umc::fuzz::constant_map(tree.leaf_count(),
                                                                       constant_target);
            emit(umc::encode_map_document(f));
            return kExitOk;
        }
        if (build->parsed()) return cmd_build_tree(space_path, check);
        if (realize->parsed()) return cmd_realize(tree_path, check);
        if (analyze->parsed()) return cmd_analyze(space_path, map_path);
        if (certify->parsed()) return cmd_certify(space_path, map_path, as_json);
        if (dynamics->parsed()) return cmd_dynamics(space_path, map_path, orbit_start);
        if (fuzz->parsed()) return cmd_fuzz(trials, seed, max_points, max_depth, verbose);
    } catch (const BadInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const umc::DocumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const umc::MalformedInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitBadInput;
    }
    std::cerr << "error: no subcommand\n";
    return kExitBadInput;
}
