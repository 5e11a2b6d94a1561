// Walkthrough: build a 3-adic space, contract it onto one branch, and read
// off the non-surjectivity certificate plus its dynamical consequences.
#include <iostream>

#include "umc/dynamics.hpp"
#include "umc/fuzz.hpp"
#include "umc/json_io.hpp"
#include "umc/rtree.hpp"

int main() {
    using namespace umc;

    const RTree tree = padic(3, 3);  // 27 leaves, ladder 1, 1/3, 1/9
    const FiniteUltrametricSpace space = realize_space(tree).space;
    std::cout << "space: " << space.size() << " points, ladder";
    for (int j = 0; j < space.ladder().size(); ++j)
        std::cout << " " << space.ladder().format(Dist(j));
    std::cout << "\n";

    const SelfMap f = fuzz::prepend_zero_map(tree);
    std::cout << "map: u -> 0u (prepend a zero digit), lipschitz "
              << format_rational(lipschitz_constant(space, f)) << "\n\n";

    const PointRadial prof = find_contractive_nbhd(space, f, 0);
    std::cout << "radial profile at " << space.label(0) << ":\n";
    for (int j = 0; j < space.ladder().size(); ++j) {
        std::cout << "  radius " << space.ladder().format(Dist(j)) << "  modulus ";
        if (prof.modulus[static_cast<std::size_t>(j)])
            std::cout << format_rational(*prof.modulus[static_cast<std::size_t>(j)]);
        else
            std::cout << "(singleton ball)";
        std::cout << "\n";
    }
    std::cout << "\n";

    const CertifyOutcome outcome = deficiency_certificate(space, f);
    std::cout << "certify: " << certify_status_name(outcome.status) << "\n";
    if (outcome.status != CertifyStatus::Certified) return 1;
    const DeficiencyCertificate& cert = *outcome.certificate;
    std::cout << "  coarse level r_" << cert.coarse_index << " has " << cert.coarse_count
              << " ball(s); fine level " << space.ladder().format(cert.fine_level) << " has "
              << cert.fine_count << "\n";
    std::cout << "  every coarse image fits in one fine ball, so at least "
              << cert.fine_count - cert.coarse_count << " fine ball(s) are missed:\n";
    for (const MissedBall& mb : cert.missed)
        std::cout << "    ball of " << space.label(mb.representative) << ", witness "
                  << space.label(mb.witness) << "\n";

    const MinimalityVerdict verdict = contractive_nonminimality(space, f);
    std::cout << "\nminimal: no; invariant set of " << verdict.invariant_set.size()
              << " point(s):";
    for (int p : verdict.invariant_set) std::cout << " " << space.label(p);
    std::cout << "\n";

    const FixedPointRun run = banach_fixed_point(space, f, space.size() - 1);
    std::cout << "fixed point " << space.label(run.fixed_point) << " reached in " << run.steps
              << " steps from " << space.label(space.size() - 1) << "\n";
    return 0;
}
