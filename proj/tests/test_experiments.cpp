#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cylab/errors.hpp"
#include "cylab/experiments.hpp"

using namespace cylab;

namespace {

const std::vector<double> kB1{1.0};
const std::vector<double> kB12{1.0, 2.0};

// a J-commuting unitary: independent rotations of the ±i eigenspaces
Mat j_commuting_unitary(const TangentialStructure& T, std::uint64_t seed) {
    const Mat& Fi = T.frame_i();
    const Mat& Fm = T.frame_neg_i();
    const int h = T.half();
    return Fi * random_unitary(h, seed) * Fi.adjoint() + Fm * random_unitary(h, seed + 1) * Fm.adjoint();
}

}  // namespace

TEST_CASE("report digest and verdict") {
    VerdictReport r;
    r.inputs = InputRecorder().add("a", 0.1).add("b", 3).add("c", std::string("x")).items();
    r.defect = 1e-5;
    r.tolerance = 1e-4;
    finalize(r);
    CHECK(r.pass);
    CHECK(r.inputs.at("a") == "0.10000000000000001");
    CHECK(r.inputs_digest.size() == 16);

    VerdictReport s = r;
    s.inputs["a"] = "0.2";
    finalize(s);
    CHECK(s.inputs_digest != r.inputs_digest);

    r.defect = 1e-4;
    finalize(r);
    CHECK(r.pass);
    r.defect = std::nextafter(1e-4, 1.0);
    finalize(r);
    CHECK_FALSE(r.pass);
    r.defect = std::nan("");
    finalize(r);
    CHECK_FALSE(r.pass);

    CHECK(distance_to_integer(2.9) == doctest::Approx(0.1));
    CHECK(distance_to_integer(-0.25) == doctest::Approx(0.25));
}

TEST_CASE("relative determinant against the boundary formula") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);
    const auto C = calderon_graph_projection(T, 1.0);

    const auto id = verify_scott_wojciechowski(T, 1.0, {C}, 70.0);
    CHECK(std::abs(id.lhs - 1.0) < 1e-12);
    CHECK(std::abs(id.rhs - 1.0) < 1e-12);

    std::vector<GrassmannianPoint> Ps;
    for (std::uint64_t s = 1; s <= 5; ++s) Ps.push_back(random_lagrangian(D, s));
    const auto r = verify_scott_wojciechowski(T, 1.0, Ps, 70.0);
    CHECK(r.pass);
    CHECK(r.defect < 1e-4);
    CHECK(r.table.size() == 5);

    // simultaneous conjugation of (B, J, P) by a J-commuting unitary
    const Mat U = j_commuting_unitary(T, 40);
    const auto TU = TangentialStructure::from_matrices(U * T.B() * U.adjoint(), T.J());
    Mat UU = Mat::Zero(4, 4);
    UU.topLeftCorner(2, 2) = U;
    UU.bottomRightCorner(2, 2) = U;
    std::vector<GrassmannianPoint> PU;
    for (const auto& P : Ps)
        PU.push_back(GrassmannianPoint::make(doubled_structure(TU), UU * P.P * UU.adjoint(), P.tag, "conj"));
    const auto ru = verify_scott_wojciechowski(TU, 1.0, PU, 70.0);
    CHECK(std::abs(ru.defect - r.defect) < 1e-9);

    CHECK_THROWS_AS(verify_scott_wojciechowski(extend_with_kernel(T, 2), 1.0, {}, 70.0), InvalidInput);
}

TEST_CASE("relative determinant with four components") {
    const auto T = standard_structure(kB12);
    const auto D = doubled_structure(T);
    std::vector<GrassmannianPoint> Ps;
    for (std::uint64_t s = 1; s <= 3; ++s) Ps.push_back(random_lagrangian(D, s));
    const auto r = verify_scott_wojciechowski(T, 1.0, Ps, 70.0);
    CHECK(r.defect < 1e-4);
}

TEST_CASE("relative eta residues") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);

    const auto k = calibrate_kappa_sign(T, 1.0, 70.0, {1, 2, 3});
    CHECK(k.sign == kKappaSign);
    CHECK(k.defect_plus < 1e-6);

    const auto Q = random_lagrangian(D, 11);
    const auto same = verify_relative_eta(T, 1.0, PotentialSpec::zero(), Q, Q, 70.0);
    CHECK(same.defect == 0.0);
    CHECK(same.lhs.real() == 0.0);

    const auto P = phase_loop(D, Q, 1)(0.25);
    const auto r = verify_relative_eta(T, 1.0, PotentialSpec::zero(), P, Q, 70.0);
    CHECK(r.pass);
    CHECK(r.rhs.real() == doctest::Approx(0.25).epsilon(1e-12));

    const auto V = PotentialSpec::bump(0.7, 0.6, 0.5);
    const auto a = verify_relative_eta(T, 1.3, V, random_lagrangian(D, 21), random_lagrangian(D, 22), 60.0);
    const auto b = verify_relative_eta(T, 1.3, V, random_lagrangian(D, 22), random_lagrangian(D, 21), 60.0);
    CHECK(a.pass);
    CHECK(b.pass);
    CHECK(distance_to_integer(a.lhs.real() + b.lhs.real()) < 1e-12);
    CHECK(distance_to_integer(a.rhs.real() + b.rhs.real()) < 1e-12);
}

TEST_CASE("eta gluing over stretched collars") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);

    GluingGeometry flat;
    const auto sym = adiabatic_eta_gluing(T, flat, aps_projection(D), {1.0, 2.0}, 60.0);
    for (const auto& row : sym.table) CHECK(row.defect < 1e-6);

    GluingGeometry g;
    g.V_x = PotentialSpec::bump(0.5, 0.5, 0.6);
    const auto P = random_lagrangian(D, 3);
    const auto r = adiabatic_eta_gluing(T, g, P, {1.0, 2.0}, 60.0);
    CHECK(r.pass);
    CHECK(r.table.size() == 2);

    // X and Y exchange roles when P is replaced by the complement seen from Y
    const Mat S = block_swap(T.dim());
    const auto Pc = GrassmannianPoint::make(D, S * (Mat::Identity(4, 4) - P.P) * S, GrassmannianTag::custom, "c");
    const auto a = adiabatic_eta_gluing(T, flat, P, {1.0}, 60.0);
    const auto b = adiabatic_eta_gluing(T, flat, Pc, {1.0}, 60.0);
    CHECK(std::abs(a.table[0].defect - b.table[0].defect) < 1e-9);

    GluingGeometry both = g;
    both.V_y = PotentialSpec::bump(0.5, 0.5, 0.6);
    CHECK_THROWS_AS(adiabatic_eta_gluing(T, both, P, {1.0}, 60.0), InvalidInput);
}

TEST_CASE("determinant ratios over stretched collars") {
    const auto T = standard_structure(std::vector<double>{2.0});
    const auto dir = adiabatic_det_dirichlet(T, {1.0, 2.0}, 60.0);
    CHECK(dir.rhs.real() == doctest::Approx(4.0));
    CHECK(dir.pass);

    const auto aps = adiabatic_det_aps(T, {1.0, 2.0}, 60.0);
    CHECK(aps.rhs.real() == doctest::Approx(std::exp(std::log(2.0) * std::log(16.0))).epsilon(1e-14));
    // the computed ratio settles at 2^{-dim} per cut
    CHECK(aps.lhs.real() == doctest::Approx(0.25).epsilon(1e-5));
    CHECK_FALSE(aps.pass);
}

TEST_CASE("zeta at zero does not depend on the boundary condition") {
    const auto T = standard_structure(kB1);
    const auto r = zeta_at_zero_invariance(T, 1.0, PotentialSpec::zero(), {1, 2, 3, 4, 5}, 70.0);
    CHECK(r.table.size() == 7);
    CHECK(r.defect < 1e-6);

    const auto v = zeta_at_zero_invariance(T, 1.5, PotentialSpec::bump(0.5, 0.75, 0.6), {1, 2, 3}, 60.0);
    CHECK(v.pass);
}

TEST_CASE("conjugation index expressions agree") {
    for (const auto& b : {kB1, kB12}) {
        const auto T = standard_structure(b);
        for (int k : {0, 1, -1, 2, -2}) {
            const Mat Phi = winding_unitary(T, k);
            const auto r = conjugation_index(ConjugationProblem{T, 1.0, 1.5, Phi});
            CHECK(r.pass);
            CHECK(r.lhs.real() == 0.0);
            const auto s = conjugation_index(ConjugationProblem{T, 1.0, 1.5, Phi.adjoint()});
            CHECK(s.lhs.real() == -r.lhs.real());
        }
    }
    const auto T = standard_structure(kB1);
    CHECK_THROWS_AS(conjugation_index(ConjugationProblem{T, 1.0, 1.0, T.B()}), InvalidInput);
    CHECK_THROWS_AS(conjugation_index(ConjugationProblem{T, 1.0, 1.0, random_unitary(2, 3)}), InvalidInput);
}

TEST_CASE("spectral flow of boundary loops equals minus the winding") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);
    const auto base = random_lagrangian(D, 5);

    const auto c = spectral_flow_vs_winding(T, 1.0, phase_loop(D, base, 0), 10);
    CHECK(c.pass);
    CHECK(c.lhs.real() == 0.0);

    const auto one = spectral_flow_vs_winding(T, 1.0, phase_loop(D, base, 1), 20, 70.0);
    CHECK(one.pass);
    CHECK(one.lhs.real() == -1.0);
    CHECK(one.table.size() == 1);

    const auto two = spectral_flow_vs_winding(T, 1.0, phase_loop(D, base, 2), 40);
    CHECK(two.pass);
    CHECK(two.lhs.real() == -2.0);

    const auto open = [&](double th) { return phase_loop(D, base, 1)(0.5 * th); };
    CHECK_THROWS_AS(spectral_flow_vs_winding(T, 1.0, open, 20), InvalidInput);
}
