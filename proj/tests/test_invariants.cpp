#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cylab/errors.hpp"
#include "cylab/invariants.hpp"

using namespace cylab;

namespace {

const std::vector<double> kB1{1.0};
constexpr double kPi = std::numbers::pi;

GrassmannianPoint negative_aps(const TangentialStructure& T) {
    return GrassmannianPoint::make(T, negative_spectral_projection(T), GrassmannianTag::aps, "P-");
}

CylinderOperator aps_interval(const std::vector<double>& b, double ell,
                              PotentialSpec V = PotentialSpec::zero()) {
    const auto T = standard_structure(b);
    return CylinderOperator::interval(T, ell, V, aps_projection(T), negative_aps(T));
}

// plain partial sum with an integral tail, for s > 1
double series_zeta(double s, double a) {
    const int N = 200000;
    double sum = 0.0;
    for (int k = N - 1; k >= 0; --k) sum += std::pow(k + a, -s);
    const double x = N + a;
    return sum + std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
}

// RK4 for y'' = b^2 y, y(0) = 0, y'(0) = 1
double shoot(double b, double ell) {
    const int steps = 20000;
    const double h = ell / steps;
    double y = 0.0, p = 1.0;
    for (int i = 0; i < steps; ++i) {
        const double k1y = p, k1p = b * b * y;
        const double k2y = p + 0.5 * h * k1p, k2p = b * b * (y + 0.5 * h * k1y);
        const double k3y = p + 0.5 * h * k2p, k3p = b * b * (y + 0.5 * h * k2y);
        const double k4y = p + h * k3p, k4p = b * b * (y + h * k3y);
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    }
    return y;
}

Spectrum finite_spectrum(std::vector<double> ev, double window) {
    Spectrum s;
    s.eigenvalues = std::move(ev);
    s.window = window;
    s.period = 1.0;
    return s;
}

std::function<CylinderOperator(double)> phase_loop(int winding) {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);
    const auto base = aps_interval(kB1, 1.0);
    const Mat phi0 = phi_of(D, random_lagrangian(D, 5)).Phi;
    return [=](double theta) {
        Mat d = Mat::Identity(phi0.rows(), phi0.cols());
        d(0, 0) = std::polar(1.0, 2.0 * kPi * winding * theta);
        return base.with_boundary(projection_of_phi(D, UnitaryPhi{d * phi0}, GrassmannianTag::custom, "loop"));
    };
}

std::vector<double> uniform_grid(int steps) {
    std::vector<double> g;
    for (int i = 0; i <= steps; ++i) g.push_back(static_cast<double>(i) / steps);
    return g;
}

}  // namespace

TEST_CASE("hurwitz zeta") {
    CHECK(std::abs(hurwitz_zeta(2.0, 1.0) - kPi * kPi / 6.0) < 1e-12);
    CHECK(std::abs(hurwitz_zeta(2.0, 2.0) - (kPi * kPi / 6.0 - 1.0)) < 1e-12);
    for (double a : {0.1, 0.7, 3.2, 41.5}) {
        CHECK(std::abs(hurwitz_zeta(0.0, a) - (0.5 - a)) < 1e-12);
        // ζ(−1, a) = −B₂(a)/2, ζ(−2, a) = −B₃(a)/3
        CHECK(std::abs(hurwitz_zeta(-1.0, a) + 0.5 * (a * a - a + 1.0 / 6.0)) < 1e-12 * std::max(1.0, a * a));
        CHECK(std::abs(hurwitz_zeta(-2.0, a) + (a * a * a - 1.5 * a * a + 0.5 * a) / 3.0) <
              1e-12 * std::max(1.0, a * a * a));
        CHECK(std::abs(hurwitz_zeta(3.0, a) - series_zeta(3.0, a)) < 1e-12);
        CHECK(std::abs(hurwitz_zeta(1.5, a) - series_zeta(1.5, a)) < 1e-9);
        const double h = 1e-5;
        const double fd = (hurwitz_zeta(h, a) - hurwitz_zeta(-h, a)) / (2.0 * h);
        CHECK(std::abs(hurwitz_zeta_prime_at_zero(a) - fd) < 1e-8 * std::max(1.0, std::abs(fd)));
    }
    CHECK_THROWS_AS(hurwitz_zeta(1.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(hurwitz_zeta(2.0, 0.0), InvalidInput);
}

TEST_CASE("gelfand-yaglom determinants") {
    CHECK(gelfand_yaglom_det(1.0, 1.0) == doctest::Approx(2.0 * std::sinh(1.0)).epsilon(1e-14));
    CHECK(gelfand_yaglom_det(2.0, 1.0) == doctest::Approx(std::sinh(2.0)).epsilon(1e-14));
    CHECK(gelfand_yaglom_det(0.0, 1.7) == doctest::Approx(3.4).epsilon(1e-14));
    for (double b : {0.3, 1.0, 2.5})
        for (double ell : {0.5, 1.0, 2.0})
            CHECK(gelfand_yaglom_det(b, ell) == doctest::Approx(2.0 * shoot(b, ell)).epsilon(1e-10));
    CHECK_THROWS_AS(gelfand_yaglom_det(1.0, 0.0), InvalidInput);
}

TEST_CASE("heat traces") {
    const auto pm = finite_spectrum({-1.0, 1.0}, 10.0);
    CHECK(heat_trace(pm, 1.0, false).value == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(heat_trace(pm, 1.0, true).value) < 1e-15);

    const auto sym = finite_spectrum({-3.0, -2.5, -0.2, 0.2, 2.5, 3.0}, 20.0);
    CHECK(std::abs(heat_trace(sym, 0.3, true).value) < 1e-15);

    // circle of length 1, b = 1: λ = ±√(1 + (2πk)²), k ∈ ℤ
    const auto circ = CylinderOperator::circle(standard_structure(kB1), 1.0, PotentialSpec::zero());
    const Spectrum s = eigenvalues_in_window(circ, 30.0);
    double theta = 0.0;
    for (int k = -50; k <= 50; ++k) theta += 2.0 * std::exp(-(1.0 + 4.0 * kPi * kPi * k * k));
    const HeatTrace h = heat_trace(s, 1.0, false);
    CHECK(std::abs(h.value - theta) < 1e-10);
    CHECK(h.truncation_bound < 1e-12);
    CHECK(std::abs(heat_trace(s, 1.0, true).value) < 1e-10);
    CHECK_THROWS_AS(heat_trace(s, 1e-3, false), InvalidInput);
}

TEST_CASE("scalar dirichlet mode against closed forms") {
    for (double W : {60.0, 120.0}) {
        const auto z = zeta_from_spectrum(scalar_dirichlet_spectrum(1.0, 1.0, W));
        CHECK(std::abs(z.zeta_at_0 + 0.5) < 1e-6);
        CHECK(std::abs(std::exp(-z.zeta_prime_at_0) - gelfand_yaglom_det(1.0, 1.0)) < 1e-5);
        CHECK(z.dim_ker == 0);
        CHECK_FALSE(z.low_confidence);
    }
    const auto z = zeta_from_spectrum(scalar_dirichlet_spectrum(2.0, 1.5, 100.0));
    CHECK(std::abs(std::exp(-z.zeta_prime_at_0) - gelfand_yaglom_det(2.0, 1.5)) <
          1e-5 * gelfand_yaglom_det(2.0, 1.5));
}

TEST_CASE("eta invariants") {
    const auto T = standard_structure(kB1);
    const auto circ = eta_invariant(CylinderOperator::circle(T, 1.0, PotentialSpec::zero()), 70.0);
    CHECK(std::abs(circ.eta) < 1e-8);
    CHECK(std::abs(circ.eta_heat) < 1e-8);

    // APS pair with V = 0: P₋ = J*P₊J, so the spectrum is symmetric
    const auto sym = eta_invariant(aps_interval({1.0, 2.0}, 1.0), 70.0);
    CHECK(std::abs(sym.eta) < 1e-6);
    CHECK(sym.dim_ker == 0);

    const auto op = aps_interval(kB1, 1.0, PotentialSpec::bump(0.5, 0.5, 0.4));
    const auto e = eta_invariant(op, 70.0);
    CHECK(std::abs(e.eta) > 1e-2);
    CHECK(std::abs(e.eta - e.eta_heat) < 1e-4);
    CHECK(std::abs(e.eta - e.eta_heat) <= e.error_estimate);
    CHECK(e.eta == doctest::Approx(-0.07683).epsilon(0.02));
    CHECK(e.reduced_eta == doctest::Approx(0.5 * e.eta));
    CHECK(e.eta_mod_Z_reduced >= 0.0);
    CHECK(e.eta_mod_Z_reduced < 1.0);
    CHECK_FALSE(e.low_confidence);
    CHECK(e.tail_model.sides.size() == 2);

    // window doubling stays within the reported estimates
    const auto e2 = eta_invariant(op, 140.0);
    CHECK(std::abs(e2.eta - e.eta) < e.error_estimate);
    const auto z = zeta_sq(op, 70.0);
    const auto z2 = zeta_sq(op, 140.0);
    CHECK(std::abs(z2.zeta_at_0 - z.zeta_at_0) < z.error_estimate);
    CHECK(std::abs(z2.zeta_prime_at_0 - z.zeta_prime_at_0) < z.error_estimate);

    CHECK_THROWS_AS(eta_invariant(op, 30.0), InvalidInput);
}

TEST_CASE("zeta(0) does not depend on the boundary condition") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);
    const auto base = aps_interval(kB1, 1.0);
    std::vector<double> values;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        values.push_back(zeta_sq(base.with_boundary(random_lagrangian(D, seed)), 70.0).zeta_at_0);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    CHECK(*hi - *lo < 2e-3);
}

TEST_CASE("determinant assembly") {
    const auto op = aps_interval(kB1, 1.0, PotentialSpec::bump(0.5, 0.5, 0.4));
    const auto d = zeta_det(op, 70.0);
    const cplx expected = std::exp(cplx(-0.5 * d.zeta_prime_at_0, 0.5 * kPi * (d.zeta_at_0 - d.eta)));
    CHECK(std::abs(d.value - expected) < 1e-15 * std::abs(expected));
    CHECK(d.modulus == doctest::Approx(std::abs(d.value)));

    // positive spectrum: η(0) = ζ(D²; 0), the phase cancels
    const auto pos = det_from_spectrum(scalar_dirichlet_spectrum(1.0, 1.0, 80.0));
    CHECK(std::abs(pos.phase) < 1e-8);
    CHECK(std::abs(pos.value - std::exp(-0.5 * pos.zeta_prime_at_0)) < 1e-8);

    // symmetric spectrum: the phase is (π/2) ζ(D²; 0)
    const auto circ = zeta_det(CylinderOperator::circle(standard_structure(kB1), 1.0, PotentialSpec::zero()), 70.0);
    CHECK(std::abs(circ.phase - 0.5 * kPi * circ.zeta_at_0) < 1e-8);

    // a kernel gives the zero determinant
    Spectrum k = scalar_dirichlet_spectrum(1.0, 1.0, 80.0);
    k.eigenvalues.insert(k.eigenvalues.begin(), 0.0);
    const auto zero = det_from_spectrum(k);
    CHECK(zero.dim_ker == 1);
    CHECK(zero.value == cplx(0.0, 0.0));
}

TEST_CASE("relative determinants") {
    const auto T = standard_structure(kB1);
    const auto D = doubled_structure(T);
    const auto base = aps_interval(kB1, 1.0);
    const double W = 70.0;
    CHECK(relative_zeta_det(base, base, W) == cplx(1.0, 0.0));

    const auto P = base.with_boundary(random_lagrangian(D, 1));
    const auto Q = base.with_boundary(random_lagrangian(D, 11));
    const auto R = base.with_boundary(random_lagrangian(D, 21));
    const Spectrum sp = eigenvalues_in_window(P, W);
    const Spectrum sq = eigenvalues_in_window(Q, W);
    const Spectrum sr = eigenvalues_in_window(R, W);
    const cplx pq = relative_zeta_det_detail(sp, sq).ratio;
    const cplx qr = relative_zeta_det_detail(sq, sr).ratio;
    const cplx pr = relative_zeta_det_detail(sp, sr).ratio;
    CHECK(std::abs(pq * qr - pr) < 1e-8 * std::abs(pr));

    const cplx direct = det_from_spectrum(sp).value / det_from_spectrum(sq).value;
    CHECK(std::abs(pq - direct) < 1e-5 * std::abs(direct));
    CHECK(std::abs(relative_zeta_det(P, Q, W) - pq) < 1e-12 * std::abs(pq));

    const auto other = aps_interval(kB1, 1.2);
    CHECK_THROWS_AS(relative_zeta_det(base, other, W), InvalidInput);
    const auto bumped = aps_interval(kB1, 1.0, PotentialSpec::bump(0.5, 0.5, 0.4));
    CHECK_THROWS_AS(relative_zeta_det(base, bumped, W), InvalidInput);
}

TEST_CASE("fredholm determinant") {
    CHECK(det_F(Mat::Identity(3, 3)) == cplx(1.0, 0.0));
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 3.0;
    CHECK(std::abs(det_F(d) - cplx(6.0, 0.0)) < 1e-15);
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
        CHECK(std::abs(std::abs(det_F(random_unitary(6, seed))) - 1.0) < 1e-12);
    CHECK_THROWS_AS(det_F(Mat::Zero(2, 3)), InvalidInput);
}

TEST_CASE("spectral flow") {
    const auto base = aps_interval(kB1, 1.0);
    CHECK(spectral_flow([&](double) { return base; }, uniform_grid(10)) == 0);

    const auto loop = phase_loop(1);
    const auto grid = uniform_grid(20);
    const int sf = spectral_flow(loop, grid);
    CHECK(std::abs(sf) == 1);
    CHECK(sf == -1);
    const std::vector<double> reversed(grid.rbegin(), grid.rend());
    CHECK(spectral_flow(loop, reversed) == -sf);
    CHECK(spectral_flow(phase_loop(-1), grid) == 1);

    CHECK_THROWS_AS(spectral_flow(phase_loop(2), grid), RefinementRequired);
}
