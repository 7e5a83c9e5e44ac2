#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cylab/cylinder.hpp"
#include "cylab/errors.hpp"

using namespace cylab;

namespace {

const std::vector<double> kB1{1.0};

GrassmannianPoint negative_aps(const TangentialStructure& T) {
    return GrassmannianPoint::make(T, negative_spectral_projection(T), GrassmannianTag::aps, "P-");
}

CylinderOperator aps_interval(const std::vector<double>& b, double ell,
                              PotentialSpec V = PotentialSpec::zero()) {
    const auto T = standard_structure(b);
    return CylinderOperator::interval(T, ell, V, aps_projection(T), negative_aps(T));
}

// first positive root of tan(mu) = -mu, by bisection on (pi/2, pi)
double tan_root() {
    double a = std::numbers::pi / 2 + 1e-9, b = std::numbers::pi;
    for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (a + b);
        (std::tan(m) + m > 0.0 ? b : a) = m;
    }
    return 0.5 * (a + b);
}

std::vector<double> circle_closed_form(const std::vector<double>& b, double L, double window) {
    std::vector<double> out;
    for (double bj : b)
        for (int k = -200; k <= 200; ++k) {
            const double mu = 2.0 * std::numbers::pi * k / L;
            const double lam = std::sqrt(bj * bj + mu * mu);
            if (lam <= window) {
                out.push_back(lam);
                out.push_back(-lam);
            }
        }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("potential validation") {
    const auto T = standard_structure(kB1);
    CHECK_THROWS_AS(CylinderOperator::circle(T, 1.0, PotentialSpec::bump(0.5, 0.1, 0.4)), InvalidInput);
    CHECK_NOTHROW(CylinderOperator::circle(T, 1.0, PotentialSpec::bump(0.5, 0.5, 0.4)));
    const auto V = PotentialSpec::bump(0.5, 0.5, 0.4);
    CHECK(V.profile(0.5) == doctest::Approx(1.0));
    CHECK(V.profile(0.3) == 0.0);
    CHECK(V.profile(0.71) == 0.0);
}

TEST_CASE("transfer matrix") {
    const std::vector<double> b{1.0, 2.0};
    const auto op = aps_interval(b, 1.3);
    const Mat& B = op.structure().B();
    const Mat& J = op.structure().J();
    for (double lam : {-7.0, 0.0, 0.5, 3.0}) {
        const Mat ref = (-1.3 * (B + lam * J)).exp();
        CHECK(max_abs(transfer_matrix(op, lam) - ref) < 1e-10);
    }
    CHECK(max_abs(transfer_matrix(op, 0.0) - (-1.3 * B).exp()) < 1e-12);

    const auto opV = aps_interval(b, 1.3, PotentialSpec::bump(0.5, 0.65, 0.4));
    for (double lam : {-5.0, 0.3, 9.0}) {
        const Mat M = transfer_matrix(opV, lam);
        CHECK(std::abs(M.determinant() - 1.0) < 1e-9);
        // cocycle across interior cut points, one inside the bump
        for (double c : {0.2, 0.6}) {
            const Mat prod = transfer_matrix(opV, lam, c, 1.3) * transfer_matrix(opV, lam, 0.0, c);
            CHECK(max_abs(prod - M) < 1e-9);
        }
    }
}

TEST_CASE("cauchy data") {
    const std::vector<double> b{1.0, 2.0};
    const auto T = standard_structure(b);
    const auto op = aps_interval(b, 0.8);
    const CauchyData cd = cauchy_data(op);
    CHECK(cd.basis.cols() == 4);
    const Mat C = calderon_graph_projection(T, 0.8).P;
    CHECK(max_abs(cd.basis * cd.basis.adjoint() - C) < 1e-10);

    const auto opV = aps_interval(b, 0.8, PotentialSpec::bump(0.7, 0.4, 0.3));
    const CauchyData cv = cauchy_data(opV);
    CHECK(cv.basis.cols() == 4);
    CHECK(lagrangian_defects(opV.doubled(), cv.basis * cv.basis.adjoint()).worst() < 1e-10);
    // graph of the transfer matrix at lambda = 0
    const Mat M = transfer_matrix(opV, 0.0);
    CHECK(max_abs(cv.basis.bottomRows(4) - M * cv.basis.topRows(4)) < 1e-9);
}

TEST_CASE("characteristic value on the APS interval") {
    const double mu1 = tan_root();
    CHECK(mu1 == doctest::Approx(2.02876).epsilon(1e-5));
    const double lam1 = std::sqrt(1.0 + mu1 * mu1);
    const auto op = aps_interval(kB1, 1.0);
    const auto cv = characteristic_value(op, lam1);
    CHECK(cv.sigma_min < 1e-8);
    CHECK(cv.nullity == 1);
    CHECK(characteristic_value(op, 0.0).sigma_min > 0.5);
    const std::vector<double> b11{1.0, 1.0};
    CHECK(characteristic_value(aps_interval(b11, 1.0), lam1).nullity == 2);
}

TEST_CASE("eigenvalues in window") {
    const double mu1 = tan_root();
    const double lam1 = std::sqrt(1.0 + mu1 * mu1);
    const auto op = aps_interval(kB1, 1.0);
    const Spectrum s = eigenvalues_in_window(op, 10.0);
    CHECK(s.certificate.checked);
    CHECK(s.certificate.primary_count == s.certificate.oracle_count);
    const auto pos = std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    REQUIRE(pos != s.eigenvalues.end());
    CHECK(std::abs(*pos - lam1) < 1e-8);
    for (double x : s.eigenvalues) CHECK(characteristic_value(op, x).sigma_min < 1e-8);

    // circle closed form as multisets
    const std::vector<double> b{1.0, 2.5};
    const auto T = standard_structure(b);
    for (double L : {2.0 * std::numbers::pi, 1.7}) {
        const auto circ = CylinderOperator::circle(T, L, PotentialSpec::zero());
        const Spectrum sc = eigenvalues_in_window(circ, 12.0);
        const auto ref = circle_closed_form(b, L, 12.0);
        REQUIRE(sc.eigenvalues.size() == ref.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < ref.size(); ++k)
            worst = std::max(worst, std::abs(sc.eigenvalues[k] - ref[k]));
        CHECK(worst < 1e-9);
    }

    const Spectrum small = eigenvalues_in_window(CylinderOperator::circle(standard_structure(kB1), 2.0 * std::numbers::pi, PotentialSpec::zero()), 3.0);
    const std::vector<double> expect{-std::sqrt(5.0), -std::sqrt(5.0), -std::sqrt(2.0), -std::sqrt(2.0), -1.0,
                                     1.0, std::sqrt(2.0), std::sqrt(2.0), std::sqrt(5.0), std::sqrt(5.0)};
    REQUIRE(small.eigenvalues.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k) CHECK(std::abs(small.eigenvalues[k] - expect[k]) < 1e-9);
}

TEST_CASE("reflection pairing") {
    // u(x) -> J u(l - x) anticommutes with D when the right condition is I - P_left
    const std::vector<double> b{1.0, 2.0};
    const auto T = standard_structure(b);
    for (std::uint64_t seed : {1u, 2u}) {
        const auto Pl = random_lagrangian(T, seed);
        const auto Pr = GrassmannianPoint::make(T, T.J().adjoint() * Pl.P * T.J(), GrassmannianTag::custom, "");
        const auto op = CylinderOperator::interval(T, 1.1, PotentialSpec::zero(), Pl, Pr);
        const Spectrum s = eigenvalues_in_window(op, 15.0);
        const std::size_t m = s.eigenvalues.size();
        for (std::size_t k = 0; k < m; ++k) CHECK(std::abs(s.eigenvalues[k] + s.eigenvalues[m - 1 - k]) < 1e-9);
    }
}

TEST_CASE("spectra with a bump are certified and self-adjoint") {
    const std::vector<double> b{1.0, 2.0};
    const auto T = standard_structure(b);
    const auto D = doubled_structure(T);
    const auto V = PotentialSpec::bump(0.5, 0.6, 0.4);
    const auto op = CylinderOperator::interval_coupled(T, 1.2, V, random_lagrangian(D, 11));
    const Spectrum s = eigenvalues_in_window(op, 30.0);
    CHECK(s.certificate.primary_count == s.certificate.oracle_count);
    CHECK(s.certificate.primary_count > 20);
    int checked = 0;
    for (double x : s.eigenvalues) {
        if (std::abs(x) > 8.0) continue;
        const auto ef = eigenfunction_residual(op, x, 2000);
        CHECK(ef.multiplicity >= 1);
        CHECK(ef.residual < 1e-6);
        ++checked;
    }
    CHECK(checked > 4);
}

TEST_CASE("finite element oracle") {
    const double mu1 = tan_root();
    const double lam1 = std::sqrt(1.0 + mu1 * mu1);
    const auto op = aps_interval(kB1, 1.0);
    auto first_positive = [](const Spectrum& s) {
        return *std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    };
    const double e1000 = std::abs(first_positive(fd_discretize(op, 1000, 10.0)) - lam1);
    const double e2000 = std::abs(first_positive(fd_discretize(op, 2000, 10.0)) - lam1);
    CHECK(e2000 / lam1 < 1e-4);
    CHECK(e1000 / e2000 == doctest::Approx(4.0).epsilon(0.1));

    const auto circ = CylinderOperator::circle(standard_structure(kB1), 2.0 * std::numbers::pi, PotentialSpec::zero());
    const Spectrum fc = fd_discretize(circ, 2000, 3.0);
    const auto ref = circle_closed_form(kB1, 2.0 * std::numbers::pi, 3.0);
    REQUIRE(fc.eigenvalues.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(fc.eigenvalues[k] - ref[k]) < 1e-4);

    CHECK_THROWS_AS(fd_discretize(op, 100, 10.0), InvalidInput);
    CHECK_THROWS_AS(fd_discretize(op, 200, 150.0), InvalidInput);
}

TEST_CASE("inertia counts match the banded eigensolver") {
    const std::vector<double> b{1.0, 2.0};
    const auto T = standard_structure(b);
    const auto D = doubled_structure(T);
    const std::vector<CylinderOperator> ops{
        aps_interval(b, 1.3, PotentialSpec::bump(0.7, 0.65, 0.4)),
        CylinderOperator::interval_coupled(T, 2.0, PotentialSpec::zero(), random_lagrangian(D, 4)),
        CylinderOperator::circle(T, 3.0, PotentialSpec::bump(-0.5, 1.0, 0.6)),
    };
    for (const auto& o : ops)
        for (double level : {5.3, 17.9}) {
            const int N = 600;
            CHECK(fd_count(o, N, level) == static_cast<int>(fd_discretize(o, N, level, false).eigenvalues.size()));
        }
}
