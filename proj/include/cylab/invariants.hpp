#pragma once

#include <functional>
#include <vector>

#include "cylab/cylinder.hpp"

namespace cylab {

/// ζ_H(s, a) = Σ_{k≥0} (k + a)^{−s}, by Euler–Maclaurin.
double hurwitz_zeta(double s, double a);
/// ∂_s ζ_H(0, a) = log Γ(a) − ½ log 2π.
double hurwitz_zeta_prime_at_zero(double a);

/// 2 y(ℓ) for y'' = b² y, y(0) = 0, y'(0) = 1: the ζ-determinant of
/// −d²/dx² + b² on [0, ℓ] with Dirichlet conditions.
double gelfand_yaglom_det(double b, double length);

/// Eigenvalues √(b² + (πk/ℓ)²), k ≥ 1, of the scalar Dirichlet mode, as a
/// positive single-sign spectrum (two branches of period 2π/ℓ).
Spectrum scalar_dirichlet_spectrum(double b, double length, double window);

struct HeatTrace {
    double value = 0.0;
    double truncation_bound = 0.0;  ///< e^{−tΛ²} bound on the dropped part
};

/// Σ e^{−tλ²} (or Σ λ e^{−tλ²}) over the window, compensated summation.
HeatTrace heat_trace(const Spectrum& spec, double t, bool signed_trace);

/// One asymptotic branch: positions x = |λ|/c follow x = k + α + Σ_p c_p x^{−p}.
struct Branch {
    std::vector<double> coef;  ///< α, c_1, ..., c_order
    double residual = 0.0;     ///< max fit residual over the fit region
    int fit_points = 0;
    double y = 0.0;            ///< unperturbed position k + α of the first tail index
};

/// Fitted tail of one sign of the spectrum.
struct SideModel {
    int sign = 1;
    double cut = 0.0;          ///< positions ≤ cut are taken from the computed spectrum
    int count = 0;             ///< computed eigenvalues with position ≤ cut
    std::vector<double> positions;  ///< those positions, ascending
    std::vector<Branch> branches;
};

struct TailModel {
    double period = 0.0;
    int order = 3;
    std::vector<SideModel> sides;
    double max_residual() const;
    /// Model positions of all tail eigenvalues with position ≤ xmax, signed λ values.
    std::vector<double> tail_eigenvalues(double xmax) const;
};

/// Branches are fitted on positions from fit_floor·X up to the window edge X.
TailModel fit_tail_model(const Spectrum& spec, int order = 3, double fit_floor = 0.5);

struct EtaResult {
    double eta = 0.0;
    double eta_heat = 0.0;         ///< heat-integral cross-check
    double reduced_eta = 0.0;      ///< (dim ker + η)/2
    double eta_mod_Z_reduced = 0.0;  ///< reduced η mod 1 in [0, 1)
    int dim_ker = 0;
    double window = 0.0;
    TailModel tail_model;
    double error_estimate = 0.0;
    bool low_confidence = false;
};

struct ZetaResult {
    double zeta_at_0 = 0.0;
    double zeta_prime_at_0 = 0.0;
    int dim_ker = 0;
    double error_estimate = 0.0;
    bool low_confidence = false;
};

struct DetResult {
    double modulus = 0.0;
    double phase = 0.0;
    cplx value;
    double zeta_at_0 = 0.0;
    double eta = 0.0;
    double zeta_prime_at_0 = 0.0;
    int dim_ker = 0;
    double error_estimate = 0.0;
};

/// Invariants of a validated spectrum with its asymptotic branch structure.
EtaResult eta_from_spectrum(const Spectrum& spec);
ZetaResult zeta_from_spectrum(const Spectrum& spec);
DetResult det_from_spectrum(const Spectrum& spec);

EtaResult eta_invariant(const CylinderOperator& op, double window);
ZetaResult zeta_sq(const CylinderOperator& op, double window);
DetResult zeta_det(const CylinderOperator& op, double window);

/// exp(i(π/2)(ζ(0) − η) − ½ζ'(0)); zero when there is a kernel.
DetResult assemble_det(const ZetaResult& z, const EtaResult& e);

struct RelativeDet {
    cplx ratio;           ///< det_ζ(D_P) / det_ζ(D_Q)
    double delta_zeta0 = 0.0;
    double delta_eta = 0.0;
    double delta_zeta_prime = 0.0;
};

/// Ratio of ζ-determinants from Mellin integrals of heat-trace differences.
RelativeDet relative_zeta_det_detail(const Spectrum& P, const Spectrum& Q);
cplx relative_zeta_det(const CylinderOperator& op_P, const CylinderOperator& op_Q, double window);

/// Finite-dimensional Fredholm determinant.
cplx det_F(const Mat& M);

struct SpectralFlowOptions {
    double probe_window = 0.0;  ///< 0 chooses π/(2ℓ)
    bool halving_check = true;
};

/// Net number of eigenvalues crossing 0 from below along the family over the
/// grid (crossing upward counts +1).
int spectral_flow(const std::function<CylinderOperator(double)>& family,
                  const std::vector<double>& grid, const SpectralFlowOptions& options = {});

/// Per-step contributions; step k covers [grid[k], grid[k+1]].
std::vector<int> spectral_flow_steps(const std::function<CylinderOperator(double)>& family,
                                     const std::vector<double>& grid,
                                     const SpectralFlowOptions& options = {});

}  // namespace cylab
