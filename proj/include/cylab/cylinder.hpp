#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cylab/linalg.hpp"
#include "cylab/symplectic.hpp"

namespace cylab {

/// V(x) = amplitude · s(x) · direction with s(x) = exp(1 − 1/(1 − t²)),
/// t = 2(x − center)/width, on the support |t| < 1.
struct PotentialSpec {
    enum class Kind { zero, bump };
    Kind kind = Kind::zero;
    double amplitude = 0.0;
    double center = 0.0;
    double width = 0.0;
    Mat direction;  ///< Hermitian, unit operator norm; empty means the identity

    static PotentialSpec zero() { return {}; }
    static PotentialSpec bump(double amplitude, double center, double width, Mat direction = {});

    bool active() const { return kind == Kind::bump && amplitude != 0.0; }
    double support_lo() const { return center - 0.5 * width; }
    double support_hi() const { return center + 0.5 * width; }
    double profile(double x) const;
    Mat value(double x, int n) const;
    /// Operator-norm bound of V over the line.
    double bound() const { return active() ? std::abs(amplitude) : 0.0; }
};

enum class Geometry { interval, circle };

namespace detail {
struct BumpInterpolant;
}

/// D = J(d/dx + B) + V(x) on [0, ℓ] or on the circle of circumference ℓ.
///
/// Boundary conditions are stored as one orthogonal projection P on the
/// doubled boundary space C^{2n} ∋ (u(0), u(ℓ)), Lagrangian for
/// J ⊕ (−J); the domain is P(u(0), u(ℓ)) = 0.  Decoupled conditions are
/// P_left ⊕ P_right, and the circle is the coupled condition u(0) = u(ℓ).
class CylinderOperator {
public:
    static CylinderOperator interval(const TangentialStructure& T, double length,
                                     const PotentialSpec& V, const GrassmannianPoint& left,
                                     const GrassmannianPoint& right);
    static CylinderOperator interval_coupled(const TangentialStructure& T, double length,
                                             const PotentialSpec& V,
                                             const GrassmannianPoint& boundary);
    static CylinderOperator circle(const TangentialStructure& T, double circumference,
                                   const PotentialSpec& V);

    /// Same operator with another boundary condition of the doubled structure.
    CylinderOperator with_boundary(const GrassmannianPoint& boundary) const;

    const TangentialStructure& structure() const { return T_; }
    const TangentialStructure& doubled() const { return D_; }
    double length() const { return length_; }
    const PotentialSpec& potential() const { return V_; }
    Geometry geometry() const { return geometry_; }
    const GrassmannianPoint& boundary() const { return P_; }
    /// Orthonormal bases of ker P and range P.
    const Mat& kernel_basis() const { return W_; }
    const Mat& range_basis() const { return Q_; }
    /// Φ(ker P) in the frames of the doubled structure.
    const Mat& kernel_phi() const { return phiW_; }
    int dim() const { return T_.dim(); }
    /// Shared memo of the bump propagator as a function of λ (implementation detail).
    const std::shared_ptr<detail::BumpInterpolant>& bump_cache() const { return bump_; }

private:
    CylinderOperator(const TangentialStructure& T, double length, const PotentialSpec& V,
                     Geometry g, const GrassmannianPoint& P);
    TangentialStructure T_, D_;
    double length_;
    PotentialSpec V_;
    Geometry geometry_;
    GrassmannianPoint P_;
    Mat W_, Q_, phiW_;
    std::shared_ptr<detail::BumpInterpolant> bump_;
};

/// Projection whose kernel is the diagonal {(v, v)} (periodic coupling).
GrassmannianPoint periodic_coupling(const TangentialStructure& T);

/// u(b) = M u(a) for solutions of Du = λu, i.e. u' = −Bu − λJu + JVu.
Mat transfer_matrix(const CylinderOperator& op, double lambda);
Mat transfer_matrix(const CylinderOperator& op, double lambda, double a, double b);

/// Orthonormal basis of {(u(0), u(ℓ)) : Du = λu}, propagated in short
/// segments with re-orthonormalization so large ℓ·‖B‖ stays well conditioned.
Mat cauchy_basis(const CylinderOperator& op, double lambda);

CauchyData cauchy_data(const CylinderOperator& op);

struct CharacteristicValue {
    double sigma_min = 0.0;
    int nullity = 0;
};

/// Singular values of G(λ) = Q_P* Y(λ); λ is an eigenvalue iff nullity ≥ 1.
CharacteristicValue characteristic_value(const CylinderOperator& op, double lambda);

/// U(λ) = Φ(ker P)* Φ(L(λ)); eigenvalues of D_P are the λ where U has eigenvalue 1.
Mat boundary_unitary(const CylinderOperator& op, double lambda);

enum class SpectrumMethod { transfer_matrix, discretization, closed_form };

std::string to_string(SpectrumMethod m);

struct CompletenessCertificate {
    bool checked = false;
    double cutoff = 0.0;     ///< |λ| ≤ cutoff was compared
    int primary_count = 0;
    int oracle_count = 0;
    int oracle_points = 0;
};

struct Spectrum {
    std::vector<double> eigenvalues;  ///< ascending, repeated by multiplicity
    double window = 0.0;
    SpectrumMethod method = SpectrumMethod::transfer_matrix;
    CompletenessCertificate certificate;
    /// Asymptotic spacing c: eigenvalues behave like ±c(k + α_j + O(1/k)).
    double period = 0.0;
    int branches_pos = 0;
    int branches_neg = 0;

    int count_in(double lo, double hi) const;  ///< eigenvalues in [lo, hi)
};

struct EigenOptions {
    bool certify = true;
    int fd_points = 0;        ///< 0 chooses from the window
    double root_tol = 1e-11;  ///< absolute bracket width for roots
};

/// Number of eigenvalues in [a, b), from the winding of the eigenphases of U.
int count_eigenvalues(const CylinderOperator& op, double a, double b);

Spectrum eigenvalues_in_window(const CylinderOperator& op, double window,
                               const EigenOptions& options = {});

/// Finite-element oracle: linear elements for the form ‖Du‖² with the
/// boundary condition eliminated; returns the signed eigenvalues with |λ| ≤ window.
Spectrum fd_discretize(const CylinderOperator& op, int N, double window, bool signs = true);
/// Number of discretized eigenvalues with |λ| < level, by Sylvester inertia of K − level²M.
int fd_count(const CylinderOperator& op, int N, double level);

/// Eigenfunction samples u(x_k) on a uniform grid for an eigenvalue λ
/// (columns span the eigenspace), with the residual ‖(D − λ)u‖/‖u‖.
struct EigenfunctionCheck {
    double residual = 0.0;
    int multiplicity = 0;
};
EigenfunctionCheck eigenfunction_residual(const CylinderOperator& op, double lambda, int grid);

}  // namespace cylab
