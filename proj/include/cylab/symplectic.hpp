#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cylab/linalg.hpp"

namespace cylab {

/// Finite-dimensional model of the boundary data (L²(Σ,E), B, J).
///
/// B is Hermitian, J is unitary with J* = −J, and JB + BJ = 0.  The
/// orthonormal frames of the ±i eigenspaces of J are fixed here, once, by
/// Gram–Schmidt on the columns of Π_{±i} = (1/2i)(i ± J) in coordinate order.
class TangentialStructure {
public:
    /// Validates every invariant; throws InvalidInput on failure.
    static TangentialStructure from_matrices(const Mat& B, const Mat& J);

    int dim() const { return static_cast<int>(B_.rows()); }
    int half() const { return dim() / 2; }
    const Mat& B() const { return B_; }
    const Mat& J() const { return J_; }
    const Mat& frame_i() const { return frame_i_; }
    const Mat& frame_neg_i() const { return frame_neg_i_; }

    /// Number of eigenvalues of B with |b| <= 1e-10 ‖B‖.
    int kernel_dim() const;
    bool invertible() const { return kernel_dim() == 0; }
    /// Eigenvalues of B, ascending.
    Eigen::VectorXd spectrum() const;

private:
    TangentialStructure() = default;
    Mat B_, J_, frame_i_, frame_neg_i_;
};

enum class GrassmannianTag { aps, generalized_aps, calderon_graph, random, custom };

std::string to_string(GrassmannianTag tag);

/// An orthogonal projection whose range is Lagrangian: one boundary condition.
struct GrassmannianPoint {
    Mat P;
    GrassmannianTag tag = GrassmannianTag::custom;
    std::string provenance;

    /// Checks P² = P, P* = P, JPJ* = I − P and rank n/2 against T.
    static GrassmannianPoint make(const TangentialStructure& T, Mat P, GrassmannianTag tag,
                                  std::string provenance);
};

/// Φ(P): range P viewed as a graph from E_i to E_{−i}, in frame coordinates.
struct UnitaryPhi {
    Mat Phi;
};

/// Orthonormal Lagrangian basis with the structure it is Lagrangian for.
struct CauchyData {
    Mat basis;
};

/// Residuals of the GrassmannianPoint invariants (all should be ~0).
struct LagrangianDefects {
    double idempotent = 0, hermitian = 0, lagrangian = 0;
    int rank = 0;
    double worst() const;
};

LagrangianDefects lagrangian_defects(const TangentialStructure& T, const Mat& P);

TangentialStructure standard_structure(std::span<const double> b_values);
TangentialStructure extend_with_kernel(const TangentialStructure& T, int k);

/// Structure of the two-component boundary Σ ⊔ Σ of a finite cylinder:
/// B′ = B ⊕ (−B), J′ = J ⊕ (−J).  Each block is the collar form seen from the
/// inward normal at its end.
TangentialStructure doubled_structure(const TangentialStructure& T);

/// 1_{(0,∞)}(B) + Π_V.  V is required exactly when ker B ≠ 0.
GrassmannianPoint aps_projection(const TangentialStructure& T,
                                 const std::optional<Mat>& V = std::nullopt);

/// 1_{(−∞,0)}(B); only defined for invertible B.
Mat negative_spectral_projection(const TangentialStructure& T);

/// A seeded Lagrangian subspace of ker B (orthonormal columns).
Mat random_kernel_lagrangian(const TangentialStructure& T, std::uint64_t seed);

UnitaryPhi phi_of(const TangentialStructure& T, const GrassmannianPoint& P);
/// Φ of the span of an orthonormal Lagrangian basis Y.
Mat phi_of_basis(const TangentialStructure& T, const Mat& Y);
GrassmannianPoint projection_of_phi(const TangentialStructure& T, const UnitaryPhi& Phi,
                                    GrassmannianTag tag = GrassmannianTag::custom,
                                    std::string provenance = {});

Mat random_unitary(int k, std::uint64_t seed);
GrassmannianPoint random_lagrangian(const TangentialStructure& T, std::uint64_t seed);

/// dim(ker P ∩ range Q) − dim(range P ∩ ker Q) for orthogonal projections.
int fredholm_index(const Mat& P, const Mat& Q);
inline int fredholm_index(const GrassmannianPoint& P, const GrassmannianPoint& Q) {
    return fredholm_index(P.P, Q.P);
}

/// ω(f, g) = −⟨Jf, g⟩.
cplx symplectic_form(const TangentialStructure& T, const Vec& f, const Vec& g);

/// Projection onto {(v, e^{−ℓB} v)}, a point of the doubled structure.
GrassmannianPoint calderon_graph_projection(const TangentialStructure& T, double length);

/// The reflection x ↦ ℓ − x on two-ended data: (a, b) ↦ (b, a).
Mat block_swap(int n);

}  // namespace cylab
