#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cylab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankThreshold = 1e-8;

/// Tolerance for structural identities (projection, unitarity, anticommutation).
inline constexpr double kStructureTol = 1e-12;

double max_abs(const Mat& m);

/// Number of singular values above rel_tol * sigma_max.
int numerical_rank(const Mat& m, double rel_tol = kRankThreshold);

/// Orthonormal basis of the column space of m.
Mat orthonormal_range(const Mat& m, double rel_tol = kRankThreshold);

/// Orthonormal basis of the null space of m.
Mat orthonormal_kernel(const Mat& m, double rel_tol = kRankThreshold);

/// Orthonormal basis of range(P) for an orthogonal projection P (eigenvalues near 1).
Mat projection_range(const Mat& p);

/// Orthogonal projection onto the span of the orthonormal columns of q.
inline Mat projector_onto(const Mat& q) { return q * q.adjoint(); }

/// Thin QR: orthonormal columns spanning the same space as the (full-rank) columns of m.
Mat thin_q(const Mat& m);

/// Block-diagonal sum.
Mat direct_sum(const Mat& a, const Mat& b);

/// Dimension of the intersection of the column spans of two orthonormal bases.
int intersection_dim(const Mat& qa, const Mat& qb, double rel_tol = kRankThreshold);

}  // namespace cylab
