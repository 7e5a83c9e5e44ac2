#include "cylab/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "cylab/errors.hpp"

namespace cylab {

namespace {

constexpr double kKernelRel = 1e-10;

Mat gram_schmidt_columns(const Mat& m, int want) {
    Mat out(m.rows(), want);
    int k = 0;
    for (Eigen::Index c = 0; c < m.cols() && k < want; ++c) {
        Vec v = m.col(c);
        for (int j = 0; j < k; ++j) v -= out.col(j) * out.col(j).dot(v);
        for (int j = 0; j < k; ++j) v -= out.col(j) * out.col(j).dot(v);
        const double nv = v.norm();
        if (nv > 1e-8) out.col(k++) = v / nv;
    }
    if (k != want) throw InvalidInput("eigenspace of J has the wrong dimension");
    return out;
}

double op_scale(const Mat& B) {
    const double s = max_abs(B);
    return s > 0.0 ? s : 1.0;
}

}  // namespace

TangentialStructure TangentialStructure::from_matrices(const Mat& B, const Mat& J) {
    const Eigen::Index n = B.rows();
    if (n == 0 || n % 2 != 0) throw InvalidInput("structure dimension must be even and positive");
    if (B.cols() != n || J.rows() != n || J.cols() != n)
        throw InvalidInput("B and J must be square of the same size");
    const Mat I = Mat::Identity(n, n);
    if (max_abs(B - B.adjoint()) > kStructureTol * op_scale(B))
        throw InvalidInput("B is not Hermitian");
    if (max_abs(J.adjoint() * J - I) > kStructureTol) throw InvalidInput("J is not unitary");
    if (max_abs(J.adjoint() + J) > kStructureTol) throw InvalidInput("J is not skew-adjoint");
    if (max_abs(J * B + B * J) > kStructureTol * op_scale(B))
        throw InvalidInput("J and B do not anticommute");

    TangentialStructure T;
    T.B_ = 0.5 * (B + B.adjoint());
    T.J_ = J;
    const cplx i(0.0, 1.0);
    const Mat pi_plus = (i * I + J) / (2.0 * i);
    const Mat pi_minus = (i * I - J) / (2.0 * i);
    T.frame_i_ = gram_schmidt_columns(pi_plus, static_cast<int>(n / 2));
    T.frame_neg_i_ = gram_schmidt_columns(pi_minus, static_cast<int>(n / 2));

    const Eigen::VectorXd w = T.spectrum();
    for (Eigen::Index k = 0; k < n; ++k)
        if (std::abs(w(k) + w(n - 1 - k)) > 1e-10 * op_scale(B))
            throw InvalidInput("spectrum of B is not symmetric");
    return T;
}

Eigen::VectorXd TangentialStructure::spectrum() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(B_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

int TangentialStructure::kernel_dim() const {
    const Eigen::VectorXd w = spectrum();
    int k = 0;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (std::abs(w(j)) <= kKernelRel * op_scale(B_)) ++k;
    return k;
}

std::string to_string(GrassmannianTag tag) {
    switch (tag) {
        case GrassmannianTag::aps: return "aps";
        case GrassmannianTag::generalized_aps: return "generalized_aps";
        case GrassmannianTag::calderon_graph: return "calderon_graph";
        case GrassmannianTag::random: return "random";
        case GrassmannianTag::custom: return "custom";
    }
    return "custom";
}

double LagrangianDefects::worst() const {
    return std::max({idempotent, hermitian, lagrangian});
}

LagrangianDefects lagrangian_defects(const TangentialStructure& T, const Mat& P) {
    const Eigen::Index n = T.dim();
    if (P.rows() != n || P.cols() != n) throw InvalidInput("projection has the wrong size");
    LagrangianDefects d;
    d.idempotent = max_abs(P * P - P);
    d.hermitian = max_abs(P - P.adjoint());
    d.lagrangian = max_abs(T.J() * P * T.J().adjoint() - (Mat::Identity(n, n) - P));
    d.rank = numerical_rank(P);
    return d;
}

GrassmannianPoint GrassmannianPoint::make(const TangentialStructure& T, Mat P, GrassmannianTag tag,
                                          std::string provenance) {
    const LagrangianDefects d = lagrangian_defects(T, P);
    if (d.idempotent > kStructureTol || d.hermitian > kStructureTol)
        throw InvalidInput("boundary condition is not an orthogonal projection");
    if (d.lagrangian > kStructureTol) throw InvalidInput("range of the projection is not Lagrangian");
    if (d.rank != T.half()) throw InvalidInput("projection rank is not half the dimension");
    return GrassmannianPoint{std::move(P), tag, std::move(provenance)};
}

TangentialStructure standard_structure(std::span<const double> b_values) {
    const int m = static_cast<int>(b_values.size());
    if (m == 0) throw InvalidInput("b_values must not be empty");
    for (double b : b_values)
        if (!(b > 0.0) || !std::isfinite(b)) throw InvalidInput("b_values must be positive");
    const int n = 2 * m;
    Mat J = Mat::Zero(n, n), B = Mat::Zero(n, n);
    for (int k = 0; k < m; ++k) {
        J(k, m + k) = -1.0;
        J(m + k, k) = 1.0;
        B(k, k) = b_values[k];
        B(m + k, m + k) = -b_values[k];
    }
    return TangentialStructure::from_matrices(B, J);
}

TangentialStructure extend_with_kernel(const TangentialStructure& T, int k) {
    if (k <= 0 || k % 2 != 0) throw InvalidInput("kernel dimension must be positive and even");
    const int h = k / 2;
    Mat Jk = Mat::Zero(k, k);
    for (int j = 0; j < h; ++j) {
        Jk(j, h + j) = -1.0;
        Jk(h + j, j) = 1.0;
    }
    return TangentialStructure::from_matrices(direct_sum(T.B(), Mat::Zero(k, k)),
                                              direct_sum(T.J(), Jk));
}

TangentialStructure doubled_structure(const TangentialStructure& T) {
    return TangentialStructure::from_matrices(direct_sum(T.B(), -T.B()), direct_sum(T.J(), -T.J()));
}

namespace {

struct SpectralSplit {
    Mat positive, kernel;
};

SpectralSplit split_by_sign(const TangentialStructure& T) {
    Eigen::SelfAdjointEigenSolver<Mat> es(T.B());
    const double tol = kKernelRel * op_scale(T.B());
    const auto& w = es.eigenvalues();
    const auto& v = es.eigenvectors();
    SpectralSplit s;
    s.positive = Mat::Zero(T.dim(), T.dim());
    std::vector<Eigen::Index> ker;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) > tol) s.positive += v.col(j) * v.col(j).adjoint();
        else if (std::abs(w(j)) <= tol) ker.push_back(j);
    }
    s.kernel = Mat(T.dim(), static_cast<Eigen::Index>(ker.size()));
    for (std::size_t j = 0; j < ker.size(); ++j) s.kernel.col(j) = v.col(ker[j]);
    return s;
}

}  // namespace

GrassmannianPoint aps_projection(const TangentialStructure& T, const std::optional<Mat>& V) {
    const SpectralSplit s = split_by_sign(T);
    const Eigen::Index dk = s.kernel.cols();
    if (dk == 0) {
        if (V) throw InvalidInput("V given but B is invertible");
        return GrassmannianPoint::make(T, s.positive, GrassmannianTag::aps, "1_(0,inf)(B)");
    }
    if (!V) throw InvalidInput("B has a kernel; a Lagrangian V in ker B is required");
    if (V->rows() != T.dim()) throw InvalidInput("V has the wrong ambient dimension");
    const Mat Q = orthonormal_range(*V);
    if (Q.cols() != dk / 2) throw InvalidInput("V must have dimension (dim ker B)/2");
    if (max_abs(T.B() * Q) > 1e-10 * op_scale(T.B())) throw InvalidInput("V is not inside ker B");
    if (max_abs(Q.adjoint() * T.J() * Q) > 1e-10) throw InvalidInput("V is not orthogonal to J(V)");
    return GrassmannianPoint::make(T, s.positive + projector_onto(Q),
                                   GrassmannianTag::generalized_aps, "1_(0,inf)(B) + Pi_V");
}

Mat negative_spectral_projection(const TangentialStructure& T) {
    if (!T.invertible()) throw InvalidInput("negative spectral projection needs invertible B");
    return Mat::Identity(T.dim(), T.dim()) - split_by_sign(T).positive;
}

Mat random_kernel_lagrangian(const TangentialStructure& T, std::uint64_t seed) {
    const Mat K = split_by_sign(T).kernel;
    if (K.cols() == 0) throw InvalidInput("B has no kernel");
    // J restricted to ker B is again a complex structure; pick a Lagrangian graph in its frame
    const Mat Jk = K.adjoint() * T.J() * K;
    const TangentialStructure Tk =
        TangentialStructure::from_matrices(Mat::Zero(K.cols(), K.cols()), Jk);
    const GrassmannianPoint Pk = random_lagrangian(Tk, seed);
    return K * projection_range(Pk.P);
}

Mat phi_of_basis(const TangentialStructure& T, const Mat& Y) {
    const Mat A = T.frame_i().adjoint() * Y;
    const Mat C = T.frame_neg_i().adjoint() * Y;
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible() || numerical_rank(A) < A.cols())
        throw InvariantViolation("projection onto E_i is singular on the subspace; not Lagrangian");
    return C * lu.inverse();
}

UnitaryPhi phi_of(const TangentialStructure& T, const GrassmannianPoint& P) {
    const Mat Y = projection_range(P.P);
    if (Y.cols() != T.half()) throw InvariantViolation("projection rank is not half the dimension");
    return UnitaryPhi{phi_of_basis(T, Y)};
}

GrassmannianPoint projection_of_phi(const TangentialStructure& T, const UnitaryPhi& Phi,
                                    GrassmannianTag tag, std::string provenance) {
    const int h = T.half();
    if (Phi.Phi.rows() != h || Phi.Phi.cols() != h) throw InvalidInput("Phi has the wrong size");
    if (max_abs(Phi.Phi.adjoint() * Phi.Phi - Mat::Identity(h, h)) > 1e-10)
        throw InvalidInput("Phi is not unitary");
    const Mat y = T.frame_i() + T.frame_neg_i() * Phi.Phi;
    Mat P = 0.5 * (y * y.adjoint());
    P = 0.5 * (P + P.adjoint());
    return GrassmannianPoint::make(T, std::move(P), tag, std::move(provenance));
}

Mat random_unitary(int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Mat G(k, k);
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < k; ++r) {
            const double re = g(rng);
            const double im = g(rng);
            G(r, c) = cplx(re, im);
        }
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix the column phases so the distribution does not depend on the QR sign choice
    for (int c = 0; c < k; ++c) {
        const cplx d = R(c, c);
        if (std::abs(d) > 0.0) Q.col(c) *= d / std::abs(d);
    }
    return Q;
}

GrassmannianPoint random_lagrangian(const TangentialStructure& T, std::uint64_t seed) {
    return projection_of_phi(T, UnitaryPhi{random_unitary(T.half(), seed)},
                             GrassmannianTag::random, "seed=" + std::to_string(seed));
}

int fredholm_index(const Mat& P, const Mat& Q) {
    if (P.rows() != Q.rows() || P.cols() != Q.cols() || P.rows() != P.cols())
        throw InvalidInput("projection dimensions do not match");
    const Eigen::Index n = P.rows();
    const Mat I = Mat::Identity(n, n);
    const Mat rangeP = projection_range(P), kerP = projection_range(I - P);
    const Mat rangeQ = projection_range(Q), kerQ = projection_range(I - Q);
    return intersection_dim(kerP, rangeQ) - intersection_dim(rangeP, kerQ);
}

cplx symplectic_form(const TangentialStructure& T, const Vec& f, const Vec& g) {
    if (f.size() != T.dim() || g.size() != T.dim()) throw InvalidInput("vector has the wrong size");
    return -(T.J() * f).dot(g);
}

GrassmannianPoint calderon_graph_projection(const TangentialStructure& T, double length) {
    if (!(length > 0.0)) throw InvalidInput("length must be positive");
    const TangentialStructure D = doubled_structure(T);
    Eigen::SelfAdjointEigenSolver<Mat> es(T.B());
    const int n = T.dim();
    Mat Y(2 * n, n);
    for (int k = 0; k < n; ++k) {
        // column (u, e^{-lb} u) normalized without forming e^{-lb} when it is huge
        const double lb = length * es.eigenvalues()(k);
        double c, s;
        if (lb >= 0.0) {
            const double e = std::exp(-lb);
            c = 1.0 / std::sqrt(1.0 + e * e);
            s = e * c;
        } else {
            const double t = std::exp(lb);
            s = 1.0 / std::sqrt(1.0 + t * t);
            c = t * s;
        }
        Y.col(k).head(n) = c * es.eigenvectors().col(k);
        Y.col(k).tail(n) = s * es.eigenvectors().col(k);
    }
    Mat P = Y * Y.adjoint();
    P = 0.5 * (P + P.adjoint());
    return GrassmannianPoint::make(D, std::move(P), GrassmannianTag::calderon_graph,
                                   "length=" + std::to_string(length));
}

Mat block_swap(int n) {
    Mat S = Mat::Zero(2 * n, 2 * n);
    S.topRightCorner(n, n) = Mat::Identity(n, n);
    S.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return S;
}

}  // namespace cylab
