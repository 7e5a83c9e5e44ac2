#include "cylab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cylab {

double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

int numerical_rank(const Mat& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

Mat orthonormal_range(const Mat& m, double rel_tol) {
    if (m.size() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(0) > 0.0 && s(i) > rel_tol * s(0)) ++r;
    return svd.matrixU().leftCols(r);
}

Mat orthonormal_kernel(const Mat& m, double rel_tol) {
    const Eigen::Index cols = m.cols();
    if (m.rows() == 0) return Mat::Identity(cols, cols);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(0) > 0.0 && s(i) > rel_tol * s(0)) ++r;
    return svd.matrixV().rightCols(cols - r);
}

Mat projection_range(const Mat& p) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.adjoint()));
    const auto& w = es.eigenvalues();
    int k = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w(i) > 0.5) ++k;
    // eigenvalues ascend, so the range sits in the last k columns
    return es.eigenvectors().rightCols(k);
}

Mat thin_q(const Mat& m) {
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

Mat direct_sum(const Mat& a, const Mat& b) {
    Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

int intersection_dim(const Mat& qa, const Mat& qb, double rel_tol) {
    if (qa.cols() == 0 || qb.cols() == 0) return 0;
    // dim(A ∩ B) = dim A + dim B - rank [A B]
    Mat both(qa.rows(), qa.cols() + qb.cols());
    both << qa, qb;
    Eigen::JacobiSVD<Mat> svd(both);
    const auto& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(1.0, s(0))) ++r;
    return static_cast<int>(qa.cols() + qb.cols()) - r;
}

}  // namespace cylab
