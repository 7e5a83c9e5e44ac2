// Finite-element oracle for the spectrum of D_P.
//
// Linear elements on a uniform grid, generalized eigenproblem K x = μ M x for
// the form ‖Du‖² (K) and the L² product (M).  The boundary condition is
// imposed by writing (u_0, u_N) = W c with W an orthonormal basis of ker P.
// Nodes are numbered in folded order c, u_1, u_{N-1}, u_2, u_{N-2}, ... so the
// coupling to both ends stays within a block bandwidth of two.

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cylab/cylinder.hpp"
#include "cylab/errors.hpp"

namespace cylab {

namespace {

/// General band matrix with equal lower/upper bandwidth, column-major.
struct Band {
    int dim = 0, kd = 0;
    std::vector<cplx> a;  // (2kd+1) x dim, A(i,j) at [kd + i - j + j*(2kd+1)]

    Band(int d, int k) : dim(d), kd(k), a(static_cast<std::size_t>((2 * k + 1) * d), cplx(0.0)) {}
    int ld() const { return 2 * kd + 1; }
    cplx& at(int i, int j) { return a[static_cast<std::size_t>(kd + i - j + j * ld())]; }
    cplx at(int i, int j) const { return a[static_cast<std::size_t>(kd + i - j + j * ld())]; }

    Mat multiply(const Mat& x) const {
        Mat y = Mat::Zero(dim, x.cols());
        for (int j = 0; j < dim; ++j)
            for (int i = std::max(0, j - kd); i <= std::min(dim - 1, j + kd); ++i)
                y.row(i) += at(i, j) * x.row(j);
        return y;
    }

    /// Upper Hermitian band storage for ?hbgvx: (kd+1) x dim.
    std::vector<cplx> hermitian_upper() const {
        std::vector<cplx> u(static_cast<std::size_t>((kd + 1) * dim), cplx(0.0));
        for (int j = 0; j < dim; ++j)
            for (int i = std::max(0, j - kd); i <= j; ++i)
                u[static_cast<std::size_t>(kd + i - j + j * (kd + 1))] = at(i, j);
        return u;
    }
};

struct Assembly {
    int blocks = 0, n = 0;
    Band K, M, K1;
};

int folded_block(int k, int N, bool boundary_node) {
    if (boundary_node) return 0;
    return k <= N / 2 ? 2 * k - 1 : 2 * (N - k);
}

struct Quadrature {
    const CylinderOperator& op;
    int N, n;
    double h;
    Mat W, J, JB;

    Quadrature(const CylinderOperator& o, int N_)
        : op(o), N(N_), n(o.dim()), h(o.length() / N_), W(o.kernel_basis()),
          J(o.structure().J()), JB(o.structure().J() * o.structure().B()) {}

    static constexpr int points = 3;
    static double node(int q) {
        static const double x[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
        return x[q];
    }
    static double weight(int q) {
        static const double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return w[q];
    }

    /// u_k = T_k x_{block(k)}
    Mat node_map(int k) const {
        if (k == 0) return W.topRows(n);
        if (k == N) return W.bottomRows(n);
        return Mat::Identity(n, n);
    }
    int block(int k) const { return folded_block(k, N, k == 0 || k == N); }

    /// D applied to the two hat functions of element e at quadrature point q.
    void shape(int e, int q, Mat G[2], double phi[2]) const {
        const double xi = node(q);
        const Mat A = JB + op.potential().value((e + xi) * h, n);
        phi[0] = 1.0 - xi;
        phi[1] = xi;
        G[0] = (-1.0 / h) * J + phi[0] * A;
        G[1] = (1.0 / h) * J + phi[1] * A;
    }
};

Assembly assemble(const Quadrature& qd) {
    const int N = qd.N, n = qd.n;
    const int dof = N * n;
    const int kd = 3 * n - 1;
    Assembly as{N, n, Band(dof, kd), Band(dof, kd), Band(dof, kd)};
    for (int e = 0; e < N; ++e) {
        Mat Ke[2][2], Me[2][2], K1e[2][2];
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                Ke[a][b] = Mat::Zero(n, n);
                Me[a][b] = Mat::Zero(n, n);
                K1e[a][b] = Mat::Zero(n, n);
            }
        for (int q = 0; q < Quadrature::points; ++q) {
            Mat G[2];
            double phi[2];
            qd.shape(e, q, G, phi);
            const double w = Quadrature::weight(q) * qd.h;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    Ke[a][b] += w * G[a].adjoint() * G[b];
                    Me[a][b] += (w * phi[a] * phi[b]) * Mat::Identity(n, n);
                    K1e[a][b] += (w * phi[a]) * G[b];
                }
        }
        const int nodes[2] = {e, e + 1};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const Mat Ta = qd.node_map(nodes[a]), Tb = qd.node_map(nodes[b]);
                const int ba = qd.block(nodes[a]), bb = qd.block(nodes[b]);
                const Mat k = Ta.adjoint() * Ke[a][b] * Tb;
                const Mat m = Ta.adjoint() * Me[a][b] * Tb;
                const Mat k1 = Ta.adjoint() * K1e[a][b] * Tb;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const int r = ba * n + i, c = bb * n + j;
                        as.K.at(r, c) += k(i, j);
                        as.M.at(r, c) += m(i, j);
                        as.K1.at(r, c) += k1(i, j);
                    }
            }
    }
    return as;
}

/// Rows √w·(D_h x)(x_q) over all quadrature points, so that ‖D_h x‖² = ‖S x‖²
/// is a sum of squares.
Mat form_samples(const Quadrature& qd, const Mat& X) {
    const int N = qd.N, n = qd.n;
    Mat S(static_cast<Eigen::Index>(N) * Quadrature::points * n, X.cols());
    for (int e = 0; e < N; ++e) {
        const Mat u0 = qd.node_map(e) * X.middleRows(static_cast<Eigen::Index>(qd.block(e)) * n, n);
        const Mat u1 = qd.node_map(e + 1) * X.middleRows(static_cast<Eigen::Index>(qd.block(e + 1)) * n, n);
        for (int q = 0; q < Quadrature::points; ++q) {
            Mat G[2];
            double phi[2];
            qd.shape(e, q, G, phi);
            const double sw = std::sqrt(Quadrature::weight(q) * qd.h);
            S.middleRows((static_cast<Eigen::Index>(e) * Quadrature::points + q) * n, n) = sw * (G[0] * u0 + G[1] * u1);
        }
    }
    return S;
}

std::vector<double> band_eigenvalues(const Assembly& as, double upper) {
    const int dof = as.K.dim, kd = as.K.kd;
    std::vector<cplx> ab = as.K.hermitian_upper(), bb = as.M.hermitian_upper();
    std::vector<double> w(static_cast<std::size_t>(dof));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(dof));
    cplx q_dummy(0.0), z_dummy(0.0);
    lapack_int m = 0;
    const lapack_int info = LAPACKE_zhbgvx(LAPACK_COL_MAJOR, 'N', 'V', 'U', dof, kd, kd, ab.data(),
                                           kd + 1, bb.data(), kd + 1, &q_dummy, 1, -1.0, upper, 0,
                                           0, 2.0 * LAPACKE_dlamch('S'), &m, w.data(), &z_dummy, 1,
                                           ifail.data());
    if (info != 0)
        throw InvariantViolation("banded generalized eigensolver failed, info=" + std::to_string(info));
    w.resize(static_cast<std::size_t>(m));
    std::sort(w.begin(), w.end());
    return w;
}

/// Number of negative pivots of the unpivoted LDLᴴ factorization of K − σM,
/// which by Sylvester's law is the number of eigenvalues μ < σ.
int band_count_below(const Assembly& as, double sigma) {
    const int dof = as.K.dim, kd = as.K.kd;
    const int ld = kd + 1;
    std::vector<cplx> L(static_cast<std::size_t>(ld * dof), cplx(0.0));
    auto at = [&](int i, int j) -> cplx& { return L[static_cast<std::size_t>(i - j + j * ld)]; };
    double scale = 0.0;
    for (int j = 0; j < dof; ++j)
        for (int i = j; i <= std::min(dof - 1, j + kd); ++i) {
            at(i, j) = as.K.at(i, j) - sigma * as.M.at(i, j);
            scale = std::max(scale, std::abs(at(i, j)));
        }
    const double tiny = 1e-14 * scale;
    int negative = 0;
    std::vector<cplx> l(static_cast<std::size_t>(kd));
    for (int j = 0; j < dof; ++j) {
        double d = at(j, j).real();
        if (std::abs(d) < tiny) d = d < 0.0 ? -tiny : tiny;
        if (d < 0.0) ++negative;
        const int last = std::min(dof - 1, j + kd);
        for (int i = j + 1; i <= last; ++i) l[static_cast<std::size_t>(i - j - 1)] = at(i, j) / d;
        for (int k = j + 1; k <= last; ++k) {
            const cplx lk = std::conj(l[static_cast<std::size_t>(k - j - 1)]) * d;
            for (int i = k; i <= last; ++i) at(i, k) -= l[static_cast<std::size_t>(i - j - 1)] * lk;
        }
    }
    return negative;
}

struct RitzPair {
    double mu;
    double lambda;
};

/// Block inverse iteration near shift σ for a cluster of size m.  Rayleigh–Ritz
/// in the converged subspace then gives μ from ‖D_h x‖² and the sign of λ
/// from the Galerkin matrix of D.
std::vector<RitzPair> refine_cluster(const Quadrature& qd, const Assembly& as, double sigma, int m,
                                     std::uint64_t seed) {
    const int dof = as.K.dim, kd = as.K.kd;
    const int ldab = 3 * kd + 1;
    std::vector<cplx> lu(static_cast<std::size_t>(ldab * dof), cplx(0.0));
    for (int j = 0; j < dof; ++j)
        for (int i = std::max(0, j - kd); i <= std::min(dof - 1, j + kd); ++i)
            lu[static_cast<std::size_t>(2 * kd + i - j + j * ldab)] = as.K.at(i, j) - sigma * as.M.at(i, j);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Mat X(dof, m);
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < dof; ++r) {
            const double re = g(rng);
            X(r, c) = cplx(re, g(rng));
        }
    std::vector<lapack_int> ipiv(static_cast<std::size_t>(dof));
    lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, dof, dof, kd, kd, lu.data(), ldab, ipiv.data());
    if (info < 0) throw InvariantViolation("banded factorization failed");
    for (int it = 0; it < 4; ++it) {
        Mat rhs = as.M.multiply(X);
        info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', dof, kd, kd, m, lu.data(), ldab, ipiv.data(),
                              rhs.data(), dof);
        if (info != 0) throw InvariantViolation("banded solve failed");
        const Mat G = rhs.adjoint() * as.M.multiply(rhs);
        Eigen::LLT<Mat> llt(0.5 * (G + G.adjoint()));
        X = rhs * llt.matrixU().solve(Mat::Identity(m, m));
    }
    // X is M-orthonormal; Ritz for K via the sample matrix
    const Mat S = form_samples(qd, X);
    Mat Kr = S.adjoint() * S;
    Kr = 0.5 * (Kr + Kr.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> ek(Kr);
    Mat Dr = X.adjoint() * as.K1.multiply(X);
    Dr = 0.5 * (Dr + Dr.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> ed(Dr, Eigen::EigenvaluesOnly);
    std::vector<double> mus(ek.eigenvalues().data(), ek.eigenvalues().data() + m);
    std::vector<double> lams(ed.eigenvalues().data(), ed.eigenvalues().data() + m);
    std::sort(mus.begin(), mus.end());
    std::sort(lams.begin(), lams.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    std::vector<RitzPair> out;
    for (int k = 0; k < m; ++k) out.push_back({mus[k], lams[k]});
    return out;
}

}  // namespace

namespace {

void check_grid(const CylinderOperator& op, int N, double window) {
    if (N < 200) throw InvalidInput("discretization needs at least 200 grid points");
    if (!(window > 0.0)) throw InvalidInput("window must be positive");
    if (window * op.length() / N > 0.5)
        throw InvalidInput("grid too coarse for the window: need window*length/N <= 0.5");
}

}  // namespace

int fd_count(const CylinderOperator& op, int N, double level) {
    check_grid(op, N, level);
    const Quadrature qd(op, N);
    return band_count_below(assemble(qd), level * level);
}

Spectrum fd_discretize(const CylinderOperator& op, int N, double window, bool signs) {
    check_grid(op, N, window);
    const Quadrature qd(op, N);
    const Assembly as = assemble(qd);
    const std::vector<double> mu = band_eigenvalues(as, window * window);

    Spectrum s;
    s.window = window;
    s.method = SpectrumMethod::discretization;
    s.period = 2.0 * std::numbers::pi / op.length();
    s.branches_pos = s.branches_neg = op.dim();
    s.certificate.oracle_points = N;
    if (!signs) {
        for (double x : mu) s.eigenvalues.push_back(std::sqrt(std::max(x, 0.0)));
        std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
        return s;
    }
    std::size_t i = 0;
    std::uint64_t seed = 1;
    while (i < mu.size()) {
        std::size_t j = i + 1;
        while (j < mu.size() && mu[j] - mu[j - 1] <= 1e-3 * std::max(1.0, mu[j])) ++j;
        const int m = static_cast<int>(j - i);
        const double sigma = mu[i] - 1e-6 * std::max(1.0, mu[i]);
        for (const RitzPair& r : refine_cluster(qd, as, sigma, m, seed++)) {
            const double mag = std::sqrt(std::max(r.mu, 0.0));
            s.eigenvalues.push_back(r.lambda < 0.0 ? -mag : mag);
        }
        i = j;
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
    return s;
}

}  // namespace cylab
