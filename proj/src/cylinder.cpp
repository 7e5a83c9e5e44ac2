#include "cylab/cylinder.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <numbers>

#include "cylab/errors.hpp"

namespace cylab {

// ---------------------------------------------------------------- potential

PotentialSpec PotentialSpec::bump(double amplitude, double center, double width, Mat direction) {
    PotentialSpec v;
    v.kind = Kind::bump;
    v.amplitude = amplitude;
    v.center = center;
    v.width = width;
    v.direction = std::move(direction);
    return v;
}

double PotentialSpec::profile(double x) const {
    if (!active()) return 0.0;
    const double t = 2.0 * (x - center) / width;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Mat PotentialSpec::value(double x, int n) const {
    const double s = amplitude * profile(x);
    if (direction.size() == 0) return s * Mat::Identity(n, n);
    return s * direction;
}

// ---------------------------------------------------------------- operator

namespace {

void validate_potential(const PotentialSpec& V, double length, int n) {
    if (V.kind == PotentialSpec::Kind::zero) return;
    if (!std::isfinite(V.amplitude) || !(V.width > 0.0))
        throw InvalidInput("potential width must be positive");
    const double delta = 0.5 * V.width;
    if (V.support_lo() < delta - 1e-12 || V.support_hi() > length - delta + 1e-12)
        throw InvalidInput("potential support must stay a half-width away from the boundary");
    if (V.direction.size() != 0) {
        if (V.direction.rows() != n || V.direction.cols() != n)
            throw InvalidInput("potential direction has the wrong size");
        if (max_abs(V.direction - V.direction.adjoint()) > 1e-12)
            throw InvalidInput("potential direction is not Hermitian");
        Eigen::JacobiSVD<Mat> svd(V.direction);
        if (std::abs(svd.singularValues()(0) - 1.0) > 1e-10)
            throw InvalidInput("potential direction must have unit norm");
    }
}

}  // namespace

CylinderOperator::CylinderOperator(const TangentialStructure& T, double length,
                                   const PotentialSpec& V, Geometry g,
                                   const GrassmannianPoint& P)
    : T_(T), D_(doubled_structure(T)), length_(length), V_(V), geometry_(g), P_(P),
      bump_(std::make_shared<detail::BumpInterpolant>()) {
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidInput("length must be positive");
    validate_potential(V, length, T.dim());
    const auto d = lagrangian_defects(D_, P.P);
    if (d.worst() > 1e-12 || d.rank != T.dim())
        throw InvalidInput("boundary projection is not Lagrangian for the doubled structure");
    const int n2 = 2 * T.dim();
    W_ = projection_range(Mat::Identity(n2, n2) - P.P);
    Q_ = projection_range(P.P);
    phiW_ = phi_of_basis(D_, W_);
}

CylinderOperator CylinderOperator::interval(const TangentialStructure& T, double length,
                                            const PotentialSpec& V,
                                            const GrassmannianPoint& left,
                                            const GrassmannianPoint& right) {
    const auto dl = lagrangian_defects(T, left.P);
    const auto dr = lagrangian_defects(T, right.P);
    if (dl.worst() > 1e-12 || dl.rank != T.half())
        throw InvalidInput("left boundary projection is not Lagrangian");
    if (dr.worst() > 1e-12 || dr.rank != T.half())
        throw InvalidInput("right boundary projection is not Lagrangian");
    GrassmannianPoint P{direct_sum(left.P, right.P), left.tag == right.tag ? left.tag
                                                                          : GrassmannianTag::custom,
                        "left: " + left.provenance + "; right: " + right.provenance};
    return CylinderOperator(T, length, V, Geometry::interval, P);
}

CylinderOperator CylinderOperator::interval_coupled(const TangentialStructure& T, double length,
                                                    const PotentialSpec& V,
                                                    const GrassmannianPoint& boundary) {
    return CylinderOperator(T, length, V, Geometry::interval, boundary);
}

CylinderOperator CylinderOperator::circle(const TangentialStructure& T, double circumference,
                                          const PotentialSpec& V) {
    return CylinderOperator(T, circumference, V, Geometry::circle, periodic_coupling(T));
}

CylinderOperator CylinderOperator::with_boundary(const GrassmannianPoint& boundary) const {
    CylinderOperator op(T_, length_, V_, geometry_, boundary);
    op.bump_ = bump_;
    return op;
}

GrassmannianPoint periodic_coupling(const TangentialStructure& T) {
    const int n = T.dim();
    Mat a(2 * n, n);
    a << Mat::Identity(n, n), -Mat::Identity(n, n);
    return GrassmannianPoint::make(doubled_structure(T), 0.5 * a * a.adjoint(),
                                   GrassmannianTag::custom, "periodic");
}

// ---------------------------------------------------------------- propagation

namespace {

struct Piece {
    double a, b;
    bool bump;
};

std::vector<Piece> pieces(const CylinderOperator& op, double a, double b) {
    const auto& V = op.potential();
    if (!V.active()) return {{a, b, false}};
    std::vector<Piece> out;
    const double lo = std::clamp(V.support_lo(), a, b), hi = std::clamp(V.support_hi(), a, b);
    if (lo > a) out.push_back({a, lo, false});
    if (hi > lo) out.push_back({lo, hi, true});
    if (b > hi) out.push_back({hi, b, false});
    return out;
}

double step_bound(const CylinderOperator& op) {
    const double nb = op.structure().B().cwiseAbs().rowwise().sum().maxCoeff();
    return 2.0 / (nb + op.potential().bound() + 1e-300);
}

using State = std::vector<cplx>;

/// Propagator of u' = (−B − λJ + JV(x))u from x0 to x1 (RK7(8) with error control).
Mat integrate_bump(const CylinderOperator& op, double lambda, double x0, double x1) {
    namespace ode = boost::numeric::odeint;
    const int n = op.dim();
    const Mat base = -op.structure().B() - lambda * op.structure().J();
    const Mat& J = op.structure().J();
    const auto& V = op.potential();
    State u(static_cast<std::size_t>(n * n));
    Eigen::Map<Mat>(u.data(), n, n) = Mat::Identity(n, n);
    Mat A(n, n);
    auto rhs = [&](const State& y, State& dy, double x) {
        Eigen::Map<const Mat> Y(y.data(), n, n);
        Eigen::Map<Mat> dY(dy.data(), n, n);
        A = base + J * V.value(x, n);
        dY.noalias() = A * Y;
    };
    double last = x0;
    auto observer = [&](const State&, double x) { last = x; };
    try {
        auto stepper = ode::make_controlled(1e-15, 1e-15, ode::runge_kutta_fehlberg78<State>());
        const double h0 = std::min(x1 - x0, 0.05 / (1.0 + std::abs(lambda)));
        ode::integrate_adaptive(stepper, rhs, u, x0, x1, h0, observer);
    } catch (const std::exception& e) {
        throw IntegrationFailure(std::string("propagator integration failed: ") + e.what(), last);
    }
    for (const cplx& z : u)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw IntegrationFailure("propagator integration produced non-finite values", last);
    return Eigen::Map<Mat>(u.data(), n, n);
}

}  // namespace

namespace detail {

/// Chebyshev interpolants in λ of the propagator across the whole bump, one per
/// fixed λ-tile, so the value used at any λ does not depend on evaluation order.
struct BumpInterpolant {
    std::mutex mu;
    std::map<long, std::vector<Mat>> tiles;
};

}  // namespace detail

namespace {

constexpr double kTileWidth = 32.0;

std::vector<Mat> chebyshev_tile(const CylinderOperator& op, double lo, double hi) {
    const auto& V = op.potential();
    const double mid = 0.5 * (lo + hi), rad = 0.5 * (hi - lo);
    double scale = 0.0;
    for (int d = 32; d <= 1024; d *= 2) {
        std::vector<Mat> f(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            const double t = std::cos(std::numbers::pi * (j + 0.5) / d);
            f[j] = integrate_bump(op, mid + rad * t, V.support_lo(), V.support_hi());
        }
        std::vector<Mat> c(static_cast<std::size_t>(d), Mat::Zero(op.dim(), op.dim()));
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j) c[k] += std::cos(std::numbers::pi * k * (j + 0.5) / d) * f[j];
            c[k] *= (k == 0 ? 1.0 : 2.0) / d;
            scale = std::max(scale, max_abs(c[k]));
        }
        // the integrator leaves a noise floor near 1e-12; converged once the tail reaches it
        double tail = 0.0;
        for (int k = d - 8; k < d; ++k) tail = std::max(tail, max_abs(c[k]));
        if (tail <= 1e-10 * scale) return c;
    }
    throw IntegrationFailure("propagator interpolation in lambda did not converge", V.support_lo());
}

Mat bump_propagator(const CylinderOperator& op, double lambda) {
    auto& cache = *op.bump_cache();
    const long tile = std::lround(std::floor(lambda / kTileWidth + 0.5));
    const double lo = (tile - 0.5) * kTileWidth, hi = (tile + 0.5) * kTileWidth;
    const std::vector<Mat>* c = nullptr;
    {
        std::lock_guard<std::mutex> lock(cache.mu);
        auto it = cache.tiles.find(tile);
        if (it == cache.tiles.end()) it = cache.tiles.emplace(tile, chebyshev_tile(op, lo, hi)).first;
        c = &it->second;
    }
    // Clenshaw
    const double t = (lambda - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
    const int n = op.dim();
    Mat b1 = Mat::Zero(n, n), b2 = Mat::Zero(n, n);
    for (int k = static_cast<int>(c->size()) - 1; k >= 1; --k) {
        Mat b0 = 2.0 * t * b1 - b2 + (*c)[k];
        b2 = std::move(b1);
        b1 = std::move(b0);
    }
    return t * b1 - b2 + (*c)[0];
}

Mat free_propagator(const CylinderOperator& op, double lambda, double h) {
    const Mat A = -h * (op.structure().B() + lambda * op.structure().J());
    return A.exp();
}

/// Calls f(M_k) for consecutive short-segment propagators covering [a, b].
template <class F>
void for_each_segment(const CylinderOperator& op, double lambda, double a, double b, F&& f) {
    const double hmax = step_bound(op);
    for (const Piece& p : pieces(op, a, b)) {
        const double len = p.b - p.a;
        if (len <= 0.0) continue;
        const int k = std::max(1, static_cast<int>(std::ceil(len / hmax)));
        const double h = len / k;
        if (!p.bump) {
            const Mat m = free_propagator(op, lambda, h);
            for (int j = 0; j < k; ++j) f(m);
        } else {
            if (p.a == op.potential().support_lo() && p.b == op.potential().support_hi()) {
                f(bump_propagator(op, lambda));
            } else {
                for (int j = 0; j < k; ++j) f(integrate_bump(op, lambda, p.a + j * h, p.a + (j + 1) * h));
            }
        }
    }
}

}  // namespace

Mat transfer_matrix(const CylinderOperator& op, double lambda, double a, double b) {
    if (!(a <= b) || a < 0.0 || b > op.length() + 1e-12)
        throw InvalidInput("propagation interval must lie inside [0, length]");
    Mat M = Mat::Identity(op.dim(), op.dim());
    for (const Piece& p : pieces(op, a, b)) {
        if (p.b <= p.a) continue;
        M = (p.bump ? integrate_bump(op, lambda, p.a, p.b) : free_propagator(op, lambda, p.b - p.a)) * M;
    }
    return M;
}

Mat transfer_matrix(const CylinderOperator& op, double lambda) {
    return transfer_matrix(op, lambda, 0.0, op.length());
}

Mat cauchy_basis(const CylinderOperator& op, double lambda) {
    const int n = op.dim();
    Mat Y(2 * n, n);
    Y << Mat::Identity(n, n), Mat::Identity(n, n);
    Y /= std::sqrt(2.0);
    for_each_segment(op, lambda, 0.0, op.length(), [&](const Mat& m) {
        Y.bottomRows(n) = m * Y.bottomRows(n);
        Y = thin_q(Y);
    });
    return Y;
}

CauchyData cauchy_data(const CylinderOperator& op) {
    return CauchyData{cauchy_basis(op, 0.0)};
}

CharacteristicValue characteristic_value(const CylinderOperator& op, double lambda) {
    const Mat G = op.range_basis().adjoint() * cauchy_basis(op, lambda);
    Eigen::JacobiSVD<Mat> svd(G);
    const auto& s = svd.singularValues();
    CharacteristicValue cv;
    cv.sigma_min = s(s.size() - 1);
    for (Eigen::Index j = 0; j < s.size(); ++j)
        if (s(j) < kRankThreshold * s(0)) ++cv.nullity;
    return cv;
}

Mat boundary_unitary(const CylinderOperator& op, double lambda) {
    return op.kernel_phi().adjoint() * phi_of_basis(op.doubled(), cauchy_basis(op, lambda));
}

std::string to_string(SpectrumMethod m) {
    switch (m) {
        case SpectrumMethod::transfer_matrix: return "transfer_matrix";
        case SpectrumMethod::discretization: return "discretization";
        case SpectrumMethod::closed_form: return "closed_form";
    }
    return "transfer_matrix";
}

int Spectrum::count_in(double lo, double hi) const {
    return static_cast<int>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                          [&](double x) { return x >= lo && x < hi; }));
}

// ---------------------------------------------------------------- counting

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double principal(double x) {
    x = std::remainder(x, kTwoPi);
    return x;
}

/// Eigenphases of U(λ) move monotonically in λ.  Each crossing of phase 0 makes
/// the sum of phases taken in [0, 2π) jump by 2π while the continuous change
/// stays small; counting those jumps counts eigenvalues.
class PhaseTracker {
public:
    explicit PhaseTracker(const CylinderOperator& op)
        : op_(op), hmax_(std::numbers::pi / (8.0 * op.dim() * op.length() + 8.0)),
          rate_(std::numbers::pi / (8.0 * op.length())) {
        const Eigen::VectorXd b = op.structure().spectrum();
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            thresholds_.push_back(std::abs(b(j)));
            thresholds_.push_back(-std::abs(b(j)));
        }
    }

    double wrapped_sum(double lambda) {
        auto it = cache_.find(lambda);
        if (it != cache_.end()) return it->second;
        Eigen::ComplexEigenSolver<Mat> es(boundary_unitary(op_, lambda), false);
        double s = 0.0;
        for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
            double t = std::arg(es.eigenvalues()(j));
            if (t < 0.0) t += kTwoPi;
            if (t >= kTwoPi) t -= kTwoPi;
            s += t;
        }
        cache_.emplace(lambda, s);
        return s;
    }

    /// Signed principal phase of the eigenvalue of U closest to 1.
    double nearest_phase(double lambda) {
        Eigen::ComplexEigenSolver<Mat> es(boundary_unitary(op_, lambda), false);
        double best = std::numbers::pi;
        for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
            const double t = std::arg(es.eigenvalues()(j));
            if (std::abs(t) < std::abs(best)) best = t;
        }
        return best;
    }

    int count(double a, double b) {
        if (!(b > a)) return 0;
        return count_rec(a, b, wrapped_sum(a), wrapped_sum(b), 0);
    }

private:
    int count_rec(double a, double b, double wa, double wb, int depth) {
        const double dw = wb - wa;
        const double cont = principal(dw);
        if ((b - a > step_limit(a, b) || std::abs(cont) > std::numbers::pi / 4) && depth < 60) {
            const double m = 0.5 * (a + b);
            const double wm = wrapped_sum(m);
            return count_rec(a, m, wa, wm, depth + 1) + count_rec(m, b, wm, wb, depth + 1);
        }
        return static_cast<int>(std::lround((dw - cont) / kTwoPi));
    }

    /// Near λ = ±|b_j| a free collar of length ℓ turns its phase like ℓ√(2|λ ∓ b_j|),
    /// so steps shrink there to keep each phase move below π/8.
    double step_limit(double a, double b) const {
        double d = std::numeric_limits<double>::infinity();
        for (double t : thresholds_) d = std::min(d, t < a ? a - t : (t > b ? t - b : 0.0));
        const double near = std::max(0.5 * rate_ * rate_, rate_ * std::sqrt(2.0 * d));
        return std::min(hmax_, near);
    }

    const CylinderOperator& op_;
    double hmax_;
    double rate_;
    std::vector<double> thresholds_;
    std::map<double, double> cache_;
};

struct Root {
    double lambda;
    int multiplicity;
};

void isolate(const CylinderOperator& op, PhaseTracker& tr, double a, double b, int c, double tol, std::vector<Root>& out) {
    if (c == 0) return;
    if (c < 0) throw InvariantViolation("negative eigenvalue count; eigenphases are not monotone");
    if (b - a <= tol) {
        out.push_back({0.5 * (a + b), c});
        return;
    }
    if (c == 1) {
        const double fa = tr.nearest_phase(a), fb = tr.nearest_phase(b);
        if (fa * fb < 0.0 && std::abs(fa) < 1.0 && std::abs(fb) < 1.0) {
            boost::math::tools::eps_tolerance<double> stop(50);
            std::uintmax_t iters = 200;
            auto f = [&](double x) { return tr.nearest_phase(x); };
            try {
                const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
                const double x = 0.5 * (r.first + r.second);
                if (r.second - r.first <= std::max(tol, 1e-13 * std::abs(x)) &&
                    characteristic_value(op, x).nullity >= 1) {
                    out.push_back({x, 1});
                    return;
                }
            } catch (const std::exception&) {
            }
        }
    }
    const double m = 0.5 * (a + b);
    const int left = tr.count(a, m);
    isolate(op, tr, a, m, left, tol, out);
    isolate(op, tr, m, b, c - left, tol, out);
}

}  // namespace

int count_eigenvalues(const CylinderOperator& op, double a, double b) {
    PhaseTracker tr(op);
    return tr.count(a, b);
}

namespace {

/// Cutoff in (Λ − 2π/ℓ, Λ] placed in the middle of the widest gap of |λ|.
double gap_cutoff(const std::vector<double>& abs_sorted, double window, double period) {
    const double lo = std::max(0.0, window - period);
    std::vector<double> pts{lo};
    for (double x : abs_sorted)
        if (x > lo && x < window) pts.push_back(x);
    pts.push_back(window);
    double best = -1.0, cut = window;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double g = pts[k + 1] - pts[k];
        if (g > best) best = g, cut = 0.5 * (pts[k] + pts[k + 1]);
    }
    return cut;
}

}  // namespace

Spectrum eigenvalues_in_window(const CylinderOperator& op, double window,
                               const EigenOptions& options) {
    if (!(window > 0.0)) throw InvalidInput("window must be positive");
    // fixed cell layout: results do not depend on the number of threads
    constexpr int kCells = 8;
    std::vector<std::future<std::vector<Root>>> jobs;
    for (int k = 0; k < kCells; ++k) {
        const double a = -window + 2.0 * window * k / kCells;
        const double b = k + 1 == kCells ? window : -window + 2.0 * window * (k + 1) / kCells;
        jobs.push_back(std::async(std::launch::async, [&op, a, b, &options]() {
            PhaseTracker tr(op);
            std::vector<Root> roots;
            isolate(op, tr, a, b, tr.count(a, b), options.root_tol, roots);
            return roots;
        }));
    }
    Spectrum s;
    s.window = window;
    s.method = SpectrumMethod::transfer_matrix;
    s.period = 2.0 * std::numbers::pi / op.length();
    s.branches_pos = s.branches_neg = op.dim();
    for (auto& j : jobs)
        for (const Root& r : j.get())
            for (int m = 0; m < r.multiplicity; ++m) s.eigenvalues.push_back(r.lambda);
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end());

    if (options.certify) {
        std::vector<double> absv;
        for (double x : s.eigenvalues) absv.push_back(std::abs(x));
        std::sort(absv.begin(), absv.end());
        const double cut = gap_cutoff(absv, window, s.period);
        double margin = s.period;
        for (double x : absv) margin = std::min(margin, std::abs(x - cut));
        // linear elements overshoot λ by about λ³h²/24; keep that below margin/4
        int N = options.fd_points;
        if (N == 0) {
            const double h = std::sqrt(6.0 * std::max(margin, 1e-6) / std::pow(cut + 1.0, 3));
            N = std::max(400, static_cast<int>(std::ceil(op.length() / h)));
            N = std::max(N, static_cast<int>(std::ceil(2.0 * cut * op.length())) + 1);
        }
        const int oracle = fd_count(op, N, cut);
        CompletenessCertificate& c = s.certificate;
        c.checked = true;
        c.cutoff = cut;
        c.primary_count = static_cast<int>(
            std::count_if(absv.begin(), absv.end(), [&](double x) { return x <= cut; }));
        c.oracle_count = oracle;
        c.oracle_points = N;
        if (c.primary_count != c.oracle_count)
            throw CompletenessFailure("transfer-matrix count " + std::to_string(c.primary_count) +
                                          " differs from discretization count " +
                                          std::to_string(c.oracle_count),
                                      -cut, cut);
    }
    return s;
}

// ---------------------------------------------------------------- eigenfunctions

EigenfunctionCheck eigenfunction_residual(const CylinderOperator& op, double lambda, int grid) {
    const int n = op.dim();
    const Mat Y = cauchy_basis(op, lambda);
    const Mat G = op.range_basis().adjoint() * Y;
    Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    EigenfunctionCheck out;
    for (Eigen::Index j = 0; j < s.size(); ++j)
        if (s(j) < kRankThreshold * s(0)) ++out.multiplicity;
    if (out.multiplicity == 0) return out;
    const double h = op.length() / grid;
    const Mat& J = op.structure().J();
    const Mat& B = op.structure().B();
    for (int m = 0; m < out.multiplicity; ++m) {
        const Vec u0 = (Y * svd.matrixV().col(n - 1 - m)).head(n);
        std::vector<Vec> u(static_cast<std::size_t>(grid + 1));
        u[0] = u0;
        for (int k = 0; k < grid; ++k) u[k + 1] = transfer_matrix(op, lambda, k * h, (k + 1) * h) * u[k];
        double num = 0.0, den = 0.0;
        for (int k = 2; k + 2 <= grid; ++k) {
            // fourth-order central difference
            const Vec du = (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) / (12.0 * h);
            const Vec r = J * (du + B * u[k]) + op.potential().value(k * h, n) * u[k] - lambda * u[k];
            num += r.squaredNorm();
        }
        for (int k = 0; k <= grid; ++k) den += u[k].squaredNorm();
        out.residual = std::max(out.residual, std::sqrt(num / den));
    }
    return out;
}

}  // namespace cylab
