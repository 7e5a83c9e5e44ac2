#include "cylab/invariants.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <numbers>
#include <string>

#include "cylab/errors.hpp"

namespace cylab {

namespace {

constexpr double kZeroMode = 1e-9;
constexpr double kLowConfidence = 1e-4;
constexpr int kTailTerms = 20000;

struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

double frac(double x) { return x - std::floor(x); }

/// Midpoint of the largest circular gap of a set of phases in [0, 1).
double gap_phase(std::vector<double> phases) {
    if (phases.empty()) return 0.5;
    std::sort(phases.begin(), phases.end());
    double best = -1.0, mid = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const double a = phases[i];
        const double b = i + 1 < phases.size() ? phases[i + 1] : phases[0] + 1.0;
        if (b - a > best) {
            best = b - a;
            mid = frac(a + 0.5 * (b - a));
        }
    }
    return mid;
}

/// Model position of the branch point with index k (k = 0 at the reference level).
double model_position(const std::vector<double>& coef, double k) {
    const double base = k + coef[0];
    double x = base;
    for (int it = 0; it < 8; ++it) {
        double corr = 0.0, xp = 1.0;
        for (std::size_t p = 1; p < coef.size(); ++p) {
            xp /= x;
            corr += coef[p] * xp;
        }
        x = base + corr;
    }
    return x;
}

Branch fit_branch(const std::vector<double>& seq, int order) {
    const int m = static_cast<int>(seq.size());
    Eigen::MatrixXd A(m, order + 1);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        const double x = seq[i];
        A(i, 0) = 1.0;
        for (int p = 1; p <= order; ++p) A(i, p) = std::pow(x, -p);
        rhs(i) = x + i;  // index k = −i
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
    Branch b;
    b.coef.assign(c.data(), c.data() + c.size());
    b.residual = (A * c - rhs).cwiseAbs().maxCoeff();
    b.fit_points = m;
    return b;
}

SideModel fit_side(std::vector<double> x, int sign, int m, double X, int order, double floor) {
    std::sort(x.begin(), x.end());
    SideModel side;
    side.sign = sign;
    if (m == 0) {
        if (!x.empty()) throw InvariantViolation("eigenvalues present on a side with no declared branches");
        return side;
    }
    std::vector<double> ph;
    for (double v : x)
        if (v > X - 2.0) ph.push_back(frac(v));
    const double phi = gap_phase(ph);
    const double top_level = std::floor(X - phi) + phi;

    std::vector<bool> used(x.size(), false);
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > top_level - 1.0 && x[i] <= top_level) {
            top.push_back(i);
            used[i] = true;
        }
    if (static_cast<int>(top.size()) != m)
        throw InvariantViolation("tail fit found " + std::to_string(top.size()) +
                                 " eigenvalues per period, expected " + std::to_string(m));

    for (std::size_t t : top) {
        std::vector<double> seq{x[t]};
        double cur = x[t] - 1.0;
        while (cur > floor * X || (cur > 1.0 && static_cast<int>(seq.size()) < order + 3)) {
            std::size_t best = x.size();
            double dist = 0.35;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (!used[i] && std::abs(x[i] - cur) < dist) {
                    dist = std::abs(x[i] - cur);
                    best = i;
                }
            if (best == x.size()) break;
            used[best] = true;
            seq.push_back(x[best]);
            cur = x[best] - 1.0;
        }
        if (static_cast<int>(seq.size()) < order + 3)
            throw InvalidInput("window too small for the tail fit; increase the window");
        side.branches.push_back(fit_branch(seq, order));
    }

    // cut in a gap of the model positions one period below the reference level
    ph.clear();
    const double probe = X - 1.5;
    for (const Branch& b : side.branches) {
        const double k = std::round(probe - b.coef[0]);
        ph.push_back(frac(model_position(b.coef, k)));
    }
    const double cphi = gap_phase(ph);
    side.cut = std::floor(X - 1.0 - cphi) + cphi;
    for (double v : x)
        if (v <= side.cut) side.positions.push_back(v);
    side.count = static_cast<int>(side.positions.size());

    for (Branch& b : side.branches) {
        double k = std::ceil(side.cut - b.coef[0]);
        while (model_position(b.coef, k) <= side.cut) k += 1.0;
        while (model_position(b.coef, k - 1.0) > side.cut) k -= 1.0;
        b.y = k + b.coef[0];
        if (!(b.y > 0.0)) throw InvariantViolation("branch offset is not positive");
    }
    return side;
}

std::vector<double> side_positions(const Spectrum& spec, int sign) {
    std::vector<double> x;
    for (double l : spec.eigenvalues)
        if (sign * l > kZeroMode) x.push_back(sign * l / spec.period);
    return x;
}

int kernel_dim(const Spectrum& spec) {
    int k = 0;
    for (double l : spec.eigenvalues)
        if (std::abs(l) <= kZeroMode) ++k;
    return k;
}

/// Σ_{j≥0} log(x_j / (y + j)) for the model positions x_j of a branch.
double tail_log_correction(const Branch& b) {
    std::vector<double> c = b.coef;
    c[0] = 0.0;
    Neumaier s;
    for (int j = 0; j < kTailTerms; ++j) {
        const double base = b.y + j;
        const double x = model_position(c, base);
        s.add(std::log1p((x - base) / base));
    }
    const double c1 = b.coef.size() > 1 ? b.coef[1] : 0.0;
    return s.value() + c1 / (b.y + kTailTerms);
}

struct HurwitzParts {
    double eta = 0.0, zeta0 = 0.0, zeta_prime = 0.0;
};

HurwitzParts hurwitz_parts(const TailModel& tm, bool want_prime) {
    HurwitzParts r;
    const double logc = std::log(tm.period);
    for (const SideModel& s : tm.sides) {
        double z = s.count;
        for (const Branch& b : s.branches) z += hurwitz_zeta(0.0, b.y);
        r.zeta0 += z;
        r.eta += s.sign * z;
        if (!want_prime) continue;
        Neumaier zp;
        for (double x : s.positions) zp.add(-2.0 * (logc + std::log(x)));
        for (const Branch& b : s.branches) {
            zp.add(-2.0 * logc * hurwitz_zeta(0.0, b.y));
            zp.add(2.0 * hurwitz_zeta_prime_at_zero(b.y));
            zp.add(-2.0 * tail_log_correction(b));
        }
        r.zeta_prime += zp.value();
    }
    return r;
}

/// The same model with every cut lowered by `periods`, handing more of the
/// computed spectrum to the fitted tail.
TailModel lowered(TailModel tm, int periods) {
    for (SideModel& s : tm.sides) {
        if (s.branches.empty()) continue;
        s.cut -= periods;
        while (!s.positions.empty() && s.positions.back() > s.cut) s.positions.pop_back();
        s.count = static_cast<int>(s.positions.size());
        for (Branch& b : s.branches) {
            double k = b.y - b.coef[0];
            while (model_position(b.coef, k - 1.0) > s.cut) k -= 1.0;
            b.y = k + b.coef[0];
        }
    }
    return tm;
}

double lowest_cut(const TailModel& tm) {
    double c = std::numeric_limits<double>::infinity();
    for (const SideModel& s : tm.sides)
        if (!s.branches.empty()) c = std::min(c, s.cut);
    return c;
}

/// Computed eigenvalues below the cut plus model eigenvalues up to xmax, sorted.
std::vector<double> extended_spectrum(const TailModel& tm, double xmax) {
    std::vector<double> ev;
    for (const SideModel& s : tm.sides)
        for (double x : s.positions) ev.push_back(s.sign * tm.period * x);
    const auto tail = tm.tail_eigenvalues(xmax);
    ev.insert(ev.end(), tail.begin(), tail.end());
    std::sort(ev.begin(), ev.end());
    return ev;
}

double theta(const std::vector<double>& ev, double t, bool signed_trace) {
    Neumaier s;
    for (double l : ev) {
        const double e = std::exp(-t * l * l);
        s.add(signed_trace ? l * e : e);
    }
    return s.value();
}

/// Gauss–Legendre integral of f(u) over [a, b] on unit panels.
template <class F>
double integrate_log(F&& f, double a, double b) {
    if (!(b > a)) return 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, lo + h);
    }
    return total;
}

/// Small-t window for heat integrals at a given cut level (in λ units).
struct HeatWindow {
    double tmin, t0, xmax;
};

HeatWindow heat_window(double period, double cut) {
    const double lam = period * cut;
    HeatWindow w;
    w.t0 = 1.0 / (lam * lam);
    w.tmin = 1e-4 * w.t0;
    w.xmax = std::sqrt(40.0 / w.tmin) / period;
    return w;
}

/// (1/√π) ∫_0^{tmin} t^{−1/2} Θ_s dt for Θ_s ≈ b0 + b1 log t fitted at tmin and 4 tmin.
double small_t_eta(double th1, double th4, double tmin) {
    const double b1 = (th4 - th1) / std::log(4.0);
    const double b0 = th1 - b1 * std::log(tmin);
    return 2.0 * std::sqrt(tmin) * (b0 + b1 * (std::log(tmin) - 2.0)) / std::sqrt(std::numbers::pi);
}

double eta_by_heat(const TailModel& tm) {
    const HeatWindow w = heat_window(tm.period, lowest_cut(tm));
    const auto ev = extended_spectrum(tm, w.xmax);
    Neumaier large;
    for (double l : ev)
        if (l != 0.0) large.add((l > 0 ? 1.0 : -1.0) * std::erfc(std::sqrt(w.t0) * std::abs(l)));
    const double mid = integrate_log(
        [&](double u) {
            const double t = std::exp(u);
            return std::sqrt(t) * theta(ev, t, true);
        },
        std::log(w.tmin), std::log(w.t0));
    const double small = small_t_eta(theta(ev, w.tmin, true), theta(ev, 4.0 * w.tmin, true), w.tmin);
    return large.value() + mid / std::sqrt(std::numbers::pi) + small;
}

double reduce_mod_one(double x) {
    double r = frac(x);
    if (r > 1.0 - 1e-12) r = 0.0;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- spectra

Spectrum scalar_dirichlet_spectrum(double b, double length, double window) {
    if (!(length > 0.0)) throw InvalidInput("length must be positive");
    Spectrum s;
    s.window = window;
    s.method = SpectrumMethod::closed_form;
    s.period = 2.0 * std::numbers::pi / length;
    s.branches_pos = 2;
    s.branches_neg = 0;
    for (int k = 1;; ++k) {
        const double q = std::numbers::pi * k / length;
        const double l = std::sqrt(b * b + q * q);
        if (l > window) break;
        s.eigenvalues.push_back(l);
    }
    return s;
}

HeatTrace heat_trace(const Spectrum& spec, double t, bool signed_trace) {
    if (!(t > 0.0)) throw InvalidInput("heat_trace needs t > 0");
    const double L = spec.window;
    HeatTrace h;
    h.value = theta(spec.eigenvalues, t, signed_trace);
    const int branches = std::max(1, spec.branches_pos + spec.branches_neg);
    const double c = spec.period > 0.0 ? spec.period : 1.0;
    const double q = std::exp(-2.0 * t * L * c);
    const double lead = std::exp(-t * L * L) * (signed_trace ? L + c : 1.0);
    h.truncation_bound = branches * lead / (1.0 - std::min(q, 0.5));
    if (h.truncation_bound > 1e-12 * std::max(1.0, std::abs(h.value))) {
        const double need = std::sqrt((std::log(1e12 * branches) + std::log(1.0 + L)) / t);
        throw InvalidInput("heat_trace: t below the window validity guard; need window >= " +
                           std::to_string(need));
    }
    return h;
}

// ---------------------------------------------------------------- tail model

double TailModel::max_residual() const {
    double r = 0.0;
    for (const SideModel& s : sides)
        for (const Branch& b : s.branches) r = std::max(r, b.residual);
    return r;
}

std::vector<double> TailModel::tail_eigenvalues(double xmax) const {
    std::vector<double> out;
    for (const SideModel& s : sides)
        for (const Branch& b : s.branches) {
            std::vector<double> c = b.coef;
            c[0] = 0.0;
            for (double base = b.y;; base += 1.0) {
                const double x = model_position(c, base);
                if (x > xmax) break;
                out.push_back(s.sign * period * x);
            }
        }
    return out;
}

TailModel fit_tail_model(const Spectrum& spec, int order, double fit_floor) {
    if (order < 1 || order > 6) throw InvalidInput("tail model order must be in 1..6");
    if (!(spec.period > 0.0)) throw InvalidInput("spectrum has no asymptotic period");
    TailModel tm;
    tm.period = spec.period;
    tm.order = order;
    const double X = spec.window / spec.period;
    for (int sign : {1, -1}) {
        const int m = sign > 0 ? spec.branches_pos : spec.branches_neg;
        tm.sides.push_back(fit_side(side_positions(spec, sign), sign, m, X, order, fit_floor));
    }
    return tm;
}

// ---------------------------------------------------------------- eta, zeta, det

namespace {

/// Largest change of the Hurwitz-path values across lower-order fits and a
/// lowered cut, doubled: these alternatives only probe part of the model error.
HurwitzParts model_spread(const Spectrum& spec, const TailModel& tm, const HurwitzParts& ref, bool want_prime) {
    HurwitzParts d;
    auto take = [&](const HurwitzParts& h) {
        d.eta = std::max(d.eta, 2.0 * std::abs(h.eta - ref.eta));
        d.zeta0 = std::max(d.zeta0, 2.0 * std::abs(h.zeta0 - ref.zeta0));
        d.zeta_prime = std::max(d.zeta_prime, 2.0 * std::abs(h.zeta_prime - ref.zeta_prime));
    };
    for (int order = 1; order < tm.order; ++order) take(hurwitz_parts(fit_tail_model(spec, order), want_prime));
    take(hurwitz_parts(lowered(tm, 1), want_prime));
    return d;
}

}  // namespace

EtaResult eta_from_spectrum(const Spectrum& spec) {
    EtaResult r;
    r.window = spec.window;
    r.dim_ker = kernel_dim(spec);
    r.tail_model = fit_tail_model(spec, 3);
    const HurwitzParts ref = hurwitz_parts(r.tail_model, false);
    r.eta = ref.eta;
    r.eta_heat = eta_by_heat(r.tail_model);
    const double spread = model_spread(spec, r.tail_model, ref, false).eta;
    const double residual = r.tail_model.max_residual();
    r.error_estimate = std::max({std::abs(r.eta - r.eta_heat), spread, residual});
    r.low_confidence = residual > kLowConfidence;
    r.reduced_eta = 0.5 * (r.dim_ker + r.eta);
    r.eta_mod_Z_reduced = reduce_mod_one(r.reduced_eta);
    return r;
}

ZetaResult zeta_from_spectrum(const Spectrum& spec) {
    ZetaResult r;
    r.dim_ker = kernel_dim(spec);
    const TailModel tm = fit_tail_model(spec, 3);
    const HurwitzParts ref = hurwitz_parts(tm, true);
    const HurwitzParts spread = model_spread(spec, tm, ref, true);
    r.zeta_at_0 = ref.zeta0;
    r.zeta_prime_at_0 = ref.zeta_prime;
    const double residual = tm.max_residual();
    r.error_estimate = std::max({spread.zeta0, spread.zeta_prime, residual});
    r.low_confidence = residual > kLowConfidence;
    return r;
}

DetResult assemble_det(const ZetaResult& z, const EtaResult& e) {
    DetResult d;
    d.zeta_at_0 = z.zeta_at_0;
    d.eta = e.eta;
    d.zeta_prime_at_0 = z.zeta_prime_at_0;
    d.dim_ker = z.dim_ker;
    d.error_estimate = z.error_estimate + 0.5 * std::numbers::pi * e.error_estimate;
    if (z.dim_ker > 0) {
        d.value = cplx(0.0, 0.0);
        return d;
    }
    d.modulus = std::exp(-0.5 * z.zeta_prime_at_0);
    d.phase = 0.5 * std::numbers::pi * (z.zeta_at_0 - e.eta);
    d.value = std::polar(d.modulus, d.phase);
    return d;
}

DetResult det_from_spectrum(const Spectrum& spec) {
    return assemble_det(zeta_from_spectrum(spec), eta_from_spectrum(spec));
}

namespace {

void check_window(const CylinderOperator& op, double window) {
    if (window < 20.0 * std::numbers::pi / op.length())
        throw InvalidInput("window must be at least 20*pi/length");
}

}  // namespace

EtaResult eta_invariant(const CylinderOperator& op, double window) {
    check_window(op, window);
    return eta_from_spectrum(eigenvalues_in_window(op, window));
}

ZetaResult zeta_sq(const CylinderOperator& op, double window) {
    check_window(op, window);
    return zeta_from_spectrum(eigenvalues_in_window(op, window));
}

DetResult zeta_det(const CylinderOperator& op, double window) {
    check_window(op, window);
    return det_from_spectrum(eigenvalues_in_window(op, window));
}

// ---------------------------------------------------------------- relative determinants

namespace {

/// Θ_P(t) − Θ_Q(t) over nonzero eigenvalues, pairing by order within each sign.
double delta_theta(const std::vector<double>& p, const std::vector<double>& q, double t, bool signed_trace) {
    Neumaier s;
    auto run = [&](const std::vector<double>& a, const std::vector<double>& b) {
        const std::size_t m = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < m; ++i) {
            const double ea = std::exp(-t * a[i] * a[i]);
            const double x = t * (b[i] * b[i] - a[i] * a[i]);
            // e^{−ta²} − e^{−tb²}
            const double diff = std::abs(x) < 1.0 ? -ea * std::expm1(-x) : ea - std::exp(-t * b[i] * b[i]);
            s.add(signed_trace ? (a[i] - b[i]) * ea + b[i] * diff : diff);
        }
        for (std::size_t i = m; i < a.size(); ++i) {
            const double e = std::exp(-t * a[i] * a[i]);
            s.add(signed_trace ? a[i] * e : e);
        }
        for (std::size_t i = m; i < b.size(); ++i) {
            const double e = std::exp(-t * b[i] * b[i]);
            s.add(-(signed_trace ? b[i] * e : e));
        }
    };
    auto split = [](const std::vector<double>& v, int sign) {
        std::vector<double> out;
        for (double l : v)
            if (sign * l > kZeroMode) out.push_back(l);
        std::sort(out.begin(), out.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
        return out;
    };
    for (int sign : {1, -1}) run(split(p, sign), split(q, sign));
    return s.value();
}

}  // namespace

RelativeDet relative_zeta_det_detail(const Spectrum& P, const Spectrum& Q) {
    if (std::abs(P.period - Q.period) > 1e-12 * P.period || P.branches_pos != Q.branches_pos ||
        P.branches_neg != Q.branches_neg)
        throw InvalidInput("spectra do not share an asymptotic structure");
    if (P.window != Q.window) throw InvalidInput("spectra must share a window");
    if (kernel_dim(P) > 0 || kernel_dim(Q) > 0)
        throw InvalidInput("relative determinant needs invertible operators");
    const TailModel tp = fit_tail_model(P, 3);
    const TailModel tq = fit_tail_model(Q, 3);
    // fixed by the window alone so that ratios compose exactly
    const HeatWindow w = heat_window(P.period, P.window / P.period - 2.0);
    const auto ep = extended_spectrum(tp, w.xmax);
    const auto eq = extended_spectrum(tq, w.xmax);

    double lmin = std::numeric_limits<double>::infinity();
    for (double l : ep) lmin = std::min(lmin, std::abs(l));
    for (double l : eq) lmin = std::min(lmin, std::abs(l));
    const double tmax = std::max(2.0, 45.0 / (lmin * lmin));

    RelativeDet r;
    const double th1 = delta_theta(ep, eq, w.tmin, false);
    const double th4 = delta_theta(ep, eq, 4.0 * w.tmin, false);
    const double a1 = (th4 - th1) / std::sqrt(w.tmin);  // ΔΘ ≈ a0 + a1 √t
    const double a0 = th1 - a1 * std::sqrt(w.tmin);
    r.delta_zeta0 = a0;

    const double umin = std::log(w.tmin);
    const double umax = std::log(tmax);
    auto zeta_integrand = [&](double u) {
        const double t = std::exp(u);
        const double d = delta_theta(ep, eq, t, false);
        return u < 0.0 ? d - a0 : d;
    };
    const double mellin = integrate_log(zeta_integrand, umin, std::min(0.0, umax)) +
                          integrate_log(zeta_integrand, std::max(0.0, umin), umax);
    const double remainder = 2.0 * (th1 - a0);
    r.delta_zeta_prime = mellin + remainder + std::numbers::egamma * a0;

    const double s1 = delta_theta(ep, eq, w.tmin, true);
    const double s4 = delta_theta(ep, eq, 4.0 * w.tmin, true);
    const double eta_int = integrate_log(
        [&](double u) {
            const double t = std::exp(u);
            return std::sqrt(t) * delta_theta(ep, eq, t, true);
        },
        umin, umax);
    r.delta_eta = eta_int / std::sqrt(std::numbers::pi) + small_t_eta(s1, s4, w.tmin);

    r.ratio = std::polar(std::exp(-0.5 * r.delta_zeta_prime),
                         0.5 * std::numbers::pi * (r.delta_zeta0 - r.delta_eta));
    return r;
}

cplx relative_zeta_det(const CylinderOperator& op_P, const CylinderOperator& op_Q, double window) {
    const bool same = op_P.length() == op_Q.length() && op_P.geometry() == op_Q.geometry() &&
                      op_P.dim() == op_Q.dim() &&
                      max_abs(op_P.structure().B() - op_Q.structure().B()) == 0.0 &&
                      max_abs(op_P.structure().J() - op_Q.structure().J()) == 0.0 &&
                      op_P.potential().kind == op_Q.potential().kind &&
                      op_P.potential().amplitude == op_Q.potential().amplitude &&
                      op_P.potential().center == op_Q.potential().center &&
                      op_P.potential().width == op_Q.potential().width &&
                      op_P.potential().direction.size() == op_Q.potential().direction.size() &&
                      (op_P.potential().direction.size() == 0 ||
                       max_abs(op_P.potential().direction - op_Q.potential().direction) == 0.0);
    if (!same) throw InvalidInput("operators differ in more than boundary data");
    if (max_abs(op_P.boundary().P - op_Q.boundary().P) == 0.0) return cplx(1.0, 0.0);
    check_window(op_P, window);
    return relative_zeta_det_detail(eigenvalues_in_window(op_P, window),
                                    eigenvalues_in_window(op_Q, window))
        .ratio;
}

cplx det_F(const Mat& M) {
    if (M.rows() != M.cols()) throw InvalidInput("det_F needs a square matrix");
    if (M.rows() == 0) return cplx(1.0, 0.0);
    return Eigen::PartialPivLU<Mat>(M).determinant();
}

// ---------------------------------------------------------------- spectral flow

namespace {

std::vector<int> flow_on_grid(const std::function<CylinderOperator(double)>& family,
                              const std::vector<double>& grid, double probe,
                              std::map<double, std::vector<double>>& cache) {
    EigenOptions eo;
    eo.certify = false;
    auto low = [&](double theta) -> const std::vector<double>& {
        auto it = cache.find(theta);
        if (it == cache.end()) {
            const Spectrum s = eigenvalues_in_window(family(theta), probe, eo);
            std::vector<double> neg;
            for (double l : s.eigenvalues)
                if (l < 0.0) neg.push_back(-l);
            std::sort(neg.begin(), neg.end());
            it = cache.emplace(theta, std::move(neg)).first;
        }
        return it->second;
    };
    std::vector<int> steps;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const auto& a = low(grid[i]);
        const auto& b = low(grid[i + 1]);
        // level −W in the widest gap of both low spectra inside [−3/4, −1/4]·probe
        std::vector<double> pts{0.25 * probe, 0.75 * probe};
        for (double v : a)
            if (v > 0.25 * probe && v < 0.75 * probe) pts.push_back(v);
        for (double v : b)
            if (v > 0.25 * probe && v < 0.75 * probe) pts.push_back(v);
        std::sort(pts.begin(), pts.end());
        double W = 0.5 * probe, gap = -1.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            if (pts[k + 1] - pts[k] > gap) {
                gap = pts[k + 1] - pts[k];
                W = 0.5 * (pts[k] + pts[k + 1]);
            }
        auto count = [&](const std::vector<double>& v) {
            return static_cast<int>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= W; }));
        };
        steps.push_back(count(a) - count(b));
    }
    return steps;
}

}  // namespace

std::vector<int> spectral_flow_steps(const std::function<CylinderOperator(double)>& family,
                                     const std::vector<double>& grid, const SpectralFlowOptions& options) {
    if (grid.size() < 2) return {};
    double probe = options.probe_window;
    if (probe <= 0.0) probe = 0.5 * std::numbers::pi / family(grid.front()).length();
    std::map<double, std::vector<double>> cache;
    const std::vector<int> coarse = flow_on_grid(family, grid, probe, cache);
    if (!options.halving_check) return coarse;
    std::vector<double> fine;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        fine.push_back(grid[i]);
        fine.push_back(0.5 * (grid[i] + grid[i + 1]));
    }
    fine.push_back(grid.back());
    const std::vector<int> refined = flow_on_grid(family, fine, probe, cache);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const int f = refined[2 * i] + refined[2 * i + 1];
        if (f != coarse[i])
            throw RefinementRequired("spectral flow on [" + std::to_string(grid[i]) + ", " +
                                     std::to_string(grid[i + 1]) + "] changed from " +
                                     std::to_string(coarse[i]) + " to " + std::to_string(f) +
                                     " under grid halving; refine the grid");
    }
    return coarse;
}

int spectral_flow(const std::function<CylinderOperator(double)>& family, const std::vector<double>& grid,
                  const SpectralFlowOptions& options) {
    const std::vector<int> steps = spectral_flow_steps(family, grid, options);
    return std::accumulate(steps.begin(), steps.end(), 0);
}

}  // namespace cylab
