#include <cmath>
#include <numbers>

#include "cylab/errors.hpp"
#include "cylab/invariants.hpp"

namespace cylab {

namespace {

// B_{2j} / (2j)!, j = 1..10
constexpr double kBernoulliOverFactorial[10] = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
};

}  // namespace

double hurwitz_zeta(double s, double a) {
    if (!(a > 0.0)) throw InvalidInput("hurwitz_zeta needs a > 0");
    if (std::abs(s - 1.0) < 1e-14) throw InvalidInput("hurwitz_zeta has a pole at s = 1");
    const int N = std::max(0, static_cast<int>(std::ceil(25.0 - a)));
    double sum = 0.0, comp = 0.0;
    for (int k = 0; k < N; ++k) {
        const double term = std::pow(k + a, -s);
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    const double x = a + N;
    double tail = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
    double rising = s;  // s (s+1) ... (s+2j-2)
    for (int j = 1; j <= 10; ++j) {
        tail += kBernoulliOverFactorial[j - 1] * rising * std::pow(x, -s - 2.0 * j + 1.0);
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    }
    return sum + comp + tail;
}

double hurwitz_zeta_prime_at_zero(double a) {
    if (!(a > 0.0)) throw InvalidInput("hurwitz_zeta needs a > 0");
    return std::lgamma(a) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gelfand_yaglom_det(double b, double length) {
    if (!(length > 0.0)) throw InvalidInput("length must be positive");
    const double x = std::abs(b) * length;
    if (x < 1e-6) return 2.0 * length * (1.0 + x * x / 6.0);
    return 2.0 * std::sinh(x) / std::abs(b);
}

}  // namespace cylab
