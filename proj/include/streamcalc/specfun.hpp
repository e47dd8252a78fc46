#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "streamcalc/errors.hpp"

// Upper incomplete gamma for real order (including large negative order) and
// the exponential integral E1. These are the only special functions the
// Mellin kernels need; evaluation is tuned for order in [-1e6, 2] and
// argument in (0, 50], and everything is available in log form because the
// composed exponents elsewhere reach magnitude ~1e4.

namespace streamcalc::specfun {

struct GammaOptions {
    std::int64_t max_recurrence_depth = 2'000'000;
};

namespace detail {

inline constexpr double kEulerGamma = 0.5772156649015328606;

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// lgamma(1+a)/a, stable as a -> 0.
inline double lgamma1p_over(double a) {
    if (std::fabs(a) < 1e-4) {
        constexpr double z2_2 = 0.8224670334241132182;   // zeta(2)/2
        constexpr double z3_3 = 0.4006856343865314285;   // zeta(3)/3
        constexpr double z4_4 = 0.2705808084277845479;   // zeta(4)/4
        return -kEulerGamma + a * (z2_2 + a * (-z3_3 + a * z4_4));
    }
    return std::lgamma(1.0 + a) / a;
}

// ln Gamma(a,x) on the principal strip a in [-0.5, 1.5], x in (0, ~4).
// Gamma(a,x) = x^a * (q - tail) with
//   q    = (Gamma(a+1) x^{-a} - 1)/a        (finite limit at a = 0)
//   tail = sum_{n>=1} (-x)^n / (n! (a+n))
inline double gamma_upper_log_seed_series(double a, double x) {
    const double lx = std::log(x);
    const double zoa = lgamma1p_over(a) - lx;
    const double z = zoa * a;
    const double q = (a == 0.0) ? zoa : std::expm1(z) / a;
    double term = 1.0;
    double tail = 0.0;
    for (int n = 1; n < 500; ++n) {
        term *= -x / n;
        const double add = term / (a + n);
        tail += add;
        if (n > 4 && std::fabs(add) < 1e-18 * (std::fabs(tail) + std::fabs(q))) break;
    }
    const double val = q - tail;
    if (!(val > 0.0)) throw AccuracyError("gamma_upper: series seed lost positivity");
    return a * lx + std::log(val);
}

// ln Gamma(a,x) via the Legendre continued fraction (modified Lentz),
// reliable for x >= ~4 with a <= 1.5.
inline double gamma_upper_log_seed_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) {
            return -x + a * std::log(x) + std::log(h);
        }
    }
    throw AccuracyError("gamma_upper: continued fraction did not converge");
}

inline double gamma_upper_log_seed(double a, double x) {
    return (x < 4.0) ? gamma_upper_log_seed_series(a, x) : gamma_upper_log_seed_cf(a, x);
}

}  // namespace detail

// E1(x) = Gamma(0,x), x > 0. Relative accuracy ~1e-14.
inline double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("exp_integral_e1: requires x > 0");
    if (x <= 1.0) {
        double term = 1.0;
        double sum = 0.0;
        for (int n = 1; n < 80; ++n) {
            term *= -x / n;
            const double add = -term / n;
            sum += add;
            if (std::fabs(add) < 1e-18 * (1.0 + std::fabs(sum))) break;
        }
        return -detail::kEulerGamma - std::log(x) + sum;
    }
    return std::exp(detail::gamma_upper_log_seed_cf(0.0, x));
}

// ln Gamma(s,x). Gamma(s,x) > 0 for every real s and x > 0, so no sign
// bookkeeping is needed. For s < -0.5 two regimes apply:
//  - x < 1.5: downward recurrence Gamma(s,x) = (Gamma(s+1,x) - x^s e^{-x})/s
//    anchored at the nearest-integer offset, which keeps every divisor at
//    least 1/2 away from zero; cost is O(|s|). The per-step relative error
//    amplification is about x/|s|, so the recurrence is only stable with x
//    below the order magnitude; it must not be used for larger x.
//  - x >= 1.5: the Legendre continued fraction directly at order s (x > s+1
//    holds for every negative s there, and convergence speeds up as the
//    order grows more negative).
inline double gamma_upper_log(double s, double x, const GammaOptions& opts = {}) {
    if (std::isnan(s) || std::isnan(x)) throw std::domain_error("gamma_upper: NaN argument");
    if (x < 0.0) throw std::domain_error("gamma_upper: requires x >= 0");
    if (x == 0.0) {
        if (s > 0.0) return std::lgamma(s);
        throw std::domain_error("gamma_upper: x = 0 requires s > 0");
    }
    if (s >= -0.5 && s <= 1.5) return detail::gamma_upper_log_seed(s, x);

    const double lx = std::log(x);
    if (s > 1.5) {
        const auto steps = static_cast<std::int64_t>(std::ceil(s - 1.5));
        double a = s - static_cast<double>(steps);  // in (0.5, 1.5]
        double g = detail::gamma_upper_log_seed(a, x);
        for (std::int64_t j = 0; j < steps; ++j) {
            g = detail::log_add(std::log(a) + g, a * lx - x);
            a += 1.0;
        }
        return g;
    }

    if (x >= 1.5) return detail::gamma_upper_log_seed_cf(s, x);

    const auto m = static_cast<std::int64_t>(std::llround(s));  // s - m in [-0.5, 0.5]
    const std::int64_t depth = -m;
    if (depth > opts.max_recurrence_depth) {
        throw AccuracyError("gamma_upper: recurrence depth " + std::to_string(depth) +
                            " exceeds configured limit");
    }
    const double a0 = s - static_cast<double>(m);
    double g = detail::gamma_upper_log_seed(a0, x);
    for (std::int64_t k = 1; k <= depth; ++k) {
        const double ak = a0 - static_cast<double>(k);
        const double p = ak * lx - x;    // ln(x^{ak} e^{-x}), always exceeds g
        const double ratio = g - p;
        if (ratio >= 0.0) throw AccuracyError("gamma_upper: recurrence cancellation at order " +
                                              std::to_string(ak));
        g = p + std::log1p(-std::exp(ratio)) - std::log(-ak);
    }
    return g;
}

// Gamma(s,x) in linear scale; overflows to +inf for strongly negative s with
// small x (use gamma_upper_log there).
inline double gamma_upper(double s, double x, const GammaOptions& opts = {}) {
    return std::exp(gamma_upper_log(s, x, opts));
}

}  // namespace streamcalc::specfun
