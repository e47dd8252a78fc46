#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace streamcalc::detail {

inline std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> pts(static_cast<std::size_t>(n));
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (int i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
    }
    return pts;
}

// Golden-section maximum of f on [lo, hi]; tol is absolute on x.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double tol, int max_iter = 200) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

// Maximize f over theta in [lo, hi] (log-spaced bracketing scan of grid_n
// points, then golden section on log-theta to relative tolerance rel_tol).
// Returns (theta*, f*); f* = -inf when every grid point evaluates to -inf.
template <class F>
std::pair<double, double> scan_then_golden_max(F&& f, double lo, double hi, int grid_n,
                                               double rel_tol) {
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<double> us(static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i) {
        const double u = llo + (lhi - llo) * (i + 1) / (grid_n + 1);  // interior points
        us[static_cast<std::size_t>(i)] = u;
        const double v = f(std::exp(u));
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best < 0 || best_val == -std::numeric_limits<double>::infinity()) {
        return {std::numeric_limits<double>::quiet_NaN(),
                -std::numeric_limits<double>::infinity()};
    }
    const double ua = (best > 0) ? us[static_cast<std::size_t>(best - 1)] : llo;
    const double ub = (best + 1 < grid_n) ? us[static_cast<std::size_t>(best + 1)] : lhi;
    auto g = [&](double u) { return f(std::exp(u)); };
    auto [u_star, v_star] = golden_max(g, ua, ub, rel_tol);
    if (v_star < best_val) {  // golden landed on a worse point than the scan
        return {std::exp(us[static_cast<std::size_t>(best)]), best_val};
    }
    return {std::exp(u_star), v_star};
}

// Bisection refinement of a sign change of f (negative-to-positive or
// positive-to-negative between lo and hi); returns the crossing abscissa.
template <class F>
double bisect_crossing(F&& f, double lo, double hi, int iters = 100) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = std::sqrt(lo * hi);  // geometric midpoint for log-scaled variables
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return std::sqrt(lo * hi);
}

}  // namespace streamcalc::detail
