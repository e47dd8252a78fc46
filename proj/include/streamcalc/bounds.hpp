#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "streamcalc/detail/search.hpp"
#include "streamcalc/model.hpp"

// Analytic tail bounds on per-frame departures for N-hop Rayleigh paths with
// a playout deadline: the finite-horizon union-bound form, its closed form
// under stability, the inversion d^eps at a target reliability, and the
// playout-rate bound after whole-layer flooring.

namespace streamcalc {

namespace bound_detail {
inline constexpr double kThetaScanMin = 1e-6;
inline constexpr double kThetaScanMax = 1e5;
inline constexpr int kStabilityGridPoints = 256;
inline constexpr int kOptGridPoints = 64;
inline constexpr double kOptRelTol = 1e-4;

// 1 - V(theta) computed from ln V without cancellation near V = 1.
inline double one_minus_v(double v_log) { return -std::expm1(v_log); }
}  // namespace bound_detail

struct StabilityResult {
    bool stable = false;
    double theta_lo = 0.0;  // bracket of { theta : V(theta) < 1 }
    double theta_hi = 0.0;
};

// Either a reliability target (epsilon mode) or a departure target (bits
// mode); exactly one of the two is set.
struct BoundQuery {
    VideoParams video;
    PathSpec path;
    SlotGrid grid;
    double playout_delay_s = 0.0;
    std::optional<double> epsilon;
    std::optional<double> target_departure_bits;

    void validate() const {
        video.validate();
        if (!(playout_delay_s > 0.0)) throw std::invalid_argument("BoundQuery: playout delay must be > 0");
        if (epsilon.has_value() == target_departure_bits.has_value())
            throw std::invalid_argument("BoundQuery: exactly one of epsilon / target departure required");
        if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0))
            throw std::invalid_argument("BoundQuery: epsilon must lie in (0,1)");
        if (target_departure_bits && *target_departure_bits < 0.0)
            throw std::invalid_argument("BoundQuery: target departure must be >= 0");
    }
};

struct BoundResult {
    double value = 0.0;       // probability or bits, depending on the query mode
    double theta_star = 0.0;  // optimizing theta (0 when the cap decided the result)
    bool stable = false;
    bool capped_at_frame_size = false;
    bool infeasible = false;  // bits mode only: supremum was negative, reported as 0
};

// Stability: exists theta > 0 with V(theta) < 1. V is a moment generating
// function, hence convex with V(0+) = 1, so {V < 1} is an interval starting
// at 0 whenever the mean drift is negative; the scan therefore only needs to
// locate the right crossing.
inline StabilityResult stability_check(const VideoParams& video, const PathSpec& path,
                                       const SlotGrid& grid) {
    using namespace bound_detail;
    const NormalizedLoad load = normalize(video, path.channel, grid);
    if (load.rho == 0.0) return {true, kThetaScanMin, kThetaScanMax};

    auto v_log = [&](double th) { return v_kernel_log(load, path.channel, grid, Theta(th)); };

    const auto grid_pts = detail::log_space(kThetaScanMin, kThetaScanMax, kStabilityGridPoints);
    int first_neg = -1;
    int last_neg = -1;
    for (int i = 0; i < kStabilityGridPoints; ++i) {
        const double lv = v_log(grid_pts[static_cast<std::size_t>(i)]);
        if (lv < 0.0) {
            if (first_neg < 0) first_neg = i;
            last_neg = i;
        } else if (last_neg >= 0) {
            break;  // convexity: once the kernel re-crosses 1 the interval is over
        }
    }
    if (first_neg < 0) return {false, 0.0, 0.0};

    StabilityResult res;
    res.stable = true;
    res.theta_lo = grid_pts[static_cast<std::size_t>(first_neg)];
    if (first_neg > 0) {
        res.theta_lo = detail::bisect_crossing(v_log, grid_pts[static_cast<std::size_t>(first_neg - 1)],
                                               grid_pts[static_cast<std::size_t>(first_neg)]);
    }
    res.theta_hi = grid_pts[static_cast<std::size_t>(last_neg)];
    if (last_neg + 1 < kStabilityGridPoints) {
        res.theta_hi = detail::bisect_crossing(v_log, grid_pts[static_cast<std::size_t>(last_neg)],
                                               grid_pts[static_cast<std::size_t>(last_neg + 1)]);
    }
    return res;
}

// Finite-horizon union bound on P(D(0, horizon) <= d): for a fixed theta,
//   exp((theta/nu) d_nats) * sum_{u=0}^{horizon} M_A(theta, u) M_Snet(theta, horizon-u),
// accumulated in the log domain, clamped to 1.
inline double departure_tail_finite(const VideoParams& video, const PathSpec& path,
                                    const SlotGrid& grid, Theta theta, double d_bits,
                                    std::int64_t horizon_slots) {
    if (horizon_slots < 0) throw std::invalid_argument("departure_tail_finite: horizon must be >= 0");
    if (d_bits < 0.0) throw std::invalid_argument("departure_tail_finite: d must be >= 0");
    const NormalizedLoad load = normalize(video, path.channel, grid);
    const double slot_log = mellin_service_slot_log(path.channel, grid, theta);
    const double n = static_cast<double>(path.hops);

    // running log-sum-exp
    double lse_max = -std::numeric_limits<double>::infinity();
    double lse_sum = 0.0;
    for (std::int64_t u = 0; u <= horizon_slots; ++u) {
        const double k = static_cast<double>(horizon_slots - u);
        const double lchoose =
            (k == 0.0) ? 0.0 : std::lgamma(n + k) - std::lgamma(k + 1.0) - std::lgamma(n);
        const double term = mellin_arrival_log(load, theta, u) + lchoose + k * slot_log;
        if (term <= lse_max) {
            lse_sum += std::exp(term - lse_max);
        } else {
            lse_sum = lse_sum * std::exp(lse_max - term) + 1.0;
            lse_max = term;
        }
    }
    const double log_bound =
        (theta.value / load.service_scale_nats) * (d_bits * kLn2) + lse_max + std::log(lse_sum);
    return std::exp(std::min(0.0, log_bound));
}

// Closed-form bound on P(D^i <= d) for a frame with playout deadline T_D:
//   inf_theta exp((theta/nu)(d_nats - a T_slots)) / (1 - V(theta))^N,
// clamped to [0,1]. Returns 1 with the cap flag for d >= frame size (a frame
// can never deliver more than it contains, so the analytic form does not
// apply there). Throws UnstableSystemError when no theta stabilizes V.
inline BoundResult departure_tail_closed(const VideoParams& video, const PathSpec& path,
                                         const SlotGrid& grid, double d_bits,
                                         double playout_delay_s) {
    using namespace bound_detail;
    if (d_bits < 0.0) throw std::invalid_argument("departure_tail_closed: d must be >= 0");
    const double frame_bits = video.frame_bits();
    const StabilityResult stab = stability_check(video, path, grid);
    const bool capped = d_bits >= frame_bits;  // a frame never delivers more than it contains
    if (!stab.stable) {
        if (capped) return {1.0, 0.0, false, true, false};
        throw UnstableSystemError("departure_tail_closed: no theta with V(theta) < 1");
    }

    const NormalizedLoad load = normalize(video, path.channel, grid);
    const double t_slots = static_cast<double>(grid.to_slots(playout_delay_s));
    const double gap_nats = d_bits * kLn2 - load.arrival_nats_per_slot * t_slots;
    const double n = static_cast<double>(path.hops);

    auto neg_obj = [&](double th) {
        const double lv = v_kernel_log(load, path.channel, grid, Theta(th));
        if (!(lv < 0.0)) return -std::numeric_limits<double>::infinity();
        const double f = (th / load.service_scale_nats) * gap_nats - n * std::log(one_minus_v(lv));
        return -f;
    };
    auto [theta_star, neg_min] =
        detail::scan_then_golden_max(neg_obj, stab.theta_lo, stab.theta_hi, kOptGridPoints, kOptRelTol);
    if (neg_min == -std::numeric_limits<double>::infinity()) {
        // numerically empty interior: the bound collapses to the trivial one
        return {1.0, stab.theta_hi, true, capped, false};
    }
    const double log_bound = -neg_min;
    const double value = capped ? 1.0 : std::exp(std::min(0.0, log_bound));
    return {value, theta_star, true, capped, false};
}

// Inverts the closed form at reliability epsilon:
//   d^eps = min[ frame_bits, sup_theta { a T_slots + (nu/theta)(N ln(1-V) + ln eps) } ]
// (nats converted to bits at the boundary). A negative supremum is reported
// as 0 bits with the infeasible flag set.
inline BoundResult invert_d_epsilon(const VideoParams& video, const PathSpec& path,
                                    const SlotGrid& grid, double playout_delay_s, double epsilon) {
    using namespace bound_detail;
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("invert_d_epsilon: epsilon must lie in (0,1)");
    const StabilityResult stab = stability_check(video, path, grid);
    if (!stab.stable) {
        throw UnstableSystemError("invert_d_epsilon: no theta with V(theta) < 1");
    }
    const NormalizedLoad load = normalize(video, path.channel, grid);
    const double t_slots = static_cast<double>(grid.to_slots(playout_delay_s));
    const double arrivals_nats = load.arrival_nats_per_slot * t_slots;
    const double n = static_cast<double>(path.hops);
    const double log_eps = std::log(epsilon);

    auto obj = [&](double th) {
        const double lv = v_kernel_log(load, path.channel, grid, Theta(th));
        if (!(lv < 0.0)) return -std::numeric_limits<double>::infinity();
        return arrivals_nats +
               (load.service_scale_nats / th) * (n * std::log(one_minus_v(lv)) + log_eps);
    };
    auto [theta_star, sup_nats] =
        detail::scan_then_golden_max(obj, stab.theta_lo, stab.theta_hi, kOptGridPoints, kOptRelTol);

    BoundResult res;
    res.stable = true;
    res.theta_star = theta_star;
    if (sup_nats == -std::numeric_limits<double>::infinity() || sup_nats < 0.0) {
        res.value = 0.0;
        res.infeasible = true;
        if (!std::isfinite(theta_star)) res.theta_star = stab.theta_hi;
        return res;
    }
    const double d_bits = sup_nats / kLn2;
    const double frame_bits = video.frame_bits();
    if (d_bits >= frame_bits) {
        res.value = frame_bits;
        res.capped_at_frame_size = true;
    } else {
        res.value = d_bits;
    }
    return res;
}

// Playout-rate bound from a departure bound: only whole layers decode,
//   floor(d / (m+h)) * m / T_f   bits per second.
inline double playout_rate_bound(const VideoParams& video, double d_eps_bits) {
    if (d_eps_bits < 0.0) throw std::invalid_argument("playout_rate_bound: d must be >= 0");
    const double layers = std::floor(d_eps_bits / video.layer_bits());
    return layers * video.layer_payload_bits / video.frame_period_s();
}

// Deadline sensitivity of d^eps in the uncapped regime: the bound is linear
// in the (slot-floored) deadline with slope R_E; the intercept is the
// deadline-independent backlog penalty.
struct TdSensitivity {
    double slope_bits_per_s = 0.0;
    double intercept_bits = 0.0;
};

inline TdSensitivity td_sensitivity(const VideoParams& video, const PathSpec& path,
                                    const SlotGrid& grid, double epsilon,
                                    double playout_delay_s) {
    using namespace bound_detail;
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("td_sensitivity: epsilon must lie in (0,1)");
    const StabilityResult stab = stability_check(video, path, grid);
    if (!stab.stable) throw UnstableSystemError("td_sensitivity: unstable system");
    const NormalizedLoad load = normalize(video, path.channel, grid);
    const double n = static_cast<double>(path.hops);
    const double log_eps = std::log(epsilon);

    // deadline-independent term, sup_theta (nu/theta)(N ln(1-V) + ln eps)
    auto obj = [&](double th) {
        const double lv = v_kernel_log(load, path.channel, grid, Theta(th));
        if (!(lv < 0.0)) return -std::numeric_limits<double>::infinity();
        return (load.service_scale_nats / th) * (n * std::log(one_minus_v(lv)) + log_eps);
    };
    auto [theta_star, sup_nats] =
        detail::scan_then_golden_max(obj, stab.theta_lo, stab.theta_hi, kOptGridPoints, kOptRelTol);
    (void)theta_star;

    const BoundResult at_td = invert_d_epsilon(video, path, grid, playout_delay_s, epsilon);
    if (at_td.capped_at_frame_size) {
        throw CapActiveError("td_sensitivity: frame-size cap active, linearity void");
    }
    TdSensitivity res;
    res.slope_bits_per_s = video.rate_bps();
    res.intercept_bits = sup_nats / kLn2;

    // the two optimizer runs see the same objective up to an additive
    // constant, so the decomposition must reproduce d^eps almost exactly
    const double t_floor_s =
        static_cast<double>(grid.to_slots(playout_delay_s)) * grid.slot_seconds;
    const double recomposed = res.slope_bits_per_s * t_floor_s + res.intercept_bits;
    const double d_raw = at_td.infeasible ? recomposed : at_td.value;  // 0-clamp undone
    if (!at_td.infeasible &&
        std::fabs(recomposed - d_raw) > 1e-6 * std::max(1.0, std::fabs(d_raw))) {
        throw AccuracyError("td_sensitivity: decomposition disagrees with direct inversion");
    }
    return res;
}

}  // namespace streamcalc
