#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "streamcalc/bounds.hpp"
#include "streamcalc/optimizer.hpp"
#include "streamcalc/simulator.hpp"

// The acceptance suite: every tolerance and threshold pinned in code. The
// same checks back the `validate` CLI subcommand and the ctest acceptance
// binary. Desk-scale note: runs of 1e7 slots resolve empirical violation
// probabilities down to roughly 1e-4; deeper tails are out of reach here and
// the checks are scoped accordingly.

namespace streamcalc::validate {

struct EvalDefaults {
    double bandwidth_hz = 2.2e6;
    double slot_s = 0.01;
    double fps = 2.5;
    double layer_payload_bits = 100e3;
    double layer_header_bits = 0.0;
    double playout_delay_s = 0.45;
    int max_layers = 24;
};

inline VideoParams video_with_frame_bits(const EvalDefaults& d, double frame_bits) {
    const double layers = frame_bits / (d.layer_payload_bits + d.layer_header_bits);
    return VideoParams(d.layer_payload_bits, d.layer_header_bits, d.fps, layers, d.max_layers);
}

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::vector<std::string> details;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

inline void log_line(std::ostream* log, const std::string& s) {
    if (log) (*log) << s << std::endl;
}

// least-squares slope of y against x
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

// Dominance table shared by criterion 3 and the simulate CLI verdict column.
struct DominanceRow {
    double d_bits = 0.0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    std::int64_t violations = 0;
    bool low_confidence = false;
    double bound = 0.0;
    bool dominated = true;  // p_hat <= bound + 3 stderr
};

inline std::vector<DominanceRow> dominance_table(const VideoParams& video, const PathSpec& path,
                                                 const SlotGrid& grid, double playout_delay_s,
                                                 const std::vector<FrameStats>& frames,
                                                 const std::vector<double>& d_grid_bits) {
    const auto emp = empirical_violation(frames, d_grid_bits);
    std::vector<DominanceRow> rows;
    rows.reserve(emp.size());
    for (const ViolationRow& e : emp) {
        DominanceRow row;
        row.d_bits = e.d_bits;
        row.p_hat = e.probability;
        row.stderr_ = e.stderr_;
        row.violations = e.violations;
        row.low_confidence = e.low_confidence;
        try {
            row.bound = departure_tail_closed(video, path, grid, e.d_bits, playout_delay_s).value;
        } catch (const UnstableSystemError&) {
            row.bound = 1.0;
        }
        row.dominated = row.p_hat <= row.bound + 3.0 * row.stderr_;
        rows.push_back(row);
    }
    return rows;
}

// The default 20-point departure grid: coarse over the body, geometrically
// dense toward the frame size where the tail lives.
inline std::vector<double> default_d_grid(double frame_bits) {
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(frame_bits * (0.05 + 0.65 * i / 7.0));
    const double g_hi = 0.28, g_lo = 0.002;
    for (int i = 0; i < 12; ++i) {
        const double g = g_hi * std::pow(g_lo / g_hi, i / 11.0);
        grid.push_back(frame_bits * (1.0 - g));
    }
    return grid;
}

// --- criterion 1: mean-capacity anchors ------------------------------------
inline CriterionResult criterion_1(std::ostream* log = nullptr) {
    (void)log;
    CriterionResult res{1, "capacity anchors", true, {}};
    const EvalDefaults d;
    const struct {
        double snr_db;
        double expect_mbps;
    } anchors[] = {{10.0, 6.39}, {6.0, 4.24}};
    for (const auto& a : anchors) {
        const double got =
            avg_capacity_bps(ChannelParams::from_db(a.snr_db, d.bandwidth_hz)) / 1e6;
        const bool ok = std::fabs(got - a.expect_mbps) <= 0.01 * a.expect_mbps;
        res.pass = res.pass && ok;
        res.details.push_back("C_avg(" + detail::fmt(a.snr_db) + " dB) = " + detail::fmt(got) +
                              " Mbps, expected " + detail::fmt(a.expect_mbps) + " +-1%: " +
                              (ok ? "ok" : "FAIL"));
    }
    return res;
}

// --- criterion 2: utilization anchors ---------------------------------------
inline CriterionResult criterion_2(std::ostream* log = nullptr) {
    (void)log;
    CriterionResult res{2, "utilization anchors", true, {}};
    const EvalDefaults d;
    const double re = 2.08e6 * d.fps;
    const struct {
        double snr_db;
        double expect;
        double tol;
    } anchors[] = {{10.0, 0.80, 0.02}, {8.0, 0.99, 0.01}};
    for (const auto& a : anchors) {
        const double got = re / avg_capacity_bps(ChannelParams::from_db(a.snr_db, d.bandwidth_hz));
        const bool ok = std::fabs(got - a.expect) <= a.tol;
        res.pass = res.pass && ok;
        res.details.push_back("utilization(r=2.08Mb, " + detail::fmt(a.snr_db) + " dB) = " +
                              detail::fmt(got) + ", expected " + detail::fmt(a.expect) + " +-" +
                              detail::fmt(a.tol) + ": " + (ok ? "ok" : "FAIL"));
    }
    return res;
}

namespace detail {

struct DominanceConfig {
    double frame_mbits;
    double snr_db;
    std::uint64_t seed;
};

inline constexpr DominanceConfig kDominanceConfigs[] = {
    {2.08, 10.0, 0xC0FFEE01},
    {2.08, 8.0, 0xC0FFEE02},
    {1.60, 10.0, 0xC0FFEE03},
    {1.20, 8.0, 0xC0FFEE04},
};
inline constexpr std::int64_t kDominanceSlots = 10'000'000;

inline RunResult run_dominance_config(const DominanceConfig& cfg, const EvalDefaults& d,
                                 std::ostream* log) {
    SimConfig sim;
    sim.video = video_with_frame_bits(d, cfg.frame_mbits * 1e6);
    sim.path = PathSpec(3, ChannelParams::from_db(cfg.snr_db, d.bandwidth_hz), "bench");
    sim.grid = SlotGrid(d.slot_s);
    sim.playout_delay_s = d.playout_delay_s;
    sim.total_slots = kDominanceSlots;
    sim.warmup_slots = 20'000;
    sim.seed = cfg.seed;
    log_line(log, "  simulating r=" + fmt(cfg.frame_mbits) + " Mb, " + fmt(cfg.snr_db) +
                      " dB, N=3, 1e7 slots ...");
    return run(sim);
}

}  // namespace detail

// --- criterion 3: bound dominance over the Monte-Carlo tail -----------------
inline CriterionResult criterion_3(std::ostream* log = nullptr) {
    CriterionResult res{3, "bound dominance (desk scale)", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    for (const auto& cfg : detail::kDominanceConfigs) {
        const double r_bits = cfg.frame_mbits * 1e6;
        const VideoParams video = video_with_frame_bits(d, r_bits);
        const PathSpec path(3, ChannelParams::from_db(cfg.snr_db, d.bandwidth_hz), "bench");
        const RunResult sim = detail::run_dominance_config(cfg, d, log);
        const auto rows = dominance_table(video, path, grid, d.playout_delay_s, sim.frames,
                                          default_d_grid(r_bits));
        int bad = 0;
        double worst_gap = 0.0;
        double worst_d = 0.0;
        for (const DominanceRow& row : rows) {
            if (!row.dominated) {
                ++bad;
                if (row.p_hat - row.bound > worst_gap) {
                    worst_gap = row.p_hat - row.bound;
                    worst_d = row.d_bits;
                }
            }
        }
        const bool ok = bad == 0;
        res.pass = res.pass && ok;
        res.details.push_back(
            "r=" + detail::fmt(cfg.frame_mbits) + " Mb, " + detail::fmt(cfg.snr_db) + " dB: " +
            std::to_string(sim.summary.counted_frames) + " frames, " +
            (ok ? "dominated at all 20 grid points"
                : std::to_string(bad) + " violations, worst at d=" + detail::fmt(worst_d / 1e6) +
                      " Mb (gap " + detail::fmt(worst_gap) + ")") +
            (ok ? "" : ": FAIL"));
    }
    return res;
}

// --- criterion 4: tail-slope agreement --------------------------------------
inline CriterionResult criterion_4(std::ostream* log = nullptr) {
    CriterionResult res{4, "tail slope match (utilization <= 0.9)", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    int fitted = 0;
    for (const auto& cfg : detail::kDominanceConfigs) {
        const double r_bits = cfg.frame_mbits * 1e6;
        const VideoParams video = video_with_frame_bits(d, r_bits);
        const ChannelParams chan = ChannelParams::from_db(cfg.snr_db, d.bandwidth_hz);
        const double util = video.rate_bps() / avg_capacity_bps(chan);
        if (util > 0.9) {
            res.details.push_back("r=" + detail::fmt(cfg.frame_mbits) + " Mb, " +
                                  detail::fmt(cfg.snr_db) + " dB: utilization " +
                                  detail::fmt(util) + " > 0.9, out of scope");
            continue;
        }
        const PathSpec path(3, chan, "bench");
        const RunResult sim = detail::run_dominance_config(cfg, d, log);

        // empirical decay rate over a dense tail grid; qualifying points have
        // at least 100 events, sit below saturation, and clear the knee by a
        // whole layer
        std::vector<double> fit_grid;
        for (int i = 0; i < 30; ++i) fit_grid.push_back(r_bits * (0.85 + 0.13 * i / 29.0));
        const auto emp = empirical_violation(sim.frames, fit_grid);
        std::vector<double> xs, ys;
        for (const ViolationRow& e : emp) {
            if (e.violations >= 100 && e.probability <= 0.3 &&
                e.d_bits <= r_bits - video.layer_bits()) {
                xs.push_back(e.d_bits);
                ys.push_back(std::log(e.probability));
            }
        }
        if (xs.size() < 4) {
            res.details.push_back("r=" + detail::fmt(cfg.frame_mbits) + " Mb, " +
                                  detail::fmt(cfg.snr_db) +
                                  " dB: insufficient tail events at desk scale (" +
                                  std::to_string(xs.size()) + " usable points), skipped");
            continue;
        }
        const double slope_emp = detail::fit_slope(xs, ys);

        // analytic decay rate over the bound's own [1e-4, 0.3] window
        std::vector<double> bx, by;
        for (int i = 0; i < 120; ++i) {
            const double dd = r_bits * (0.30 + 0.6995 * i / 119.0);
            const double b = departure_tail_closed(video, path, grid, dd, d.playout_delay_s).value;
            if (b >= 1e-4 && b <= 0.3) {
                bx.push_back(dd);
                by.push_back(std::log(b));
            }
        }
        if (bx.size() < 4) {
            res.details.push_back("bound window empty for r=" + detail::fmt(cfg.frame_mbits) +
                                  " Mb, " + detail::fmt(cfg.snr_db) + " dB: FAIL");
            res.pass = false;
            continue;
        }
        const double slope_bound = detail::fit_slope(bx, by);
        const double ratio = slope_emp / slope_bound;
        const bool ok = std::fabs(ratio - 1.0) <= 0.10;
        ++fitted;
        res.pass = res.pass && ok;
        res.details.push_back("r=" + detail::fmt(cfg.frame_mbits) + " Mb, " +
                              detail::fmt(cfg.snr_db) + " dB: slope ratio " + detail::fmt(ratio) +
                              " (" + std::to_string(xs.size()) + " empirical points): " +
                              (ok ? "ok" : "FAIL"));
    }
    if (fitted == 0) {
        res.pass = false;
        res.details.push_back("no configuration produced a measurable tail: FAIL");
    }
    return res;
}

// --- criterion 5: model-optimal frame size at 6 dB --------------------------
inline CriterionResult criterion_5(std::ostream* log = nullptr) {
    (void)log;
    CriterionResult res{5, "optimizer anchor (6 dB)", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    const VideoParams tmpl(d.layer_payload_bits, d.layer_header_bits, d.fps, 1.0, d.max_layers);
    const PathSpec path(3, ChannelParams::from_db(6.0, d.bandwidth_hz), "p");
    const double eps = 1e-6;

    const AdaptationDecision dec =
        optimize_layers(tmpl, path, grid, d.playout_delay_s, eps, AdaptObjective::departure_bound);
    const bool layers_ok = std::abs(dec.layers - 11) <= 1;
    res.details.push_back("model-optimal r* = " + detail::fmt(dec.transmitted_frame_bits / 1e6) +
                          " Mb (L*=" + std::to_string(dec.layers) +
                          "), expected 1.1 Mb +-1 layer: " + (layers_ok ? "ok" : "FAIL"));

    double d_max = 0.0;
    for (const LayerScanRow& row : scan_layers(tmpl, path, grid, d.playout_delay_s, eps)) {
        if (!row.infeasible) d_max = std::max(d_max, row.d_eps_bits);
    }
    const bool d_ok = d_max >= 0.9e6;
    res.details.push_back("best d^eps over L = " + detail::fmt(d_max / 1e6) +
                          " Mb, required >= 0.9 Mb: " + (d_ok ? "ok" : "FAIL"));
    res.pass = layers_ok && d_ok;
    return res;
}

// --- criterion 6: adaptation anchor and desk-scale reliability --------------
inline CriterionResult criterion_6(std::ostream* log = nullptr) {
    CriterionResult res{6, "adaptation anchor (10 dB phases + replay)", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    const VideoParams tmpl(d.layer_payload_bits, d.layer_header_bits, d.fps, 1.0, d.max_layers);
    const double eps = 1e-5;
    const std::int64_t phase_slots = 10'000'000;
    const double phase_seconds = static_cast<double>(phase_slots) * d.slot_s;

    std::vector<PathSpec> paths = {PathSpec(3, ChannelParams::from_db(10.0, d.bandwidth_hz), "p")};
    std::vector<AdaptationEpoch> epochs(3);
    epochs[0] = {1e-9, {{"p", 10.0}}, {"p"}};
    epochs[1] = {phase_seconds, {{"p", 6.0}}, {"p"}};
    epochs[2] = {2.0 * phase_seconds, {{"p", 10.0}}, {"p"}};

    const auto decisions =
        run_adaptation(paths, epochs, tmpl, grid, d.playout_delay_s, eps);
    const AdaptationDecision& mod10 = decisions.front();
    const double r_mod = mod10.transmitted_frame_bits;
    const bool r_ok = r_mod <= 1.9e6 && r_mod >= 1.9e6 - 2.0 * tmpl.layer_bits();
    res.details.push_back("MOD at 10 dB transmits r = " + detail::fmt(r_mod / 1e6) +
                          " Mb (L*=" + std::to_string(mod10.layers) +
                          "), required within [1.7, 1.9] Mb: " + (r_ok ? "ok" : "FAIL"));
    res.pass = r_ok;

    detail::log_line(log, "  replaying 3 phases x 1e7 slots ...");
    SimConfig sim;
    sim.video = tmpl;
    sim.path = paths.front();
    sim.grid = grid;
    sim.playout_delay_s = d.playout_delay_s;
    sim.total_slots = 3 * phase_slots;
    sim.warmup_slots = 20'000;
    sim.seed = 0xC0FFEE06;
    const auto phases = simulate_adaptation(paths, epochs, decisions, tmpl, sim);
    for (const PhaseReport& ph : phases) {
        const double n = static_cast<double>(std::max<std::int64_t>(ph.counted_frames, 1));
        const double tol = 3.0 * std::sqrt(eps * (1.0 - eps) / n);
        const bool ok = ph.p_hat <= eps + tol;
        res.pass = res.pass && ok;
        res.details.push_back("phase " + std::to_string(ph.epoch_index) + " (L=" +
                              std::to_string(ph.layers) + ", d^eps=" +
                              detail::fmt(ph.target_d_bits / 1e6) + " Mb): P_hat = " +
                              detail::fmt(ph.p_hat) + " over " +
                              std::to_string(ph.counted_frames) + " frames vs eps + 3sigma = " +
                              detail::fmt(eps + tol) + ": " + (ok ? "ok" : "FAIL"));
    }
    return res;
}

// --- criterion 7: routing anchor --------------------------------------------
inline CriterionResult criterion_7(std::ostream* log = nullptr) {
    (void)log;
    CriterionResult res{7, "routing anchor", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    const VideoParams tmpl(d.layer_payload_bits, d.layer_header_bits, d.fps, 1.0, d.max_layers);
    std::vector<PathSpec> paths = {
        PathSpec(1, ChannelParams::from_db(6.0, d.bandwidth_hz), "direct-1hop"),
        PathSpec(3, ChannelParams::from_db(10.0, d.bandwidth_hz), "relay-3hop"),
    };
    const AdaptationDecision dec = select_path(tmpl, paths, grid, d.playout_delay_s, 1e-5);
    res.pass = dec.chosen_path == "relay-3hop";
    res.details.push_back("selected '" + dec.chosen_path + "' (L*=" + std::to_string(dec.layers) +
                          ", rate bound " + detail::fmt(dec.predicted_rate_bound_bps / 1e6) +
                          " Mbps), expected the 3-hop 10 dB path: " +
                          (res.pass ? "ok" : "FAIL"));
    return res;
}

// --- criterion 8: property suite --------------------------------------------
inline CriterionResult criterion_8(std::ostream* log = nullptr) {
    CriterionResult res{8, "property suite", true, {}};
    const EvalDefaults d;
    const SlotGrid grid(d.slot_s);
    auto check = [&](bool ok, const std::string& what) {
        res.pass = res.pass && ok;
        res.details.push_back(what + ": " + (ok ? "ok" : "FAIL"));
    };

    // V(0+) = 1
    {
        bool ok = true;
        for (double snr_db : {6.0, 8.0, 10.0, 20.0}) {
            for (double r_mb : {0.0, 1.2, 2.08}) {
                const VideoParams v = video_with_frame_bits(d, r_mb * 1e6);
                const ChannelParams c = ChannelParams::from_db(snr_db, d.bandwidth_hz);
                const double vk = v_kernel(normalize(v, c, grid), c, grid, Theta(1e-9));
                ok = ok && std::fabs(vk - 1.0) < 1e-6;
            }
        }
        check(ok, "V(theta -> 0+) = 1 within 1e-6");
    }

    // incomplete-gamma recurrence identity
    {
        bool ok = true;
        double worst = 0.0;
        for (double s : {-5.5, -2.0, -1.0, -0.3, 0.2, 0.9, 1.5}) {
            for (double x : {0.1, 0.25, 1.0, 5.0, 20.0}) {
                const double lhs = s * specfun::gamma_upper(s, x) + std::pow(x, s) * std::exp(-x);
                const double rhs = specfun::gamma_upper(s + 1.0, x);
                const double rel = std::fabs(lhs - rhs) / std::fabs(rhs);
                worst = std::max(worst, rel);
                ok = ok && rel <= 1e-8;
            }
        }
        check(ok, "recurrence s*G(s,x) + x^s e^-x = G(s+1,x) within 1e-8 (worst " +
                      detail::fmt(worst) + ")");
    }

    // finite-horizon sum converges to the closed form at fixed theta
    {
        const VideoParams video = video_with_frame_bits(d, 1.2e6);
        const PathSpec path(3, ChannelParams::from_db(10.0, d.bandwidth_hz), "p");
        const NormalizedLoad load = normalize(video, path.channel, grid);
        const Theta theta(1.0);
        const std::int64_t t_slots = grid.to_slots(d.playout_delay_s);
        const double d_bits = 1.0e6;
        const double lv = v_kernel_log(load, path.channel, grid, theta);
        const double closed_log =
            (theta.value / load.service_scale_nats) * (d_bits * kLn2 - load.arrival_nats_per_slot *
                                                                           t_slots) -
            3.0 * std::log(-std::expm1(lv));
        const double closed = std::exp(closed_log);
        double prev = 0.0;
        bool monotone = true;
        double final_ratio = 0.0;
        for (std::int64_t horizon : {t_slots, t_slots + 15, t_slots + 55, t_slots + 155,
                                     t_slots + 555}) {
            const double shifted_d =
                d_bits + load.arrival_nats_per_slot * static_cast<double>(horizon - t_slots) / kLn2;
            const double fin =
                departure_tail_finite(video, path, grid, theta, shifted_d, horizon);
            monotone = monotone && fin >= prev - 1e-15;
            prev = fin;
            final_ratio = fin / closed;
        }
        check(monotone && std::fabs(final_ratio - 1.0) <= 1e-6,
              "finite-horizon sum converges from below to the closed form (final ratio " +
                  detail::fmt(final_ratio) + ")");
    }

    // deadline linearity
    {
        const VideoParams video = video_with_frame_bits(d, 2.08e6);
        const PathSpec path(3, ChannelParams::from_db(10.0, d.bandwidth_hz), "p");
        const double eps = 1e-4;
        const BoundResult d1 = invert_d_epsilon(video, path, grid, d.playout_delay_s, eps);
        const BoundResult d2 = invert_d_epsilon(video, path, grid, d.playout_delay_s + 0.02, eps);
        const double expect = video.rate_bps() * 0.02;
        const bool uncapped = !d1.capped_at_frame_size && !d2.capped_at_frame_size;
        const double gap = std::fabs((d2.value - d1.value) - expect);
        const TdSensitivity sens = td_sensitivity(video, path, grid, eps, d.playout_delay_s);
        check(uncapped && gap <= 1e-6 * expect && sens.slope_bits_per_s == video.rate_bps() &&
                  sens.intercept_bits < 0.0,
              "d^eps(T+2 slots) - d^eps(T) = R_E * 2 slots, slope = R_E, intercept < 0 (gap " +
                  detail::fmt(gap) + " bits)");
    }

    // min-plus envelope, causality and conservation on a recorded path
    {
        detail::log_line(log, "  min-plus envelope on 1000-slot traces ...");
        bool env_ok = true, eq_ok = true, cons_ok = true, causal_ok = true;
        for (int hops : {1, 3}) {
            SimConfig sim;
            sim.video = video_with_frame_bits(d, 2.08e6);
            sim.path = PathSpec(hops, ChannelParams::from_db(10.0, d.bandwidth_hz), "p");
            sim.grid = grid;
            sim.playout_delay_s = d.playout_delay_s;
            sim.total_slots = 1000;
            sim.warmup_slots = 0;
            sim.seed = 0xC0FFEE08;
            sim.record_trace = true;
            const RunResult rr = run(sim);
            const SimTrace& tr = *rr.trace;
            std::vector<double> a_cum(1001, 0.0), d_cum(1001, 0.0);
            for (std::size_t t = 0; t < 1000; ++t) {
                a_cum[t + 1] = tr.cum_arrival_bits[t];
                d_cum[t + 1] = tr.cum_departure_bits[t];
                causal_ok = causal_ok && d_cum[t + 1] <= a_cum[t + 1] + 1e-6;
                cons_ok = cons_ok && std::fabs(a_cum[t + 1] - d_cum[t + 1] -
                                               tr.total_backlog_bits[t]) <= 1e-3;
            }
            const auto env = minplus_envelope(a_cum, tr.capacity_bits, sim.forwarding);
            for (std::size_t t = 0; t <= 1000; ++t) {
                env_ok = env_ok && d_cum[t] >= env[t] - 1e-3;
                if (hops == 1) eq_ok = eq_ok && std::fabs(d_cum[t] - env[t]) <= 1e-3;
            }
        }
        check(env_ok, "D(0,t) >= min-plus envelope at every t (N=1 and N=3)");
        check(eq_ok, "single-hop fluid server attains the envelope");
        check(causal_ok && cons_ok, "causality and conservation exact on every slot");
    }

    // search equals exhaustive scan argmax on the 3x3x3 grid
    {
        detail::log_line(log, "  optimizer vs exhaustive scan on the 3x3x3 grid ...");
        bool ok = true;
        const VideoParams tmpl(d.layer_payload_bits, d.layer_header_bits, d.fps, 1.0,
                               d.max_layers);
        for (double snr_db : {6.0, 8.0, 10.0}) {
            for (int hops : {1, 3, 5}) {
                for (double eps : {1e-6, 1e-5, 1e-4}) {
                    const PathSpec path(hops, ChannelParams::from_db(snr_db, d.bandwidth_hz), "p");
                    const auto table = scan_layers(tmpl, path, grid, d.playout_delay_s, eps);
                    for (AdaptObjective obj :
                         {AdaptObjective::playout_rate, AdaptObjective::departure_bound}) {
                        int best_l = -1;
                        double best_v = -std::numeric_limits<double>::infinity();
                        for (const LayerScanRow& row : table) {
                            if (row.infeasible) continue;
                            const double v = (obj == AdaptObjective::playout_rate)
                                                 ? row.rate_bound_bps
                                                 : row.d_eps_bits;
                            if (v > best_v) {
                                best_v = v;
                                best_l = row.layers;
                            }
                        }
                        try {
                            const AdaptationDecision dec = optimize_layers(
                                tmpl, path, grid, d.playout_delay_s, eps, obj);
                            ok = ok && dec.layers == best_l;
                        } catch (const AllInfeasibleError&) {
                            ok = ok && best_l < 0;
                        }
                    }
                }
            }
        }
        check(ok, "optimize_layers equals exhaustive scan argmax on the 3x3x3 grid");
    }
    return res;
}

inline std::vector<CriterionResult> run_criteria(const std::vector<int>& ids,
                                                 std::ostream* log = nullptr) {
    std::vector<CriterionResult> out;
    for (int id : ids) {
        detail::log_line(log, "criterion " + std::to_string(id) + " ...");
        switch (id) {
            case 1: out.push_back(criterion_1(log)); break;
            case 2: out.push_back(criterion_2(log)); break;
            case 3: out.push_back(criterion_3(log)); break;
            case 4: out.push_back(criterion_4(log)); break;
            case 5: out.push_back(criterion_5(log)); break;
            case 6: out.push_back(criterion_6(log)); break;
            case 7: out.push_back(criterion_7(log)); break;
            case 8: out.push_back(criterion_8(log)); break;
            default: throw std::invalid_argument("unknown criterion id " + std::to_string(id));
        }
    }
    return out;
}

inline std::vector<int> all_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8}; }

}  // namespace streamcalc::validate
