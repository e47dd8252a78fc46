#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamcalc/bounds.hpp"

// Model-based rate adaptation: optimal integer layer count per path, path
// selection across routing alternatives, and an epoch-driven controller that
// replays time-varying SNR / routing-update scenarios.

namespace streamcalc {

enum class AdaptObjective {
    playout_rate,     // maximize floor(d^eps / (m+h)) * m / T_f
    departure_bound,  // maximize d^eps itself
};

struct AdaptationDecision {
    std::string chosen_path;
    int layers = 0;                        // L*
    double transmitted_frame_bits = 0.0;   // (m+h) L*
    double predicted_d_eps_bits = 0.0;
    double predicted_rate_bound_bps = 0.0;
    double theta_star = 0.0;
    bool infeasible_fallback = false;  // set when every candidate was infeasible
    double epoch_start_s = 0.0;
};

// One row of the exhaustive layer sweep.
struct LayerScanRow {
    int layers = 0;
    double frame_bits = 0.0;
    double d_eps_bits = 0.0;
    double rate_bound_bps = 0.0;
    double theta_star = 0.0;
    bool stable = false;
    bool infeasible = false;
    bool capped = false;
};

// Scenario epoch: channel updates keyed by path id take effect at start_s
// and persist; the availability list names the paths the controller may use
// from this epoch on.
struct AdaptationEpoch {
    double start_s = 0.0;
    std::map<std::string, double> snr_updates_db;
    std::vector<std::string> available_path_ids;
};

namespace adapt_detail {

struct Candidate {
    bool feasible = false;
    double d_eps_bits = 0.0;
    double rate_bps = 0.0;
    double theta_star = 0.0;
};

inline Candidate evaluate_layers(const VideoParams& tmpl, const PathSpec& path,
                                 const SlotGrid& grid, double playout_delay_s, double epsilon,
                                 int layers) {
    Candidate c;
    try {
        const VideoParams v = tmpl.with_layers(static_cast<double>(layers));
        const BoundResult r = invert_d_epsilon(v, path, grid, playout_delay_s, epsilon);
        if (r.infeasible) return c;
        c.feasible = true;
        c.d_eps_bits = r.value;
        c.rate_bps = playout_rate_bound(v, r.value);
        c.theta_star = r.theta_star;
    } catch (const UnstableSystemError&) {
        // infeasible candidate, not an error at this level
    }
    return c;
}

}  // namespace adapt_detail

inline std::vector<LayerScanRow> scan_layers(const VideoParams& video_template,
                                             const PathSpec& path, const SlotGrid& grid,
                                             double playout_delay_s, double epsilon) {
    if (video_template.max_layers > 1024)
        throw std::invalid_argument("scan_layers: max_layers must be <= 1024");
    std::vector<LayerScanRow> table;
    table.reserve(static_cast<std::size_t>(video_template.max_layers));
    for (int layers = 1; layers <= video_template.max_layers; ++layers) {
        LayerScanRow row;
        row.layers = layers;
        row.frame_bits = video_template.layer_bits() * layers;
        try {
            const VideoParams v = video_template.with_layers(static_cast<double>(layers));
            const BoundResult r = invert_d_epsilon(v, path, grid, playout_delay_s, epsilon);
            row.stable = true;
            row.infeasible = r.infeasible;
            row.capped = r.capped_at_frame_size;
            row.d_eps_bits = r.value;
            row.theta_star = r.theta_star;
            row.rate_bound_bps = r.infeasible ? 0.0 : playout_rate_bound(v, r.value);
        } catch (const UnstableSystemError&) {
            row.stable = false;
            row.infeasible = true;
        }
        table.push_back(row);
    }
    return table;
}

// Optimal integer layer count on one path. d^eps(L) is unimodal in L (the
// floored rate objective is a monotone transform of it with plateaus), so
// the search is an integer ternary search on d^eps, a walk to the leftmost
// plateau member for the floored objective, and a +-2 exhaustive guard.
// Ties break toward smaller L.
inline AdaptationDecision optimize_layers(const VideoParams& video_template, const PathSpec& path,
                                          const SlotGrid& grid, double playout_delay_s,
                                          double epsilon,
                                          AdaptObjective objective = AdaptObjective::playout_rate) {
    using adapt_detail::Candidate;
    const int l_max = video_template.max_layers;
    std::vector<std::optional<Candidate>> cache(static_cast<std::size_t>(l_max) + 1);
    auto eval = [&](int layers) -> const Candidate& {
        auto& slot = cache[static_cast<std::size_t>(layers)];
        if (!slot) {
            slot = adapt_detail::evaluate_layers(video_template, path, grid, playout_delay_s,
                                                 epsilon, layers);
        }
        return *slot;
    };
    auto smooth = [&](int layers) {
        const Candidate& c = eval(layers);
        return c.feasible ? c.d_eps_bits : -std::numeric_limits<double>::infinity();
    };

    int lo = 1;
    int hi = l_max;
    while (hi - lo > 2) {
        const int m1 = lo + (hi - lo) / 3;
        const int m2 = hi - (hi - lo) / 3;
        const double f1 = smooth(m1);
        const double f2 = smooth(m2);
        if (f1 < f2) {
            lo = m1 + 1;
        } else if (f1 > f2) {
            hi = m2 - 1;
        } else if (f1 == -std::numeric_limits<double>::infinity()) {
            hi = m2 - 1;  // infeasible candidates form a suffix in L
        } else {
            lo = m1 + 1;
            hi = m2 - 1;
        }
    }
    int peak = lo;
    for (int l = lo + 1; l <= hi; ++l) {
        if (smooth(l) > smooth(peak)) peak = l;
    }

    if (objective == AdaptObjective::playout_rate && eval(peak).feasible) {
        // walk to the leftmost layer count achieving the same floored rate
        const double best_rate = eval(peak).rate_bps;
        while (peak > 1 && eval(peak - 1).feasible && eval(peak - 1).rate_bps >= best_rate) {
            --peak;
        }
    }

    // +-2 neighborhood guard (plateaus and flooring ties)
    int best = -1;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int l = std::max(1, peak - 2); l <= std::min(l_max, peak + 2); ++l) {
        const Candidate& c = eval(l);
        if (!c.feasible) continue;
        const double val = (objective == AdaptObjective::playout_rate) ? c.rate_bps : c.d_eps_bits;
        if (val > best_val) {
            best_val = val;
            best = l;
        }
    }
    if (best < 0) {
        throw AllInfeasibleError("optimize_layers: every layer count is unstable or infeasible on path '" +
                                 path.path_id + "'");
    }

    const Candidate& c = eval(best);
    AdaptationDecision d;
    d.chosen_path = path.path_id;
    d.layers = best;
    d.transmitted_frame_bits = video_template.layer_bits() * best;
    d.predicted_d_eps_bits = c.d_eps_bits;
    d.predicted_rate_bound_bps = c.rate_bps;
    d.theta_star = c.theta_star;
    return d;
}

// Best (path, layer count) pair across the routing alternatives. Ties break
// toward fewer hops, then lexicographic path id.
inline AdaptationDecision select_path(const VideoParams& video_template,
                                      const std::vector<PathSpec>& paths, const SlotGrid& grid,
                                      double playout_delay_s, double epsilon,
                                      AdaptObjective objective = AdaptObjective::playout_rate) {
    if (paths.empty()) throw std::invalid_argument("select_path: need at least one path");
    std::optional<AdaptationDecision> best;
    int best_hops = 0;
    for (const PathSpec& path : paths) {
        AdaptationDecision d;
        try {
            d = optimize_layers(video_template, path, grid, playout_delay_s, epsilon, objective);
        } catch (const AllInfeasibleError&) {
            continue;
        }
        const double val = (objective == AdaptObjective::playout_rate)
                               ? d.predicted_rate_bound_bps
                               : d.predicted_d_eps_bits;
        const double best_val = !best ? 0.0
                                : (objective == AdaptObjective::playout_rate)
                                    ? best->predicted_rate_bound_bps
                                    : best->predicted_d_eps_bits;
        const bool better =
            !best || val > best_val ||
            (val == best_val && (path.hops < best_hops ||
                                 (path.hops == best_hops && d.chosen_path < best->chosen_path)));
        if (better) {
            best = d;
            best_hops = path.hops;
        }
    }
    if (!best) throw AllInfeasibleError("select_path: no path admits a feasible layer count");
    return *best;
}

// Epoch-driven replay: at each epoch boundary the controller re-selects the
// path and layer count with the updated SNR values; decisions hold between
// epochs. An all-infeasible epoch falls back to one base layer on the first
// available path and is flagged rather than raised.
inline std::vector<AdaptationDecision> run_adaptation(const std::vector<PathSpec>& base_paths,
                                                      const std::vector<AdaptationEpoch>& epochs,
                                                      const VideoParams& video_template,
                                                      const SlotGrid& grid,
                                                      double playout_delay_s, double epsilon,
                                                      AdaptObjective objective =
                                                          AdaptObjective::playout_rate) {
    std::map<std::string, PathSpec> state;
    for (const PathSpec& p : base_paths) {
        if (!state.emplace(p.path_id, p).second)
            throw std::invalid_argument("run_adaptation: duplicate path id '" + p.path_id + "'");
    }
    std::vector<AdaptationEpoch> sched = epochs;
    if (sched.empty()) {
        AdaptationEpoch all;
        all.start_s = 0.0;
        for (const PathSpec& p : base_paths) all.available_path_ids.push_back(p.path_id);
        sched.push_back(all);
    }
    std::vector<AdaptationDecision> series;
    series.reserve(sched.size());
    double prev_start = -std::numeric_limits<double>::infinity();
    for (const AdaptationEpoch& ep : sched) {
        if (!(ep.start_s > prev_start))
            throw std::invalid_argument("run_adaptation: epoch start times must be strictly increasing");
        prev_start = ep.start_s;
        for (const auto& [id, snr_db] : ep.snr_updates_db) {
            auto it = state.find(id);
            if (it == state.end())
                throw std::invalid_argument("run_adaptation: SNR update for unknown path '" + id + "'");
            it->second.channel = ChannelParams::from_db(snr_db, it->second.channel.bandwidth_hz);
        }
        if (ep.available_path_ids.empty())
            throw std::invalid_argument("run_adaptation: an epoch must list at least one available path");
        std::vector<PathSpec> avail;
        avail.reserve(ep.available_path_ids.size());
        for (const std::string& id : ep.available_path_ids) {
            auto it = state.find(id);
            if (it == state.end())
                throw std::invalid_argument("run_adaptation: unknown path '" + id + "' in epoch");
            avail.push_back(it->second);
        }
        AdaptationDecision d;
        try {
            d = select_path(video_template, avail, grid, playout_delay_s, epsilon, objective);
        } catch (const AllInfeasibleError&) {
            std::string fallback = avail.front().path_id;
            for (const PathSpec& p : avail) fallback = std::min(fallback, p.path_id);
            d.chosen_path = fallback;
            d.layers = 1;
            d.transmitted_frame_bits = video_template.layer_bits();
            d.infeasible_fallback = true;
        }
        d.epoch_start_s = ep.start_s;
        series.push_back(d);
    }
    return series;
}

}  // namespace streamcalc
