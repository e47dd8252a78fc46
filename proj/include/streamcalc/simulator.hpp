#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "streamcalc/model.hpp"
#include "streamcalc/optimizer.hpp"

// Slotted Monte-Carlo fluid simulator of N tandem FIFO queues over i.i.d.
// Rayleigh block-fading links with constant-rate layered arrivals and
// deadline-based per-frame accounting.

namespace streamcalc {

// Within-slot ordering across tandem nodes. Under cut_through a node may
// forward traffic it received earlier in the same slot, which is exactly the
// service concatenation the analytic bounds assume (D >= A (x) S_net holds
// pathwise). Under store_and_forward traffic advances at most one hop per
// slot; that system is served by a strictly weaker envelope (each stage
// shifted by one slot), so the closed-form bound is not guaranteed to
// dominate it.
enum class Forwarding {
    cut_through,
    store_and_forward,
};

inline const char* to_string(Forwarding f) {
    return f == Forwarding::cut_through ? "cut_through" : "store_and_forward";
}

struct QueueState {
    std::vector<double> backlog_bits;     // per node
    double cum_arrival_bits = 0.0;        // A(0,t)
    double cum_departure_bits = 0.0;      // D(0,t) at node N

    explicit QueueState(std::size_t nodes = 1) : backlog_bits(nodes, 0.0) {}
    double total_backlog_bits() const {
        double s = 0.0;
        for (double b : backlog_bits) s += b;
        return s;
    }
};

// One slot of the tandem: node 1 receives the exogenous arrivals, every node
// forwards min(available, capacity). Downstream nodes are served on
// pre-update backlogs in store_and_forward mode.
inline void step(QueueState& state, const std::vector<double>& capacities_bits,
                 double arrival_bits, Forwarding forwarding) {
    const std::size_t n = state.backlog_bits.size();
    if (capacities_bits.size() != n)
        throw std::invalid_argument("step: capacity vector size mismatch");
    state.cum_arrival_bits += arrival_bits;
    if (forwarding == Forwarding::cut_through) {
        double carry = arrival_bits;
        for (std::size_t k = 0; k < n; ++k) {
            double& b = state.backlog_bits[k];
            b += carry;
            const double out = std::min(b, capacities_bits[k]);
            b -= out;
            carry = out;
        }
        state.cum_departure_bits += carry;
    } else {
        state.backlog_bits[0] += arrival_bits;
        for (std::size_t k = n; k-- > 0;) {
            double& b = state.backlog_bits[k];
            const double out = std::min(b, capacities_bits[k]);
            b -= out;
            if (k + 1 < n) {
                state.backlog_bits[k + 1] += out;
            } else {
                state.cum_departure_bits += out;
            }
        }
    }
}

namespace sim_detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace sim_detail

// Per-link random stream: (seed, link index) fully determines the draws, so
// links are i.i.d. and runs are reproducible bit for bit.
class LinkRng {
public:
    LinkRng(std::uint64_t seed, std::uint64_t link)
        : engine_(sim_detail::splitmix64(seed + 0x9E3779B97F4A7C15ULL * (link + 1))) {}

    // uniform in (0, 1]
    double next_uniform01() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

// gamma = -gbar ln(U), the inverse transform of the exponential SNR law.
inline double snr_from_uniform(double avg_snr_linear, double u) {
    return -avg_snr_linear * std::log(u);
}

inline double capacity_bits_from_snr(const ChannelParams& channel, const SlotGrid& grid,
                                     double snr) {
    return channel.bandwidth_hz * grid.slot_seconds * std::log1p(snr) / kLn2;
}

inline double sample_slot_capacity(const ChannelParams& channel, const SlotGrid& grid,
                                   LinkRng& rng) {
    return capacity_bits_from_snr(channel, grid,
                                  snr_from_uniform(channel.avg_snr_linear, rng.next_uniform01()));
}

struct SimConfig {
    VideoParams video;
    PathSpec path;
    SlotGrid grid;
    double playout_delay_s = 0.0;
    std::int64_t total_slots = 0;
    std::uint64_t seed = 1;
    std::int64_t warmup_slots = 0;
    std::vector<double> d_grid_bits;
    Forwarding forwarding = Forwarding::cut_through;
    bool burst_arrivals = false;      // inject the whole frame at its generation slot
    bool debug_accounting = false;    // cross-check both per-frame accounting routes
    bool record_trace = false;
    std::int64_t trace_max_slots = 10'000;
    std::optional<double> fixed_capacity_bits_per_slot;  // deterministic override (tests)

    void validate() const {
        video.validate();
        if (!(playout_delay_s >= 0.0)) throw std::invalid_argument("SimConfig: negative playout delay");
        if (total_slots <= 0) throw std::invalid_argument("SimConfig: total_slots must be > 0");
        if (warmup_slots < 0 || warmup_slots >= total_slots)
            throw std::invalid_argument("SimConfig: warmup must lie in [0, total_slots)");
        if (grid.to_slots(video.frame_period_s()) < 1)
            throw std::invalid_argument("SimConfig: frame period shorter than one slot");
        if (record_trace && total_slots > trace_max_slots)
            throw std::invalid_argument("SimConfig: trace recording capped at trace_max_slots");
    }
};

struct FrameStats {
    std::int64_t frame_index = 0;
    std::int64_t generation_slot = 0;
    double delivered_bits = 0.0;  // D^i, clipped to [0, frame size]
    int complete_layers = 0;
    double decodable_payload_bits = 0.0;
};

struct SimTrace {
    std::vector<double> arrival_bits;              // per slot
    std::vector<std::vector<double>> capacity_bits;  // [node][slot]
    std::vector<double> cum_departure_bits;        // D(0, t+1) after slot t
    std::vector<double> cum_arrival_bits;          // A(0, t+1)
    std::vector<double> total_backlog_bits;        // after slot t
};

struct RunSummary {
    std::int64_t total_slots = 0;
    std::int64_t frames_generated = 0;
    std::int64_t counted_frames = 0;
    double frame_bits = 0.0;
    double mean_delivered_bits = 0.0;
    double max_accounting_gap_bits = 0.0;  // debug mode: cumulative vs backlog route
};

struct RunResult {
    std::vector<FrameStats> frames;  // warmup and truncated frames excluded
    RunSummary summary;
    std::optional<SimTrace> trace;
};

inline RunResult run(const SimConfig& config) {
    config.validate();
    const std::int64_t tf_slots = config.grid.to_slots(config.video.frame_period_s());
    const std::int64_t td_slots = config.grid.to_slots(config.playout_delay_s);
    const double frame_bits = config.video.frame_bits();
    const double layer_bits = config.video.layer_bits();
    const double a_slot = config.burst_arrivals ? 0.0 : frame_bits / static_cast<double>(tf_slots);
    const std::size_t nodes = static_cast<std::size_t>(config.path.hops);

    std::vector<LinkRng> rngs;
    rngs.reserve(nodes);
    for (std::size_t k = 0; k < nodes; ++k) rngs.emplace_back(config.seed, k);

    QueueState state(nodes);
    std::vector<double> caps(nodes, 0.0);

    struct Pending {
        std::int64_t index;
        std::int64_t gen_slot;
        std::int64_t deadline_slot;  // exclusive slot boundary
        double start_bits;
        double gen_cum_arrival;
    };
    std::deque<Pending> pending;

    RunResult result;
    result.summary.total_slots = config.total_slots;
    result.summary.frame_bits = frame_bits;
    if (config.record_trace) {
        SimTrace tr;
        tr.capacity_bits.assign(nodes, {});
        result.trace = std::move(tr);
    }

    double delivered_sum = 0.0;
    for (std::int64_t t = 0; t < config.total_slots; ++t) {
        if (t % tf_slots == 0) {
            const std::int64_t i = t / tf_slots;
            pending.push_back({i, t, t + td_slots, static_cast<double>(i) * frame_bits,
                               state.cum_arrival_bits});
            ++result.summary.frames_generated;
        }
        const double arrival =
            config.burst_arrivals ? ((t % tf_slots == 0) ? frame_bits : 0.0) : a_slot;
        for (std::size_t k = 0; k < nodes; ++k) {
            caps[k] = config.fixed_capacity_bits_per_slot
                          ? *config.fixed_capacity_bits_per_slot
                          : sample_slot_capacity(config.path.channel, config.grid, rngs[k]);
        }
        step(state, caps, arrival, config.forwarding);

        if (result.trace) {
            result.trace->arrival_bits.push_back(arrival);
            for (std::size_t k = 0; k < nodes; ++k)
                result.trace->capacity_bits[k].push_back(caps[k]);
            result.trace->cum_departure_bits.push_back(state.cum_departure_bits);
            result.trace->cum_arrival_bits.push_back(state.cum_arrival_bits);
            result.trace->total_backlog_bits.push_back(state.total_backlog_bits());
        }

        while (!pending.empty() && pending.front().deadline_slot == t + 1) {
            const Pending fr = pending.front();
            pending.pop_front();
            const double delivered = std::clamp(state.cum_departure_bits - fr.start_bits, 0.0,
                                                frame_bits);
            if (config.debug_accounting) {
                // same quantity through the backlog identity
                const double via_backlog =
                    std::clamp(state.cum_departure_bits - fr.gen_cum_arrival, 0.0, frame_bits);
                result.summary.max_accounting_gap_bits =
                    std::max(result.summary.max_accounting_gap_bits,
                             std::fabs(delivered - via_backlog));
            }
            if (fr.gen_slot >= config.warmup_slots) {
                FrameStats fs;
                fs.frame_index = fr.index;
                fs.generation_slot = fr.gen_slot;
                fs.delivered_bits = delivered;
                fs.complete_layers = static_cast<int>(std::floor(delivered / layer_bits + 1e-9));
                fs.decodable_payload_bits = fs.complete_layers * config.video.layer_payload_bits;
                result.frames.push_back(fs);
                delivered_sum += delivered;
            }
        }
    }
    result.summary.counted_frames = static_cast<std::int64_t>(result.frames.size());
    if (!result.frames.empty()) {
        result.summary.mean_delivered_bits = delivered_sum / result.frames.size();
    }
    return result;
}

struct ViolationRow {
    double d_bits = 0.0;
    double probability = 0.0;  // empirical P(D^i <= d)
    double stderr_ = 0.0;      // binomial standard error
    std::int64_t violations = 0;
    bool low_confidence = false;  // fewer than 100 violation events
};

inline std::vector<ViolationRow> empirical_violation(const std::vector<FrameStats>& frames,
                                                     const std::vector<double>& d_grid_bits) {
    if (frames.empty()) throw std::invalid_argument("empirical_violation: no counted frames");
    std::vector<double> delivered;
    delivered.reserve(frames.size());
    for (const FrameStats& f : frames) delivered.push_back(f.delivered_bits);
    std::sort(delivered.begin(), delivered.end());
    const double n = static_cast<double>(delivered.size());

    std::vector<ViolationRow> rows;
    rows.reserve(d_grid_bits.size());
    for (double d : d_grid_bits) {
        ViolationRow row;
        row.d_bits = d;
        const auto it = std::upper_bound(delivered.begin(), delivered.end(), d);
        row.violations = static_cast<std::int64_t>(it - delivered.begin());
        row.probability = static_cast<double>(row.violations) / n;
        row.stderr_ = std::sqrt(std::max(row.probability * (1.0 - row.probability), 0.0) / n);
        row.low_confidence = row.violations < 100;
        rows.push_back(row);
    }
    return rows;
}

// Brute-force (min,+) lower envelope of the departures:
//   E_N(0,t) = A (x) S_1 (x) ... (x) S_N (0,t),
// with every stage after the first shifted by one slot in store_and_forward
// mode (a node there cannot serve traffic forwarded in the same slot).
// O(N T^2); traces are capped at 10^4 slots.
inline std::vector<double> minplus_envelope(const std::vector<double>& arrival_cum,
                                            const std::vector<std::vector<double>>& capacity_bits,
                                            Forwarding forwarding) {
    const std::size_t t_len = arrival_cum.size();
    if (t_len == 0 || t_len - 1 > 10'000)
        throw std::invalid_argument("minplus_envelope: trace length must lie in [1, 10^4] slots");
    std::vector<double> env = arrival_cum;  // E_0(0,t) = A(0,t)
    for (std::size_t node = 0; node < capacity_bits.size(); ++node) {
        const auto& caps = capacity_bits[node];
        if (caps.size() + 1 != t_len)
            throw std::invalid_argument("minplus_envelope: capacity trace size mismatch");
        std::vector<double> service_cum(t_len, 0.0);
        for (std::size_t u = 1; u < t_len; ++u) service_cum[u] = service_cum[u - 1] + caps[u - 1];
        const bool shifted = forwarding == Forwarding::store_and_forward && node > 0;
        std::vector<double> next(t_len, 0.0);
        for (std::size_t t = 0; t < t_len; ++t) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u <= t; ++u) {
                const double in_cum = shifted ? (u >= 1 ? env[u - 1] : 0.0) : env[u];
                best = std::min(best, in_cum + (service_cum[t] - service_cum[u]));
            }
            next[t] = best;
        }
        env = std::move(next);
    }
    return env;
}

// ---------------------------------------------------------------------------
// Scenario replay with per-epoch decisions.

struct PhaseReport {
    std::size_t epoch_index = 0;
    double start_s = 0.0;
    std::int64_t start_slot = 0;
    std::int64_t end_slot = 0;
    std::string path_id;
    int layers = 0;
    double frame_bits = 0.0;
    double target_d_bits = 0.0;  // the decision's predicted d^eps
    std::int64_t counted_frames = 0;
    std::int64_t violations = 0;  // delivered < target (full-delivery success at the cap)
    double p_hat = 0.0;
    double stderr_ = 0.0;
    bool low_confidence = true;
    bool path_switched = false;
    double dropped_backlog_bits = 0.0;
    std::vector<FrameStats> frames;  // filled when keep_frames is requested
};

// Replays run() with the decision sequence applied. Frame size and path
// change at epoch boundaries (snapped down to frame-generation boundaries);
// in-flight backlog carries over on the same path and is dropped on a path
// switch, after which the accounting stream restarts cleanly. Frames are
// attributed to the phase that generated them; frames generated within
// warmup_slots of a stream restart are not counted.
inline std::vector<PhaseReport> simulate_adaptation(const std::vector<PathSpec>& base_paths,
                                                    const std::vector<AdaptationEpoch>& epochs,
                                                    const std::vector<AdaptationDecision>& decisions,
                                                    const VideoParams& video_template,
                                                    const SimConfig& base_config,
                                                    bool keep_frames = false) {
    const SlotGrid grid = base_config.grid;
    const std::int64_t tf_slots = grid.to_slots(video_template.frame_period_s());
    const std::int64_t td_slots = grid.to_slots(base_config.playout_delay_s);
    if (tf_slots < 1) throw std::invalid_argument("simulate_adaptation: frame period shorter than one slot");

    std::vector<AdaptationEpoch> sched = epochs;
    if (sched.empty()) {
        AdaptationEpoch all;
        all.start_s = 0.0;
        for (const PathSpec& p : base_paths) all.available_path_ids.push_back(p.path_id);
        sched.push_back(all);
    }
    if (decisions.size() != sched.size())
        throw std::invalid_argument("simulate_adaptation: one decision per epoch required");

    // resolve the chosen path (with the SNR in force) per epoch
    std::map<std::string, PathSpec> path_state;
    for (const PathSpec& p : base_paths) path_state.emplace(p.path_id, p);
    struct Phase {
        std::int64_t start_slot;
        PathSpec path;
        double frame_bits;
        int layers;
        double target_d_bits;
        double start_s;
    };
    std::vector<Phase> phases;
    phases.reserve(sched.size());
    for (std::size_t e = 0; e < sched.size(); ++e) {
        for (const auto& [id, snr_db] : sched[e].snr_updates_db) {
            auto it = path_state.find(id);
            if (it == path_state.end())
                throw std::invalid_argument("simulate_adaptation: unknown path '" + id + "'");
            it->second.channel = ChannelParams::from_db(snr_db, it->second.channel.bandwidth_hz);
        }
        const auto chosen = path_state.find(decisions[e].chosen_path);
        if (chosen == path_state.end())
            throw std::invalid_argument("simulate_adaptation: decision names unknown path '" +
                                        decisions[e].chosen_path + "'");
        Phase ph;
        ph.start_slot = (grid.to_slots(sched[e].start_s) / tf_slots) * tf_slots;
        ph.path = chosen->second;
        ph.layers = decisions[e].layers;
        ph.frame_bits = video_template.layer_bits() * decisions[e].layers;
        ph.target_d_bits = decisions[e].predicted_d_eps_bits;
        ph.start_s = sched[e].start_s;
        phases.push_back(ph);
    }
    for (std::size_t p = 1; p < phases.size(); ++p) {
        if (phases[p].start_slot <= phases[p - 1].start_slot)
            throw std::invalid_argument("simulate_adaptation: epochs collapse onto the same frame boundary");
    }

    std::vector<PhaseReport> reports(phases.size());
    const std::size_t max_nodes = [&] {
        std::size_t m = 1;
        for (const Phase& ph : phases) m = std::max(m, static_cast<std::size_t>(ph.path.hops));
        return m;
    }();

    QueueState state(static_cast<std::size_t>(phases.front().path.hops));
    std::vector<LinkRng> rngs;
    rngs.reserve(max_nodes);
    for (std::size_t k = 0; k < max_nodes; ++k) rngs.emplace_back(base_config.seed, k);

    struct Pending {
        std::size_t phase;
        std::int64_t index;
        double start_bits;
        std::int64_t gen_slot;
        std::int64_t deadline_slot;
        double frame_bits;
    };
    std::deque<Pending> pending;

    std::size_t cur = 0;
    std::int64_t last_reset_slot = 0;
    std::int64_t frame_counter = 0;
    double next_frame_start_bits = 0.0;
    double a_slot = phases[0].frame_bits / static_cast<double>(tf_slots);
    std::vector<double> caps(static_cast<std::size_t>(phases.front().path.hops), 0.0);
    std::vector<std::vector<double>> phase_delivered(phases.size());

    for (std::int64_t t = 0; t < base_config.total_slots; ++t) {
        if (cur + 1 < phases.size() && t == phases[cur + 1].start_slot) {
            const bool switched = phases[cur + 1].path.path_id != phases[cur].path.path_id;
            ++cur;
            a_slot = phases[cur].frame_bits / static_cast<double>(tf_slots);
            if (switched) {
                reports[cur].path_switched = true;
                reports[cur].dropped_backlog_bits = state.total_backlog_bits();
                state = QueueState(static_cast<std::size_t>(phases[cur].path.hops));
                caps.assign(static_cast<std::size_t>(phases[cur].path.hops), 0.0);
                pending.clear();
                next_frame_start_bits = 0.0;
                last_reset_slot = t;
            } else if (phases[cur].path.hops != phases[cur - 1].path.hops) {
                throw std::invalid_argument(
                    "simulate_adaptation: hop count changed without a path switch");
            }
        }
        if (t % tf_slots == 0) {
            pending.push_back(
                {cur, frame_counter++, next_frame_start_bits, t, t + td_slots, phases[cur].frame_bits});
            next_frame_start_bits += phases[cur].frame_bits;
        }
        for (std::size_t k = 0; k < caps.size(); ++k) {
            caps[k] = sample_slot_capacity(phases[cur].path.channel, grid, rngs[k]);
        }
        step(state, caps, a_slot, base_config.forwarding);

        while (!pending.empty() && pending.front().deadline_slot == t + 1) {
            const Pending fr = pending.front();
            pending.pop_front();
            if (fr.gen_slot < last_reset_slot + base_config.warmup_slots) continue;
            const double delivered =
                std::clamp(state.cum_departure_bits - fr.start_bits, 0.0, fr.frame_bits);
            phase_delivered[fr.phase].push_back(delivered);
            if (keep_frames) {
                FrameStats fs;
                fs.frame_index = fr.index;
                fs.generation_slot = fr.gen_slot;
                fs.delivered_bits = delivered;
                fs.complete_layers = static_cast<int>(
                    std::floor(delivered / video_template.layer_bits() + 1e-9));
                fs.decodable_payload_bits =
                    fs.complete_layers * video_template.layer_payload_bits;
                reports[fr.phase].frames.push_back(fs);
            }
        }
    }

    for (std::size_t p = 0; p < phases.size(); ++p) {
        PhaseReport& rep = reports[p];
        rep.epoch_index = p;
        rep.start_s = phases[p].start_s;
        rep.start_slot = phases[p].start_slot;
        rep.end_slot =
            (p + 1 < phases.size()) ? phases[p + 1].start_slot : base_config.total_slots;
        rep.path_id = phases[p].path.path_id;
        rep.layers = phases[p].layers;
        rep.frame_bits = phases[p].frame_bits;
        rep.target_d_bits = phases[p].target_d_bits;
        const auto& del = phase_delivered[p];
        rep.counted_frames = static_cast<std::int64_t>(del.size());
        if (!del.empty()) {
            std::int64_t viol = 0;
            for (double d : del) {
                if (d < rep.target_d_bits - 1e-9) ++viol;
            }
            rep.violations = viol;
            rep.p_hat = static_cast<double>(viol) / static_cast<double>(del.size());
            rep.stderr_ = std::sqrt(std::max(rep.p_hat * (1.0 - rep.p_hat), 0.0) /
                                    static_cast<double>(del.size()));
            rep.low_confidence = viol < 100;
        }
    }
    return reports;
}

}  // namespace streamcalc
