// streamcalc: stochastic network-calculus quality bounds, model-based rate
// adaptation and Monte-Carlo validation for deadline-constrained layered
// streaming over multi-hop fading paths.
//
// Subcommands: bound, sweep, simulate, adapt, validate.
// Data goes to stdout (CSV by default, JSON with --out json); logs and
// errors go to stderr. Exit codes: 0 ok, 2 validation failure, 3 unstable
// system without --allow-unstable, 4 dominance violation, 5 failed
// acceptance criteria.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamcalc/bounds.hpp"
#include "streamcalc/optimizer.hpp"
#include "streamcalc/scenario.hpp"
#include "streamcalc/simulator.hpp"
#include "streamcalc/table.hpp"
#include "streamcalc/validate.hpp"

namespace {

using namespace streamcalc;

constexpr int kExitValidation = 2;
constexpr int kExitUnstable = 3;
constexpr int kExitDominance = 4;
constexpr int kExitCriteria = 5;

struct CommonParams {
    // video
    double layer_kbits = 100.0;
    double header_bits = 0.0;
    double fps = 2.5;
    double layers = 0.0;       // 0 = derive from frame_mbits
    double frame_mbits = 0.0;  // 0 = derive from layers
    int max_layers = 24;
    // grid / deadline / channel
    double slot_ms = 10.0;
    double playout_delay_ms = 450.0;
    int hops = 3;
    double snr_db = 10.0;
    double bandwidth_mhz = 2.2;
    // query
    double epsilon = 0.0;
    double target_mbits = -1.0;
    // io
    std::string out_format = "csv";
    std::string scenario_path;
    std::string preset;
    bool allow_unstable = false;
    std::uint64_t seed = 1;
    bool seed_set = false;

    std::optional<ScenarioFile> scenario;
};

void add_common_flags(CLI::App* cmd, CommonParams& p, bool with_query = true) {
    cmd->add_option("--scenario", p.scenario_path, "scenario file (JSON)");
    cmd->add_option("--preset", p.preset, "named parameter preset (paper-vi)");
    cmd->add_option("--layer-kbits", p.layer_kbits, "layer payload, kbit");
    cmd->add_option("--header-bits", p.header_bits, "layer header, bit");
    cmd->add_option("--fps", p.fps, "frame rate, 1/s");
    cmd->add_option("--layers", p.layers, "transmitted layers");
    cmd->add_option("--frame-mbits", p.frame_mbits, "frame size, Mbit (alternative to --layers)");
    cmd->add_option("--max-layers", p.max_layers, "encoder layer budget");
    cmd->add_option("--slot-ms", p.slot_ms, "slot duration, ms");
    cmd->add_option("--deadline-ms", p.playout_delay_ms, "playout deadline, ms");
    cmd->add_option("--hops", p.hops, "path length N");
    cmd->add_option("--snr-db", p.snr_db, "average per-hop SNR, dB");
    cmd->add_option("--bandwidth-mhz", p.bandwidth_mhz, "channel bandwidth, MHz");
    if (with_query) {
        cmd->add_option("--eps", p.epsilon, "reliability target in (0,1)");
        cmd->add_option("--d-mbits", p.target_mbits, "departure target, Mbit");
    }
    cmd->add_option("--out", p.out_format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", p.seed, "random seed");
    cmd->add_flag("--allow-unstable", p.allow_unstable, "report unstable results instead of exiting");
}

void apply_preset(CommonParams& p) {
    if (p.preset.empty()) return;
    if (p.preset != "paper-vi") throw CLI::ValidationError("unknown preset '" + p.preset + "'");
    p.layer_kbits = 100.0;
    p.header_bits = 0.0;
    p.fps = 2.5;
    p.slot_ms = 10.0;
    p.playout_delay_ms = 450.0;
    p.bandwidth_mhz = 2.2;
}

void load_scenario(CommonParams& p) {
    if (p.scenario_path.empty()) return;
    std::ifstream in(p.scenario_path);
    if (!in) throw std::invalid_argument("cannot open scenario file '" + p.scenario_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    p.scenario = parse_scenario(buf.str());
}

VideoParams make_video(const CommonParams& p) {
    if (p.scenario) {
        VideoParams v = p.scenario->video;
        if (p.frame_mbits > 0.0) v = v.with_layers(p.frame_mbits * 1e6 / v.layer_bits());
        if (p.layers > 0.0) v = v.with_layers(p.layers);
        return v;
    }
    const double layer_bits = p.layer_kbits * 1e3 + p.header_bits;
    double layers = p.layers;
    if (p.frame_mbits > 0.0) layers = p.frame_mbits * 1e6 / layer_bits;
    if (layers <= 0.0) throw std::invalid_argument("need --layers or --frame-mbits");
    return VideoParams(p.layer_kbits * 1e3, p.header_bits, p.fps, layers, p.max_layers);
}

SlotGrid make_grid(const CommonParams& p) {
    return p.scenario ? p.scenario->grid : SlotGrid(p.slot_ms / 1e3);
}

PathSpec make_path(const CommonParams& p) {
    if (p.scenario) return p.scenario->paths.front();
    return PathSpec(p.hops, ChannelParams::from_db(p.snr_db, p.bandwidth_mhz * 1e6), "cli");
}

double deadline_s(const CommonParams& p) {
    return p.scenario ? p.scenario->playout_delay_s : p.playout_delay_ms / 1e3;
}

void echo_scenario(Table& table, const CommonParams& p) {
    if (p.scenario) table.add_meta("scenario", p.scenario->canonical_json);
}

// ---------------------------------------------------------------------------

int cmd_bound(CommonParams& p) {
    const VideoParams video = make_video(p);
    const SlotGrid grid = make_grid(p);
    const PathSpec path = make_path(p);
    const double td = deadline_s(p);

    double eps = p.epsilon;
    double d_target = p.target_mbits >= 0.0 ? p.target_mbits * 1e6 : -1.0;
    if (p.scenario && eps == 0.0 && p.scenario->epsilon) eps = *p.scenario->epsilon;
    if (p.scenario && d_target < 0.0 && p.scenario->target_departure_bits)
        d_target = *p.scenario->target_departure_bits;
    const bool eps_mode = eps > 0.0;
    const bool d_mode = d_target >= 0.0;
    if (eps_mode == d_mode)
        throw std::invalid_argument("bound: exactly one of --eps / --d-mbits required");

    BoundQuery query{video, path, grid, td, {}, {}};
    if (eps_mode) {
        query.epsilon = eps;
    } else {
        query.target_departure_bits = d_target;
    }
    query.validate();

    const StabilityResult stab = stability_check(video, path, grid);
    const double util = video.rate_bps() / avg_capacity_bps(path.channel);

    Table table({"mode", "value", "theta_star", "stable", "capped", "infeasible",
                 "utilization", "avg_capacity_mbps", "frame_bits", "rate_bound_mbps"});
    echo_scenario(table, p);
    if (!stab.stable && !p.allow_unstable) {
        std::cerr << "unstable system (utilization " << util
                  << " >= 1); rerun with --allow-unstable to emit the trivial result\n";
        return kExitUnstable;
    }
    BoundResult res;
    double rate_bound = 0.0;
    std::string mode;
    if (eps_mode) {
        mode = "d_eps_bits";
        if (stab.stable) {
            res = invert_d_epsilon(video, path, grid, td, eps);
            rate_bound = playout_rate_bound(video, res.value);
        } else {
            res.infeasible = true;  // nothing deliverable at any reliability
        }
    } else {
        mode = "epsilon_for_d";
        if (stab.stable) {
            res = departure_tail_closed(video, path, grid, d_target, td);
        } else {
            res.value = 1.0;
        }
    }
    table.add_row({std::string(mode), res.value, res.theta_star, stab.stable,
                   res.capped_at_frame_size, res.infeasible, util,
                   avg_capacity_bps(path.channel) / 1e6, video.frame_bits(), rate_bound / 1e6});
    table.write(std::cout, p.out_format);
    return 0;
}

// ---------------------------------------------------------------------------

struct Axis {
    std::string name;
    std::vector<double> values;
};

Axis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("axis spec must be name=...");
    Axis axis;
    axis.name = spec.substr(0, eq);
    const std::string rest = spec.substr(eq + 1);
    if (rest.find(':') != std::string::npos) {
        double lo, hi;
        int count;
        char c1, c2;
        std::istringstream is(rest);
        if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
            throw std::invalid_argument("axis range must be lo:hi:count");
        for (int i = 0; i < count; ++i)
            axis.values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    } else {
        std::istringstream is(rest);
        std::string item;
        while (std::getline(is, item, ',')) axis.values.push_back(std::stod(item));
    }
    if (axis.values.empty()) throw std::invalid_argument("axis has no values");
    return axis;
}

int cmd_sweep(CommonParams& p, const std::vector<std::string>& axis_specs) {
    if (axis_specs.empty() || axis_specs.size() > 2)
        throw std::invalid_argument("sweep: one or two --axis options required");
    const std::vector<std::string> known = {"d_mbits", "layers", "r_mbits", "snr_db",
                                            "hops",    "td_ms",  "eps"};
    std::vector<Axis> axes;
    for (const auto& spec : axis_specs) {
        Axis a = parse_axis(spec);
        if (std::find(known.begin(), known.end(), a.name) == known.end())
            throw std::invalid_argument("sweep: unknown axis '" + a.name + "'");
        axes.push_back(std::move(a));
    }
    if (axes.size() == 1) axes.push_back({"", {0.0}});

    Table table({"axis1", "value1", "axis2", "value2", "layers", "r_bits", "snr_db", "hops",
                 "td_s", "eps", "d_mbits", "mode", "value", "d_eps_sup_bits", "d_eps_fluid_bits",
                 "rate_fluid_mbps", "rate_bound_mbps", "theta_star", "stable", "capped",
                 "infeasible", "utilization"});
    echo_scenario(table, p);

    for (double v1 : axes[0].values) {
        for (double v2 : axes[1].values) {
            CommonParams cell = p;
            auto apply = [&](const std::string& name, double v) {
                if (name == "d_mbits") cell.target_mbits = v;
                if (name == "layers") { cell.layers = v; cell.frame_mbits = 0.0; }
                if (name == "r_mbits") { cell.frame_mbits = v; cell.layers = 0.0; }
                if (name == "snr_db") cell.snr_db = v;
                if (name == "hops") cell.hops = static_cast<int>(v);
                if (name == "td_ms") cell.playout_delay_ms = v;
                if (name == "eps") cell.epsilon = v;
            };
            apply(axes[0].name, v1);
            if (!axes[1].name.empty()) apply(axes[1].name, v2);

            const VideoParams video = make_video(cell);
            const SlotGrid grid = make_grid(cell);
            PathSpec path = make_path(cell);
            if (!cell.scenario_path.empty() || cell.scenario) {
                // axis overrides on top of the scenario's first path
                path = PathSpec(axes[0].name == "hops" || axes[1].name == "hops"
                                    ? cell.hops : path.hops,
                                ChannelParams::from_db(
                                    (axes[0].name == "snr_db" || axes[1].name == "snr_db")
                                        ? cell.snr_db : path.channel.snr_db(),
                                    path.channel.bandwidth_hz),
                                path.path_id);
            }
            const double td = cell.scenario && axes[0].name != "td_ms" && axes[1].name != "td_ms"
                                  ? cell.scenario->playout_delay_s
                                  : cell.playout_delay_ms / 1e3;
            double eps = cell.epsilon;
            if (cell.scenario && eps == 0.0 && cell.scenario->epsilon) eps = *cell.scenario->epsilon;

            const double util = video.rate_bps() / avg_capacity_bps(path.channel);
            const StabilityResult stab = stability_check(video, path, grid);

            std::string mode;
            double value = 1.0, sup_bits = 0.0, fluid_bits = 0.0, rate_fluid = 0.0,
                   rate_bound = 0.0, theta = 0.0;
            bool capped = false, infeasible = !stab.stable;
            if (cell.target_mbits >= 0.0) {
                mode = "epsilon_for_d";
                if (stab.stable) {
                    const BoundResult r =
                        departure_tail_closed(video, path, grid, cell.target_mbits * 1e6, td);
                    value = r.value;
                    theta = r.theta_star;
                    capped = r.capped_at_frame_size;
                }
            } else {
                mode = "d_eps_bits";
                if (!(eps > 0.0)) throw std::invalid_argument("sweep: --eps required for d^eps sweeps");
                if (stab.stable) {
                    const BoundResult r = invert_d_epsilon(video, path, grid, td, eps);
                    value = r.value;
                    theta = r.theta_star;
                    capped = r.capped_at_frame_size;
                    infeasible = r.infeasible;
                    // fluid companions: the raw supremum and its physical clip
                    sup_bits = r.infeasible ? 0.0 : r.value;
                    if (!r.capped_at_frame_size) {
                        fluid_bits = sup_bits;
                    } else {
                        fluid_bits = video.frame_bits();
                        sup_bits = fluid_bits;  // capped: supremum exceeded the frame
                    }
                    rate_fluid = fluid_bits / (video.layer_bits()) * video.layer_payload_bits /
                                 video.frame_period_s();
                    rate_bound = playout_rate_bound(video, value);
                } else {
                    value = 0.0;
                }
            }
            table.add_row({axes[0].name, v1, axes[1].name, v2,
                           video.num_layers, video.frame_bits(), path.channel.snr_db(),
                           static_cast<std::int64_t>(path.hops), td, eps,
                           cell.target_mbits >= 0.0 ? cell.target_mbits : 0.0,
                           mode, value, sup_bits, fluid_bits, rate_fluid / 1e6, rate_bound / 1e6,
                           theta, stab.stable, capped, infeasible, util});
        }
    }
    table.write(std::cout, p.out_format);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_simulate(CommonParams& p, std::int64_t total_slots, std::int64_t warmup_slots,
                 const std::string& forwarding, int d_grid_points) {
    const VideoParams video = make_video(p);
    const SlotGrid grid = make_grid(p);
    const PathSpec path = make_path(p);
    const double td = deadline_s(p);

    SimConfig sim;
    sim.video = video;
    sim.path = path;
    sim.grid = grid;
    sim.playout_delay_s = td;
    // explicit flags override the scenario's sim block
    sim.total_slots = (p.scenario && total_slots < 0) ? p.scenario->total_slots
                      : (total_slots < 0 ? 1'000'000 : total_slots);
    sim.warmup_slots = (p.scenario && warmup_slots < 0) ? p.scenario->warmup_slots
                       : (warmup_slots < 0 ? 10'000 : warmup_slots);
    sim.seed = p.seed;
    if (p.scenario) {
        sim.forwarding = p.scenario->forwarding;
        sim.burst_arrivals = p.scenario->burst_arrivals;
        if (!p.seed_set) sim.seed = p.scenario->seed;
    }
    if (!forwarding.empty()) {
        sim.forwarding = forwarding == "store_and_forward" ? Forwarding::store_and_forward
                                                           : Forwarding::cut_through;
    }
    if (sim.total_slots < 100'000)
        throw std::invalid_argument("simulate: need at least 1e5 slots for meaningful estimates");

    std::vector<double> d_grid;
    if (p.scenario && !p.scenario->d_grid_bits.empty()) {
        d_grid = p.scenario->d_grid_bits;
    } else if (d_grid_points > 0) {
        for (int i = 0; i < d_grid_points; ++i)
            d_grid.push_back(video.frame_bits() * (i + 1) / (d_grid_points + 1));
    } else {
        d_grid = validate::default_d_grid(video.frame_bits());
    }

    const double util = video.rate_bps() / avg_capacity_bps(path.channel);
    std::cerr << "simulating " << sim.total_slots << " slots, N=" << path.hops << ", "
              << to_string(sim.forwarding) << ", utilization " << util << " ...\n";
    const RunResult rr = run(sim);
    const auto rows =
        validate::dominance_table(video, path, grid, td, rr.frames, d_grid);

    // smallest epsilon the run length can attest (about 10 events)
    const double eps_floor =
        10.0 / std::max<double>(1.0, static_cast<double>(rr.summary.counted_frames));

    Table table({"d_bits", "p_hat", "stderr", "violations", "low_confidence", "bound",
                 "dominated"});
    echo_scenario(table, p);
    table.add_meta("seed", std::to_string(sim.seed));
    table.add_meta("total_slots", std::to_string(sim.total_slots));
    table.add_meta("counted_frames", std::to_string(rr.summary.counted_frames));
    table.add_meta("forwarding", to_string(sim.forwarding));
    table.add_meta("utilization", format_number(util));
    table.add_meta("near_saturation", util > 0.95 ? "true" : "false");
    table.add_meta("smallest_trustworthy_epsilon", format_number(eps_floor));
    bool dominated = true;
    for (const auto& row : rows) {
        dominated = dominated && row.dominated;
        table.add_row({row.d_bits, row.p_hat, row.stderr_, row.violations, row.low_confidence,
                       row.bound, row.dominated});
    }
    table.write(std::cout, p.out_format);
    if (!dominated) {
        std::cerr << "dominance violated beyond 3 sigma: the analytic bound fell below the "
                     "empirical tail (implementation bug)\n";
        return kExitDominance;
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_adapt(CommonParams& p, bool with_opt, std::int64_t opt_slots, bool no_replay) {
    if (!p.scenario) throw std::invalid_argument("adapt: requires --scenario with epochs");
    const ScenarioFile& sc = *p.scenario;
    if (!sc.epsilon) throw std::invalid_argument("adapt: scenario must set epsilon");
    const VideoParams tmpl = sc.video.num_layers > 0.0 ? sc.video : sc.video.with_layers(1.0);

    const auto decisions = run_adaptation(sc.paths, sc.epochs, tmpl, sc.grid, sc.playout_delay_s,
                                          *sc.epsilon);

    SimConfig sim;
    sim.video = tmpl;
    sim.path = sc.paths.front();
    sim.grid = sc.grid;
    sim.playout_delay_s = sc.playout_delay_s;
    sim.total_slots = sc.total_slots;
    sim.warmup_slots = sc.warmup_slots;
    sim.seed = p.seed_set ? p.seed : sc.seed;
    sim.forwarding = sc.forwarding;

    std::vector<PhaseReport> phases;
    if (!no_replay) {
        std::cerr << "replaying " << decisions.size() << " epochs over " << sim.total_slots
                  << " slots ...\n";
        phases = simulate_adaptation(sc.paths, sc.epochs, decisions, tmpl, sim);
    }

    std::vector<std::string> cols = {"epoch_start_s", "path", "layers", "r_bits",
                                     "predicted_d_eps_bits", "predicted_rate_mbps",
                                     "infeasible_fallback", "phase_frames", "phase_violations",
                                     "phase_p_hat", "reliability_ok", "path_switched",
                                     "dropped_backlog_bits"};
    if (with_opt) {
        cols.push_back("opt_layers");
        cols.push_back("opt_d_bits");
    }
    Table table(cols);
    echo_scenario(table, p);
    table.add_meta("epsilon", format_number(*sc.epsilon));
    table.add_meta("seed", std::to_string(sim.seed));

    for (std::size_t e = 0; e < decisions.size(); ++e) {
        const AdaptationDecision& dec = decisions[e];
        std::vector<Cell> row = {dec.epoch_start_s, dec.chosen_path,
                                 static_cast<std::int64_t>(dec.layers),
                                 dec.transmitted_frame_bits, dec.predicted_d_eps_bits,
                                 dec.predicted_rate_bound_bps / 1e6, dec.infeasible_fallback};
        if (!no_replay && e < phases.size()) {
            const PhaseReport& ph = phases[e];
            const double n = static_cast<double>(std::max<std::int64_t>(ph.counted_frames, 1));
            const bool ok = ph.p_hat <= *sc.epsilon + 3.0 * std::sqrt(*sc.epsilon / n);
            row.insert(row.end(), {ph.counted_frames, ph.violations, ph.p_hat, ok,
                                   ph.path_switched, ph.dropped_backlog_bits});
        } else {
            row.insert(row.end(), {static_cast<std::int64_t>(0), static_cast<std::int64_t>(0),
                                   0.0, true, false, 0.0});
        }
        if (with_opt) {
            // simulation-driven exhaustive search per phase: for each L the
            // largest grid d with empirical UCB below epsilon; OPT maximizes
            // the decodable floor
            std::cerr << "OPT scan for epoch " << e << " ...\n";
            int best_l = 0;
            double best_d = 0.0;
            double best_dec = -1.0;
            // resolve the SNR in force at this epoch on the chosen path
            std::map<std::string, double> snr_db;
            for (const PathSpec& bp : sc.paths) snr_db[bp.path_id] = bp.channel.snr_db();
            for (std::size_t k = 0; k <= e && k < sc.epochs.size(); ++k) {
                for (const auto& [id, v] : sc.epochs[k].snr_updates_db) snr_db[id] = v;
            }
            PathSpec opt_path = sc.paths.front();
            for (const PathSpec& bp : sc.paths) {
                if (bp.path_id == dec.chosen_path) opt_path = bp;
            }
            opt_path.channel = ChannelParams::from_db(snr_db[dec.chosen_path],
                                                      opt_path.channel.bandwidth_hz);
            for (int l = 1; l <= tmpl.max_layers; ++l) {
                SimConfig cand = sim;
                cand.video = tmpl.with_layers(static_cast<double>(l));
                cand.path = opt_path;
                cand.total_slots = opt_slots;
                cand.warmup_slots = std::min<std::int64_t>(sim.warmup_slots, opt_slots / 10);
                cand.seed = sim.seed + 7919 * static_cast<std::uint64_t>(l);
                const RunResult rr = run(cand);
                if (rr.frames.empty()) continue;
                std::vector<double> grid_d;
                for (int i = 1; i <= 200; ++i)
                    grid_d.push_back(cand.video.frame_bits() * i / 200.0);
                const auto emp = empirical_violation(rr.frames, grid_d);
                double d_ok = 0.0;
                for (const ViolationRow& row_e : emp) {
                    if (row_e.probability + 3.0 * row_e.stderr_ <= *sc.epsilon)
                        d_ok = std::max(d_ok, row_e.d_bits);
                }
                const double decodable = std::floor(d_ok / tmpl.layer_bits());
                if (decodable > best_dec) {
                    best_dec = decodable;
                    best_l = l;
                    best_d = d_ok;
                }
            }
            row.insert(row.end(), {static_cast<std::int64_t>(best_l), best_d});
        }
        table.add_row(std::move(row));
    }
    table.write(std::cout, p.out_format);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& out_format, std::vector<int> ids) {
    if (ids.empty()) ids = validate::all_criteria();
    const auto results = validate::run_criteria(ids, &std::cerr);
    Table table({"criterion", "name", "pass", "detail"});
    bool all_pass = true;
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        std::string detail;
        for (const auto& line : r.details) {
            if (!detail.empty()) detail += " | ";
            detail += line;
        }
        table.add_row({static_cast<std::int64_t>(r.id), r.name, r.pass, detail});
    }
    table.write(std::cout, out_format);
    return all_pass ? 0 : kExitCriteria;
}

}  // namespace

static int run_cli(int argc, char** argv) {
    CLI::App app{"network-calculus quality bounds and rate adaptation for deadline-constrained "
                 "layered streaming over multi-hop fading paths"};
    app.require_subcommand(1);

    CommonParams pb, ps, pm, pa;
    auto* bound = app.add_subcommand("bound", "closed-form tail bound / d^eps inversion");
    add_common_flags(bound, pb);

    auto* sweep = app.add_subcommand("sweep", "parameter sweeps (plot-ready tables)");
    std::vector<std::string> axis_specs;
    add_common_flags(sweep, ps);
    sweep->add_option("--axis", axis_specs, "sweep axis, e.g. r_mbits=0.4:2.4:21 or hops=1,3,5")
        ->expected(1, 2);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run with dominance verdicts");
    std::int64_t total_slots = -1, warmup_slots = -1;
    std::string forwarding;
    int d_grid_points = -1;
    add_common_flags(simulate, pm);
    simulate->add_option("--slots", total_slots, "simulated slots (>= 1e5)");
    simulate->add_option("--warmup-slots", warmup_slots, "slots excluded from statistics");
    simulate->add_option("--forwarding", forwarding, "cut_through or store_and_forward")
        ->check(CLI::IsMember({"cut_through", "store_and_forward"}));
    simulate->add_option("--d-grid-points", d_grid_points,
                         "uniform departure grid size (default: a dense 20-point tail grid)");

    auto* adapt = app.add_subcommand("adapt", "epoch-driven adaptation replay");
    bool with_opt = false, no_replay = false;
    std::int64_t opt_slots = 1'000'000;
    add_common_flags(adapt, pa);
    adapt->add_flag("--opt", with_opt, "add the simulation-driven OPT baseline per epoch");
    adapt->add_option("--opt-slots", opt_slots, "slots per OPT candidate");
    adapt->add_flag("--no-replay", no_replay, "decisions only, skip the Monte-Carlo replay");

    auto* validate_cmd = app.add_subcommand("validate", "run the acceptance suite");
    std::vector<int> criterion_ids;
    std::string validate_out = "csv";
    validate_cmd->add_option("--criterion", criterion_ids, "criterion ids (default: all)");
    validate_cmd->add_option("--out", validate_out, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    pb.seed_set = bound->count("--seed") > 0;
    ps.seed_set = sweep->count("--seed") > 0;
    pm.seed_set = simulate->count("--seed") > 0;
    pa.seed_set = adapt->count("--seed") > 0;

    try {
        if (bound->parsed()) {
            apply_preset(pb);
            load_scenario(pb);
            return cmd_bound(pb);
        }
        if (sweep->parsed()) {
            apply_preset(ps);
            load_scenario(ps);
            return cmd_sweep(ps, axis_specs);
        }
        if (simulate->parsed()) {
            apply_preset(pm);
            load_scenario(pm);
            return cmd_simulate(pm, total_slots, warmup_slots, forwarding, d_grid_points);
        }
        if (adapt->parsed()) {
            apply_preset(pa);
            load_scenario(pa);
            return cmd_adapt(pa, with_opt, opt_slots, no_replay);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(validate_out, criterion_ids);
        }
    } catch (const UnstableSystemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnstable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
