#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "streamcalc/simulator.hpp"

using namespace streamcalc;
using Catch::Matchers::WithinRel;

namespace {
const SlotGrid kGrid(0.01);
const ChannelParams kChan10 = ChannelParams::from_db(10.0, 2.2e6);

VideoParams frame_of(double frame_bits) {
    return VideoParams(100e3, 0.0, 2.5, frame_bits / 100e3, 32);
}

SimConfig base_config(double frame_bits, int hops, double snr_db, std::int64_t slots) {
    SimConfig c;
    c.video = frame_of(frame_bits);
    c.path = PathSpec(hops, ChannelParams::from_db(snr_db, 2.2e6), "p");
    c.grid = kGrid;
    c.playout_delay_s = 0.45;
    c.total_slots = slots;
    c.warmup_slots = 0;
    c.seed = 7;
    return c;
}
}  // namespace

TEST_CASE("inverse-transform SNR sampling") {
    CHECK_THAT(snr_from_uniform(10.0, std::exp(-1.0)), WithinRel(10.0, 1e-12));
    CHECK_THAT(capacity_bits_from_snr(kChan10, kGrid, 10.0),
               WithinRel(2.2e6 * 0.01 * std::log2(11.0), 1e-12));

    // Monte-Carlo mean against the closed-form capacity, 1e7 draws
    LinkRng rng(123, 0);
    double sum = 0.0;
    const int n = 10'000'000;
    for (int i = 0; i < n; ++i) sum += sample_slot_capacity(kChan10, kGrid, rng);
    const double expect = avg_capacity_bps(kChan10) * 0.01;  // about 63,942 bits per slot
    CHECK_THAT(sum / n, WithinRel(expect, 0.002));
}

TEST_CASE("per-link substreams are independent and reproducible") {
    LinkRng a0(42, 0), a1(42, 1), b0(42, 0);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        const double u0 = a0.next_uniform01();
        const double u1 = a1.next_uniform01();
        CHECK(u0 == b0.next_uniform01());
        all_equal = all_equal && (u0 == u1);
        CHECK(u0 > 0.0);
        CHECK(u0 <= 1.0);
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("one slot of the tandem") {
    // single node: same-slot arrivals are servable
    for (Forwarding fwd : {Forwarding::cut_through, Forwarding::store_and_forward}) {
        QueueState s(1);
        step(s, {3.0}, 5.0, fwd);
        CHECK(s.backlog_bits[0] == 2.0);
        CHECK(s.cum_departure_bits == 3.0);
        CHECK(s.cum_arrival_bits == 5.0);
    }

    // ample capacity, cut-through: traffic crosses the whole path in-slot
    QueueState ct(3);
    for (int t = 0; t < 5; ++t) step(ct, {100.0, 100.0, 100.0}, 7.0, Forwarding::cut_through);
    CHECK(ct.total_backlog_bits() == 0.0);
    CHECK(ct.cum_departure_bits == ct.cum_arrival_bits);

    // ample capacity, store-and-forward: one hop per slot pipeline
    QueueState sf(3);
    for (int t = 0; t < 5; ++t) step(sf, {100.0, 100.0, 100.0}, 7.0, Forwarding::store_and_forward);
    CHECK(sf.cum_departure_bits == 3 * 7.0);  // A(0, t - (N-1))
    CHECK(sf.total_backlog_bits() == 2 * 7.0);

    // zero capacity: the backlog grows at the arrival rate
    QueueState blocked(2);
    for (int t = 0; t < 4; ++t) step(blocked, {0.0, 0.0}, 5.0, Forwarding::cut_through);
    CHECK(blocked.cum_departure_bits == 0.0);
    CHECK(blocked.backlog_bits[0] == 20.0);

    QueueState bad(2);
    CHECK_THROWS_AS(step(bad, {1.0}, 0.0, Forwarding::cut_through), std::invalid_argument);
}

TEST_CASE("deterministic capacity override delivers every frame in full") {
    SimConfig c = base_config(1.2e6, 3, 10.0, 20'000);
    c.fixed_capacity_bits_per_slot = 1e6;  // far above the 30 kb/slot arrival
    const RunResult rr = run(c);
    REQUIRE(rr.summary.counted_frames > 400);
    for (const FrameStats& f : rr.frames) {
        CHECK(f.delivered_bits == 1.2e6);
        CHECK(f.complete_layers == 12);
        CHECK(f.decodable_payload_bits == 1.2e6);
    }
}

TEST_CASE("identical seeds reproduce bit-identical frame statistics") {
    SimConfig c = base_config(2.08e6, 3, 10.0, 100'000);
    const RunResult a = run(c);
    const RunResult b = run(c);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].delivered_bits == b.frames[i].delivered_bits);
        CHECK(a.frames[i].frame_index == b.frames[i].frame_index);
    }
    c.seed = 8;
    const RunResult d = run(c);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.frames.size() && i < d.frames.size(); ++i) {
        any_diff = any_diff || a.frames[i].delivered_bits != d.frames[i].delivered_bits;
    }
    CHECK(any_diff);
}

TEST_CASE("causality, conservation and the accounting identity") {
    for (Forwarding fwd : {Forwarding::cut_through, Forwarding::store_and_forward}) {
        SimConfig c = base_config(2.08e6, 3, 8.0, 2'000);
        c.forwarding = fwd;
        c.record_trace = true;
        c.trace_max_slots = 2'000;
        c.debug_accounting = true;
        const RunResult rr = run(c);
        const SimTrace& tr = *rr.trace;
        for (std::size_t t = 0; t < tr.cum_departure_bits.size(); ++t) {
            CHECK(tr.cum_departure_bits[t] <= tr.cum_arrival_bits[t] + 1e-3);
            CHECK(std::fabs(tr.cum_arrival_bits[t] - tr.cum_departure_bits[t] -
                            tr.total_backlog_bits[t]) < 1e-3);
        }
        CHECK(rr.summary.max_accounting_gap_bits < 1e-6);
    }
}

TEST_CASE("overloaded system starves the frames") {
    SimConfig c = base_config(2.08e6, 3, 8.0, 400'000);
    c.warmup_slots = 100'000;
    const RunResult rr = run(c);
    // utilization 0.99: most of every frame misses the deadline and no frame
    // ever arrives in full
    CHECK(rr.summary.mean_delivered_bits < 0.75e6);
    const auto rows = empirical_violation(rr.frames, {0.8e6, 1.6e6});
    CHECK(rows[0].probability > 0.55);
    CHECK(rows[1].probability > 0.85);
    std::int64_t full = 0;
    for (const FrameStats& f : rr.frames) full += f.delivered_bits >= 2.08e6 ? 1 : 0;
    CHECK(static_cast<double>(full) < 0.01 * static_cast<double>(rr.frames.size()));
}

TEST_CASE("empirical violation table") {
    SimConfig c = base_config(1.2e6, 1, 10.0, 20'000);
    c.fixed_capacity_bits_per_slot = 1e6;
    const RunResult rr = run(c);
    const auto rows = empirical_violation(rr.frames, {0.6e6, 1.2e6});
    CHECK(rows[0].probability == 0.0);  // all frames complete
    CHECK(rows[1].probability == 1.0);  // the CDF reaches 1 at the frame size
    CHECK(rows[0].low_confidence);

    // a random run yields a nondecreasing empirical CDF
    SimConfig r = base_config(2.08e6, 3, 10.0, 100'000);
    const RunResult rnd = run(r);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(2.08e6 * i / 40.0);
    double prev = -1.0;
    for (const ViolationRow& row : empirical_violation(rnd.frames, grid)) {
        CHECK(row.probability >= prev);
        prev = row.probability;
        CHECK(row.stderr_ >= 0.0);
    }
    CHECK_THROWS_AS(empirical_violation({}, {1.0}), std::invalid_argument);
}

TEST_CASE("min-plus envelope bounds the departures") {
    for (Forwarding fwd : {Forwarding::cut_through, Forwarding::store_and_forward}) {
        for (int hops : {1, 3}) {
            SimConfig c = base_config(2.08e6, hops, 10.0, 1'000);
            c.forwarding = fwd;
            c.record_trace = true;
            const RunResult rr = run(c);
            const SimTrace& tr = *rr.trace;
            std::vector<double> a_cum(1001, 0.0), d_cum(1001, 0.0);
            for (std::size_t t = 0; t < 1000; ++t) {
                a_cum[t + 1] = tr.cum_arrival_bits[t];
                d_cum[t + 1] = tr.cum_departure_bits[t];
            }
            const auto env = minplus_envelope(a_cum, tr.capacity_bits, fwd);
            for (std::size_t t = 0; t <= 1000; ++t) {
                CHECK(d_cum[t] >= env[t] - 1e-3);
                if (hops == 1) CHECK(std::fabs(d_cum[t] - env[t]) <= 1e-3);  // fluid equality
            }
        }
    }
}

TEST_CASE("min-plus envelope degenerate cases") {
    // enormous capacity: the envelope is the arrival curve itself
    std::vector<double> a_cum = {0.0, 10.0, 20.0, 30.0, 40.0};
    std::vector<std::vector<double>> caps = {{1e9, 1e9, 1e9, 1e9}, {1e9, 1e9, 1e9, 1e9}};
    const auto env = minplus_envelope(a_cum, caps, Forwarding::cut_through);
    for (std::size_t t = 0; t < a_cum.size(); ++t) CHECK(env[t] == a_cum[t]);

    // no arrivals: the envelope is zero
    std::vector<double> zero(5, 0.0);
    const auto env0 = minplus_envelope(zero, caps, Forwarding::cut_through);
    for (double v : env0) CHECK(v == 0.0);

    std::vector<double> too_long(10'002, 0.0);
    CHECK_THROWS_AS(minplus_envelope(too_long, {{}}, Forwarding::cut_through),
                    std::invalid_argument);
}

TEST_CASE("burst arrivals keep the books straight") {
    SimConfig c = base_config(1.2e6, 2, 10.0, 2'000);
    c.burst_arrivals = true;
    c.record_trace = true;
    c.trace_max_slots = 2'000;
    c.debug_accounting = true;
    const RunResult rr = run(c);
    CHECK(rr.summary.max_accounting_gap_bits < 1e-6);
    const SimTrace& tr = *rr.trace;
    for (std::size_t t = 0; t < tr.cum_departure_bits.size(); ++t) {
        CHECK(tr.cum_departure_bits[t] <= tr.cum_arrival_bits[t] + 1e-3);
    }
}

TEST_CASE("constant adaptation scenario reduces to a plain run") {
    const VideoParams tmpl(100e3, 0.0, 2.5, 1.0, 24);
    const std::vector<PathSpec> paths = {PathSpec(3, kChan10, "p")};
    std::vector<AdaptationEpoch> epochs(1);
    epochs[0] = {1e-6, {}, {"p"}};

    AdaptationDecision dec;
    dec.chosen_path = "p";
    dec.layers = 17;
    dec.transmitted_frame_bits = 1.7e6;
    dec.predicted_d_eps_bits = 1.5e6;
    dec.epoch_start_s = 1e-6;

    SimConfig c = base_config(1.7e6, 3, 10.0, 200'000);
    c.warmup_slots = 1'000;
    const auto phases = simulate_adaptation(paths, epochs, {dec}, tmpl, c);
    REQUIRE(phases.size() == 1);

    const RunResult direct = run(c);
    const auto direct_rows = empirical_violation(direct.frames, {1.5e6 - 1e-9});
    // same seed, same draws: the replay must agree with the plain run
    CHECK(phases[0].counted_frames == direct.summary.counted_frames);
    CHECK(phases[0].violations == direct_rows[0].violations);
}

TEST_CASE("path switch flushes the backlog and restarts accounting") {
    const VideoParams tmpl(100e3, 0.0, 2.5, 1.0, 24);
    const std::vector<PathSpec> paths = {
        PathSpec(1, ChannelParams::from_db(6.0, 2.2e6), "direct"),
        PathSpec(3, kChan10, "relay"),
    };
    std::vector<AdaptationEpoch> epochs(2);
    epochs[0] = {1e-6, {}, {"direct"}};
    epochs[1] = {400.0, {}, {"direct", "relay"}};

    AdaptationDecision d0, d1;
    d0.chosen_path = "direct";
    d0.layers = 20;  // deliberately heavy: builds a backlog on the weak path
    d0.transmitted_frame_bits = 2.0e6;
    d0.predicted_d_eps_bits = 0.5e6;
    d1.chosen_path = "relay";
    d1.layers = 17;
    d1.transmitted_frame_bits = 1.7e6;
    d1.predicted_d_eps_bits = 1.5e6;

    SimConfig c = base_config(2.0e6, 1, 6.0, 80'000);
    c.warmup_slots = 1'000;
    const auto phases = simulate_adaptation(paths, epochs, {d0, d1}, tmpl, c);
    REQUIRE(phases.size() == 2);
    CHECK_FALSE(phases[0].path_switched);
    CHECK(phases[1].path_switched);
    CHECK(phases[1].dropped_backlog_bits > 0.0);
    CHECK(phases[1].counted_frames > 0);
    CHECK(phases[1].p_hat <= 0.01);  // the relay phase meets its target comfortably
}

TEST_CASE("bound dominates the empirical tail across sampled configurations") {
    // randomized (load, channel, hops, seed) cells on top of the pinned
    // acceptance configurations; every stable cell must be dominated at
    // every grid point within three standard errors
    std::mt19937_64 cfg_rng(2024);
    std::uniform_real_distribution<double> ur(0.8, 2.2), usnr(7.0, 11.0);
    const int hop_choices[] = {1, 2, 3, 5};
    for (int trial = 0; trial < 6; ++trial) {
        const double r_bits = std::floor(ur(cfg_rng) * 10.0) * 1e5;
        const double snr_db = usnr(cfg_rng);
        const int hops = hop_choices[trial % 4];
        SimConfig c = base_config(r_bits, hops, snr_db, 2'000'000);
        c.warmup_slots = 20'000;
        c.seed = 0xD0D0 + static_cast<std::uint64_t>(trial);
        const double util =
            c.video.rate_bps() / avg_capacity_bps(c.path.channel);
        if (util >= 0.97) continue;  // keep the mixing time desk-friendly
        const RunResult rr = run(c);
        const auto emp = empirical_violation(
            rr.frames, {0.3 * r_bits, 0.6 * r_bits, 0.8 * r_bits, 0.9 * r_bits, 0.97 * r_bits,
                        0.995 * r_bits});
        for (const ViolationRow& row : emp) {
            double bound = 1.0;
            try {
                bound = departure_tail_closed(c.video, c.path, kGrid, row.d_bits, 0.45).value;
            } catch (const UnstableSystemError&) {
            }
            INFO("r=" << r_bits << " snr=" << snr_db << " N=" << hops << " d=" << row.d_bits);
            CHECK(row.probability <= bound + 3.0 * row.stderr_);
        }
    }
}

TEST_CASE("model-based choice tracks the simulation-driven optimum") {
    // steady 10 dB phase at a desk-resolvable reliability: the model-chosen
    // layer count may undershoot the exhaustive simulation-driven optimum,
    // but its realized reliably-decodable layers trail by at most one
    const VideoParams tmpl(100e3, 0.0, 2.5, 1.0, 24);
    const PathSpec path(3, kChan10, "p");
    const double eps_desk = 1e-4;  // resolvable with 2e5 frames per candidate
    const std::int64_t slots = 8'000'000;

    auto reliable_layers = [&](int layers, std::uint64_t seed) {
        SimConfig c = base_config(layers * 100e3, 3, 10.0, slots);
        c.warmup_slots = 20'000;
        c.seed = seed;
        const RunResult rr = run(c);
        std::vector<double> grid;
        for (int k = 1; k <= layers; ++k) grid.push_back(k * 100e3 - 1e-3);
        const auto emp = empirical_violation(rr.frames, grid);
        int best = 0;
        for (int k = 1; k <= layers; ++k) {
            const ViolationRow& row = emp[static_cast<std::size_t>(k - 1)];
            if (row.probability + 3.0 * row.stderr_ <= eps_desk) best = k;
        }
        return best;
    };

    const AdaptationDecision mod = optimize_layers(tmpl, path, kGrid, 0.45, eps_desk);
    const int mod_decodable = reliable_layers(mod.layers, 0xA11CE);
    // the model's own floored promise must be realized
    CHECK(mod_decodable >= static_cast<int>(mod.predicted_d_eps_bits / 100e3));
    int opt_decodable = 0;
    for (int layers : {16, 17, 18, 19, 20, 21}) {
        opt_decodable = std::max(opt_decodable, reliable_layers(layers, 0xA11CE + layers));
    }
    CHECK(mod_decodable >= opt_decodable - 1);
}

TEST_CASE("simulation config validation") {
    SimConfig c = base_config(1.2e6, 3, 10.0, 1'000);
    c.warmup_slots = 1'000;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    c.warmup_slots = 0;
    c.record_trace = true;
    c.total_slots = 20'001;
    CHECK_THROWS_AS(run(c), std::invalid_argument);
    SimConfig fast = base_config(1.2e6, 3, 10.0, 1'000);
    fast.grid = SlotGrid(0.5);  // frame period below one slot
    CHECK_THROWS_AS(run(fast), std::invalid_argument);
}
