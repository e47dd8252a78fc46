#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "streamcalc/model.hpp"

using namespace streamcalc;
using Catch::Matchers::WithinRel;

namespace {
const SlotGrid kGrid(0.01);
const ChannelParams kChan10 = ChannelParams::from_db(10.0, 2.2e6);

VideoParams frame_of(double frame_bits) {
    return VideoParams(100e3, 0.0, 2.5, frame_bits / 100e3, 32);
}
}  // namespace

TEST_CASE("unit normalization") {
    const VideoParams v = frame_of(2.08e6);  // 20.8 layers-equivalent
    const NormalizedLoad load = normalize(v, kChan10, kGrid);
    CHECK_THAT(load.arrival_nats_per_slot, WithinRel(2.08e6 * 2.5 * kLn2 * 0.01, 1e-12));
    CHECK_THAT(load.service_scale_nats, WithinRel(22000.0, 1e-12));
    CHECK_THAT(load.rho, WithinRel(1.6383478813235068, 1e-10));

    const NormalizedLoad idle = normalize(frame_of(0.0), kChan10, kGrid);
    CHECK(idle.arrival_nats_per_slot == 0.0);
    CHECK(idle.rho == 0.0);

    // slotting cancels out of the utilization
    const NormalizedLoad coarse = normalize(v, kChan10, SlotGrid(0.02));
    CHECK_THAT(coarse.arrival_nats_per_slot, WithinRel(2.0 * load.arrival_nats_per_slot, 1e-12));
    CHECK_THAT(coarse.service_scale_nats, WithinRel(2.0 * load.service_scale_nats, 1e-12));
    CHECK_THAT(coarse.rho, WithinRel(load.rho, 1e-12));
}

TEST_CASE("slot flooring") {
    CHECK(kGrid.to_slots(0.45) == 45);
    CHECK(kGrid.to_slots(0.4) == 40);
    CHECK(kGrid.to_slots(0.449) == 44);
    CHECK(kGrid.to_slots(0.0) == 0);
    CHECK_THROWS_AS(kGrid.to_slots(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(SlotGrid(0.0), std::invalid_argument);
}

TEST_CASE("type validation") {
    CHECK_THROWS_AS(ChannelParams(0.0, 2.2e6), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(10.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(VideoParams(0.0, 0.0, 2.5, 1.0, 24), std::invalid_argument);
    CHECK_THROWS_AS(VideoParams(100e3, -1.0, 2.5, 1.0, 24), std::invalid_argument);
    CHECK_THROWS_AS(VideoParams(100e3, 0.0, 2.5, 25.0, 24), std::invalid_argument);
    CHECK_THROWS_AS(PathSpec(0, kChan10, "p"), std::invalid_argument);
    CHECK_THROWS_AS(Theta(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Theta(-1.0), std::invalid_argument);
    CHECK_THAT(ChannelParams::from_db(10.0, 1.0).avg_snr_linear, WithinRel(10.0, 1e-12));
    CHECK_THAT(ChannelParams::from_db(6.0, 1.0).avg_snr_linear, WithinRel(3.9810717, 1e-7));
}

TEST_CASE("arrival Mellin transform in the log domain") {
    const NormalizedLoad load = normalize(frame_of(2.08e6), kChan10, kGrid);
    CHECK(mellin_arrival_log(load, Theta(3.7), 0) == 0.0);
    const NormalizedLoad idle = normalize(frame_of(0.0), kChan10, kGrid);
    CHECK(mellin_arrival_log(idle, Theta(1.0), 1000) == 0.0);
    CHECK_THAT(mellin_arrival_log(load, Theta(1.0), 1),
               WithinRel(-load.arrival_nats_per_slot / 22000.0, 1e-12));

    // additivity over adjacent windows and linearity in theta
    const double a = mellin_arrival_log(load, Theta(2.5), 7);
    const double b = mellin_arrival_log(load, Theta(2.5), 13);
    CHECK_THAT(a + b, WithinRel(mellin_arrival_log(load, Theta(2.5), 20), 1e-12));
    CHECK_THAT(5.0 * mellin_arrival_log(load, Theta(1.0), 3),
               WithinRel(mellin_arrival_log(load, Theta(5.0), 3), 1e-12));
}

TEST_CASE("per-slot service Mellin transform") {
    // theta -> 0+: E[(1+g)^0] = 1
    CHECK(std::fabs(mellin_service_slot_log(kChan10, kGrid, Theta(1e-12))) < 1e-9);
    // theta = 1: ln(e^{1/10} 10^{-1} E1(1/10))
    const double expect = 0.1 - std::log(10.0) + std::log(specfun::exp_integral_e1(0.1));
    CHECK_THAT(mellin_service_slot_log(kChan10, kGrid, Theta(1.0)), WithinRel(expect, 1e-10));
    CHECK_THAT(std::exp(expect), WithinRel(0.20146425447084514, 1e-10));

    // strictly decreasing and convex in theta (log-convexity of the Mellin kernel)
    double prev = 0.0;
    double prev_diff = 0.0;
    bool first = true;
    for (double th = 0.25; th <= 5.0; th += 0.25) {
        const double cur = mellin_service_slot_log(kChan10, kGrid, Theta(th));
        CHECK(cur < prev);
        if (!first) CHECK(cur - prev > prev_diff);  // differences increase: convex
        prev_diff = cur - prev;
        prev = cur;
        first = false;
    }
}

TEST_CASE("V kernel") {
    const NormalizedLoad idle = normalize(frame_of(0.0), kChan10, kGrid);
    CHECK(std::fabs(v_kernel(idle, kChan10, kGrid, Theta(1e-9)) - 1.0) < 1e-6);
    CHECK_THAT(v_kernel(idle, kChan10, kGrid, Theta(1.0)), WithinRel(0.20146425447084514, 1e-10));

    // overloaded: mean arrival above mean service keeps the kernel >= 1
    const double mean_service = std::exp(0.1) * specfun::exp_integral_e1(0.1);
    const double r_over = mean_service * 1.05 * 22000.0 / (2.5 * kLn2 * 0.01);
    const NormalizedLoad over = normalize(frame_of(r_over), kChan10, kGrid);
    for (double th : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1000.0}) {
        CHECK(v_kernel(over, kChan10, kGrid, Theta(th)) >= 1.0);
    }
}

TEST_CASE("network service Mellin transform") {
    const Theta th(0.8);
    const double slot = mellin_service_slot_log(kChan10, kGrid, th);
    for (std::int64_t k : {1, 2, 10, 45}) {
        CHECK_THAT(mellin_network_service_log(kChan10, kGrid, th, k, 1),
                   WithinRel(static_cast<double>(k) * slot, 1e-12));
    }
    CHECK(mellin_network_service_log(kChan10, kGrid, th, 0, 5) == 0.0);
    CHECK_THAT(mellin_network_service_log(kChan10, kGrid, th, 2, 3),
               WithinRel(std::log(6.0) + 2.0 * slot, 1e-12));
    CHECK_THROWS_AS(mellin_network_service_log(kChan10, kGrid, th, -1, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(mellin_network_service_log(kChan10, kGrid, th, 2, 0),
                    std::invalid_argument);
}

TEST_CASE("average capacity anchors") {
    CHECK_THAT(avg_capacity_bps(kChan10), WithinRel(6.39e6, 0.01));
    CHECK_THAT(avg_capacity_bps(ChannelParams::from_db(6.0, 2.2e6)), WithinRel(4.24e6, 0.01));
    const double util = frame_of(2.08e6).rate_bps() / avg_capacity_bps(kChan10);
    CHECK_THAT(util, WithinRel(0.81, 0.02));
}
