#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "streamcalc/specfun.hpp"

// Domain types and the SNR-domain Mellin transforms of the arrival and
// service processes.
//
// Unit ledger: every internal bound computation runs in nats per slot.
// One slot of service over a fading link is nu * ln(1 + gamma) nats with
// nu = W * dt; arrivals in bits convert through ln 2. Public interfaces
// take and return bits, seconds and dB.
//
// The Mellin free parameter s < 1 is reparametrized as theta = nu * (1 - s),
// theta > 0. Without this the useful s-range sits within ~1e-5 of 1.

namespace streamcalc {

inline constexpr double kLn2 = 0.6931471805599453094;

struct ChannelParams {
    double avg_snr_linear = 1.0;  // mean SNR of the exponential fading law
    double bandwidth_hz = 1.0;

    ChannelParams() = default;
    ChannelParams(double snr_linear, double bandwidth)
        : avg_snr_linear(snr_linear), bandwidth_hz(bandwidth) {
        validate();
    }
    static ChannelParams from_db(double snr_db, double bandwidth) {
        return ChannelParams(std::pow(10.0, snr_db / 10.0), bandwidth);
    }
    double snr_db() const { return 10.0 * std::log10(avg_snr_linear); }
    void validate() const {
        if (!(avg_snr_linear > 0.0)) throw std::invalid_argument("ChannelParams: avg SNR must be > 0");
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("ChannelParams: bandwidth must be > 0");
    }
};

struct SlotGrid {
    double slot_seconds = 0.01;

    SlotGrid() = default;
    explicit SlotGrid(double dt) : slot_seconds(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("SlotGrid: slot duration must be > 0");
    }
    // Durations round down to whole slots; the small shift absorbs binary
    // rounding of quotients like 0.45 / 0.01.
    std::int64_t to_slots(double seconds) const {
        if (seconds < 0.0) throw std::invalid_argument("SlotGrid: negative duration");
        return static_cast<std::int64_t>(std::floor(seconds / slot_seconds + 1e-9));
    }
};

// Layered source: L equal layers of m payload + h header bits per frame,
// n frames per second. num_layers is a real number so that fluid
// experiments can address frame sizes that are not whole-layer multiples
// (e.g. 2.08 Mbit frames with 100 kbit layers).
struct VideoParams {
    double layer_payload_bits = 0.0;  // m
    double layer_header_bits = 0.0;   // h
    double frame_rate_fps = 0.0;      // n
    double num_layers = 0.0;          // L (layers-equivalent)
    int max_layers = 1;               // L_max

    VideoParams() = default;
    VideoParams(double m, double h, double n, double layers, int layers_max)
        : layer_payload_bits(m),
          layer_header_bits(h),
          frame_rate_fps(n),
          num_layers(layers),
          max_layers(layers_max) {
        validate();
    }
    void validate() const {
        if (!(layer_payload_bits > 0.0)) throw std::invalid_argument("VideoParams: layer payload must be > 0");
        if (layer_header_bits < 0.0) throw std::invalid_argument("VideoParams: layer header must be >= 0");
        if (!(frame_rate_fps > 0.0)) throw std::invalid_argument("VideoParams: frame rate must be > 0");
        if (max_layers < 1) throw std::invalid_argument("VideoParams: max layers must be >= 1");
        if (num_layers < 0.0 || num_layers > static_cast<double>(max_layers))
            throw std::invalid_argument("VideoParams: layers out of [0, max_layers]");
    }

    double layer_bits() const { return layer_payload_bits + layer_header_bits; }
    double frame_bits() const { return layer_bits() * num_layers; }         // r
    double rate_bps() const { return layer_bits() * frame_rate_fps * num_layers; }  // R_E
    double frame_period_s() const { return 1.0 / frame_rate_fps; }          // T_f

    VideoParams with_layers(double layers) const {
        VideoParams v = *this;
        v.num_layers = layers;
        v.validate();
        return v;
    }
};

// A routing alternative: N hops, every hop with the same fading law.
struct PathSpec {
    int hops = 1;  // N
    ChannelParams channel;
    std::string path_id;

    PathSpec() = default;
    PathSpec(int n, ChannelParams c, std::string id)
        : hops(n), channel(c), path_id(std::move(id)) {
        if (hops < 1) throw std::invalid_argument("PathSpec: hops must be >= 1");
    }
};

// Free optimization parameter of the bound family.
struct Theta {
    double value;
    explicit Theta(double v) : value(v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("Theta: requires theta > 0");
    }
};

// Unit bridge: arrivals and the bandwidth-slot scale in nats per slot.
struct NormalizedLoad {
    double arrival_nats_per_slot = 0.0;  // a = R_E * ln2 * dt
    double service_scale_nats = 0.0;     // nu = W * dt
    double rho = 0.0;                    // a / nu
};

inline NormalizedLoad normalize(const VideoParams& video, const ChannelParams& channel,
                                const SlotGrid& grid) {
    NormalizedLoad load;
    load.arrival_nats_per_slot = video.rate_bps() * kLn2 * grid.slot_seconds;
    load.service_scale_nats = channel.bandwidth_hz * grid.slot_seconds;
    load.rho = load.arrival_nats_per_slot / load.service_scale_nats;
    return load;
}

// ln M_A(theta, k): log-Mellin of the constant-rate arrival over k slots.
inline double mellin_arrival_log(const NormalizedLoad& load, Theta theta, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("mellin_arrival_log: k must be >= 0");
    return -(theta.value / load.service_scale_nats) * load.arrival_nats_per_slot *
           static_cast<double>(k);
}

// Per-slot log-Mellin of the SNR-domain Rayleigh service,
// ln E[(1+gamma)^{-theta}] = 1/gbar - theta ln(gbar) + ln Gamma(1-theta, 1/gbar).
inline double mellin_service_slot_log(const ChannelParams& channel, const SlotGrid&, Theta theta) {
    const double x = 1.0 / channel.avg_snr_linear;
    return x - theta.value * std::log(channel.avg_snr_linear) +
           specfun::gamma_upper_log(1.0 - theta.value, x);
}

// ln V(theta): per-slot product of arrival and service Mellin factors.
// V(theta) < 1 for some theta > 0 is the stability condition.
inline double v_kernel_log(const NormalizedLoad& load, const ChannelParams& channel,
                           const SlotGrid& grid, Theta theta) {
    return theta.value * load.rho + mellin_service_slot_log(channel, grid, theta);
}

// V(theta) in linear scale; +inf when the exponent overflows (an overflowing
// kernel is never < 1, so callers can treat it as unstable directly).
inline double v_kernel(const NormalizedLoad& load, const ChannelParams& channel,
                       const SlotGrid& grid, Theta theta) {
    return std::exp(v_kernel_log(load, channel, grid, theta));
}

// ln M_Snet(theta, k, N): N-hop network service over k slots,
// C(N-1+k, k) * (per-slot factor)^k, binomial through lgamma.
inline double mellin_network_service_log(const ChannelParams& channel, const SlotGrid& grid,
                                         Theta theta, std::int64_t k, int hops) {
    if (k < 0) throw std::invalid_argument("mellin_network_service_log: k must be >= 0");
    if (hops < 1) throw std::invalid_argument("mellin_network_service_log: hops must be >= 1");
    if (k == 0) return 0.0;
    const double n = static_cast<double>(hops);
    const double kd = static_cast<double>(k);
    const double lchoose = std::lgamma(n + kd) - std::lgamma(kd + 1.0) - std::lgamma(n);
    return lchoose + kd * mellin_service_slot_log(channel, grid, theta);
}

// Mean Shannon capacity of the exponential-SNR channel, bits per second:
// (W / ln2) e^{1/gbar} E1(1/gbar).
inline double avg_capacity_bps(const ChannelParams& channel) {
    const double x = 1.0 / channel.avg_snr_linear;
    return channel.bandwidth_hz / kLn2 * std::exp(x) * specfun::exp_integral_e1(x);
}

}  // namespace streamcalc
