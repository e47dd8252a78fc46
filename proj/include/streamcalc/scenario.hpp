#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamcalc/model.hpp"
#include "streamcalc/optimizer.hpp"
#include "streamcalc/simulator.hpp"

// Structured scenario files: a JSON document with explicit units in every
// key name. Unknown keys are rejected so that a typo cannot silently fall
// back to a default.

namespace streamcalc {

struct ScenarioFile {
    VideoParams video;
    SlotGrid grid;
    double playout_delay_s = 0.0;
    std::optional<double> epsilon;
    std::optional<double> target_departure_bits;
    std::vector<PathSpec> paths;
    std::vector<AdaptationEpoch> epochs;

    std::int64_t total_slots = 1'000'000;
    std::int64_t warmup_slots = 10'000;
    std::uint64_t seed = 1;
    std::vector<double> d_grid_bits;
    Forwarding forwarding = Forwarding::cut_through;
    bool burst_arrivals = false;

    std::string canonical_json;  // parsed document, canonical form
};

namespace scenario_detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required) {
    if (!obj.is_object()) throw std::invalid_argument("scenario: '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key()))
            throw std::invalid_argument("scenario: unknown key '" + item.key() + "' in " + where);
    }
    for (const auto& key : required) {
        if (!obj.contains(key))
            throw std::invalid_argument("scenario: missing key '" + key + "' in " + where);
    }
}

inline double num(const json& v, const std::string& where) {
    if (!v.is_number()) throw std::invalid_argument("scenario: '" + where + "' must be a number");
    return v.get<double>();
}

}  // namespace scenario_detail

inline std::string canonicalize_scenario_json(const std::string& text) {
    return nlohmann::json::parse(text).dump();
}

inline ScenarioFile parse_scenario(const std::string& text) {
    using nlohmann::json;
    using scenario_detail::num;
    using scenario_detail::require_keys;

    const json doc = json::parse(text);
    require_keys(doc, "scenario",
                 {"video", "grid", "playout_delay_s", "epsilon", "target_departure_bits", "paths",
                  "epochs", "sim"},
                 {"video", "grid", "playout_delay_s", "paths"});

    ScenarioFile sc;
    sc.canonical_json = doc.dump();

    const json& v = doc.at("video");
    require_keys(v, "video",
                 {"layer_payload_bits", "layer_header_bits", "frame_rate_fps", "num_layers",
                  "max_layers"},
                 {"layer_payload_bits", "frame_rate_fps", "num_layers", "max_layers"});
    sc.video = VideoParams(num(v.at("layer_payload_bits"), "video.layer_payload_bits"),
                           v.contains("layer_header_bits")
                               ? num(v.at("layer_header_bits"), "video.layer_header_bits")
                               : 0.0,
                           num(v.at("frame_rate_fps"), "video.frame_rate_fps"),
                           num(v.at("num_layers"), "video.num_layers"),
                           v.at("max_layers").get<int>());

    const json& g = doc.at("grid");
    require_keys(g, "grid", {"slot_s"}, {"slot_s"});
    sc.grid = SlotGrid(num(g.at("slot_s"), "grid.slot_s"));

    sc.playout_delay_s = num(doc.at("playout_delay_s"), "playout_delay_s");
    if (!(sc.playout_delay_s > 0.0))
        throw std::invalid_argument("scenario: playout_delay_s must be > 0");
    if (doc.contains("epsilon")) {
        sc.epsilon = num(doc.at("epsilon"), "epsilon");
        if (!(*sc.epsilon > 0.0 && *sc.epsilon < 1.0))
            throw std::invalid_argument("scenario: epsilon must lie in (0,1)");
    }
    if (doc.contains("target_departure_bits")) {
        sc.target_departure_bits = num(doc.at("target_departure_bits"), "target_departure_bits");
        if (*sc.target_departure_bits < 0.0)
            throw std::invalid_argument("scenario: target_departure_bits must be >= 0");
    }

    if (!doc.at("paths").is_array() || doc.at("paths").empty())
        throw std::invalid_argument("scenario: 'paths' must be a non-empty array");
    std::set<std::string> seen_ids;
    for (const json& p : doc.at("paths")) {
        require_keys(p, "paths[]", {"id", "hops", "avg_snr_db", "bandwidth_hz"},
                     {"id", "hops", "avg_snr_db", "bandwidth_hz"});
        const std::string id = p.at("id").get<std::string>();
        if (!seen_ids.insert(id).second)
            throw std::invalid_argument("scenario: duplicate path id '" + id + "'");
        sc.paths.emplace_back(p.at("hops").get<int>(),
                              ChannelParams::from_db(num(p.at("avg_snr_db"), "paths[].avg_snr_db"),
                                                     num(p.at("bandwidth_hz"), "paths[].bandwidth_hz")),
                              id);
    }

    if (doc.contains("epochs")) {
        if (!doc.at("epochs").is_array())
            throw std::invalid_argument("scenario: 'epochs' must be an array");
        for (const json& e : doc.at("epochs")) {
            require_keys(e, "epochs[]", {"start_s", "snr_updates_db", "available_paths"},
                         {"start_s", "available_paths"});
            AdaptationEpoch ep;
            ep.start_s = num(e.at("start_s"), "epochs[].start_s");
            if (e.contains("snr_updates_db")) {
                if (!e.at("snr_updates_db").is_object())
                    throw std::invalid_argument("scenario: snr_updates_db must be an object");
                for (const auto& item : e.at("snr_updates_db").items()) {
                    if (!seen_ids.count(item.key()))
                        throw std::invalid_argument("scenario: snr update for unknown path '" +
                                                    item.key() + "'");
                    ep.snr_updates_db[item.key()] = num(item.value(), "snr_updates_db value");
                }
            }
            for (const json& id : e.at("available_paths")) {
                const std::string s = id.get<std::string>();
                if (!seen_ids.count(s))
                    throw std::invalid_argument("scenario: unknown path '" + s + "' in available_paths");
                ep.available_path_ids.push_back(s);
            }
            sc.epochs.push_back(std::move(ep));
        }
    }

    if (doc.contains("sim")) {
        const json& s = doc.at("sim");
        require_keys(s, "sim",
                     {"total_slots", "warmup_slots", "seed", "d_grid_bits", "forwarding",
                      "burst_arrivals"},
                     {});
        if (s.contains("total_slots")) sc.total_slots = s.at("total_slots").get<std::int64_t>();
        if (s.contains("warmup_slots")) sc.warmup_slots = s.at("warmup_slots").get<std::int64_t>();
        if (s.contains("seed")) sc.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("d_grid_bits")) {
            for (const json& d : s.at("d_grid_bits"))
                sc.d_grid_bits.push_back(num(d, "sim.d_grid_bits[]"));
        }
        if (s.contains("forwarding")) {
            const std::string f = s.at("forwarding").get<std::string>();
            if (f == "cut_through") {
                sc.forwarding = Forwarding::cut_through;
            } else if (f == "store_and_forward") {
                sc.forwarding = Forwarding::store_and_forward;
            } else {
                throw std::invalid_argument("scenario: forwarding must be cut_through or store_and_forward");
            }
        }
        if (s.contains("burst_arrivals")) sc.burst_arrivals = s.at("burst_arrivals").get<bool>();
        if (sc.total_slots <= 0) throw std::invalid_argument("scenario: total_slots must be > 0");
        if (sc.warmup_slots < 0 || sc.warmup_slots >= sc.total_slots)
            throw std::invalid_argument("scenario: warmup must lie in [0, total_slots)");
    }
    return sc;
}

}  // namespace streamcalc
