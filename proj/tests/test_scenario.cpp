#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "streamcalc/scenario.hpp"
#include "streamcalc/table.hpp"

using namespace streamcalc;

namespace {
const char* kScenario = R"({
  "video": {"layer_payload_bits": 100000, "layer_header_bits": 0,
            "frame_rate_fps": 2.5, "num_layers": 17, "max_layers": 24},
  "grid": {"slot_s": 0.01},
  "playout_delay_s": 0.45,
  "epsilon": 1e-05,
  "paths": [
    {"id": "direct", "hops": 1, "avg_snr_db": 10.0, "bandwidth_hz": 2.2e6},
    {"id": "relay", "hops": 3, "avg_snr_db": 10.0, "bandwidth_hz": 2.2e6}
  ],
  "epochs": [
    {"start_s": 0.001, "available_paths": ["direct"]},
    {"start_s": 30, "snr_updates_db": {"direct": 6.0}, "available_paths": ["direct"]},
    {"start_s": 70, "available_paths": ["direct", "relay"]}
  ],
  "sim": {"total_slots": 1000000, "warmup_slots": 5000, "seed": 99,
          "forwarding": "cut_through"}
})";
}  // namespace

TEST_CASE("scenario parsing") {
    const ScenarioFile sc = parse_scenario(kScenario);
    CHECK(sc.video.num_layers == 17.0);
    CHECK(sc.video.max_layers == 24);
    CHECK(sc.grid.slot_seconds == 0.01);
    CHECK(sc.playout_delay_s == 0.45);
    REQUIRE(sc.epsilon.has_value());
    CHECK(*sc.epsilon == 1e-5);
    REQUIRE(sc.paths.size() == 2);
    CHECK(sc.paths[1].hops == 3);
    CHECK_THAT(sc.paths[1].channel.avg_snr_linear, Catch::Matchers::WithinRel(10.0, 1e-12));
    REQUIRE(sc.epochs.size() == 3);
    CHECK(sc.epochs[1].snr_updates_db.at("direct") == 6.0);
    CHECK(sc.epochs[2].available_path_ids.size() == 2);
    CHECK(sc.total_slots == 1'000'000);
    CHECK(sc.seed == 99);
    CHECK(sc.forwarding == Forwarding::cut_through);
}

TEST_CASE("unknown keys are rejected") {
    nlohmann::json doc = nlohmann::json::parse(kScenario);
    doc["typo_key"] = 1;
    CHECK_THROWS_AS(parse_scenario(doc.dump()), std::invalid_argument);

    nlohmann::json doc2 = nlohmann::json::parse(kScenario);
    doc2["video"]["layer_bits"] = 100000;  // wrong name: units must be explicit
    CHECK_THROWS_AS(parse_scenario(doc2.dump()), std::invalid_argument);

    nlohmann::json doc3 = nlohmann::json::parse(kScenario);
    doc3["sim"]["forwarding"] = "teleport";
    CHECK_THROWS_AS(parse_scenario(doc3.dump()), std::invalid_argument);
}

TEST_CASE("scenario validation failures") {
    nlohmann::json doc = nlohmann::json::parse(kScenario);
    doc.erase("paths");
    CHECK_THROWS_AS(parse_scenario(doc.dump()), std::invalid_argument);

    nlohmann::json dup = nlohmann::json::parse(kScenario);
    dup["paths"][1]["id"] = "direct";
    CHECK_THROWS_AS(parse_scenario(dup.dump()), std::invalid_argument);

    nlohmann::json ghost = nlohmann::json::parse(kScenario);
    ghost["epochs"][0]["available_paths"] = {"ghost"};
    CHECK_THROWS_AS(parse_scenario(ghost.dump()), std::invalid_argument);

    nlohmann::json bad_eps = nlohmann::json::parse(kScenario);
    bad_eps["epsilon"] = 2.0;
    CHECK_THROWS_AS(parse_scenario(bad_eps.dump()), std::invalid_argument);

    nlohmann::json bad_warm = nlohmann::json::parse(kScenario);
    bad_warm["sim"]["warmup_slots"] = 2'000'000;
    CHECK_THROWS_AS(parse_scenario(bad_warm.dump()), std::invalid_argument);
}

TEST_CASE("canonicalization is idempotent and matches the parsed echo") {
    const std::string canon = canonicalize_scenario_json(kScenario);
    CHECK(canonicalize_scenario_json(canon) == canon);
    const ScenarioFile sc = parse_scenario(kScenario);
    CHECK(sc.canonical_json == canon);
}

#ifdef SCENARIO_DIR
#include <fstream>
TEST_CASE("shipped scenario files parse and canonicalize") {
    for (const char* name : {"snr-step.json", "routing-update.json", "steady-10db.json"}) {
        std::ifstream in(std::string(SCENARIO_DIR) + "/" + name);
        REQUIRE(in.good());
        std::stringstream buf;
        buf << in.rdbuf();
        const ScenarioFile sc = parse_scenario(buf.str());
        CHECK(sc.canonical_json == canonicalize_scenario_json(buf.str()));
        CHECK_FALSE(sc.paths.empty());
    }
}
#endif

TEST_CASE("number formatting survives a round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-9, 6.3943326e6, -0.0, 2.2250738585072014e-308,
                     1.7976931348623157e308}) {
        CHECK(std::stod(format_number(v)) == v);
    }
}

TEST_CASE("CSV output round-trips and is deterministic") {
    Table t({"a", "b", "c", "d"});
    t.add_meta("note", "fixture");
    t.add_row({1.0 / 3.0, std::int64_t{42}, std::string("x"), true});
    t.add_row({6.39433264e6, std::int64_t{-1}, std::string("y"), false});

    std::ostringstream os1, os2;
    t.write_csv(os1);
    t.write_csv(os2);
    CHECK(os1.str() == os2.str());

    // re-parse: header + rows, numbers exact
    std::istringstream in(os1.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# note: fixture");
    std::getline(in, line);
    CHECK(line == "a,b,c,d");
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == 1.0 / 3.0);

    std::ostringstream js;
    t.write_json(js);
    const auto doc = nlohmann::json::parse(js.str());
    CHECK(doc["columns"].size() == 4);
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["rows"][0][0].get<double>() == 1.0 / 3.0);
    CHECK(doc["meta"]["note"] == "fixture");

    CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);
    std::ostringstream sink;
    CHECK_THROWS_AS(t.write(sink, "xml"), std::invalid_argument);
}

TEST_CASE("CSV quotes strings that carry separators") {
    Table t({"k", "v"});
    t.add_row({std::string("a,b"), std::string("say \"hi\"")});
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str() == "k,v\n\"a,b\",\"say \"\"hi\"\"\"\n");
}
