#include "abr/core.hpp"
#include "abr/errors.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cstdio>
#include <random>

using namespace abr;

TEST_CASE("default ladder satisfies its invariants") {
    CHECK_NOTHROW(default_ladder().validate());
}

TEST_CASE("ladder lookup selects the highest sustainable rung") {
    const BitrateLadder ladder = default_ladder();
    CHECK(ladder_lookup(ladder, 0).label == "240p");
    CHECK(ladder_lookup(ladder, 1200).label == "1080p");
    CHECK(ladder_lookup(ladder, 999.9).label == "720p");
    CHECK(ladder_lookup(ladder, 100000).label == "2160p");
}

TEST_CASE("ladder lookup boundary is inclusive") {
    const BitrateLadder ladder = default_ladder();
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        CHECK(ladder_lookup_index(ladder, ladder.selection_threshold_kbps[i]) == i);
    }
}

TEST_CASE("ladder lookup is monotone in the average rate") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rate(0.0, 20000.0);
    for (int trial = 0; trial < 200; ++trial) {
        const BitrateLadder ladder = testgen::random_ladder(rng);
        double a = rate(rng);
        double b = rate(rng);
        if (a > b) {
            std::swap(a, b);
        }
        CHECK(ladder_lookup_index(ladder, a) <= ladder_lookup_index(ladder, b));
    }
}

TEST_CASE("equal thresholds resolve to the highest matching rung") {
    BitrateLadder ladder;
    ladder.rungs = {{"240p", 240, 200}, {"360p", 360, 300}, {"480p", 480, 400}};
    ladder.selection_threshold_kbps = {0, 400, 400};
    CHECK_NOTHROW(ladder.validate());
    CHECK(ladder_lookup(ladder, 400).label == "480p");
}

TEST_CASE("ladder invariant violations are rejected") {
    BitrateLadder ladder;
    CHECK_THROWS_AS(ladder.validate(), ConfigError); // empty

    ladder = default_ladder();
    ladder.selection_threshold_kbps[0] = 10;
    CHECK_THROWS_AS(ladder.validate(), ConfigError); // lowest threshold not 0

    ladder = default_ladder();
    ladder.selection_threshold_kbps[3] = 200;
    CHECK_THROWS_AS(ladder.validate(), ConfigError); // decreasing thresholds

    ladder = default_ladder();
    ladder.rungs[2].height = 100;
    CHECK_THROWS_AS(ladder.validate(), ConfigError); // heights not increasing

    ladder = default_ladder();
    ladder.rungs[4].nominal_bitrate_kbps = 1500; // above its 1000 threshold
    CHECK_THROWS_AS(ladder.validate(), ConfigError);
}

TEST_CASE("trace validation") {
    Trace trace;
    trace.points = {{0, 500, 20}, {5, 1500, 80}};
    trace.duration_s = 10;
    CHECK_NOTHROW(trace.validate());

    Trace bad = trace;
    bad.points[0].t_s = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = trace;
    bad.points[1].t_s = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = trace;
    bad.points[1].bandwidth_kbps = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = trace;
    bad.points[0].latency_ms = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = trace;
    bad.duration_s = 4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("trace CSV round trip is exact") {
    std::mt19937 rng(11);
    const Trace trace = testgen::random_trace(rng, 60.0);
    const std::string path = "trace_roundtrip.csv";
    save_trace(trace, path);
    const Trace loaded = load_trace(path);
    CHECK(loaded == trace);
    std::remove(path.c_str());
}

TEST_CASE("ladder CSV round trip and bundled default") {
    const std::string path = "ladder_roundtrip.csv";
    save_ladder(default_ladder(), path);
    CHECK(load_ladder(path) == default_ladder());
    std::remove(path.c_str());

    CHECK(load_ladder(std::string(ABRLAB_FIXTURE_DIR) + "/ladders/default.csv") ==
          default_ladder());
}

TEST_CASE("buffer unit conversions") {
    CHECK(buffer_bytes_from_seconds(2.0, 1000) == 250000);
    CHECK(buffer_bytes_from_seconds(2.45, 1000) == 306250);
    CHECK(buffer_seconds_from_bytes(250000, 1000) == doctest::Approx(2.0));
}

TEST_CASE("decision source names round trip") {
    for (DecisionSource s :
         {DecisionSource::rule_based, DecisionSource::advisor,
          DecisionSource::advisor_fallback, DecisionSource::user_override}) {
        CHECK(decision_source_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(decision_source_from_string("oracle"), ParseError);
}
