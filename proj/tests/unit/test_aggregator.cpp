#include "abr/aggregator.hpp"
#include "abr/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using namespace abr;

namespace {

NetworkSample sample(double t, double kbps, std::optional<double> latency) {
    NetworkSample s;
    s.timestamp_s = t;
    s.kbps_in = kbps;
    s.latency_ms = latency;
    return s;
}

WindowStats stats_with_rate(double kbps, double end_s = 3.0) {
    WindowStats w;
    w.window_start_s = end_s - 3.0;
    w.window_end_s = end_s;
    w.avg_kbps_in = kbps;
    w.sample_count = 3;
    return w;
}

} // namespace

TEST_CASE("window emits the arithmetic means of the probe log values") {
    SampleWindow window(3.0);
    CHECK(!window.push_sample(sample(0, 341.71, 1289.52)));
    CHECK(!window.push_sample(sample(1, 1247.46, 1462.85)));
    CHECK(!window.push_sample(sample(2, 1880.94, 1526.92)));
    const auto stats = window.push_sample(sample(3, 1789.82, 1109.15));
    REQUIRE(stats);
    CHECK(stats->window_start_s == 0.0);
    CHECK(stats->window_end_s == 3.0);
    CHECK(stats->sample_count == 4);
    CHECK(stats->avg_kbps_in == doctest::Approx(1314.9825).epsilon(1e-12));
    REQUIRE(stats->avg_latency_ms);
    CHECK(*stats->avg_latency_ms == doctest::Approx(1347.11).epsilon(1e-12));
}

TEST_CASE("no emission before the window spans") {
    SampleWindow window(3.0);
    CHECK(!window.push_sample(sample(0, 100, 10)));
    CHECK(!window.push_sample(sample(2.9, 100, 10)));
}

TEST_CASE("a window of identical samples averages to the constant") {
    SampleWindow window(3.0);
    window.push_sample(sample(0, 512, 42));
    window.push_sample(sample(1.5, 512, 42));
    const auto stats = window.push_sample(sample(3, 512, 42));
    REQUIRE(stats);
    CHECK(stats->avg_kbps_in == 512.0);
    CHECK(*stats->avg_latency_ms == 42.0);
}

TEST_CASE("non-monotonic timestamps are rejected") {
    SampleWindow window(3.0);
    window.push_sample(sample(1, 100, 10));
    CHECK_THROWS_AS(window.push_sample(sample(1, 100, 10)), NonMonotonicTimestamp);
    CHECK_THROWS_AS(window.push_sample(sample(0.5, 100, 10)), NonMonotonicTimestamp);
}

TEST_CASE("failed probes contribute to rates but never to latency") {
    SampleWindow window(2.0);
    window.push_sample(sample(0, 100, std::nullopt));
    window.push_sample(sample(1, 200, 50));
    const auto stats = window.push_sample(sample(2, 300, std::nullopt));
    REQUIRE(stats);
    CHECK(stats->avg_kbps_in == doctest::Approx(200.0));
    REQUIRE(stats->avg_latency_ms);
    CHECK(*stats->avg_latency_ms == 50.0); // mean over present values only

    SampleWindow all_failed(1.0);
    all_failed.push_sample(sample(0, 100, std::nullopt));
    const auto none = all_failed.push_sample(sample(1, 100, std::nullopt));
    REQUIRE(none);
    CHECK(!none->avg_latency_ms);
}

TEST_CASE("emissions land every window span in sample time") {
    SampleWindow window(3.0);
    std::vector<double> emission_times;
    for (int t = 0; t <= 30; ++t) {
        if (auto stats = window.push_sample(sample(t, 100, 10))) {
            emission_times.push_back(stats->window_end_s);
        }
    }
    CHECK(emission_times ==
          std::vector<double>{3, 6, 9, 12, 15, 18, 21, 24, 27, 30});
}

TEST_CASE("window means stay within the sample min and max") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> rate(0.0, 16000.0);
    SampleWindow window(3.0);
    std::vector<double> pending;
    for (int t = 0; t < 200; ++t) {
        const double kbps = rate(rng);
        pending.push_back(kbps);
        if (auto stats = window.push_sample(sample(t, kbps, 10))) {
            CHECK(stats->avg_kbps_in >=
                  *std::min_element(pending.begin(), pending.end()) - 1e-9);
            CHECK(stats->avg_kbps_in <=
                  *std::max_element(pending.begin(), pending.end()) + 1e-9);
            pending.clear();
        }
    }
}

TEST_CASE("replaying a sample sequence reproduces identical stats") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> rate(0.0, 16000.0);
    std::vector<NetworkSample> samples;
    for (int t = 0; t < 50; ++t) {
        samples.push_back(sample(t, rate(rng), 10 + t));
    }
    const auto run = [&] {
        SampleWindow window(3.0);
        std::vector<WindowStats> out;
        for (const NetworkSample& s : samples) {
            if (auto stats = window.push_sample(s)) {
                out.push_back(*stats);
            }
        }
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("small deviations classify as stable") {
    FluctuationTracker tracker(0.15);
    CHECK(tracker.classify(stats_with_rate(1000)) == Fluctuation::stable);
    CHECK(tracker.classify(stats_with_rate(1040)) == Fluctuation::stable);
}

TEST_CASE("a dip that reverses within one window is transient") {
    FluctuationTracker tracker(0.15);
    tracker.classify(stats_with_rate(1000, 3));
    CHECK(tracker.classify(stats_with_rate(400, 6)) == Fluctuation::transient);
    CHECK(tracker.classify(stats_with_rate(1000, 9)) == Fluctuation::stable);
}

TEST_CASE("a sustained deviation becomes a shift") {
    FluctuationTracker tracker(0.15);
    tracker.classify(stats_with_rate(1000, 3));
    CHECK(tracker.classify(stats_with_rate(400, 6)) == Fluctuation::transient);
    CHECK(tracker.classify(stats_with_rate(400, 9)) == Fluctuation::shifted);
    // The new level is adopted afterwards.
    CHECK(tracker.classify(stats_with_rate(410, 12)) == Fluctuation::stable);
}

TEST_CASE("a level still moving stays transient") {
    FluctuationTracker tracker(0.15);
    tracker.classify(stats_with_rate(1000, 3));
    CHECK(tracker.classify(stats_with_rate(400, 6)) == Fluctuation::transient);
    CHECK(tracker.classify(stats_with_rate(1600, 9)) == Fluctuation::transient);
    CHECK(tracker.classify(stats_with_rate(800, 12)) == Fluctuation::transient);
}

TEST_CASE("threshold bounds are validated") {
    CHECK_THROWS_AS(FluctuationTracker(0.0), ConfigError);
    CHECK_THROWS_AS(FluctuationTracker(1.0), ConfigError);
    CHECK_THROWS_AS(SampleWindow(0.0), ConfigError);
}
