#include "abr/errors.hpp"
#include "abr/policy.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace abr;

namespace {

WindowStats make_stats(double kbps, std::optional<double> latency, double end_s = 3.0) {
    WindowStats w;
    w.window_start_s = end_s - 3.0;
    w.window_end_s = end_s;
    w.avg_kbps_in = kbps;
    w.avg_latency_ms = latency;
    w.sample_count = 3;
    return w;
}

StreamConfig initial(const RulePolicyConfig& cfg) {
    StreamConfig c;
    c.resolution = cfg.ladder.rungs.front();
    c.buffer_target_bytes =
        buffer_bytes_from_seconds(cfg.base_buffer_s, c.resolution.nominal_bitrate_kbps);
    return c;
}

// Scripted transport double for the advisor client.
class FakeTransport : public AdvisorTransport {
public:
    explicit FakeTransport(Result result) : result_(std::move(result)) {}

    static FakeTransport responding(const std::string& body) {
        Result r;
        r.body = body;
        return FakeTransport(r);
    }
    static FakeTransport timing_out() {
        Result r;
        r.failure = Failure::timeout;
        return FakeTransport(r);
    }
    static FakeTransport unreachable() {
        Result r;
        r.failure = Failure::transport;
        return FakeTransport(r);
    }

    Result post(const std::string& body, int) override {
        last_request = body;
        return result_;
    }

    std::string last_request;

private:
    Result result_;
};

} // namespace

TEST_CASE("rule policy at good rate and low latency") {
    const RulePolicyConfig cfg;
    const Decision d = rule_decide(cfg, make_stats(1200, 20));
    CHECK(d.config.resolution.label == "1080p");
    CHECK(d.config.buffer_target_bytes == 250000);
    CHECK(d.source == DecisionSource::rule_based);
    CHECK(d.reason == reason::rate_select);
    CHECK(d.decided_at_s == 3.0);
}

TEST_CASE("latency beyond the threshold grows the buffer, not the rung") {
    const RulePolicyConfig cfg;
    const Decision d = rule_decide(cfg, make_stats(1200, 145));
    CHECK(d.config.resolution.label == "1080p");
    CHECK(d.config.buffer_target_bytes == 306250); // 2.45 s at 1000 Kbps
    CHECK(d.config.buffer_target_bytes > 250000);
    CHECK(d.reason == reason::latency_high);
}

TEST_CASE("degenerate floor: no rate, no latency") {
    const RulePolicyConfig cfg;
    const Decision d = rule_decide(cfg, make_stats(0, std::nullopt));
    CHECK(d.config.resolution.label == "240p");
    CHECK(d.config.buffer_target_bytes == 50000); // 2.0 s at 200 Kbps
}

TEST_CASE("buffer growth clamps at the configured bound") {
    const RulePolicyConfig cfg;
    const Decision d = rule_decide(cfg, make_stats(1200, 5000));
    CHECK(d.config.buffer_target_bytes ==
          buffer_bytes_from_seconds(cfg.buffer_max_s, 1000));
}

TEST_CASE("rule resolution is monotone in rate and blind to latency") {
    const RulePolicyConfig cfg;
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> rate(0.0, 16000.0);
    std::uniform_real_distribution<double> latency(1.0, 2000.0);
    for (int i = 0; i < 300; ++i) {
        double a = rate(rng);
        double b = rate(rng);
        if (a > b) {
            std::swap(a, b);
        }
        const Decision low = rule_decide(cfg, make_stats(a, latency(rng)));
        const Decision high = rule_decide(cfg, make_stats(b, latency(rng)));
        CHECK(low.config.resolution.height <= high.config.resolution.height);

        const double r = rate(rng);
        CHECK(rule_decide(cfg, make_stats(r, latency(rng))).config.resolution ==
              rule_decide(cfg, make_stats(r, std::nullopt)).config.resolution);
    }
}

TEST_CASE("rule buffer is monotone in latency and flat below the threshold") {
    const RulePolicyConfig cfg;
    std::int64_t prev = 0;
    for (double latency = 1; latency <= 100; latency += 1) {
        const Decision d = rule_decide(cfg, make_stats(1200, latency));
        CHECK(d.config.buffer_target_bytes == 250000);
        prev = d.config.buffer_target_bytes;
    }
    for (double latency = 101; latency <= 400; latency += 1) {
        const Decision d = rule_decide(cfg, make_stats(1200, latency));
        CHECK(d.config.buffer_target_bytes > prev);
        prev = d.config.buffer_target_bytes;
    }
}

TEST_CASE("advisor request wire format carries the exact field names") {
    const RulePolicyConfig cfg;
    StreamConfig current;
    current.resolution = cfg.ladder.rungs[3];
    current.buffer_target_bytes = 175000;
    const AdvisorRequest req =
        build_advisor_request(make_stats(1314.9825, 1347.11), current, cfg.ladder);

    const nlohmann::json j = nlohmann::json::parse(advisor_request_to_json(req));
    CHECK(j.at("avg_latency_ms").get<double>() == doctest::Approx(1347.11));
    CHECK(j.at("avg_kbps_in").get<double>() == doctest::Approx(1314.9825));
    CHECK(j.at("current_resolution").get<std::string>() == "720p");
    CHECK(j.at("current_buffer_bytes").get<std::int64_t>() == 175000);
    CHECK(j.at("ladder").size() == 6);

    const AdvisorRequest back = advisor_request_from_json(j.dump());
    CHECK(back.avg_kbps_in == req.avg_kbps_in);
    CHECK(back.ladder_labels == req.ladder_labels);

    // Absent latency is null on the wire, never zero.
    const AdvisorRequest no_latency =
        build_advisor_request(make_stats(100, std::nullopt), current, cfg.ladder);
    const nlohmann::json j2 = nlohmann::json::parse(advisor_request_to_json(no_latency));
    CHECK(j2.at("avg_latency_ms").is_null());
}

TEST_CASE("a valid advisor response becomes an advisor decision") {
    const RulePolicyConfig cfg;
    FakeTransport transport = FakeTransport::responding(
        R"({"resolution": "1080p", "buffer_bytes": 1355984})");
    const AdvisorRequest req = build_advisor_request(
        make_stats(1314.9825, 1347.11), initial(cfg), cfg.ladder);
    const Decision d = advisor_decide(transport, req, cfg, 200, 3.0);
    CHECK(d.source == DecisionSource::advisor);
    CHECK(d.config.resolution.label == "1080p");
    CHECK(d.config.buffer_target_bytes == 1355984);
    CHECK(d.decided_at_s == 3.0);
}

TEST_CASE("advisor failures fall back to the rule policy") {
    const RulePolicyConfig cfg;
    const WindowStats stats = make_stats(640, 120);
    const AdvisorRequest req = build_advisor_request(stats, initial(cfg), cfg.ladder);
    const Decision expected = rule_decide(cfg, stats);

    FakeTransport timeout = FakeTransport::timing_out();
    Decision d = advisor_decide(timeout, req, cfg, 200, 3.0);
    CHECK(d.source == DecisionSource::advisor_fallback);
    CHECK(d.reason == reason::timeout);
    CHECK(d.config == expected.config);

    FakeTransport off_ladder = FakeTransport::responding(
        R"({"resolution": "9999p", "buffer_bytes": 100000})");
    d = advisor_decide(off_ladder, req, cfg, 200, 3.0);
    CHECK(d.source == DecisionSource::advisor_fallback);
    CHECK(d.reason == reason::invalid_response);
    CHECK(d.config == expected.config);

    FakeTransport malformed = FakeTransport::responding("advisor said: {maybe");
    d = advisor_decide(malformed, req, cfg, 200, 3.0);
    CHECK(d.reason == reason::invalid_response);

    FakeTransport non_positive = FakeTransport::responding(
        R"({"resolution": "720p", "buffer_bytes": 0})");
    d = advisor_decide(non_positive, req, cfg, 200, 3.0);
    CHECK(d.reason == reason::invalid_response);
}

TEST_CASE("an unreachable advisor is extensionally the rule policy") {
    const RulePolicyConfig cfg;
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> rate(0.0, 16000.0);
    std::uniform_real_distribution<double> latency(1.0, 2000.0);
    FakeTransport down = FakeTransport::unreachable();
    for (int i = 0; i < 200; ++i) {
        const WindowStats stats = make_stats(rate(rng), latency(rng), 3.0 * (i + 1));
        const AdvisorRequest req =
            build_advisor_request(stats, initial(cfg), cfg.ladder);
        const Decision fallback = advisor_decide(down, req, cfg, 50, stats.window_end_s);
        const Decision rule = rule_decide(cfg, stats);
        CHECK(fallback.config == rule.config);
        CHECK(fallback.decided_at_s == rule.decided_at_s);
        CHECK(fallback.source == DecisionSource::advisor_fallback);
    }
}

TEST_CASE("hysteresis holds through transients and follows shifts") {
    const RulePolicyConfig cfg;
    HysteresisFilter filter;

    const Decision first = rule_decide(cfg, make_stats(1200, 20, 3));
    CHECK(filter.apply(first, Fluctuation::stable) == first); // first always applies

    // Dip classified transient: rung held, buffer re-expressed at the rung.
    const Decision dip = rule_decide(cfg, make_stats(400, 20, 6));
    CHECK(dip.config.resolution.label == "360p");
    const Decision held = filter.apply(dip, Fluctuation::transient);
    CHECK(held.config.resolution.label == "1080p");
    CHECK(held.reason == reason::hysteresis_hold);
    CHECK(held.config.buffer_target_bytes == 250000); // 2.0 s at 1000 Kbps

    // Sustained drop classified shifted: candidate passes through.
    const Decision drop = rule_decide(cfg, make_stats(400, 20, 9));
    CHECK(filter.apply(drop, Fluctuation::shifted) == drop);
}

TEST_CASE("a candidate equal to the current config is idempotent") {
    const RulePolicyConfig cfg;
    HysteresisFilter filter;
    const Decision d = rule_decide(cfg, make_stats(900, 20, 3));
    filter.apply(d, Fluctuation::stable);
    const Decision again = rule_decide(cfg, make_stats(900, 20, 6));
    CHECK(filter.apply(again, Fluctuation::stable) == again);
}

TEST_CASE("a stable rung change passes only when sustained") {
    const RulePolicyConfig cfg;
    HysteresisFilter filter(2);
    filter.apply(rule_decide(cfg, make_stats(950, 20, 3)), Fluctuation::stable); // 720p

    const Decision up1 = rule_decide(cfg, make_stats(1010, 20, 6)); // 1080p candidate
    const Decision held = filter.apply(up1, Fluctuation::stable);
    CHECK(held.config.resolution.label == "720p");
    CHECK(held.reason == reason::hysteresis_hold);

    const Decision up2 = rule_decide(cfg, make_stats(1020, 20, 9));
    CHECK(filter.apply(up2, Fluctuation::stable) == up2); // second consecutive: passes
}

TEST_CASE("hysteresis never leaves the ladder and a constant stream switches once") {
    const RulePolicyConfig cfg;
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> rate(0.0, 16000.0);
    std::uniform_int_distribution<int> fluct(0, 2);

    HysteresisFilter filter;
    for (int i = 0; i < 300; ++i) {
        const Decision candidate =
            rule_decide(cfg, make_stats(rate(rng), 20, 3.0 * (i + 1)));
        const Decision out = filter.apply(
            candidate, static_cast<Fluctuation>(fluct(rng)));
        CHECK(cfg.ladder.index_of(out.config.resolution.label) >= 0);
    }

    HysteresisFilter steady_filter;
    std::string last_label;
    int changes = 0;
    for (int i = 0; i < 50; ++i) {
        const Decision out = steady_filter.apply(
            rule_decide(cfg, make_stats(1200, 20, 3.0 * (i + 1))), Fluctuation::stable);
        if (out.config.resolution.label != last_label) {
            ++changes;
            last_label = out.config.resolution.label;
        }
    }
    CHECK(changes == 1);
}
