#pragma once

#include "abr/policy.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abr {

// One fixture row: the response served when the request's averages fall
// inside the (inclusive) ranges. A range left unset matches anything; a
// fixture with no ranges at all is the required last-resort entry.
struct AdvisorFixture {
    std::optional<double> latency_lo, latency_hi;
    std::optional<double> kbps_lo, kbps_hi;
    AdvisorResponse response;

    bool is_catch_all() const { return !latency_lo && !latency_hi && !kbps_lo && !kbps_hi; }
    bool matches(const AdvisorRequest& req) const;
};

// First match wins. Requires a catch-all so every request is answerable.
struct FixtureTable {
    std::vector<AdvisorFixture> fixtures;

    void validate() const;
    const AdvisorResponse& respond(const AdvisorRequest& req) const;
};

// JSON file: {"fixtures": [{"latency_ms": [lo, hi], "kbps_in": [lo, hi],
// "resolution": "...", "buffer_bytes": n}, ...]}; omit a range to match
// anything on that axis.
FixtureTable load_fixture_table(const std::string& path);
FixtureTable parse_fixture_table(const std::string& body);

enum class MockBehavior {
    normal,
    delay,     // respond after delay_ms
    drop,      // never respond (bounded internally so shutdown stays prompt)
    malformed, // respond 200 with a non-JSON payload
};

MockBehavior mock_behavior_from_string(const std::string& s, int& delay_ms);

// Local advisor protocol server: POST /decide with an AdvisorRequest
// body, JSON response per the fixture table.
class MockAdvisorServer {
public:
    MockAdvisorServer(FixtureTable fixtures, MockBehavior behavior = MockBehavior::normal,
                      int delay_ms = 0);
    ~MockAdvisorServer();

    MockAdvisorServer(const MockAdvisorServer&) = delete;
    MockAdvisorServer& operator=(const MockAdvisorServer&) = delete;

    // Binds and serves on a background thread. port 0 picks a free port.
    // Throws BindError when the port cannot be bound.
    void start(int port = 0);
    void stop();

    int port() const;
    std::string url() const; // http://127.0.0.1:<port>/decide

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace abr
