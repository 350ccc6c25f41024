#include "abr/advisor_mock.hpp"

#include "abr/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace abr {

using nlohmann::json;

bool AdvisorFixture::matches(const AdvisorRequest& req) const {
    if (latency_lo || latency_hi) {
        if (!req.avg_latency_ms) {
            return false;
        }
        if (latency_lo && *req.avg_latency_ms < *latency_lo) {
            return false;
        }
        if (latency_hi && *req.avg_latency_ms > *latency_hi) {
            return false;
        }
    }
    if (kbps_lo && req.avg_kbps_in < *kbps_lo) {
        return false;
    }
    if (kbps_hi && req.avg_kbps_in > *kbps_hi) {
        return false;
    }
    return true;
}

void FixtureTable::validate() const {
    if (fixtures.empty()) {
        throw ConfigError("fixture table is empty");
    }
    bool has_catch_all = false;
    for (const AdvisorFixture& f : fixtures) {
        if (f.response.resolution_label.empty() || f.response.buffer_bytes <= 0) {
            throw ConfigError("fixture response needs a resolution and a positive buffer");
        }
        has_catch_all = has_catch_all || f.is_catch_all();
    }
    if (!has_catch_all) {
        throw ConfigError("fixture table needs a catch-all entry");
    }
}

const AdvisorResponse& FixtureTable::respond(const AdvisorRequest& req) const {
    for (const AdvisorFixture& f : fixtures) {
        if (f.matches(req)) {
            return f.response;
        }
    }
    // validate() guarantees a catch-all, so this is unreachable; return the
    // last entry to keep the function total.
    return fixtures.back().response;
}

FixtureTable parse_fixture_table(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("fixture table: ") + e.what());
    }
    FixtureTable table;
    try {
        for (const json& f : j.at("fixtures")) {
            AdvisorFixture fixture;
            if (f.contains("latency_ms")) {
                fixture.latency_lo = f.at("latency_ms").at(0).get<double>();
                fixture.latency_hi = f.at("latency_ms").at(1).get<double>();
            }
            if (f.contains("kbps_in")) {
                fixture.kbps_lo = f.at("kbps_in").at(0).get<double>();
                fixture.kbps_hi = f.at("kbps_in").at(1).get<double>();
            }
            fixture.response.resolution_label = f.at("resolution").get<std::string>();
            fixture.response.buffer_bytes = f.at("buffer_bytes").get<std::int64_t>();
            table.fixtures.push_back(std::move(fixture));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("fixture table: ") + e.what());
    }
    table.validate();
    return table;
}

FixtureTable load_fixture_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_fixture_table(buf.str());
}

MockBehavior mock_behavior_from_string(const std::string& s, int& delay_ms) {
    delay_ms = 0;
    if (s == "normal") {
        return MockBehavior::normal;
    }
    if (s.rfind("delay:", 0) == 0) {
        delay_ms = std::stoi(s.substr(6));
        return MockBehavior::delay;
    }
    if (s == "drop") {
        return MockBehavior::drop;
    }
    if (s == "malformed") {
        return MockBehavior::malformed;
    }
    throw ConfigError("unknown mock behavior '" + s + "'");
}

struct MockAdvisorServer::Impl {
    FixtureTable fixtures;
    MockBehavior behavior;
    int delay_ms;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
    int port = 0;

    // `drop` holds the connection open without answering. Bounded and
    // stop-aware so tests shut down promptly.
    void hold_connection() {
        const auto deadline =
            std::chrono::steady_clock::now() + std::chrono::seconds(30);
        while (!stopping.load() && std::chrono::steady_clock::now() < deadline) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }
};

MockAdvisorServer::MockAdvisorServer(FixtureTable fixtures, MockBehavior behavior,
                                     int delay_ms)
    : impl_(std::make_unique<Impl>()) {
    fixtures.validate();
    impl_->fixtures = std::move(fixtures);
    impl_->behavior = behavior;
    impl_->delay_ms = delay_ms;

    impl_->server.Post("/decide", [this](const httplib::Request& req,
                                         httplib::Response& res) {
        switch (impl_->behavior) {
        case MockBehavior::drop:
            impl_->hold_connection();
            res.status = 503;
            return;
        case MockBehavior::malformed:
            res.set_content("advisor said: {maybe", "text/plain");
            return;
        case MockBehavior::delay:
            std::this_thread::sleep_for(std::chrono::milliseconds(impl_->delay_ms));
            break;
        case MockBehavior::normal:
            break;
        }
        AdvisorRequest parsed;
        try {
            parsed = advisor_request_from_json(req.body);
        } catch (const ParseError& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
            return;
        }
        res.set_content(advisor_response_to_json(impl_->fixtures.respond(parsed)),
                        "application/json");
    });
}

MockAdvisorServer::~MockAdvisorServer() {
    stop();
}

void MockAdvisorServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port <= 0) {
            throw BindError("mock advisor could not bind an ephemeral port");
        }
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) {
            throw BindError("mock advisor could not bind port " + std::to_string(port));
        }
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockAdvisorServer::stop() {
    impl_->stopping.store(true);
    if (impl_->server.is_running()) {
        impl_->server.stop();
    }
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

int MockAdvisorServer::port() const {
    return impl_->port;
}

std::string MockAdvisorServer::url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port) + "/decide";
}

} // namespace abr
