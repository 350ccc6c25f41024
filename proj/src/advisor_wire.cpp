#include "abr/errors.hpp"
#include "abr/policy.hpp"

#include <httplib.h>
#include <json.hpp>

namespace abr {

using nlohmann::json;

std::string advisor_request_to_json(const AdvisorRequest& req) {
    json j;
    j["avg_latency_ms"] = req.avg_latency_ms ? json(*req.avg_latency_ms) : json();
    j["avg_kbps_in"] = req.avg_kbps_in;
    j["current_resolution"] = req.current_resolution_label;
    j["current_buffer_bytes"] = req.current_buffer_bytes;
    j["ladder"] = req.ladder_labels;
    return j.dump();
}

AdvisorRequest advisor_request_from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("advisor request: ") + e.what());
    }
    try {
        AdvisorRequest req;
        if (!j.at("avg_latency_ms").is_null()) {
            req.avg_latency_ms = j.at("avg_latency_ms").get<double>();
        }
        req.avg_kbps_in = j.at("avg_kbps_in").get<double>();
        req.current_resolution_label = j.at("current_resolution").get<std::string>();
        req.current_buffer_bytes = j.at("current_buffer_bytes").get<std::int64_t>();
        req.ladder_labels = j.at("ladder").get<std::vector<std::string>>();
        return req;
    } catch (const json::exception& e) {
        throw ParseError(std::string("advisor request: ") + e.what());
    }
}

std::string advisor_response_to_json(const AdvisorResponse& resp) {
    json j;
    j["resolution"] = resp.resolution_label;
    j["buffer_bytes"] = resp.buffer_bytes;
    return j.dump();
}

AdvisorResponse advisor_response_from_json(const std::string& body) {
    try {
        json j = json::parse(body);
        AdvisorResponse resp;
        resp.resolution_label = j.at("resolution").get<std::string>();
        resp.buffer_bytes = j.at("buffer_bytes").get<std::int64_t>();
        return resp;
    } catch (const json::exception& e) {
        throw ParseError(std::string("advisor response: ") + e.what());
    }
}

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("advisor URL must be an http(s) URL: " + url);
    }
    const size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) {
        return {url, "/decide"};
    }
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

struct HttpAdvisorTransport::Impl {
    std::string base;
    std::string path;
};

HttpAdvisorTransport::HttpAdvisorTransport(const std::string& url)
    : impl_(std::make_unique<Impl>()) {
    auto [base, path] = split_url(url);
    impl_->base = base;
    impl_->path = path;
}

HttpAdvisorTransport::~HttpAdvisorTransport() = default;

AdvisorTransport::Result HttpAdvisorTransport::post(const std::string& json_body,
                                                    int timeout_ms) {
    const time_t sec = timeout_ms / 1000;
    const time_t usec = (timeout_ms % 1000) * 1000;
    httplib::Client client(impl_->base);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    auto res = client.Post(impl_->path, json_body, "application/json");
    Result out;
    if (!res) {
        switch (res.error()) {
        case httplib::Error::ConnectionTimeout:
        case httplib::Error::Read:
        case httplib::Error::Write:
            out.failure = Failure::timeout;
            break;
        default:
            out.failure = Failure::transport;
            break;
        }
        return out;
    }
    if (res->status != 200) {
        // A served error page is a response, just not a usable one; let the
        // validator classify it.
        out.body = std::string();
        return out;
    }
    out.body = res->body;
    return out;
}

} // namespace abr
