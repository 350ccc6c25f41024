#include "abr/probe.hpp"

#include "abr/errors.hpp"

#include <httplib.h>

namespace abr {

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_url(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("latency target must be an http(s) URL: " + url);
    }
    const size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path), url.substr(path)};
}

} // namespace

struct HttpRoundTripSource::Impl {
    std::string base;
    std::string path;
};

HttpRoundTripSource::HttpRoundTripSource(const std::string& url)
    : impl_(std::make_unique<Impl>()) {
    auto [base, path] = split_url(url);
    impl_->base = base;
    impl_->path = path;
}

HttpRoundTripSource::~HttpRoundTripSource() = default;

bool HttpRoundTripSource::round_trip(int timeout_ms) {
    const time_t sec = timeout_ms / 1000;
    const time_t usec = (timeout_ms % 1000) * 1000;
    httplib::Client client(impl_->base);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    auto res = client.Get(impl_->path);
    return static_cast<bool>(res);
}

} // namespace abr
