#include "abr/probe.hpp"

#include "abr/errors.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace abr {

void ProbeConfig::validate() const {
    if (interval_s <= 0) {
        throw ConfigError("probe interval must be positive");
    }
    if (latency_timeout_ms <= 0) {
        throw ConfigError("latency timeout must be positive");
    }
}

DataRate compute_data_rate(const CounterReading& prev, const CounterReading& curr) {
    if (curr.timestamp_s <= prev.timestamp_s) {
        throw InvalidInterval("counter timestamps not increasing");
    }
    if (curr.rx_bytes < prev.rx_bytes || curr.tx_bytes < prev.tx_bytes) {
        throw CounterWrap("byte counter went backwards");
    }
    const double dt = curr.timestamp_s - prev.timestamp_s;
    DataRate rate;
    rate.kbps_in = static_cast<double>(curr.rx_bytes - prev.rx_bytes) * 8.0 / 1000.0 / dt;
    rate.kbps_out = static_cast<double>(curr.tx_bytes - prev.tx_bytes) * 8.0 / 1000.0 / dt;
    return rate;
}

ProcNetDevSource::ProcNetDevSource(std::string iface) : iface_(std::move(iface)) {}

CounterReading ProcNetDevSource::read() {
    std::ifstream in("/proc/net/dev");
    if (!in) {
        throw IoError("cannot open /proc/net/dev");
    }
    CounterReading reading;
    reading.timestamp_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    std::string line;
    // Two header lines, then one line per interface:
    //   eth0: rx_bytes packets errs drop fifo frame compressed multicast tx_bytes ...
    std::getline(in, line);
    std::getline(in, line);
    bool matched = false;
    while (std::getline(in, line)) {
        const size_t colon = line.find(':');
        if (colon == std::string::npos) {
            continue;
        }
        std::string name = line.substr(0, colon);
        name.erase(0, name.find_first_not_of(' '));
        if (iface_.empty() ? name == "lo" : name != iface_) {
            continue;
        }
        std::istringstream fields(line.substr(colon + 1));
        std::uint64_t v[9] = {};
        for (auto& f : v) {
            fields >> f;
        }
        reading.rx_bytes += v[0];
        reading.tx_bytes += v[8];
        matched = true;
    }
    if (!matched) {
        throw IoError("interface '" + iface_ + "' not found in /proc/net/dev");
    }
    return reading;
}

CounterRateProbe::CounterRateProbe(CounterSource& source) : source_(source) {}

std::optional<DataRate> CounterRateProbe::poll() {
    CounterReading curr = source_.read();
    if (!prev_) {
        prev_ = curr;
        return std::nullopt;
    }
    try {
        DataRate rate = compute_data_rate(*prev_, curr);
        prev_ = curr;
        return rate;
    } catch (const CounterWrap&) {
        prev_ = curr; // re-baseline, drop the wrapped pair
        return std::nullopt;
    }
}

std::optional<double> measure_latency(RoundTripSource& source, int timeout_ms) {
    const auto start = std::chrono::steady_clock::now();
    const bool ok = source.round_trip(timeout_ms);
    if (!ok) {
        return std::nullopt;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count();
}

NetworkSample trace_sample(const Trace& trace, double t_s) {
    if (t_s < 0 || t_s > trace.duration_s) {
        throw OutOfRange("trace query outside [0, duration]");
    }
    // Last point with t_s <= t: a boundary belongs to the later point.
    const TracePoint* active = &trace.points.front();
    for (const TracePoint& p : trace.points) {
        if (p.t_s <= t_s) {
            active = &p;
        } else {
            break;
        }
    }
    NetworkSample s;
    s.timestamp_s = t_s;
    s.kbps_in = active->bandwidth_kbps;
    s.kbps_out = 0;
    s.latency_ms = active->latency_ms;
    return s;
}

} // namespace abr
