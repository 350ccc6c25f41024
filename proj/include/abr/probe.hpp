#pragma once

#include "abr/core.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace abr {

// Snapshot of an interface's cumulative byte counters.
struct CounterReading {
    double timestamp_s = 0;  // monotonic seconds
    std::uint64_t rx_bytes = 0;
    std::uint64_t tx_bytes = 0;

    bool operator==(const CounterReading&) const = default;
};

struct ProbeConfig {
    double interval_s = 1.0;
    int latency_timeout_ms = 2000;

    void validate() const;
};

struct DataRate {
    double kbps_in = 0;
    double kbps_out = 0;
};

// Rate over a reading pair: byte delta * 8 / 1000 / time delta. Throws
// CounterWrap when a counter went backwards (discard and re-baseline) and
// InvalidInterval when timestamps are not increasing.
DataRate compute_data_rate(const CounterReading& prev, const CounterReading& curr);

// Where cumulative byte counters come from. The OS adapter and the test
// doubles both sit behind this.
class CounterSource {
public:
    virtual ~CounterSource() = default;
    virtual CounterReading read() = 0;
};

// Sums rx/tx across interfaces listed in /proc/net/dev. An empty iface
// name aggregates every non-loopback interface.
class ProcNetDevSource : public CounterSource {
public:
    explicit ProcNetDevSource(std::string iface = "");
    CounterReading read() override;

private:
    std::string iface_;
};

// Turns successive counter readings into per-interval rate samples. The
// first poll is the baseline; a wrapped counter discards the pair and
// re-baselines instead of fabricating a rate.
class CounterRateProbe {
public:
    explicit CounterRateProbe(CounterSource& source);
    std::optional<DataRate> poll();

private:
    CounterSource& source_;
    std::optional<CounterReading> prev_;
};

// One request/response exchange against some reflector. Returns false
// when no response arrived within timeout_ms.
class RoundTripSource {
public:
    virtual ~RoundTripSource() = default;
    virtual bool round_trip(int timeout_ms) = 0;
};

// Wall-clock milliseconds around one exchange; nullopt on probe failure.
// A failed probe never yields a fabricated latency.
std::optional<double> measure_latency(RoundTripSource& source, int timeout_ms);

// HTTP GET round trip against a configurable URL.
class HttpRoundTripSource : public RoundTripSource {
public:
    explicit HttpRoundTripSource(const std::string& url);
    ~HttpRoundTripSource() override;
    bool round_trip(int timeout_ms) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Simulation stand-in for live probing: the trace's piecewise-constant
// state at t_s as a sample (kbps_in = bandwidth, kbps_out = 0). Throws
// OutOfRange outside [0, duration].
NetworkSample trace_sample(const Trace& trace, double t_s);

} // namespace abr
