#pragma once

#include "abr/aggregator.hpp"
#include "abr/core.hpp"
#include "abr/policy.hpp"
#include "abr/probe.hpp"
#include "abr/sim.hpp"
#include "abr/telemetry.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abr {

enum class PolicyKind { rule, advisor };

// Scripted stand-in for the viewer picking a resolution mid-session. The
// chosen rung stays pinned until the next override or session end.
struct OverrideEvent {
    double t_s = 0;
    std::string resolution_label;
};

struct SessionConfig {
    Trace trace;
    double duration_s = 0;
    double probe_interval_s = 1.0;
    double window_s = 3.0;
    double fluct_rel_threshold = 0.15;
    // false reproduces decide-every-sample behavior: no windowing, no
    // fluctuation suppression, no hysteresis.
    bool averaging = true;
    PolicyKind policy = PolicyKind::rule;
    RulePolicyConfig rule;
    std::string advisor_url;
    int advisor_timeout_ms = 1000;
    double segment_duration_s = 1.0;
    double startup_threshold_s = 0; // 0 -> the initial buffer target
    std::vector<OverrideEvent> overrides;
};

// Streaming starts at the lowest rung and the base buffer until the
// first window completes.
StreamConfig initial_config(const RulePolicyConfig& rule);

// The monitor+decide activity: samples in, at most one decision out per
// observation window (every sample when averaging is off), plus override
// decisions injected between samples.
class Decider {
public:
    Decider(const SessionConfig& cfg, AdvisorTransport* transport);

    std::optional<Decision> on_sample(const NetworkSample& s);
    Decision on_override(double t_s, const std::string& resolution_label);

    const StreamConfig& current() const { return current_; }

private:
    Decision decide(const WindowStats& stats);
    Decision pin(Decision d) const;

    const SessionConfig& cfg_;
    AdvisorTransport* transport_;
    SampleWindow window_;
    FluctuationTracker tracker_;
    HysteresisFilter hysteresis_;
    StreamConfig current_;
    std::optional<Resolution> pinned_;
};

struct SessionLogs {
    MetricsCsvWriter* metrics = nullptr;
    DecisionCsvWriter* decisions = nullptr;
    SimEventSink* events = nullptr;
};

// Trace-driven session in virtual time: the monitor activity walks the
// trace at the probe interval, the playback activity consumes the full
// ordered decision stream. Deterministic under replay.
SessionReport run_session(const SessionConfig& cfg, SessionLogs* logs = nullptr);

// Live-probe session: a monitor thread samples real counters (and an
// optional round-trip target) on the wall clock and hands samples and
// decisions to the playback activity over ordered queues; playback runs
// the model over the measured bandwidth once the stream ends. Sources are
// injectable so tests can run without touching real interfaces.
struct LiveProbeOptions {
    double duration_s = 60;
    double interval_s = 1.0;
    std::string iface;            // empty -> all non-loopback interfaces
    std::string latency_url;      // empty -> no latency probing
    int latency_timeout_ms = 2000;
    CounterSource* counter_source = nullptr;   // default: /proc/net/dev
    RoundTripSource* rtt_source = nullptr;     // default: HTTP GET latency_url
};

SessionReport run_live_session(const SessionConfig& policy_cfg,
                               const LiveProbeOptions& live,
                               SessionLogs* logs = nullptr);

// Wall-clock probe loop -> metrics CSV rows. Returns the samples taken.
std::vector<NetworkSample> run_probe(const LiveProbeOptions& live,
                                     MetricsCsvWriter* metrics);

// Re-decides over previously recorded samples (a metrics CSV), emitting
// the decision stream the policy would have produced.
std::vector<Decision> replay_decide(const SessionConfig& cfg,
                                    const std::vector<NetworkSample>& samples,
                                    SessionLogs* logs = nullptr);

} // namespace abr
