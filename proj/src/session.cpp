#include "abr/session.hpp"

#include "abr/csv.hpp"
#include "abr/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace abr {

StreamConfig initial_config(const RulePolicyConfig& rule) {
    StreamConfig cfg;
    cfg.resolution = rule.ladder.rungs.front();
    cfg.buffer_target_bytes = buffer_bytes_from_seconds(
        rule.base_buffer_s, cfg.resolution.nominal_bitrate_kbps);
    return cfg;
}

Decider::Decider(const SessionConfig& cfg, AdvisorTransport* transport)
    : cfg_(cfg),
      transport_(transport),
      window_(cfg.window_s),
      tracker_(cfg.fluct_rel_threshold),
      hysteresis_(),
      current_(initial_config(cfg.rule)) {
    cfg.rule.validate();
    if (cfg.policy == PolicyKind::advisor && transport == nullptr) {
        throw ConfigError("advisor policy needs a transport");
    }
}

Decision Decider::decide(const WindowStats& stats) {
    if (cfg_.policy == PolicyKind::advisor) {
        const AdvisorRequest req =
            build_advisor_request(stats, current_, cfg_.rule.ladder);
        return advisor_decide(*transport_, req, cfg_.rule, cfg_.advisor_timeout_ms,
                              stats.window_end_s);
    }
    return rule_decide(cfg_.rule, stats);
}

Decision Decider::pin(Decision d) const {
    if (!pinned_ || d.config.resolution == *pinned_) {
        return d;
    }
    const double buffer_s = buffer_seconds_from_bytes(
        d.config.buffer_target_bytes, d.config.resolution.nominal_bitrate_kbps);
    d.config.resolution = *pinned_;
    d.config.buffer_target_bytes =
        buffer_bytes_from_seconds(buffer_s, pinned_->nominal_bitrate_kbps);
    d.source = DecisionSource::user_override;
    d.reason = reason::override_pinned;
    return d;
}

std::optional<Decision> Decider::on_sample(const NetworkSample& s) {
    std::optional<Decision> out;
    if (cfg_.averaging) {
        std::optional<WindowStats> stats = window_.push_sample(s);
        if (!stats) {
            return std::nullopt;
        }
        const Fluctuation fluct = tracker_.classify(*stats);
        out = pin(hysteresis_.apply(decide(*stats), fluct));
    } else {
        WindowStats stats;
        stats.window_start_s = s.timestamp_s - cfg_.probe_interval_s;
        stats.window_end_s = s.timestamp_s;
        stats.avg_kbps_in = s.kbps_in;
        stats.avg_latency_ms = s.latency_ms;
        stats.sample_count = 1;
        out = pin(decide(stats));
    }
    current_ = out->config;
    return out;
}

Decision Decider::on_override(double t_s, const std::string& resolution_label) {
    const int rung = cfg_.rule.ladder.index_of(resolution_label);
    if (rung < 0) {
        throw ConfigError("override resolution '" + resolution_label +
                          "' is not on the ladder");
    }
    pinned_ = cfg_.rule.ladder.rungs[static_cast<std::size_t>(rung)];

    const double buffer_s = buffer_seconds_from_bytes(
        current_.buffer_target_bytes, current_.resolution.nominal_bitrate_kbps);
    Decision d;
    d.config.resolution = *pinned_;
    d.config.buffer_target_bytes =
        buffer_bytes_from_seconds(buffer_s, pinned_->nominal_bitrate_kbps);
    d.source = DecisionSource::user_override;
    d.reason = reason::user_override;
    d.decided_at_s = t_s;
    current_ = d.config;
    return d;
}

namespace {

void validate_session(const SessionConfig& cfg) {
    cfg.rule.validate();
    cfg.trace.validate();
    if (cfg.duration_s <= 0) {
        throw ConfigError("session duration must be positive");
    }
    if (cfg.duration_s > cfg.trace.duration_s + 1e-9) {
        throw TraceTooShort("trace covers " + csv::format_exact(cfg.trace.duration_s) +
                            " s but the session needs " +
                            csv::format_exact(cfg.duration_s) + " s");
    }
    if (cfg.probe_interval_s <= 0) {
        throw ConfigError("probe interval must be positive");
    }
    if (cfg.policy == PolicyKind::advisor && cfg.advisor_url.empty()) {
        throw ConfigError("advisor policy needs --advisor-url");
    }
    for (const OverrideEvent& ev : cfg.overrides) {
        if (ev.t_s < 0 || ev.t_s > cfg.duration_s) {
            throw ConfigError("override time outside the session");
        }
    }
}

SimConfig make_sim_config(const SessionConfig& cfg) {
    SimConfig sim;
    sim.segment_duration_s = cfg.segment_duration_s;
    sim.startup_threshold_s = cfg.startup_threshold_s;
    sim.trace = cfg.trace;
    sim.session_duration_s = cfg.duration_s;
    sim.initial = initial_config(cfg.rule);
    return sim;
}

} // namespace

SessionReport run_session(const SessionConfig& cfg, SessionLogs* logs) {
    validate_session(cfg);

    std::unique_ptr<AdvisorTransport> transport;
    if (cfg.policy == PolicyKind::advisor) {
        transport = std::make_unique<HttpAdvisorTransport>(cfg.advisor_url);
    }
    Decider decider(cfg, transport.get());

    std::vector<OverrideEvent> overrides = cfg.overrides;
    std::sort(overrides.begin(), overrides.end(),
              [](const OverrideEvent& a, const OverrideEvent& b) { return a.t_s < b.t_s; });
    std::size_t override_idx = 0;

    std::vector<Decision> decisions;
    const auto push_decision = [&](const Decision& d) {
        decisions.push_back(d);
        if (logs && logs->decisions) {
            logs->decisions->log_decision(d);
        }
    };

    // Activity A: probe -> window -> policy, in virtual sample time.
    const long ticks = std::lround(std::floor(cfg.duration_s / cfg.probe_interval_s + 1e-9));
    for (long i = 0; i <= ticks; ++i) {
        const double t = static_cast<double>(i) * cfg.probe_interval_s;
        while (override_idx < overrides.size() && overrides[override_idx].t_s <= t) {
            push_decision(decider.on_override(overrides[override_idx].t_s,
                                              overrides[override_idx].resolution_label));
            ++override_idx;
        }
        const NetworkSample s = trace_sample(cfg.trace, t);
        if (logs && logs->metrics) {
            logs->metrics->log_sample(s);
        }
        if (std::optional<Decision> d = decider.on_sample(s)) {
            push_decision(*d);
        }
    }
    while (override_idx < overrides.size()) {
        push_decision(decider.on_override(overrides[override_idx].t_s,
                                          overrides[override_idx].resolution_label));
        ++override_idx;
    }

    // Activity B: the playback model consumes the ordered decision stream.
    return simulate(make_sim_config(cfg), decisions, logs ? logs->events : nullptr);
}

std::vector<Decision> replay_decide(const SessionConfig& cfg,
                                    const std::vector<NetworkSample>& samples,
                                    SessionLogs* logs) {
    cfg.rule.validate();
    std::unique_ptr<AdvisorTransport> transport;
    if (cfg.policy == PolicyKind::advisor) {
        if (cfg.advisor_url.empty()) {
            throw ConfigError("advisor policy needs --advisor-url");
        }
        transport = std::make_unique<HttpAdvisorTransport>(cfg.advisor_url);
    }
    Decider decider(cfg, transport.get());
    std::vector<Decision> decisions;
    for (const NetworkSample& s : samples) {
        if (std::optional<Decision> d = decider.on_sample(s)) {
            decisions.push_back(*d);
            if (logs && logs->decisions) {
                logs->decisions->log_decision(*d);
            }
        }
    }
    return decisions;
}

namespace {

// Ordered, lossless handoff between the two live activities.
template <typename T>
class Channel {
public:
    void push(T value) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            items_.push_back(std::move(value));
        }
        cv_.notify_one();
    }

    void close() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    std::optional<T> pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this] { return closed_ || !items_.empty(); });
        if (items_.empty()) {
            return std::nullopt;
        }
        T value = std::move(items_.front());
        items_.pop_front();
        return value;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> items_;
    bool closed_ = false;
};

double steady_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

std::vector<NetworkSample> run_probe(const LiveProbeOptions& live,
                                     MetricsCsvWriter* metrics) {
    if (live.interval_s <= 0 || live.duration_s <= 0) {
        throw ConfigError("probe interval and duration must be positive");
    }
    ProcNetDevSource default_counters(live.iface);
    CounterSource* counters =
        live.counter_source ? live.counter_source : &default_counters;
    std::unique_ptr<HttpRoundTripSource> default_rtt;
    RoundTripSource* rtt = live.rtt_source;
    if (!rtt && !live.latency_url.empty()) {
        default_rtt = std::make_unique<HttpRoundTripSource>(live.latency_url);
        rtt = default_rtt.get();
    }

    CounterRateProbe probe(*counters);
    std::vector<NetworkSample> samples;
    const double start = steady_seconds();
    probe.poll(); // baseline
    while (true) {
        std::this_thread::sleep_for(std::chrono::duration<double>(live.interval_s));
        const double t = steady_seconds() - start;
        if (t > live.duration_s + live.interval_s / 2) {
            break;
        }
        NetworkSample s;
        s.timestamp_s = t;
        if (std::optional<DataRate> rate = probe.poll()) {
            s.kbps_in = rate->kbps_in;
            s.kbps_out = rate->kbps_out;
        }
        if (rtt) {
            s.latency_ms = measure_latency(*rtt, live.latency_timeout_ms);
        }
        if (metrics) {
            metrics->log_sample(s);
        }
        samples.push_back(std::move(s));
        if (t >= live.duration_s) {
            break;
        }
    }
    return samples;
}

SessionReport run_live_session(const SessionConfig& policy_cfg,
                               const LiveProbeOptions& live,
                               SessionLogs* logs) {
    Channel<NetworkSample> sample_channel;
    Channel<Decision> decision_channel;

    std::unique_ptr<AdvisorTransport> transport;
    if (policy_cfg.policy == PolicyKind::advisor) {
        if (policy_cfg.advisor_url.empty()) {
            throw ConfigError("advisor policy needs --advisor-url");
        }
        transport = std::make_unique<HttpAdvisorTransport>(policy_cfg.advisor_url);
    }

    std::exception_ptr monitor_error;

    // Activity A: wall-clock probing and deciding.
    std::thread monitor([&] {
        try {
            Decider decider(policy_cfg, transport.get());
            std::vector<OverrideEvent> overrides = policy_cfg.overrides;
            std::sort(overrides.begin(), overrides.end(),
                      [](const OverrideEvent& a, const OverrideEvent& b) {
                          return a.t_s < b.t_s;
                      });
            std::size_t override_idx = 0;

            ProcNetDevSource default_counters(live.iface);
            CounterSource* counters =
                live.counter_source ? live.counter_source : &default_counters;
            std::unique_ptr<HttpRoundTripSource> default_rtt;
            RoundTripSource* rtt = live.rtt_source;
            if (!rtt && !live.latency_url.empty()) {
                default_rtt = std::make_unique<HttpRoundTripSource>(live.latency_url);
                rtt = default_rtt.get();
            }

            CounterRateProbe probe(*counters);
            probe.poll();
            const double start = steady_seconds();
            while (true) {
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(live.interval_s));
                const double t = steady_seconds() - start;
                NetworkSample s;
                s.timestamp_s = t;
                if (std::optional<DataRate> rate = probe.poll()) {
                    s.kbps_in = rate->kbps_in;
                    s.kbps_out = rate->kbps_out;
                }
                if (rtt) {
                    s.latency_ms = measure_latency(*rtt, live.latency_timeout_ms);
                }
                while (override_idx < overrides.size() &&
                       overrides[override_idx].t_s <= t) {
                    decision_channel.push(
                        decider.on_override(overrides[override_idx].t_s,
                                            overrides[override_idx].resolution_label));
                    ++override_idx;
                }
                if (logs && logs->metrics) {
                    logs->metrics->log_sample(s);
                }
                sample_channel.push(s);
                if (std::optional<Decision> d = decider.on_sample(s)) {
                    decision_channel.push(*d);
                }
                if (t >= live.duration_s) {
                    break;
                }
            }
        } catch (...) {
            monitor_error = std::current_exception();
        }
        sample_channel.close();
        decision_channel.close();
    });

    // Activity B: consume both streams in order, then run the playback
    // model over the measured bandwidth.
    std::vector<NetworkSample> samples;
    std::vector<Decision> decisions;
    std::thread playback([&] {
        while (std::optional<NetworkSample> s = sample_channel.pop()) {
            samples.push_back(*s);
        }
        while (std::optional<Decision> d = decision_channel.pop()) {
            decisions.push_back(*d);
            if (logs && logs->decisions) {
                logs->decisions->log_decision(*d);
            }
        }
    });

    monitor.join();
    playback.join();
    if (monitor_error) {
        std::rethrow_exception(monitor_error);
    }
    if (samples.size() < 2) {
        throw ConfigError("live session too short to model playback");
    }

    Trace trace;
    double last_latency = 1.0;
    const double t0 = samples.front().timestamp_s;
    for (const NetworkSample& s : samples) {
        if (s.latency_ms) {
            last_latency = *s.latency_ms;
        }
        trace.points.push_back({s.timestamp_s - t0, s.kbps_in, last_latency});
    }
    trace.duration_s = trace.points.back().t_s;

    SimConfig sim;
    sim.segment_duration_s = policy_cfg.segment_duration_s;
    sim.startup_threshold_s = policy_cfg.startup_threshold_s;
    sim.trace = trace;
    sim.session_duration_s = trace.duration_s;
    sim.initial = initial_config(policy_cfg.rule);

    std::vector<Decision> shifted = decisions;
    for (Decision& d : shifted) {
        d.decided_at_s = std::clamp(d.decided_at_s - t0, 0.0, trace.duration_s);
    }
    return simulate(sim, shifted, logs ? logs->events : nullptr);
}

} // namespace abr
