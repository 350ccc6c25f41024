#include "abr/policy.hpp"

#include "abr/errors.hpp"

#include <algorithm>
#include <cmath>

namespace abr {

void RulePolicyConfig::validate() const {
    ladder.validate();
    if (latency_threshold_ms <= 0 || base_buffer_s <= 0 ||
        buffer_growth_per_100ms < 0 || buffer_min_s <= 0 || buffer_max_s <= 0) {
        throw ConfigError("rule policy parameters must be positive");
    }
    if (buffer_min_s > base_buffer_s || base_buffer_s > buffer_max_s) {
        throw ConfigError("buffer bounds must satisfy min <= base <= max");
    }
}

double rule_buffer_seconds(const RulePolicyConfig& cfg,
                           std::optional<double> avg_latency_ms) {
    if (!avg_latency_ms || *avg_latency_ms <= cfg.latency_threshold_ms) {
        return cfg.base_buffer_s;
    }
    const double excess_ms = *avg_latency_ms - cfg.latency_threshold_ms;
    const double grown = cfg.base_buffer_s + cfg.buffer_growth_per_100ms * excess_ms / 100.0;
    return std::clamp(grown, cfg.buffer_min_s, cfg.buffer_max_s);
}

Decision rule_decide(const RulePolicyConfig& cfg, const WindowStats& stats) {
    const Resolution& res = ladder_lookup(cfg.ladder, stats.avg_kbps_in);
    const bool latency_high =
        stats.avg_latency_ms && *stats.avg_latency_ms > cfg.latency_threshold_ms;
    const double buffer_s = rule_buffer_seconds(cfg, stats.avg_latency_ms);

    Decision d;
    d.config.resolution = res;
    d.config.buffer_target_bytes =
        buffer_bytes_from_seconds(buffer_s, res.nominal_bitrate_kbps);
    d.source = DecisionSource::rule_based;
    d.reason = latency_high ? reason::latency_high : reason::rate_select;
    d.decided_at_s = stats.window_end_s;
    return d;
}

AdvisorRequest build_advisor_request(const WindowStats& stats,
                                     const StreamConfig& current,
                                     const BitrateLadder& ladder) {
    AdvisorRequest req;
    req.avg_latency_ms = stats.avg_latency_ms;
    req.avg_kbps_in = stats.avg_kbps_in;
    req.current_resolution_label = current.resolution.label;
    req.current_buffer_bytes = current.buffer_target_bytes;
    for (const Resolution& r : ladder.rungs) {
        req.ladder_labels.push_back(r.label);
    }
    return req;
}

namespace {

Decision fallback_decision(const AdvisorRequest& req, const RulePolicyConfig& cfg,
                           double decided_at_s, const char* why) {
    WindowStats stats;
    stats.avg_kbps_in = req.avg_kbps_in;
    stats.avg_latency_ms = req.avg_latency_ms;
    stats.window_end_s = decided_at_s;
    stats.sample_count = 1;
    Decision d = rule_decide(cfg, stats);
    d.source = DecisionSource::advisor_fallback;
    d.reason = why;
    return d;
}

} // namespace

Decision advisor_decide(AdvisorTransport& transport, const AdvisorRequest& req,
                        const RulePolicyConfig& fallback, int timeout_ms,
                        double decided_at_s) {
    AdvisorTransport::Result result;
    try {
        result = transport.post(advisor_request_to_json(req), timeout_ms);
    } catch (const std::exception&) {
        return fallback_decision(req, fallback, decided_at_s, reason::transport_error);
    }
    if (!result.body) {
        const char* why = result.failure == AdvisorTransport::Failure::timeout
                              ? reason::timeout
                              : reason::transport_error;
        return fallback_decision(req, fallback, decided_at_s, why);
    }

    AdvisorResponse resp;
    try {
        resp = advisor_response_from_json(*result.body);
    } catch (const std::exception&) {
        return fallback_decision(req, fallback, decided_at_s, reason::invalid_response);
    }
    const int rung = fallback.ladder.index_of(resp.resolution_label);
    if (rung < 0 || resp.buffer_bytes <= 0) {
        return fallback_decision(req, fallback, decided_at_s, reason::invalid_response);
    }

    Decision d;
    d.config.resolution = fallback.ladder.rungs[static_cast<std::size_t>(rung)];
    d.config.buffer_target_bytes = resp.buffer_bytes;
    d.source = DecisionSource::advisor;
    d.reason = reason::advisor_ok;
    d.decided_at_s = decided_at_s;
    return d;
}

HysteresisFilter::HysteresisFilter(int sustain_windows)
    : sustain_windows_(sustain_windows) {
    if (sustain_windows < 1) {
        throw ConfigError("sustain window count must be >= 1");
    }
}

Decision HysteresisFilter::hold(const Decision& candidate) {
    // Keep the applied rung; the buffer target still tracks the candidate,
    // re-expressed in bytes at the kept rung's nominal bitrate.
    const double buffer_s = buffer_seconds_from_bytes(
        candidate.config.buffer_target_bytes,
        candidate.config.resolution.nominal_bitrate_kbps);
    Decision held = candidate;
    held.config.resolution = current_->resolution;
    held.config.buffer_target_bytes = buffer_bytes_from_seconds(
        buffer_s, current_->resolution.nominal_bitrate_kbps);
    held.reason = reason::hysteresis_hold;
    current_ = held.config;
    return held;
}

Decision HysteresisFilter::apply(const Decision& candidate, Fluctuation fluct) {
    if (!current_) {
        current_ = candidate.config;
        pending_label_.clear();
        pending_count_ = 0;
        return candidate;
    }
    if (candidate.config.resolution == current_->resolution) {
        pending_label_.clear();
        pending_count_ = 0;
        current_ = candidate.config;
        return candidate;
    }

    switch (fluct) {
    case Fluctuation::transient:
        pending_label_.clear();
        pending_count_ = 0;
        return hold(candidate);
    case Fluctuation::shifted:
        pending_label_.clear();
        pending_count_ = 0;
        current_ = candidate.config;
        return candidate;
    case Fluctuation::stable:
        break;
    }

    // Stable window proposing a different rung: require it to be sustained.
    if (candidate.config.resolution.label == pending_label_) {
        ++pending_count_;
    } else {
        pending_label_ = candidate.config.resolution.label;
        pending_count_ = 1;
    }
    if (pending_count_ >= sustain_windows_) {
        pending_label_.clear();
        pending_count_ = 0;
        current_ = candidate.config;
        return candidate;
    }
    return hold(candidate);
}

} // namespace abr
