#include "abr/sim.hpp"

#include "abr/csv.hpp"
#include "abr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace abr {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kByteEps = 1e-6;

std::int64_t segment_bytes(const Resolution& rung, double segment_duration_s) {
    return std::llround(rung.nominal_bitrate_kbps * segment_duration_s * 1000.0 / 8.0);
}

struct BufferedSegment {
    double media_s;
    int height;
};

} // namespace

void SimConfig::validate() const {
    trace.validate();
    if (segment_duration_s <= 0) {
        throw ConfigError("segment duration must be positive");
    }
    if (session_duration_s <= 0) {
        throw ConfigError("session duration must be positive");
    }
    if (session_duration_s > trace.duration_s + kTimeEps) {
        throw TraceTooShort("trace covers " + csv::format_exact(trace.duration_s) +
                            " s but the session needs " +
                            csv::format_exact(session_duration_s) + " s");
    }
    if (initial.resolution.nominal_bitrate_kbps <= 0 ||
        initial.buffer_target_bytes <= 0) {
        throw ConfigError("initial stream config must have positive bitrate and buffer");
    }
    const double initial_target_s = buffer_seconds_from_bytes(
        initial.buffer_target_bytes, initial.resolution.nominal_bitrate_kbps);
    if (startup_threshold_s > initial_target_s + kTimeEps) {
        throw ConfigError("startup threshold above the initial buffer target "
                          "would never fill");
    }
}

SessionReport simulate(const SimConfig& cfg, const std::vector<Decision>& decisions,
                       SimEventSink* sink) {
    cfg.validate();
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const Decision& d = decisions[i];
        if (d.decided_at_s < 0 || d.decided_at_s > cfg.session_duration_s + kTimeEps) {
            throw InvalidDecisionOrder("decision at " +
                                       csv::format_exact(d.decided_at_s) +
                                       " s lies outside the session");
        }
        if (i > 0 && d.decided_at_s < decisions[i - 1].decided_at_s) {
            throw InvalidDecisionOrder("decision timestamps must be non-decreasing");
        }
        if (d.config.resolution.nominal_bitrate_kbps <= 0 ||
            d.config.buffer_target_bytes <= 0) {
            throw ConfigError("decision carries a non-positive bitrate or buffer");
        }
    }

    const double t_end = cfg.session_duration_s;
    const double seg_s = cfg.segment_duration_s;

    // Applied stream parameters.
    Resolution rung = cfg.initial.resolution;
    double target_s = buffer_seconds_from_bytes(cfg.initial.buffer_target_bytes,
                                                rung.nominal_bitrate_kbps);
    double startup_thr = cfg.startup_threshold_s > 0 ? cfg.startup_threshold_s : target_s;
    double resume_thr = startup_thr;

    // Player state.
    double now = 0;
    std::deque<BufferedSegment> buffer;
    double buffer_s = 0;
    bool playing = false;
    bool started = false;
    bool fetching = false;
    double fetch_remaining = 0;
    std::int64_t fetch_total = 0;
    Resolution fetch_rung = rung;

    std::size_t trace_idx = 0;
    std::size_t decision_idx = 0;

    SessionReport report;
    report.session_duration_s = t_end;
    report.decisions = decisions;
    double height_time = 0;

    const auto emit = [&](double t, std::string_view kind) {
        if (sink) {
            sink->on_event(t, kind, rung.label, buffer_s);
        }
    };

    const auto bandwidth_at = [&](std::size_t idx) {
        return cfg.trace.points[idx].bandwidth_kbps * 1000.0 / 8.0; // bytes/s
    };

    const auto drain = [&](double dt) {
        double left = dt;
        while (left > kTimeEps && !buffer.empty()) {
            BufferedSegment& front = buffer.front();
            const double take = std::min(left, front.media_s);
            height_time += take * front.height;
            report.played_s += take;
            front.media_s -= take;
            left -= take;
            if (front.media_s <= kTimeEps) {
                buffer.pop_front();
            }
        }
        buffer_s = 0;
        for (const BufferedSegment& b : buffer) {
            buffer_s += b.media_s;
        }
    };

    const auto start_fetch_if_needed = [&](double t) {
        if (fetching || t >= t_end - kTimeEps) {
            return;
        }
        const bool below_target = buffer_s < target_s - kTimeEps;
        const bool draining_through_target = playing && buffer_s <= target_s + kTimeEps;
        if (below_target || draining_through_target) {
            fetching = true;
            fetch_rung = rung;
            fetch_total = segment_bytes(fetch_rung, seg_s);
            fetch_remaining = static_cast<double>(fetch_total);
            emit(t, "fetch-start");
        }
    };

    // Applies the newest due decision; earlier due ones are superseded.
    const auto apply_due_decisions = [&](double t) {
        if (fetching) {
            return;
        }
        const Decision* chosen = nullptr;
        while (decision_idx < decisions.size() &&
               decisions[decision_idx].decided_at_s <= t + kTimeEps) {
            if (chosen) {
                emit(t, "decision-superseded");
            }
            chosen = &decisions[decision_idx];
            ++decision_idx;
        }
        if (!chosen) {
            return;
        }
        if (chosen->config.resolution.label != rung.label) {
            report.switches.push_back({t, rung.label, chosen->config.resolution.label});
            rung = chosen->config.resolution;
            emit(t, "switch");
        }
        target_s = buffer_seconds_from_bytes(chosen->config.buffer_target_bytes,
                                             rung.nominal_bitrate_kbps);
        resume_thr = target_s;
        report.applied.push_back(*chosen);
        emit(t, "decision-applied");
    };

    const auto update_playback = [&](double t) {
        if (!playing && buffer_s >= resume_thr - kTimeEps && resume_thr > 0) {
            playing = true;
            if (!started) {
                started = true;
                report.startup_s = t;
                emit(t, "playback-start");
            } else {
                report.stalls.back().end_s = t;
                emit(t, "stall-end");
            }
        }
        if (playing && buffer_s <= kTimeEps) {
            playing = false;
            buffer.clear(); // drop numeric dust below the epsilon
            buffer_s = 0;
            report.stalls.push_back({t, t_end});
            emit(t, "stall-start");
        }
    };

    apply_due_decisions(0);
    start_fetch_if_needed(0);

    while (now < t_end - kTimeEps) {
        double next = t_end;

        if (trace_idx + 1 < cfg.trace.points.size()) {
            next = std::min(next, cfg.trace.points[trace_idx + 1].t_s);
        }
        if (fetching) {
            const double rate = bandwidth_at(trace_idx);
            if (rate > 0) {
                next = std::min(next, now + fetch_remaining / rate);
            }
        }
        if (playing) {
            next = std::min(next, now + buffer_s);
        }
        if (!fetching && playing && buffer_s > target_s + kTimeEps) {
            next = std::min(next, now + (buffer_s - target_s));
        }
        // Decisions already due wait for the in-flight segment; only future
        // instants are events.
        if (decision_idx < decisions.size() &&
            decisions[decision_idx].decided_at_s > now + kTimeEps) {
            next = std::min(next, decisions[decision_idx].decided_at_s);
        }

        const double dt = next - now;
        if (dt > 0) {
            if (fetching) {
                fetch_remaining -= bandwidth_at(trace_idx) * dt;
            }
            if (playing) {
                drain(dt);
            }
        }
        now = next;

        while (trace_idx + 1 < cfg.trace.points.size() &&
               cfg.trace.points[trace_idx + 1].t_s <= now + kTimeEps) {
            ++trace_idx;
        }

        if (now >= t_end - kTimeEps) {
            break;
        }

        if (fetching && fetch_remaining <= kByteEps) {
            fetching = false;
            buffer.push_back({seg_s, fetch_rung.height});
            buffer_s += seg_s;
            report.bytes_downloaded += fetch_total;
            ++report.segments_completed;
            emit(now, "segment-complete");
        }
        apply_due_decisions(now);
        update_playback(now);
        start_fetch_if_needed(now);
    }

    if (!started) {
        report.startup_s = t_end;
    }
    if (!report.stalls.empty() && report.stalls.back().end_s > t_end) {
        report.stalls.back().end_s = t_end;
    }

    report.stall_count = static_cast<int>(report.stalls.size());
    for (const StallEvent& s : report.stalls) {
        report.total_stall_s += s.end_s - s.start_s;
    }
    report.rebuffer_ratio = report.total_stall_s / t_end;
    report.switch_count = static_cast<int>(report.switches.size());
    report.time_weighted_avg_height =
        report.played_s > kTimeEps ? height_time / report.played_s : 0;
    emit(t_end, "session-end");
    return report;
}

double compute_qoe(const SessionReport& report, const QoeWeights& weights) {
    const double quality = report.time_weighted_avg_height / 1080.0;
    const double switch_rate =
        report.decisions.empty()
            ? 0.0
            : static_cast<double>(report.switch_count) /
                  static_cast<double>(report.decisions.size());
    return weights.quality * quality - weights.rebuffer * report.rebuffer_ratio -
           weights.switching * switch_rate;
}

} // namespace abr
