#include "abr/aggregator.hpp"

#include "abr/errors.hpp"

#include <cmath>

namespace abr {

SampleWindow::SampleWindow(double window_s) : window_s_(window_s) {
    if (window_s <= 0) {
        throw ConfigError("window length must be positive");
    }
}

std::optional<WindowStats> SampleWindow::push_sample(const NetworkSample& s) {
    if (last_timestamp_ && s.timestamp_s <= *last_timestamp_) {
        throw NonMonotonicTimestamp("sample timestamps must strictly increase");
    }
    last_timestamp_ = s.timestamp_s;
    if (!window_start_) {
        window_start_ = s.timestamp_s;
    }
    pending_.push_back(s);
    if (s.timestamp_s - *window_start_ < window_s_) {
        return std::nullopt;
    }

    WindowStats stats;
    stats.window_start_s = *window_start_;
    stats.window_end_s = s.timestamp_s;
    stats.sample_count = static_cast<int>(pending_.size());
    double rate_sum = 0;
    double latency_sum = 0;
    int latency_count = 0;
    for (const NetworkSample& p : pending_) {
        rate_sum += p.kbps_in;
        if (p.latency_ms) {
            latency_sum += *p.latency_ms;
            ++latency_count;
        }
    }
    stats.avg_kbps_in = rate_sum / stats.sample_count;
    if (latency_count > 0) {
        stats.avg_latency_ms = latency_sum / latency_count;
    }

    pending_.clear();
    window_start_ = s.timestamp_s; // next window opens at the emission time
    return stats;
}

std::string to_string(Fluctuation f) {
    switch (f) {
    case Fluctuation::stable: return "stable";
    case Fluctuation::transient: return "transient";
    case Fluctuation::shifted: return "shifted";
    }
    return "stable";
}

FluctuationTracker::FluctuationTracker(double rel_threshold)
    : rel_threshold_(rel_threshold) {
    if (rel_threshold <= 0 || rel_threshold >= 1) {
        throw ConfigError("fluctuation threshold must be in (0, 1)");
    }
}

Fluctuation FluctuationTracker::classify(const WindowStats& curr) {
    const double rate = curr.avg_kbps_in;
    if (!baseline_kbps_) {
        baseline_kbps_ = rate;
        return Fluctuation::stable;
    }

    const auto within = [this](double value, double level) {
        return std::abs(value - level) <= rel_threshold_ * level;
    };

    if (pending_kbps_) {
        if (within(rate, *baseline_kbps_)) {
            // Deviation reversed within one window: a dip the buffer absorbed.
            pending_kbps_.reset();
            baseline_kbps_ = rate;
            return Fluctuation::stable;
        }
        if (within(rate, *pending_kbps_)) {
            // Deviation persisted: adopt the new level.
            baseline_kbps_ = rate;
            pending_kbps_.reset();
            return Fluctuation::shifted;
        }
        // Still moving; keep waiting for it to settle.
        pending_kbps_ = rate;
        return Fluctuation::transient;
    }

    if (within(rate, *baseline_kbps_)) {
        baseline_kbps_ = rate; // track slow drift
        return Fluctuation::stable;
    }
    pending_kbps_ = rate;
    return Fluctuation::transient;
}

} // namespace abr
