#pragma once

#include "abr/core.hpp"

#include <optional>
#include <vector>

namespace abr {

// Tumbling observation window over probe samples. Samples accumulate
// until the span since the last emission reaches window_s; the emitting
// sample is included in the window it closes. Emission timing is driven
// by sample time, never wall time, so replays are deterministic.
class SampleWindow {
public:
    explicit SampleWindow(double window_s = 3.0);

    // Stores the sample; returns stats when this sample closes a window.
    // Samples without a latency value count toward the rate average only.
    // Throws NonMonotonicTimestamp when timestamps do not increase.
    std::optional<WindowStats> push_sample(const NetworkSample& s);

    double window_s() const { return window_s_; }

private:
    double window_s_;
    std::optional<double> window_start_;
    std::optional<double> last_timestamp_;
    std::vector<NetworkSample> pending_;
};

enum class Fluctuation {
    stable,    // within the relative threshold of the accepted level
    transient, // deviation not yet sustained; rely on the buffer
    shifted,   // deviation persisted a full window; follow it
};

std::string to_string(Fluctuation f);

// Classifies each window's average inbound rate against the last accepted
// level. A deviation is held as `transient` for one window; if the next
// window stays at the deviated level it becomes `shifted` (and the level
// is adopted), if it returns to the old level the dip is forgotten. Only
// `shifted` windows should move the resolution.
class FluctuationTracker {
public:
    explicit FluctuationTracker(double rel_threshold = 0.15);

    Fluctuation classify(const WindowStats& curr);

private:
    double rel_threshold_;
    std::optional<double> baseline_kbps_;
    std::optional<double> pending_kbps_;
};

} // namespace abr
