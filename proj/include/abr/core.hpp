#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace abr {

// One rung of a bitrate ladder.
struct Resolution {
    std::string label;             // e.g. "720p"
    int height = 0;                // vertical pixels
    double nominal_bitrate_kbps = 0;

    bool operator==(const Resolution&) const = default;
};

// Ordered set of selectable resolutions plus the minimum average inbound
// data rate (Kbps) required to select each rung. The lowest rung's
// threshold is 0 so some rung is always selectable.
struct BitrateLadder {
    std::vector<Resolution> rungs;
    std::vector<double> selection_threshold_kbps; // parallel to rungs

    bool operator==(const BitrateLadder&) const = default;

    // Throws ConfigError when any invariant is broken: non-empty, lowest
    // threshold exactly 0, thresholds non-decreasing, heights and nominal
    // bitrates strictly increasing, and nominal <= threshold for every
    // rung above the lowest.
    void validate() const;

    std::size_t size() const { return rungs.size(); }
    int index_of(const std::string& label) const; // -1 when absent
};

// Highest rung whose selection threshold is <= avg_kbps. Thresholds are
// inclusive, so 1000 Kbps selects a rung gated at exactly 1000.
const Resolution& ladder_lookup(const BitrateLadder& ladder, double avg_kbps);
std::size_t ladder_lookup_index(const BitrateLadder& ladder, double avg_kbps);

// Built-in ladder: 240p/0, 360p/300, 480p/500, 720p/800, 1080p/1000,
// 2160p/6000 (thresholds in Kbps); nominal bitrates 200..5000.
BitrateLadder default_ladder();

// One probe observation. latency_ms is absent when the round-trip probe
// failed; absence is never encoded as 0.
struct NetworkSample {
    double timestamp_s = 0;
    double kbps_in = 0;
    double kbps_out = 0;
    std::optional<double> latency_ms;

    bool operator==(const NetworkSample&) const = default;
};

// Arithmetic means over one observation window. avg_latency_ms is absent
// when no sample in the window carried a latency value.
struct WindowStats {
    double window_start_s = 0;
    double window_end_s = 0;
    double avg_kbps_in = 0;
    std::optional<double> avg_latency_ms;
    int sample_count = 0;

    bool operator==(const WindowStats&) const = default;
};

// The pair of knobs the controller can set on the player.
struct StreamConfig {
    Resolution resolution;
    std::int64_t buffer_target_bytes = 0;

    bool operator==(const StreamConfig&) const = default;
};

enum class DecisionSource {
    rule_based,
    advisor,
    advisor_fallback,
    user_override,
};

std::string to_string(DecisionSource s);
DecisionSource decision_source_from_string(const std::string& s);

struct Decision {
    StreamConfig config;
    DecisionSource source = DecisionSource::rule_based;
    std::string reason;   // short machine-readable code
    double decided_at_s = 0;

    bool operator==(const Decision&) const = default;
};

// Bytes <-> media-seconds at a rung's nominal bitrate. The session's
// canonical unit is Kbps; bytes convert through the factor 8/1000.
std::int64_t buffer_bytes_from_seconds(double seconds, double nominal_kbps);
double buffer_seconds_from_bytes(std::int64_t bytes, double nominal_kbps);

// Piecewise-constant network condition script. The value at time t is the
// last point with t_s <= t; a boundary belongs to the later point.
struct TracePoint {
    double t_s = 0;
    double bandwidth_kbps = 0;
    double latency_ms = 0;

    bool operator==(const TracePoint&) const = default;
};

struct Trace {
    std::vector<TracePoint> points;
    double duration_s = 0;

    bool operator==(const Trace&) const = default;

    // First point at t_s = 0, strictly increasing times, non-negative
    // bandwidth, positive latency, duration >= last point.
    void validate() const;
};

// CSV: header `t_s,bandwidth_kbps,latency_ms`. The file's duration is the
// last row's t_s.
Trace load_trace(const std::string& path);
void save_trace(const Trace& trace, const std::string& path);

// CSV: header `label,height,nominal_bitrate_kbps,selection_threshold_kbps`,
// one rung per row in ladder order.
BitrateLadder load_ladder(const std::string& path);
void save_ladder(const BitrateLadder& ladder, const std::string& path);

} // namespace abr
