#pragma once

#include "abr/core.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace abr {

// Playback model configuration. Media is fetched in fixed-duration
// segments at the applied rung's nominal bitrate, over the trace's
// piecewise-constant bandwidth.
struct SimConfig {
    double segment_duration_s = 1.0;
    // Buffered seconds required before playback first starts. <= 0 means
    // "the initial config's buffer target".
    double startup_threshold_s = 0;
    Trace trace;
    double session_duration_s = 0;
    StreamConfig initial; // applied until the first decision

    void validate() const;
};

struct StallEvent {
    double start_s = 0;
    double end_s = 0;

    bool operator==(const StallEvent&) const = default;
};

struct SwitchEvent {
    double t_s = 0;
    std::string from_label;
    std::string to_label;

    bool operator==(const SwitchEvent&) const = default;
};

// QoE summary of one simulated session. `decisions` is the full emitted
// stream handed to the player; `applied` is what actually took effect at
// segment boundaries (a lagging player keeps only the latest).
struct SessionReport {
    double session_duration_s = 0;
    int stall_count = 0;
    double total_stall_s = 0;
    double rebuffer_ratio = 0;
    int switch_count = 0;
    double time_weighted_avg_height = 0;
    std::vector<Decision> decisions;
    std::vector<Decision> applied;
    std::vector<StallEvent> stalls;
    std::vector<SwitchEvent> switches;
    std::int64_t bytes_downloaded = 0;
    long segments_completed = 0;
    double startup_s = 0;
    double played_s = 0;
};

// Receives one row per simulator event (fetch/stall/decision/...). Used
// for the per-event CSV log; tests use it to audit segment accounting.
class SimEventSink {
public:
    virtual ~SimEventSink() = default;
    virtual void on_event(double t_s, std::string_view kind,
                          std::string_view resolution_label, double buffer_s) = 0;
};

// Event-driven playback simulation.
//
// Segments complete after their bytes pass through the trace's bandwidth;
// each completed segment adds segment_duration_s of media at its fetched
// quality to a FIFO buffer, which drains one media-second per second
// while playing. Playback stalls when the buffer empties and resumes at
// the current buffer target (the startup threshold before any decision).
// Fetching pauses while the buffer sits at or above the target. Decisions
// take effect at the next segment boundary at or after decided_at_s; an
// in-flight segment always completes at the quality it was requested at.
//
// Deterministic: identical inputs give identical reports.
SessionReport simulate(const SimConfig& cfg, const std::vector<Decision>& decisions,
                       SimEventSink* sink = nullptr);

struct QoeWeights {
    double quality = 1.0;
    double rebuffer = 4.0;
    double switching = 1.0;
};

// score = q * avg_height/1080 - r * rebuffer_ratio - s * switches/decisions
double compute_qoe(const SessionReport& report, const QoeWeights& weights = {});

} // namespace abr
