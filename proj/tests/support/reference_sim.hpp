#pragma once

#include "abr/sim.hpp"

#include <cstdint>
#include <vector>

namespace abr::ref {

struct ReferenceResult {
    int stall_count = 0;
    double total_stall_s = 0;
    std::int64_t bytes_downloaded = 0;
    long segments_completed = 0;
    double startup_s = 0;
    bool started = false;
    double final_buffer_s = 0;
};

// Brute-force fixed-step playback model. Deliberately dumb: every step
// moves download progress, drains the buffer, and re-checks state. It
// shares no machinery with the event-driven simulator and exists to check
// it (and to benchmark against).
ReferenceResult reference_simulate(const SimConfig& cfg,
                                   const std::vector<Decision>& decisions,
                                   double step_s = 0.001);

} // namespace abr::ref
