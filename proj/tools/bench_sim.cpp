// Benchmarks the event-driven playback simulator against the fixed-step
// reference model over a shared batch of randomized sessions, and checks
// that the two agree on stall behavior while timing both.

#include "abr/core.hpp"
#include "abr/sim.hpp"

#include "generators.hpp"
#include "reference_sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace

int main(int argc, char** argv) {
    const int runs = argc > 1 ? std::atoi(argv[1]) : 50;
    const double step_s = argc > 2 ? std::atof(argv[2]) : 0.001;
    std::mt19937 rng(20240901);

    const abr::BitrateLadder ladder = abr::default_ladder();
    std::vector<abr::SimConfig> configs;
    std::vector<std::vector<abr::Decision>> streams;
    for (int i = 0; i < runs; ++i) {
        abr::SimConfig cfg;
        cfg.trace = abr::testgen::random_trace(rng, 120.0, 0, 16000);
        cfg.session_duration_s = 120.0;
        cfg.initial.resolution = ladder.rungs.front();
        cfg.initial.buffer_target_bytes = abr::buffer_bytes_from_seconds(
            2.0, cfg.initial.resolution.nominal_bitrate_kbps);
        configs.push_back(std::move(cfg));
        streams.push_back(abr::testgen::random_decisions(rng, ladder, 120.0));
    }

    std::vector<abr::SessionReport> event_reports;
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < runs; ++i) {
        event_reports.push_back(abr::simulate(configs[i], streams[i]));
    }
    const double event_s = seconds_since(start);

    std::vector<abr::ref::ReferenceResult> ref_results;
    start = std::chrono::steady_clock::now();
    for (int i = 0; i < runs; ++i) {
        ref_results.push_back(abr::ref::reference_simulate(configs[i], streams[i], step_s));
    }
    const double ref_s = seconds_since(start);

    int mismatches = 0;
    double worst_stall_delta = 0;
    for (int i = 0; i < runs; ++i) {
        if (event_reports[i].stall_count != ref_results[i].stall_count) {
            ++mismatches;
        }
        worst_stall_delta = std::max(
            worst_stall_delta,
            std::abs(event_reports[i].total_stall_s - ref_results[i].total_stall_s));
    }

    std::printf("runs                 : %d (120 s sessions)\n", runs);
    std::printf("event-driven         : %8.3f ms total, %7.3f ms/run\n",
                event_s * 1e3, event_s * 1e3 / runs);
    std::printf("fixed-step (%4.0f us) : %8.3f ms total, %7.3f ms/run\n",
                step_s * 1e6, ref_s * 1e3, ref_s * 1e3 / runs);
    std::printf("speedup              : %.1fx\n", ref_s / event_s);
    std::printf("stall-count mismatch : %d, worst total-stall delta %.4f s\n",
                mismatches, worst_stall_delta);
    return mismatches == 0 ? 0 : 1;
}
