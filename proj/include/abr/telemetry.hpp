#pragma once

#include "abr/core.hpp"
#include "abr/sim.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace abr {

// Appends one row per sample to `t_s,latency_ms,kbps_in,kbps_out`, two
// decimal places, flushed per row so a crash loses at most the row in
// progress. A failed probe leaves the latency field empty, never 0.
class MetricsCsvWriter {
public:
    explicit MetricsCsvWriter(const std::string& path);

    void log_sample(const NetworkSample& s);
    void close();
    bool is_open() const { return open_; }

private:
    std::ofstream out_;
    bool open_ = false;
};

std::vector<NetworkSample> read_metrics_csv(const std::string& path);

// `t_s,source,resolution,buffer_bytes,reason`, one row per emitted
// decision.
class DecisionCsvWriter {
public:
    explicit DecisionCsvWriter(const std::string& path);

    void log_decision(const Decision& d);
    void close();

private:
    std::ofstream out_;
    bool open_ = false;
};

// Simulator event log: `t_s,event,resolution,buffer_s`.
class SimEventCsvWriter : public SimEventSink {
public:
    explicit SimEventCsvWriter(const std::string& path);

    void on_event(double t_s, std::string_view kind,
                  std::string_view resolution_label, double buffer_s) override;

private:
    std::ofstream out_;
};

std::string report_to_json(const SessionReport& report);
SessionReport report_from_json(const std::string& body);
void write_report_json(const SessionReport& report, const std::string& path);

// Comparison table over several runs, one row per policy:
// `policy,stall_count,total_stall_s,rebuffer_ratio,switch_count,avg_height,qoe`.
void emit_comparison_csv(const std::vector<std::string>& labels,
                         const std::vector<SessionReport>& reports,
                         const std::string& path);

// Per-run time series for external plotting: <stem>.<label>.decisions.csv
// (t_s,height,buffer_bytes) and <stem>.<label>.stalls.csv (start_s,end_s).
void emit_chart_data(const std::vector<std::string>& labels,
                     const std::vector<SessionReport>& reports,
                     const std::string& stem);

} // namespace abr
