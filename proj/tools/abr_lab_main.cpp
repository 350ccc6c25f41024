// abr-lab: trace-driven adaptive streaming control laboratory.
//
//   run          one session over a trace (or live counters), report + logs
//   compare      several policies over the same trace, comparison table
//   probe        live data-rate/latency sampling to a metrics CSV
//   replay       re-decide over a recorded metrics CSV
//   mock-advisor local advisor protocol server with fixtures

#include "abr/advisor_mock.hpp"
#include "abr/core.hpp"
#include "abr/csv.hpp"
#include "abr/errors.hpp"
#include "abr/session.hpp"
#include "abr/sim.hpp"
#include "abr/telemetry.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace {

struct RunOptions {
    std::string trace_path;
    std::string ladder_path;
    std::string policy = "rule";
    std::string advisor_url;
    int advisor_timeout_ms = 1000;
    double duration_s = 0; // 0 -> full trace
    double interval_s = 1.0;
    double window_s = 3.0;
    double fluct_threshold = 0.15;
    bool no_averaging = false;
    double latency_threshold_ms = 100.0;
    double base_buffer_s = 2.0;
    double buffer_growth = 1.0;
    double buffer_min_s = 2.0;
    double buffer_max_s = 10.0;
    double segment_duration_s = 1.0;
    double startup_threshold_s = 0;
    std::vector<std::string> overrides;
    std::string report_path;
    std::string metrics_path;
    std::string decisions_path;
    std::string events_path;
    bool live = false;
    std::string iface;
    std::string latency_target;
    int latency_timeout_ms = 2000;
};

void add_policy_flags(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--policy", opt.policy, "Decision policy: rule|advisor")
        ->check(CLI::IsMember({"rule", "advisor"}));
    cmd->add_option("--advisor-url", opt.advisor_url,
                    "Advisor endpoint, e.g. http://127.0.0.1:8099/decide");
    cmd->add_option("--advisor-timeout-ms", opt.advisor_timeout_ms,
                    "Advisor consultation timeout");
    cmd->add_option("--window", opt.window_s, "Observation window in seconds");
    cmd->add_option("--fluct-threshold", opt.fluct_threshold,
                    "Relative deviation treated as fluctuation");
    cmd->add_flag("--no-averaging", opt.no_averaging,
                  "Decide on every sample instead of windowed averages");
    cmd->add_option("--ladder", opt.ladder_path, "Bitrate ladder CSV");
    cmd->add_option("--latency-threshold-ms", opt.latency_threshold_ms,
                    "Latency above which the buffer grows");
    cmd->add_option("--base-buffer-s", opt.base_buffer_s, "Base buffer in media seconds");
    cmd->add_option("--buffer-growth-per-100ms", opt.buffer_growth,
                    "Buffer seconds added per 100 ms latency excess");
    cmd->add_option("--buffer-min-s", opt.buffer_min_s, "Buffer lower bound");
    cmd->add_option("--buffer-max-s", opt.buffer_max_s, "Buffer upper bound");
}

abr::SessionConfig make_session_config(const RunOptions& opt) {
    abr::SessionConfig cfg;
    if (!opt.trace_path.empty()) {
        cfg.trace = abr::load_trace(opt.trace_path);
    }
    cfg.duration_s = opt.duration_s > 0 ? opt.duration_s : cfg.trace.duration_s;
    cfg.probe_interval_s = opt.interval_s;
    cfg.window_s = opt.window_s;
    cfg.fluct_rel_threshold = opt.fluct_threshold;
    cfg.averaging = !opt.no_averaging;
    cfg.policy = opt.policy == "advisor" ? abr::PolicyKind::advisor
                                         : abr::PolicyKind::rule;
    if (!opt.ladder_path.empty()) {
        cfg.rule.ladder = abr::load_ladder(opt.ladder_path);
    }
    cfg.rule.latency_threshold_ms = opt.latency_threshold_ms;
    cfg.rule.base_buffer_s = opt.base_buffer_s;
    cfg.rule.buffer_growth_per_100ms = opt.buffer_growth;
    cfg.rule.buffer_min_s = opt.buffer_min_s;
    cfg.rule.buffer_max_s = opt.buffer_max_s;
    cfg.advisor_url = opt.advisor_url;
    cfg.advisor_timeout_ms = opt.advisor_timeout_ms;
    cfg.segment_duration_s = opt.segment_duration_s;
    cfg.startup_threshold_s = opt.startup_threshold_s;
    for (const std::string& spec : opt.overrides) {
        const size_t colon = spec.find(':');
        if (colon == std::string::npos) {
            throw abr::ConfigError("override must be <t_s>:<label>, got '" + spec + "'");
        }
        abr::OverrideEvent ev;
        ev.t_s = std::stod(spec.substr(0, colon));
        ev.resolution_label = spec.substr(colon + 1);
        cfg.overrides.push_back(std::move(ev));
    }
    return cfg;
}

void print_summary(const abr::SessionReport& report) {
    std::printf("session %.0f s: stalls=%d (%.2f s, ratio %.4f) switches=%d "
                "avg_height=%.1f qoe=%.4f\n",
                report.session_duration_s, report.stall_count, report.total_stall_s,
                report.rebuffer_ratio, report.switch_count,
                report.time_weighted_avg_height, abr::compute_qoe(report));
}

abr::SessionReport run_one(const RunOptions& opt) {
    abr::SessionConfig cfg = make_session_config(opt);

    std::unique_ptr<abr::MetricsCsvWriter> metrics;
    std::unique_ptr<abr::DecisionCsvWriter> decisions;
    std::unique_ptr<abr::SimEventCsvWriter> events;
    abr::SessionLogs logs;
    if (!opt.metrics_path.empty()) {
        metrics = std::make_unique<abr::MetricsCsvWriter>(opt.metrics_path);
        logs.metrics = metrics.get();
    }
    if (!opt.decisions_path.empty()) {
        decisions = std::make_unique<abr::DecisionCsvWriter>(opt.decisions_path);
        logs.decisions = decisions.get();
    }
    if (!opt.events_path.empty()) {
        events = std::make_unique<abr::SimEventCsvWriter>(opt.events_path);
        logs.events = events.get();
    }

    abr::SessionReport report;
    if (opt.live) {
        abr::LiveProbeOptions live;
        live.duration_s = opt.duration_s > 0 ? opt.duration_s : 60;
        live.interval_s = opt.interval_s;
        live.iface = opt.iface;
        live.latency_url = opt.latency_target;
        live.latency_timeout_ms = opt.latency_timeout_ms;
        report = abr::run_live_session(cfg, live, &logs);
    } else {
        report = abr::run_session(cfg, &logs);
    }
    if (!opt.report_path.empty()) {
        abr::write_report_json(report, opt.report_path);
    }
    return report;
}

int cmd_run(const RunOptions& opt) {
    abr::SessionReport report = run_one(opt);
    print_summary(report);
    return 0;
}

int cmd_compare(RunOptions opt, const std::string& policies_csv,
                const std::string& out_path, const std::string& emit) {
    std::vector<std::string> labels;
    for (const std::string& field : abr::csv::split(policies_csv)) {
        labels.push_back(field);
    }
    std::vector<abr::SessionReport> reports;
    for (const std::string& label : labels) {
        RunOptions variant = opt;
        variant.metrics_path.clear();
        variant.decisions_path.clear();
        variant.events_path.clear();
        variant.report_path.clear();
        if (label == "rule") {
            variant.policy = "rule";
        } else if (label == "advisor") {
            variant.policy = "advisor";
        } else if (label == "no-averaging") {
            variant.policy = "rule";
            variant.no_averaging = true;
        } else {
            throw abr::ConfigError("unknown policy '" + label +
                                   "' (expected rule, advisor, no-averaging)");
        }
        reports.push_back(run_one(variant));
        std::printf("%-14s ", label.c_str());
        print_summary(reports.back());
    }
    if (!out_path.empty()) {
        abr::emit_comparison_csv(labels, reports, out_path);
        if (emit == "chart-data") {
            abr::emit_chart_data(labels, reports, out_path);
        }
    }
    return 0;
}

int cmd_probe(const RunOptions& opt) {
    abr::LiveProbeOptions live;
    live.duration_s = opt.duration_s > 0 ? opt.duration_s : 60;
    live.interval_s = opt.interval_s;
    live.iface = opt.iface;
    live.latency_url = opt.latency_target;
    live.latency_timeout_ms = opt.latency_timeout_ms;

    std::unique_ptr<abr::MetricsCsvWriter> metrics;
    if (!opt.metrics_path.empty()) {
        metrics = std::make_unique<abr::MetricsCsvWriter>(opt.metrics_path);
    }
    std::vector<abr::NetworkSample> samples = abr::run_probe(live, metrics.get());
    std::printf("captured %zu samples over %.1f s\n", samples.size(), live.duration_s);
    return 0;
}

int cmd_replay(const RunOptions& opt, const std::string& log_path) {
    abr::SessionConfig cfg = make_session_config(opt);
    std::vector<abr::NetworkSample> samples = abr::read_metrics_csv(log_path);

    std::unique_ptr<abr::DecisionCsvWriter> decisions;
    abr::SessionLogs logs;
    if (!opt.decisions_path.empty()) {
        decisions = std::make_unique<abr::DecisionCsvWriter>(opt.decisions_path);
        logs.decisions = decisions.get();
    }
    std::vector<abr::Decision> out = abr::replay_decide(cfg, samples, &logs);
    std::printf("replayed %zu samples -> %zu decisions\n", samples.size(), out.size());
    for (const abr::Decision& d : out) {
        std::printf("  t=%.2f %s %s buffer=%lld (%s)\n", d.decided_at_s,
                    abr::to_string(d.source).c_str(), d.config.resolution.label.c_str(),
                    static_cast<long long>(d.config.buffer_target_bytes),
                    d.reason.c_str());
    }
    return 0;
}

std::atomic<bool> g_stop{false};

int cmd_mock_advisor(const std::string& fixtures_path, int port,
                     const std::string& behavior_spec) {
    int delay_ms = 0;
    const abr::MockBehavior behavior =
        abr::mock_behavior_from_string(behavior_spec, delay_ms);
    abr::MockAdvisorServer server(abr::load_fixture_table(fixtures_path), behavior,
                                  delay_ms);
    server.start(port);
    std::printf("mock advisor listening on %s (behavior %s)\n", server.url().c_str(),
                behavior_spec.c_str());
    std::fflush(stdout);
    std::signal(SIGINT, [](int) { g_stop.store(true); });
    std::signal(SIGTERM, [](int) { g_stop.store(true); });
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive streaming control lab"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Run one streaming session");
    run->add_option("--trace", run_opt.trace_path, "Trace CSV (t_s,bandwidth_kbps,latency_ms)");
    run->add_option("--duration", run_opt.duration_s, "Session seconds (default: full trace)");
    run->add_option("--interval", run_opt.interval_s, "Probe interval in seconds");
    add_policy_flags(run, run_opt);
    run->add_option("--segment-duration", run_opt.segment_duration_s, "Media seconds per segment");
    run->add_option("--startup-threshold", run_opt.startup_threshold_s,
                    "Buffered seconds required before playback starts");
    run->add_option("--override", run_opt.overrides,
                    "Scripted user override <t_s>:<label>, repeatable");
    run->add_option("--out", run_opt.report_path, "Report JSON path");
    run->add_option("--log", run_opt.metrics_path, "Metrics CSV path");
    run->add_option("--decisions-log", run_opt.decisions_path, "Decision CSV path");
    run->add_option("--events", run_opt.events_path, "Playback event CSV path");
    run->add_flag("--live", run_opt.live, "Probe real interfaces instead of a trace");
    run->add_option("--iface", run_opt.iface, "Interface for live counters (default: all non-lo)");
    run->add_option("--latency-target", run_opt.latency_target, "URL for live round-trip probes");
    run->add_option("--latency-timeout-ms", run_opt.latency_timeout_ms, "Round-trip probe timeout");

    RunOptions cmp_opt;
    std::string cmp_policies = "rule,no-averaging";
    std::string cmp_out;
    std::string cmp_emit = "table";
    CLI::App* compare = app.add_subcommand("compare", "Compare policies over one trace");
    compare->add_option("--trace", cmp_opt.trace_path, "Trace CSV")->required();
    compare->add_option("--duration", cmp_opt.duration_s, "Session seconds");
    compare->add_option("--interval", cmp_opt.interval_s, "Probe interval in seconds");
    add_policy_flags(compare, cmp_opt);
    compare->add_option("--segment-duration", cmp_opt.segment_duration_s, "Media seconds per segment");
    compare->add_option("--policies", cmp_policies, "Comma list of rule,advisor,no-averaging");
    compare->add_option("--out", cmp_out, "Comparison CSV path");
    compare->add_option("--emit", cmp_emit, "table|chart-data")
        ->check(CLI::IsMember({"table", "chart-data"}));

    RunOptions probe_opt;
    probe_opt.duration_s = 60;
    CLI::App* probe = app.add_subcommand("probe", "Sample live data rate and latency");
    probe->add_option("--interval", probe_opt.interval_s, "Sampling period in seconds");
    probe->add_option("--duration", probe_opt.duration_s, "Probe run length in seconds");
    probe->add_option("--iface", probe_opt.iface, "Interface (default: all non-lo)");
    probe->add_option("--latency-target", probe_opt.latency_target, "URL to time round trips against");
    probe->add_option("--latency-timeout-ms", probe_opt.latency_timeout_ms, "Round-trip timeout");
    probe->add_option("--log", probe_opt.metrics_path, "Metrics CSV path");

    RunOptions replay_opt;
    std::string replay_log;
    CLI::App* replay = app.add_subcommand("replay", "Re-decide over a recorded metrics CSV");
    replay->add_option("--log", replay_log, "Recorded metrics CSV")->required();
    replay->add_option("--interval", replay_opt.interval_s, "Original probe interval");
    add_policy_flags(replay, replay_opt);
    replay->add_option("--decisions-log", replay_opt.decisions_path, "Decision CSV path");

    std::string mock_fixtures;
    int mock_port = 8099;
    std::string mock_behavior = "normal";
    CLI::App* mock = app.add_subcommand("mock-advisor", "Serve the advisor protocol locally");
    mock->add_option("--fixtures", mock_fixtures, "Fixture table JSON")->required();
    mock->add_option("--port", mock_port, "Listening port");
    mock->add_option("--behavior", mock_behavior, "normal|delay:<ms>|drop|malformed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (run_opt.trace_path.empty() && !run_opt.live) {
                throw abr::ConfigError("run needs --trace (or --live)");
            }
            return cmd_run(run_opt);
        }
        if (compare->parsed()) {
            return cmd_compare(cmp_opt, cmp_policies, cmp_out, cmp_emit);
        }
        if (probe->parsed()) {
            return cmd_probe(probe_opt);
        }
        if (replay->parsed()) {
            return cmd_replay(replay_opt, replay_log);
        }
        if (mock->parsed()) {
            return cmd_mock_advisor(mock_fixtures, mock_port, mock_behavior);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
