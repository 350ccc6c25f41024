#include "abr/csv.hpp"
#include "abr/errors.hpp"
#include "abr/sim.hpp"
#include "abr/telemetry.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

using namespace abr;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempFile {
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
    std::string path;
};

NetworkSample sample(double t, std::optional<double> latency, double in, double out) {
    NetworkSample s;
    s.timestamp_s = t;
    s.latency_ms = latency;
    s.kbps_in = in;
    s.kbps_out = out;
    return s;
}

} // namespace

TEST_CASE("metrics rows are rendered at two decimals in the fixed column order") {
    TempFile tmp("metrics_row.csv");
    MetricsCsvWriter writer(tmp.path);
    writer.log_sample(sample(3.0, 1289.52, 341.71, 27.80));
    writer.log_sample(sample(4.0, std::nullopt, 100.0, 0.0));
    writer.close();

    CHECK(slurp(tmp.path) == "t_s,latency_ms,kbps_in,kbps_out\n"
                             "3.00,1289.52,341.71,27.80\n"
                             "4.00,,100.00,0.00\n");
}

TEST_CASE("writing to a closed sink raises IoError") {
    TempFile tmp("metrics_closed.csv");
    MetricsCsvWriter writer(tmp.path);
    writer.close();
    CHECK_THROWS_AS(writer.log_sample(sample(1, 2, 3, 4)), IoError);
}

TEST_CASE("metrics CSV round-trips every value it can represent") {
    std::mt19937 rng(79);
    std::uniform_real_distribution<double> value(0.0, 20000.0);
    std::uniform_real_distribution<double> maybe(0.0, 1.0);

    // Values are quantized through the writer's own rendering, i.e. they
    // are in the file format's domain.
    std::vector<NetworkSample> rows;
    for (int i = 0; i < 200; ++i) {
        const auto q = [&](double v) {
            return csv::parse_double(csv::format_fixed2(v), "test");
        };
        std::optional<double> latency;
        if (maybe(rng) < 0.8) {
            latency = q(value(rng));
        }
        rows.push_back(sample(q(static_cast<double>(i) + maybe(rng)), latency,
                              q(value(rng)), q(value(rng))));
    }

    TempFile tmp("metrics_roundtrip.csv");
    MetricsCsvWriter writer(tmp.path);
    for (const NetworkSample& s : rows) {
        writer.log_sample(s);
    }
    writer.close();

    CHECK(read_metrics_csv(tmp.path) == rows);
}

TEST_CASE("decision log schema") {
    TempFile tmp("decisions_row.csv");
    DecisionCsvWriter writer(tmp.path);
    Decision d;
    d.decided_at_s = 3.0;
    d.source = DecisionSource::rule_based;
    d.config.resolution = {"1080p", 1080, 1000};
    d.config.buffer_target_bytes = 250000;
    d.reason = reason::rate_select;
    writer.log_decision(d);
    writer.close();

    CHECK(slurp(tmp.path) == "t_s,source,resolution,buffer_bytes,reason\n"
                             "3.00,rule-based,1080p,250000,rate-select\n");
}

TEST_CASE("report JSON round trip") {
    std::mt19937 rng(83);
    SimConfig cfg;
    cfg.trace = testgen::random_trace(rng, 60.0);
    cfg.session_duration_s = 60;
    cfg.initial.resolution = default_ladder().rungs.front();
    cfg.initial.buffer_target_bytes = 50000;
    const SessionReport report =
        simulate(cfg, testgen::random_decisions(rng, default_ladder(), 60.0));

    const std::string once = report_to_json(report);
    CHECK(report_to_json(report_from_json(once)) == once);
}

TEST_CASE("comparison table is deterministic with one row per policy") {
    SessionReport a;
    a.session_duration_s = 60;
    a.stall_count = 1;
    a.total_stall_s = 2.5;
    a.rebuffer_ratio = 2.5 / 60;
    a.switch_count = 3;
    a.time_weighted_avg_height = 720;
    SessionReport b = a;
    b.stall_count = 0;
    b.total_stall_s = 0;
    b.rebuffer_ratio = 0;

    TempFile t1("table1.csv");
    TempFile t2("table2.csv");
    emit_comparison_csv({"rule", "advisor"}, {a, b}, t1.path);
    emit_comparison_csv({"rule", "advisor"}, {a, b}, t2.path);

    const std::string body = slurp(t1.path);
    CHECK(body == slurp(t2.path));
    CHECK(body.rfind("policy,stall_count,total_stall_s,rebuffer_ratio,switch_count,"
                     "avg_height,qoe\n", 0) == 0);
    CHECK(std::count(body.begin(), body.end(), '\n') == 3);

    // Identical inputs produce identical metric rows.
    TempFile t3("table3.csv");
    emit_comparison_csv({"x", "y"}, {a, a}, t3.path);
    std::ifstream in(t3.path);
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    CHECK(r1.substr(1) == r2.substr(1)); // same except the label
}

TEST_CASE("chart data files carry the decision and stall series") {
    SessionReport r;
    r.session_duration_s = 10;
    Decision d;
    d.decided_at_s = 3.0;
    d.config.resolution = {"720p", 720, 700};
    d.config.buffer_target_bytes = 175000;
    r.decisions.push_back(d);
    r.stalls.push_back({4.0, 5.5});

    emit_chart_data({"rule"}, {r}, "chart_test");
    TempFile d1("chart_test.rule.decisions.csv");
    TempFile d2("chart_test.rule.stalls.csv");
    CHECK(slurp(d1.path) == "t_s,height,buffer_bytes\n3.00,720,175000\n");
    CHECK(slurp(d2.path) == "start_s,end_s\n4.00,5.50\n");
}
