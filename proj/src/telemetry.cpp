#include "abr/telemetry.hpp"

#include "abr/csv.hpp"
#include "abr/errors.hpp"

#include <json.hpp>

namespace abr {

using nlohmann::json;

MetricsCsvWriter::MetricsCsvWriter(const std::string& path) : out_(path) {
    if (!out_) {
        throw IoError("cannot write " + path);
    }
    out_ << "t_s,latency_ms,kbps_in,kbps_out\n";
    out_.flush();
    open_ = true;
}

void MetricsCsvWriter::log_sample(const NetworkSample& s) {
    if (!open_) {
        throw IoError("metrics log is closed");
    }
    out_ << csv::format_fixed2(s.timestamp_s) << ','
         << (s.latency_ms ? csv::format_fixed2(*s.latency_ms) : std::string()) << ','
         << csv::format_fixed2(s.kbps_in) << ',' << csv::format_fixed2(s.kbps_out)
         << '\n';
    out_.flush();
    if (!out_) {
        throw IoError("metrics log write failed");
    }
}

void MetricsCsvWriter::close() {
    out_.close();
    open_ = false;
}

std::vector<NetworkSample> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) ||
        csv::split(line) != std::vector<std::string>{"t_s", "latency_ms", "kbps_in",
                                                     "kbps_out"}) {
        throw ParseError(path + ": expected header t_s,latency_ms,kbps_in,kbps_out");
    }
    std::vector<NetworkSample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = csv::split(line);
        if (fields.size() != 4) {
            throw ParseError(path + ": expected 4 fields, got line '" + line + "'");
        }
        NetworkSample s;
        s.timestamp_s = csv::parse_double(fields[0], path);
        s.latency_ms = csv::parse_optional_double(fields[1], path);
        s.kbps_in = csv::parse_double(fields[2], path);
        s.kbps_out = csv::parse_double(fields[3], path);
        samples.push_back(std::move(s));
    }
    return samples;
}

DecisionCsvWriter::DecisionCsvWriter(const std::string& path) : out_(path) {
    if (!out_) {
        throw IoError("cannot write " + path);
    }
    out_ << "t_s,source,resolution,buffer_bytes,reason\n";
    out_.flush();
    open_ = true;
}

void DecisionCsvWriter::log_decision(const Decision& d) {
    if (!open_) {
        throw IoError("decision log is closed");
    }
    out_ << csv::format_fixed2(d.decided_at_s) << ',' << to_string(d.source) << ','
         << d.config.resolution.label << ',' << d.config.buffer_target_bytes << ','
         << d.reason << '\n';
    out_.flush();
    if (!out_) {
        throw IoError("decision log write failed");
    }
}

void DecisionCsvWriter::close() {
    out_.close();
    open_ = false;
}

SimEventCsvWriter::SimEventCsvWriter(const std::string& path) : out_(path) {
    if (!out_) {
        throw IoError("cannot write " + path);
    }
    out_ << "t_s,event,resolution,buffer_s\n";
}

void SimEventCsvWriter::on_event(double t_s, std::string_view kind,
                                 std::string_view resolution_label, double buffer_s) {
    out_ << csv::format_fixed2(t_s) << ',' << kind << ',' << resolution_label << ','
         << csv::format_fixed2(buffer_s) << '\n';
    out_.flush();
}

namespace {

json resolution_to_json(const Resolution& r) {
    return json{{"label", r.label},
                {"height", r.height},
                {"nominal_bitrate_kbps", r.nominal_bitrate_kbps}};
}

Resolution resolution_from_json(const json& j) {
    Resolution r;
    r.label = j.at("label").get<std::string>();
    r.height = j.at("height").get<int>();
    r.nominal_bitrate_kbps = j.at("nominal_bitrate_kbps").get<double>();
    return r;
}

json decision_to_json(const Decision& d) {
    return json{{"decided_at_s", d.decided_at_s},
                {"source", to_string(d.source)},
                {"reason", d.reason},
                {"resolution", resolution_to_json(d.config.resolution)},
                {"buffer_target_bytes", d.config.buffer_target_bytes}};
}

Decision decision_from_json(const json& j) {
    Decision d;
    d.decided_at_s = j.at("decided_at_s").get<double>();
    d.source = decision_source_from_string(j.at("source").get<std::string>());
    d.reason = j.at("reason").get<std::string>();
    d.config.resolution = resolution_from_json(j.at("resolution"));
    d.config.buffer_target_bytes = j.at("buffer_target_bytes").get<std::int64_t>();
    return d;
}

} // namespace

std::string report_to_json(const SessionReport& report) {
    json j;
    j["session_duration_s"] = report.session_duration_s;
    j["stall_count"] = report.stall_count;
    j["total_stall_s"] = report.total_stall_s;
    j["rebuffer_ratio"] = report.rebuffer_ratio;
    j["switch_count"] = report.switch_count;
    j["time_weighted_avg_height"] = report.time_weighted_avg_height;
    j["bytes_downloaded"] = report.bytes_downloaded;
    j["segments_completed"] = report.segments_completed;
    j["startup_s"] = report.startup_s;
    j["played_s"] = report.played_s;
    j["qoe"] = compute_qoe(report);
    j["stalls"] = json::array();
    for (const StallEvent& s : report.stalls) {
        j["stalls"].push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
    }
    j["switches"] = json::array();
    for (const SwitchEvent& s : report.switches) {
        j["switches"].push_back(
            {{"t_s", s.t_s}, {"from", s.from_label}, {"to", s.to_label}});
    }
    j["decisions"] = json::array();
    for (const Decision& d : report.decisions) {
        j["decisions"].push_back(decision_to_json(d));
    }
    j["applied"] = json::array();
    for (const Decision& d : report.applied) {
        j["applied"].push_back(decision_to_json(d));
    }
    return j.dump(2);
}

SessionReport report_from_json(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    try {
        SessionReport r;
        r.session_duration_s = j.at("session_duration_s").get<double>();
        r.stall_count = j.at("stall_count").get<int>();
        r.total_stall_s = j.at("total_stall_s").get<double>();
        r.rebuffer_ratio = j.at("rebuffer_ratio").get<double>();
        r.switch_count = j.at("switch_count").get<int>();
        r.time_weighted_avg_height = j.at("time_weighted_avg_height").get<double>();
        r.bytes_downloaded = j.at("bytes_downloaded").get<std::int64_t>();
        r.segments_completed = j.at("segments_completed").get<long>();
        r.startup_s = j.at("startup_s").get<double>();
        r.played_s = j.at("played_s").get<double>();
        for (const json& s : j.at("stalls")) {
            r.stalls.push_back({s.at("start_s").get<double>(), s.at("end_s").get<double>()});
        }
        for (const json& s : j.at("switches")) {
            r.switches.push_back({s.at("t_s").get<double>(),
                                  s.at("from").get<std::string>(),
                                  s.at("to").get<std::string>()});
        }
        for (const json& d : j.at("decisions")) {
            r.decisions.push_back(decision_from_json(d));
        }
        for (const json& d : j.at("applied")) {
            r.applied.push_back(decision_from_json(d));
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

void write_report_json(const SessionReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << report_to_json(report) << '\n';
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void emit_comparison_csv(const std::vector<std::string>& labels,
                         const std::vector<SessionReport>& reports,
                         const std::string& path) {
    if (labels.size() != reports.size() || reports.empty()) {
        throw ConfigError("comparison needs one label per report");
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "policy,stall_count,total_stall_s,rebuffer_ratio,switch_count,avg_height,qoe\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const SessionReport& r = reports[i];
        out << labels[i] << ',' << r.stall_count << ','
            << csv::format_exact(r.total_stall_s) << ','
            << csv::format_exact(r.rebuffer_ratio) << ',' << r.switch_count << ','
            << csv::format_exact(r.time_weighted_avg_height) << ','
            << csv::format_exact(compute_qoe(r)) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void emit_chart_data(const std::vector<std::string>& labels,
                     const std::vector<SessionReport>& reports,
                     const std::string& stem) {
    if (labels.size() != reports.size()) {
        throw ConfigError("chart data needs one label per report");
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        {
            std::ofstream out(stem + "." + labels[i] + ".decisions.csv");
            if (!out) {
                throw IoError("cannot write chart data for " + labels[i]);
            }
            out << "t_s,height,buffer_bytes\n";
            for (const Decision& d : reports[i].decisions) {
                out << csv::format_fixed2(d.decided_at_s) << ','
                    << d.config.resolution.height << ',' << d.config.buffer_target_bytes
                    << '\n';
            }
        }
        std::ofstream out(stem + "." + labels[i] + ".stalls.csv");
        if (!out) {
            throw IoError("cannot write chart data for " + labels[i]);
        }
        out << "start_s,end_s\n";
        for (const StallEvent& s : reports[i].stalls) {
            out << csv::format_fixed2(s.start_s) << ',' << csv::format_fixed2(s.end_s)
                << '\n';
        }
    }
}

} // namespace abr
