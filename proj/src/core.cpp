#include "abr/core.hpp"

#include "abr/csv.hpp"
#include "abr/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace abr {

void BitrateLadder::validate() const {
    if (rungs.empty()) {
        throw ConfigError("ladder has no rungs");
    }
    if (rungs.size() != selection_threshold_kbps.size()) {
        throw ConfigError("ladder rung/threshold count mismatch");
    }
    if (selection_threshold_kbps.front() != 0.0) {
        throw ConfigError("lowest rung threshold must be 0");
    }
    for (std::size_t i = 0; i < rungs.size(); ++i) {
        const Resolution& r = rungs[i];
        if (r.height <= 0 || r.nominal_bitrate_kbps <= 0) {
            throw ConfigError("rung '" + r.label + "' has non-positive height or bitrate");
        }
        if (i == 0) {
            continue;
        }
        if (r.height <= rungs[i - 1].height) {
            throw ConfigError("rung heights must strictly increase");
        }
        if (r.nominal_bitrate_kbps <= rungs[i - 1].nominal_bitrate_kbps) {
            throw ConfigError("rung nominal bitrates must strictly increase");
        }
        if (selection_threshold_kbps[i] < selection_threshold_kbps[i - 1]) {
            throw ConfigError("selection thresholds must be non-decreasing");
        }
        if (r.nominal_bitrate_kbps > selection_threshold_kbps[i]) {
            throw ConfigError("rung '" + r.label +
                              "' is not sustainable at its selection threshold");
        }
    }
}

int BitrateLadder::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < rungs.size(); ++i) {
        if (rungs[i].label == label) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::size_t ladder_lookup_index(const BitrateLadder& ladder, double avg_kbps) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ladder.rungs.size(); ++i) {
        if (ladder.selection_threshold_kbps[i] <= avg_kbps) {
            best = i;
        }
    }
    return best;
}

const Resolution& ladder_lookup(const BitrateLadder& ladder, double avg_kbps) {
    return ladder.rungs[ladder_lookup_index(ladder, avg_kbps)];
}

BitrateLadder default_ladder() {
    BitrateLadder ladder;
    ladder.rungs = {
        {"240p", 240, 200},
        {"360p", 360, 300},
        {"480p", 480, 450},
        {"720p", 720, 700},
        {"1080p", 1080, 1000},
        {"2160p", 2160, 5000},
    };
    ladder.selection_threshold_kbps = {0, 300, 500, 800, 1000, 6000};
    return ladder;
}

std::string to_string(DecisionSource s) {
    switch (s) {
    case DecisionSource::rule_based: return "rule-based";
    case DecisionSource::advisor: return "advisor";
    case DecisionSource::advisor_fallback: return "advisor-fallback";
    case DecisionSource::user_override: return "user-override";
    }
    return "rule-based";
}

DecisionSource decision_source_from_string(const std::string& s) {
    if (s == "rule-based") return DecisionSource::rule_based;
    if (s == "advisor") return DecisionSource::advisor;
    if (s == "advisor-fallback") return DecisionSource::advisor_fallback;
    if (s == "user-override") return DecisionSource::user_override;
    throw ParseError("unknown decision source '" + s + "'");
}

std::int64_t buffer_bytes_from_seconds(double seconds, double nominal_kbps) {
    return std::llround(seconds * nominal_kbps * 1000.0 / 8.0);
}

double buffer_seconds_from_bytes(std::int64_t bytes, double nominal_kbps) {
    return static_cast<double>(bytes) * 8.0 / 1000.0 / nominal_kbps;
}

void Trace::validate() const {
    if (points.empty()) {
        throw ConfigError("trace has no points");
    }
    if (points.front().t_s != 0.0) {
        throw ConfigError("trace must start at t_s = 0");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const TracePoint& p = points[i];
        if (p.bandwidth_kbps < 0) {
            throw ConfigError("trace bandwidth must be non-negative");
        }
        if (p.latency_ms <= 0) {
            throw ConfigError("trace latency must be positive");
        }
        if (i > 0 && p.t_s <= points[i - 1].t_s) {
            throw ConfigError("trace times must strictly increase");
        }
    }
    if (duration_s < points.back().t_s) {
        throw ConfigError("trace duration shorter than its last point");
    }
}

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    return out;
}

} // namespace

Trace load_trace(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || csv::split(line) !=
            std::vector<std::string>{"t_s", "bandwidth_kbps", "latency_ms"}) {
        throw ParseError(path + ": expected header t_s,bandwidth_kbps,latency_ms");
    }
    Trace trace;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = csv::split(line);
        if (fields.size() != 3) {
            throw ParseError(path + ": expected 3 fields, got line '" + line + "'");
        }
        trace.points.push_back({csv::parse_double(fields[0], path),
                                csv::parse_double(fields[1], path),
                                csv::parse_double(fields[2], path)});
    }
    if (trace.points.empty()) {
        throw ParseError(path + ": trace has no rows");
    }
    trace.duration_s = trace.points.back().t_s;
    trace.validate();
    return trace;
}

void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "t_s,bandwidth_kbps,latency_ms\n";
    for (const TracePoint& p : trace.points) {
        out << csv::format_exact(p.t_s) << ',' << csv::format_exact(p.bandwidth_kbps)
            << ',' << csv::format_exact(p.latency_ms) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

BitrateLadder load_ladder(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line) ||
        csv::split(line) != std::vector<std::string>{"label", "height",
                                                     "nominal_bitrate_kbps",
                                                     "selection_threshold_kbps"}) {
        throw ParseError(path +
            ": expected header label,height,nominal_bitrate_kbps,selection_threshold_kbps");
    }
    BitrateLadder ladder;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = csv::split(line);
        if (fields.size() != 4) {
            throw ParseError(path + ": expected 4 fields, got line '" + line + "'");
        }
        Resolution r;
        r.label = fields[0];
        r.height = static_cast<int>(csv::parse_int(fields[1], path));
        r.nominal_bitrate_kbps = csv::parse_double(fields[2], path);
        ladder.rungs.push_back(std::move(r));
        ladder.selection_threshold_kbps.push_back(csv::parse_double(fields[3], path));
    }
    ladder.validate();
    return ladder;
}

void save_ladder(const BitrateLadder& ladder, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "label,height,nominal_bitrate_kbps,selection_threshold_kbps\n";
    for (std::size_t i = 0; i < ladder.rungs.size(); ++i) {
        const Resolution& r = ladder.rungs[i];
        out << r.label << ',' << r.height << ','
            << csv::format_exact(r.nominal_bitrate_kbps) << ','
            << csv::format_exact(ladder.selection_threshold_kbps[i]) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

} // namespace abr
