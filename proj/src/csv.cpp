#include "abr/csv.hpp"

#include "abr/errors.hpp"

#include <charconv>
#include <cstdio>

namespace abr::csv {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(std::string_view field, std::string_view context) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("bad numeric field '" + std::string(field) + "' in " +
                         std::string(context));
    }
    return v;
}

long long parse_int(std::string_view field, std::string_view context) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("bad integer field '" + std::string(field) + "' in " +
                         std::string(context));
    }
    return v;
}

std::optional<double> parse_optional_double(std::string_view field,
                                            std::string_view context) {
    if (field.empty()) {
        return std::nullopt;
    }
    return parse_double(field, context);
}

std::string format_fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string format_exact(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace abr::csv
