#pragma once

#include <charconv>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plume {

/// Shortest decimal text that parses back to the same double. Keeps CSV and
/// JSON artifacts byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad numeric field: '" + std::string(s) + "'");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad integer field: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line);

/// Reads a CSV with the exact expected header; returns data rows as fields.
/// Throws std::invalid_argument on a header or column-count mismatch.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::string& expected_header);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace plume
