#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace spdcbell {

/// Fixed 9-significant-digit formatting used for every numeric output field.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Shortest representation that round-trips, for echoing coefficients in diagnostics.
inline std::string fmt_full(double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace spdcbell
