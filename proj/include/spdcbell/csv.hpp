#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bellstate.hpp"
#include "contour.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "scan_curve.hpp"

namespace spdcbell {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace detail

/// Parses `abscissa,rate[,sigma]` rows. '#' starts a comment; a single
/// non-numeric first data row is taken as the header.
inline ScanCurve parse_curve(std::istream& in, AbscissaUnit unit) {
    std::vector<double> x, y, s;
    std::optional<std::size_t> columns;
    bool header_allowed = true;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        const auto fields = detail::split(v, ',');
        if (fields.size() != 2 && fields.size() != 3)
            throw ParseError("expected 2 or 3 comma-separated columns, got " + std::to_string(fields.size()), lineno);
        std::vector<double> vals;
        bool numeric = true;
        for (auto f : fields) {
            const auto d = detail::parse_double(f);
            if (!d) {
                numeric = false;
                break;
            }
            vals.push_back(*d);
        }
        if (!numeric) {
            if (header_allowed) {
                header_allowed = false;
                columns = fields.size();
                continue;
            }
            throw ParseError("non-numeric field in row '" + std::string(v) + "'", lineno);
        }
        header_allowed = false;
        for (double d : vals)
            if (!std::isfinite(d)) throw ParseError("non-finite value in row '" + std::string(v) + "'", lineno);
        if (columns && *columns != fields.size())
            throw ParseError("row has " + std::to_string(fields.size()) + " columns, expected " +
                                 std::to_string(*columns), lineno);
        columns = fields.size();
        if (vals[1] < 0.0) throw ParseError("negative rate", lineno);
        if (vals.size() == 3 && !(vals[2] > 0.0)) throw ParseError("sigma must be positive", lineno);
        x.push_back(vals[0]);
        y.push_back(vals[1]);
        if (vals.size() == 3) s.push_back(vals[2]);
    }
    std::optional<std::vector<double>> sigma;
    if (!s.empty()) sigma = std::move(s);
    return ScanCurve(unit, std::move(x), std::move(y), std::move(sigma));
}

/// Unit named by the abscissa column of a header row (suffix _nm, _rad_s or _rad),
/// empty when the file has no header or the name carries no unit.
inline std::optional<AbscissaUnit> header_unit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        const auto name = detail::trim(detail::split(v, ',').front());
        if (detail::parse_double(name)) return std::nullopt;
        if (name.ends_with("_rad_s")) return AbscissaUnit::RadPerSecond;
        if (name.ends_with("_nm")) return AbscissaUnit::Nanometer;
        if (name.ends_with("_rad")) return AbscissaUnit::Radian;
        return std::nullopt;
    }
    return std::nullopt;
}

inline ScanCurve ingest_curve(const std::string& path, AbscissaUnit unit) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");
    return parse_curve(in, unit);
}

inline void write_provenance(std::ostream& os, const std::vector<std::string>& lines) {
    for (const auto& l : lines) os << "# " << l << '\n';
}

inline void write_curve_csv(std::ostream& os, const ScanCurve& c, std::string_view x_name, std::string_view y_name) {
    os << x_name << ',' << y_name << (c.sigma() ? ",sigma" : "") << '\n';
    for (std::size_t i = 0; i < c.size(); ++i) {
        os << fmt_num(c.abscissa()[i]) << ',' << fmt_num(c.rate()[i]);
        if (c.sigma()) os << ',' << fmt_num((*c.sigma())[i]);
        os << '\n';
    }
}

/// Long format: theta, omega (or wavelength), intensity, phase. `omega_to_axis`
/// maps the stored offset to the printed column.
template <class F>
void write_map_csv(std::ostream& os, const SpectrumMap& m, std::string_view omega_name, F omega_to_axis) {
    os << "theta," << omega_name << ",intensity,phase\n";
    for (std::size_t i = 0; i < m.omega_axis.size(); ++i) {
        const std::string w = fmt_num(omega_to_axis(m.omega_axis[i]));
        for (std::size_t j = 0; j < m.theta_axis.size(); ++j) {
            const auto k = m.index(i, j);
            os << fmt_num(m.theta_axis[j]) << ',' << w << ',' << fmt_num(m.intensity[k]) << ','
               << fmt_num(m.phase[k]) << '\n';
        }
    }
}

/// One row per vertex: polyline id, vertex index, theta, omega (or wavelength).
template <class F>
void write_polylines_csv(std::ostream& os, const std::vector<Polyline>& lines, std::string_view omega_name,
                         F omega_to_axis) {
    os << "line,vertex,theta," << omega_name << '\n';
    for (std::size_t l = 0; l < lines.size(); ++l)
        for (std::size_t v = 0; v < lines[l].points.size(); ++v)
            os << l << ',' << v << ',' << fmt_num(lines[l].points[v][0]) << ','
               << fmt_num(omega_to_axis(lines[l].points[v][1])) << '\n';
}

}  // namespace spdcbell
