#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "fiber.hpp"
#include "format.hpp"
#include "mismatch.hpp"

namespace spdcbell {

inline constexpr std::string_view kVersion = "1.0.0";

/// Raw `section.key -> value` settings, as read from a file or given on the command line.
using Settings = std::map<std::string, std::string>;

struct KeySpec {
    std::string_view key;
    std::string_view fallback;  // empty: required (setup.scheme) or derived at build time
    std::string_view help;
};

inline const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys{
        {"dispersion.model", "bbo_eimerl1987", "built-in model name, or 'custom'"},
        {"dispersion.name", "", "label for a custom model"},
        {"dispersion.sellmeier_o", "", "a, b, c, d of the ordinary branch (custom model)"},
        {"dispersion.sellmeier_e", "", "a, b, c, d of the extraordinary branch (custom model)"},
        {"dispersion.valid_range_nm", "", "min, max wavelength of a custom model"},
        {"setup.scheme", "", "type2 or type1 (required)"},
        {"setup.crystal_length_mm", "", "0.5 for type2, 1 for type1"},
        {"setup.pump_wavelength_nm", "351", "pump wavelength"},
        {"setup.cut_angle_deg", "", "solved for collinear degenerate phase matching when omitted"},
        {"setup.extra_eo_delay_fs", "0", "birefringent plate delay"},
        {"setup.second_crystal_length_mm", "", "defaults to the crystal length"},
        {"grid.theta_points", "512", "map resolution along theta"},
        {"grid.omega_points", "512", "map resolution along omega"},
        {"grid.theta_max_rad", "0.03", "map half width in internal angle"},
        {"grid.lambda_half_width_nm", "", "25 for type2, 60 for type1"},
        {"fiber.length_m", "1000", "fiber length"},
        {"fiber.gvd_s2_per_m", "4.4738e-26", "fiber GVD at the degenerate wavelength"},
        {"fiber.jitter_ns", "0.3", "Gaussian detector jitter sigma"},
        {"output.path", "", "output file; standard output when empty"},
        {"units.frequency", "nm", "nm or rad_s"},
        {"units.angle", "external", "external or internal"},
        {"units.angle_index", "o", "polarization whose index converts angles: o or e"},
        {"classify.tol", "0.05", "Bell-label tolerance in rad"},
    };
    return keys;
}

inline bool is_known_key(std::string_view k) {
    for (const auto& s : known_keys())
        if (s.key == k) return true;
    return false;
}

inline void set_key(Settings& s, const std::string& key, const std::string& value) {
    if (!is_known_key(key)) throw ConfigError("unknown config key '" + key + "'");
    s[key] = value;
}

/// Line format: `section.key = value`, '#' comments, blank lines ignored.
inline Settings parse_settings(std::istream& in) {
    Settings s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'section.key = value'", lineno);
        const std::string key(detail::trim(v.substr(0, eq)));
        const std::string value(detail::trim(v.substr(eq + 1)));
        if (!is_known_key(key)) throw ParseError("unknown config key '" + key + "'", lineno);
        if (value.empty()) throw ParseError("empty value for '" + key + "'", lineno);
        s[key] = value;
    }
    return s;
}

inline Settings load_settings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return parse_settings(in);
    } catch (const ParseError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// FNV-1a over the canonical `key=value` lines of the explicit settings.
inline std::uint64_t settings_hash(const Settings& s) {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](std::string_view t) {
        for (unsigned char ch : t) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : s) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    return h;
}

/// Validated run configuration with every default resolved.
struct RunConfig {
    DispersionModel model;
    SetupConfig setup;
    bool cut_angle_solved = false;
    std::size_t theta_points = 512;
    std::size_t omega_points = 512;
    double theta_max = 0.03;            // rad, internal
    double lambda_half_width_nm = 25.0;
    FiberParams fiber;
    std::string output_path;
    bool frequency_in_nm = true;
    bool external_angle = true;
    Polarization angle_index = Polarization::Ordinary;
    double classify_tol = 0.05;
    std::uint64_t hash = 0;
    std::vector<std::pair<std::string, std::string>> effective;  // every key, explicit or defaulted

    /// Refractive index used for internal/external angle conversion.
    double angle_index_value() const {
        return refractive_index(model, angle_index, setup.degenerate_wavelength_nm(),
                                angle_index == Polarization::Extraordinary ? setup.cut_angle : 0.0);
    }

    std::vector<std::string> provenance() const {
        char hash_buf[32];
        std::snprintf(hash_buf, sizeof hash_buf, "%016llx", static_cast<unsigned long long>(hash));
        std::vector<std::string> out{
            "spdcbell " + std::string(kVersion),
            std::string("config_hash = ") + hash_buf,
            "dispersion = " + model.name,
            "sellmeier_o = " + fmt_full(model.ordinary.a) + ", " + fmt_full(model.ordinary.b) + ", " +
                fmt_full(model.ordinary.c) + ", " + fmt_full(model.ordinary.d),
            "sellmeier_e = " + fmt_full(model.extraordinary.a) + ", " + fmt_full(model.extraordinary.b) + ", " +
                fmt_full(model.extraordinary.c) + ", " + fmt_full(model.extraordinary.d),
        };
        for (const auto& [k, v] : effective) out.push_back(k + " = " + v);
        return out;
    }
};

namespace detail {

inline double number_setting(const std::string& key, const std::string& v) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
    return *d;
}

inline std::vector<double> number_list(const std::string& key, const std::string& v, std::size_t n) {
    std::vector<double> out;
    for (auto f : split(v, ',')) out.push_back(number_setting(key, std::string(trim(f))));
    if (out.size() != n)
        throw ConfigError("config key '" + key + "' expects " + std::to_string(n) + " comma-separated numbers");
    return out;
}

inline std::size_t count_setting(const std::string& key, const std::string& v) {
    const double d = number_setting(key, v);
    if (d < 1 || d != std::floor(d)) throw ConfigError("config key '" + key + "' expects a positive integer");
    return static_cast<std::size_t>(d);
}

}  // namespace detail

inline Scheme parse_scheme(std::string_view s) {
    if (s == "type2") return Scheme::TypeII;
    if (s == "type1") return Scheme::TwoTypeI;
    throw ConfigError("unknown scheme '" + std::string(s) + "' (expected type2 or type1)");
}

inline RunConfig build_config(const Settings& explicit_settings) {
    for (const auto& [k, v] : explicit_settings)
        if (!is_known_key(k)) throw ConfigError("unknown config key '" + k + "'");
    auto get = [&](std::string_view key) -> std::optional<std::string> {
        if (auto it = explicit_settings.find(std::string(key)); it != explicit_settings.end()) return it->second;
        return std::nullopt;
    };
    auto get_or = [&](std::string_view key) -> std::string {
        if (auto v = get(key)) return *v;
        for (const auto& s : known_keys())
            if (s.key == key) return std::string(s.fallback);
        return {};
    };

    RunConfig rc;
    rc.hash = settings_hash(explicit_settings);

    const auto model_name = get_or("dispersion.model");
    if (model_name == "bbo_eimerl1987") {
        for (auto k : {"dispersion.name", "dispersion.sellmeier_o", "dispersion.sellmeier_e", "dispersion.valid_range_nm"})
            if (get(k)) throw ConfigError(std::string("config key '") + k + "' requires dispersion.model = custom");
        rc.model = bbo_eimerl1987();
    } else if (model_name == "custom") {
        for (auto k : {"dispersion.sellmeier_o", "dispersion.sellmeier_e", "dispersion.valid_range_nm"})
            if (!get(k)) throw ConfigError(std::string("missing required config key '") + k + "' for a custom model");
        const auto o = detail::number_list("dispersion.sellmeier_o", *get("dispersion.sellmeier_o"), 4);
        const auto e = detail::number_list("dispersion.sellmeier_e", *get("dispersion.sellmeier_e"), 4);
        const auto r = detail::number_list("dispersion.valid_range_nm", *get("dispersion.valid_range_nm"), 2);
        rc.model.name = get("dispersion.name").value_or("custom");
        rc.model.ordinary = {o[0], o[1], o[2], o[3]};
        rc.model.extraordinary = {e[0], e[1], e[2], e[3]};
        rc.model.min_wavelength_nm = r[0];
        rc.model.max_wavelength_nm = r[1];
        if (!(r[0] > 0.0 && r[1] > r[0])) throw ConfigError("dispersion.valid_range_nm must be an increasing pair");
        try {
            validate_model(rc.model);
        } catch (const DomainError& err) {
            throw ConfigError(std::string("invalid dispersion model: ") + err.what());
        }
    } else {
        throw ConfigError("unknown dispersion model '" + model_name + "' (expected bbo_eimerl1987 or custom)");
    }

    const auto scheme = get("setup.scheme");
    if (!scheme) throw ConfigError("missing required config key 'setup.scheme' (type2 or type1)");
    SetupParams sp;
    sp.scheme = parse_scheme(*scheme);
    if (auto v = get("setup.crystal_length_mm")) sp.crystal_length = detail::number_setting("setup.crystal_length_mm", *v) * 1e-3;
    sp.pump_wavelength_nm = detail::number_setting("setup.pump_wavelength_nm", get_or("setup.pump_wavelength_nm"));
    if (auto v = get("setup.cut_angle_deg")) sp.cut_angle = deg_to_rad(detail::number_setting("setup.cut_angle_deg", *v));
    sp.extra_eo_delay = detail::number_setting("setup.extra_eo_delay_fs", get_or("setup.extra_eo_delay_fs")) * 1e-15;
    if (auto v = get("setup.second_crystal_length_mm"))
        sp.second_crystal_length = detail::number_setting("setup.second_crystal_length_mm", *v) * 1e-3;
    if (!(sp.pump_wavelength_nm > 0.0) || !rc.model.in_range(sp.pump_wavelength_nm))
        throw ConfigError("setup.pump_wavelength_nm = " + fmt_num(sp.pump_wavelength_nm) +
                          " outside the dispersion range [" + fmt_num(rc.model.min_wavelength_nm) + ", " +
                          fmt_num(rc.model.max_wavelength_nm) + "] nm");
    rc.setup = make_setup(rc.model, sp);
    rc.cut_angle_solved = !sp.cut_angle.has_value();

    rc.theta_points = detail::count_setting("grid.theta_points", get_or("grid.theta_points"));
    rc.omega_points = detail::count_setting("grid.omega_points", get_or("grid.omega_points"));
    rc.theta_max = detail::number_setting("grid.theta_max_rad", get_or("grid.theta_max_rad"));
    rc.lambda_half_width_nm = get("grid.lambda_half_width_nm")
                                  ? detail::number_setting("grid.lambda_half_width_nm", *get("grid.lambda_half_width_nm"))
                                  : (sp.scheme == Scheme::TypeII ? 25.0 : 60.0);
    if (rc.theta_points < 16 || rc.omega_points < 16) throw ConfigError("grid resolution must be at least 16 per axis");
    if (!(rc.theta_max > 0.0) || !(rc.lambda_half_width_nm > 0.0)) throw ConfigError("grid extents must be positive");

    rc.fiber.length = detail::number_setting("fiber.length_m", get_or("fiber.length_m"));
    rc.fiber.gvd = detail::number_setting("fiber.gvd_s2_per_m", get_or("fiber.gvd_s2_per_m"));
    rc.fiber.jitter_sigma = detail::number_setting("fiber.jitter_ns", get_or("fiber.jitter_ns")) * 1e-9;
    rc.fiber.validate();

    rc.output_path = get_or("output.path");
    const auto fu = get_or("units.frequency");
    if (fu != "nm" && fu != "rad_s") throw ConfigError("units.frequency must be nm or rad_s");
    rc.frequency_in_nm = fu == "nm";
    const auto au = get_or("units.angle");
    if (au != "external" && au != "internal") throw ConfigError("units.angle must be external or internal");
    rc.external_angle = au == "external";
    const auto ai = get_or("units.angle_index");
    if (ai != "o" && ai != "e") throw ConfigError("units.angle_index must be o or e");
    rc.angle_index = ai == "o" ? Polarization::Ordinary : Polarization::Extraordinary;
    rc.classify_tol = detail::number_setting("classify.tol", get_or("classify.tol"));
    if (!(rc.classify_tol > 0.0 && rc.classify_tol < kPi / 4)) throw ConfigError("classify.tol must be in (0, pi/4)");

    // Echo every setting with its resolved value.
    for (const auto& spec : known_keys()) {
        const std::string key(spec.key);
        if (key.rfind("dispersion.", 0) == 0 && key != "dispersion.model" && model_name != "custom") continue;
        std::string value;
        std::string tag = get(key) ? "" : " (default)";
        if (key == "setup.crystal_length_mm") value = fmt_num(rc.setup.crystal_length * 1e3);
        else if (key == "setup.second_crystal_length_mm") value = fmt_num(rc.setup.second_crystal_length * 1e3);
        else if (key == "setup.cut_angle_deg") {
            value = fmt_full(rad_to_deg(rc.setup.cut_angle));
            if (rc.cut_angle_solved) tag = " (auto-solved)";
        } else if (key == "grid.lambda_half_width_nm") value = fmt_num(rc.lambda_half_width_nm);
        else if (key == "output.path") value = rc.output_path.empty() ? "-" : rc.output_path;
        else value = get_or(key);
        rc.effective.emplace_back(key, value + tag);
    }
    return rc;
}

inline RunConfig load_config(const std::string& path) { return build_config(load_settings(path)); }

}  // namespace spdcbell
