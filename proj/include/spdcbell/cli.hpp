#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellstate.hpp"
#include "coincidence.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dispersion.hpp"
#include "fiber.hpp"
#include "fitting.hpp"
#include "format.hpp"
#include "mismatch.hpp"

namespace spdcbell::cli {

/// Parses `start:stop:step` into an inclusive sample list.
inline std::vector<double> parse_range(const std::string& spec, const std::string& flag) {
    const auto parts = detail::split(spec, ':');
    if (parts.size() != 3) throw ConfigError(flag + " expects start:stop:step, got '" + spec + "'");
    double v[3];
    for (int i = 0; i < 3; ++i) {
        const auto d = detail::parse_double(parts[i]);
        if (!d || !std::isfinite(*d)) throw ConfigError(flag + " expects start:stop:step, got '" + spec + "'");
        v[i] = *d;
    }
    const double span = v[1] - v[0];
    if (v[2] == 0.0 || span == 0.0 || (span > 0) != (v[2] > 0))
        throw ConfigError(flag + ": step must be nonzero and point from start to stop");
    const auto n = static_cast<std::size_t>(std::floor(span / v[2] + 1e-9)) + 1;
    if (n > 10'000'000) throw ConfigError(flag + ": too many samples");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[0] + static_cast<double>(i) * v[2];
    return out;
}

/// Command-line overrides of config keys shared by every subcommand.
struct CommonOptions {
    std::string config_path;
    std::string scheme;
    std::optional<double> pump_nm;
    std::optional<double> length_mm;
    std::optional<double> second_length_mm;
    std::optional<double> cut_angle_deg;
    std::optional<double> tau_fs;
    std::string output;
    std::string pol;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "config file (section.key = value)");
        app->add_option("--scheme", scheme, "type2 or type1")->check(CLI::IsMember({"type2", "type1"}));
        app->add_option("--pump", pump_nm, "pump wavelength, nm");
        app->add_option("--length", length_mm, "crystal length, mm");
        app->add_option("--second-length", second_length_mm, "second type-I crystal length, mm");
        app->add_option("--cut-angle", cut_angle_deg, "cut angle, deg (solved when omitted)");
        app->add_option("--tau", tau_fs, "extra e-o delay from birefringent plates, fs");
        app->add_option("-o,--output", output, "output file (standard output when omitted)");
        app->add_option("--pol", pol, "index used for angle conversion: o or e")->check(CLI::IsMember({"o", "e"}));
    }

    Settings settings() const {
        Settings s = config_path.empty() ? Settings{} : load_settings(config_path);
        if (!scheme.empty()) s["setup.scheme"] = scheme;
        if (pump_nm) s["setup.pump_wavelength_nm"] = fmt_full(*pump_nm);
        if (length_mm) s["setup.crystal_length_mm"] = fmt_full(*length_mm);
        if (second_length_mm) s["setup.second_crystal_length_mm"] = fmt_full(*second_length_mm);
        if (cut_angle_deg) s["setup.cut_angle_deg"] = fmt_full(*cut_angle_deg);
        if (tau_fs) s["setup.extra_eo_delay_fs"] = fmt_full(*tau_fs);
        if (!output.empty()) s["output.path"] = output;
        if (!pol.empty()) s["units.angle_index"] = pol;
        return s;
    }
};

struct AnalyzerOptions {
    double theta1_deg = 45.0;
    std::optional<double> theta2_deg;
    std::optional<double> hwp_deg;
    std::optional<double> qwp_deg;

    void attach(CLI::App* app) {
        app->add_option("--theta1", theta1_deg, "prism 1 angle, deg")->default_val(45.0);
        app->add_option("--theta2", theta2_deg, "prism 2 angle, deg (defaults to theta1)");
        app->add_option("--hwp", hwp_deg, "half-wave plate on both photons, deg");
        app->add_option("--qwp", qwp_deg, "quarter-wave plate on both photons, deg");
    }

    AnalyzerSettings settings() const {
        AnalyzerSettings a = AnalyzerSettings::degrees(theta1_deg, theta2_deg.value_or(theta1_deg));
        if (hwp_deg) a.hwp_angle = deg_to_rad(*hwp_deg);
        if (qwp_deg) a.qwp_angle = deg_to_rad(*qwp_deg);
        return a;
    }

    std::string describe() const {
        std::string s = "analyzer = theta1 " + fmt_num(theta1_deg) + " deg, theta2 " +
                        fmt_num(theta2_deg.value_or(theta1_deg)) + " deg";
        if (hwp_deg) s += ", hwp " + fmt_num(*hwp_deg) + " deg";
        if (qwp_deg) s += ", qwp " + fmt_num(*qwp_deg) + " deg";
        return s;
    }
};

namespace detail {

struct Context {
    RunConfig rc;
    DispersionCoefficients coeffs;
};

inline Context make_context(const Settings& s) {
    Context ctx{build_config(s), {}};
    ctx.coeffs = dispersion_coefficients(ctx.rc.model, ctx.rc.setup);
    return ctx;
}

inline std::vector<std::string> header(const Context& ctx, const std::string& command) {
    auto lines = ctx.rc.provenance();
    lines.insert(lines.begin() + 1, "command = " + command);
    lines.push_back("D = " + fmt_full(ctx.coeffs.D) + " s/m");
    lines.push_back("B = " + fmt_full(ctx.coeffs.B) + " 1/(m rad)");
    lines.push_back("gvd_o = " + fmt_full(ctx.coeffs.gvd_o) + " s^2/m");
    lines.push_back("gvd_e = " + fmt_full(ctx.coeffs.gvd_e) + " s^2/m");
    lines.push_back("k_o = " + fmt_full(ctx.coeffs.k_o) + " 1/m");
    lines.push_back("k_e = " + fmt_full(ctx.coeffs.k_e) + " 1/m");
    return lines;
}

// Runs `write` against the configured output file or `out`.
inline void emit(const RunConfig& rc, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (rc.output_path.empty()) {
        write(out);
        return;
    }
    std::ofstream f(rc.output_path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + rc.output_path + "'");
    write(f);
    if (!f) throw ConfigError("failed writing output file '" + rc.output_path + "'");
}

inline std::string angle_conversion_line(const RunConfig& rc) {
    return "angle_conversion = internal = asin(sin(external) / n), n = " + fmt_full(rc.angle_index_value()) + " (" +
           (rc.angle_index == Polarization::Ordinary ? "ordinary" : "extraordinary at the cut angle") + ", " +
           fmt_num(rc.setup.degenerate_wavelength_nm()) + " nm)";
}

inline std::function<double(double)> frequency_rate(const Context& ctx, const AnalyzerSettings& a) {
    if (a.has_plates())
        return [&ctx, a](double w) { return rate_via_state(ctx.rc.setup, ctx.coeffs, {0.0, w}, a); };
    if (ctx.rc.setup.scheme == Scheme::TypeII)
        return [&ctx, a](double w) { return rc_typeII_freq(ctx.rc.setup, ctx.coeffs, w, a); };
    return [&ctx, a](double w) { return rc_typeI_freq(ctx.rc.setup, ctx.coeffs, w, a); };
}

inline std::function<double(double)> angular_rate(const Context& ctx, const AnalyzerSettings& a, ScanPlane plane) {
    const bool type2 = ctx.rc.setup.scheme == Scheme::TypeII;
    if (plane == ScanPlane::Orthogonal && !type2)
        throw ConfigError("--orthogonal applies to the type2 scheme only");
    if (a.has_plates()) {
        if (plane == ScanPlane::Orthogonal) throw ConfigError("waveplates are not supported with --orthogonal");
        const AnalyzerSettings phys = type2 ? a : eq15_analyzer(a);
        return [&ctx, phys](double t) { return rate_via_state(ctx.rc.setup, ctx.coeffs, {t, 0.0}, phys); };
    }
    if (type2) return [&ctx, a, plane](double t) { return rc_typeII_ang(ctx.rc.setup, ctx.coeffs, t, a, plane); };
    return [&ctx, a](double t) { return rc_typeI_ang(ctx.rc.setup, ctx.coeffs, t, a); };
}

inline std::function<double(double)> to_axis(const RunConfig& rc) {
    const double l0 = rc.setup.degenerate_wavelength_nm();
    if (rc.frequency_in_nm) return [l0](double w) { return offset_to_wavelength_nm(w, l0); };
    return [](double w) { return w; };
}

inline const char* frequency_column(const RunConfig& rc) { return rc.frequency_in_nm ? "wavelength_nm" : "omega_rad_s"; }

// Frequency samples as offsets, from --lambda (nm) or --omega (rad/s), or the map window.
inline std::vector<double> frequency_samples(const RunConfig& rc, const std::string& lambda, const std::string& omega,
                                             double default_step_nm) {
    const double l0 = rc.setup.degenerate_wavelength_nm();
    if (!lambda.empty() && !omega.empty()) throw ConfigError("give either --lambda or --omega, not both");
    if (!omega.empty()) return parse_range(omega, "--omega");
    std::vector<double> nm = lambda.empty()
                                 ? parse_range(fmt_full(l0 - rc.lambda_half_width_nm) + ":" +
                                                   fmt_full(l0 + rc.lambda_half_width_nm) + ":" + fmt_full(default_step_nm),
                                               "--lambda")
                                 : parse_range(lambda, "--lambda");
    for (double& v : nm) v = wavelength_to_offset(v, l0);
    return nm;
}

inline std::string sidecar_path(const std::string& path, const std::string& suffix) {
    const auto dot = path.rfind('.');
    const auto slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix + ".csv";
    return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace detail

/// Entry point. Exit codes: 0 success, 1 usage error, 2 domain/validation error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Bell-state structure of SPDC within the phase-matching bandwidth"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spdcbell " + std::string(kVersion));

    // map
    CommonOptions map_common;
    bool contours = false;
    std::optional<std::size_t> map_theta_points, map_omega_points;
    auto* map_cmd = app.add_subcommand("map", "frequency-angular intensity and phase map");
    map_common.attach(map_cmd);
    map_cmd->add_flag("--contours", contours, "also write Bell-state contour CSVs (levels 0 and +-pi)");
    map_cmd->add_option("--theta-points", map_theta_points, "samples along theta");
    map_cmd->add_option("--omega-points", map_omega_points, "samples along frequency");
    bool map_rad_s = false;
    map_cmd->add_flag("--rad-s", map_rad_s, "frequency axis in rad/s instead of nm");

    // freq-scan
    CommonOptions fs_common;
    AnalyzerOptions fs_an;
    std::string fs_lambda, fs_omega;
    bool fs_rad_s = false;
    auto* fs_cmd = app.add_subcommand("freq-scan", "coincidence rate versus wavelength");
    fs_common.attach(fs_cmd);
    fs_an.attach(fs_cmd);
    fs_cmd->add_option("--lambda", fs_lambda, "wavelength range start:stop:step, nm");
    fs_cmd->add_option("--omega", fs_omega, "frequency-offset range start:stop:step, rad/s");
    fs_cmd->add_flag("--rad-s", fs_rad_s, "write the abscissa in rad/s");

    // ang-scan
    CommonOptions as_common;
    AnalyzerOptions as_an;
    std::string as_angle;
    bool as_internal = false, as_orthogonal = false;
    auto* as_cmd = app.add_subcommand("ang-scan", "coincidence rate versus scattering angle");
    as_common.attach(as_cmd);
    as_an.attach(as_cmd);
    as_cmd->add_option("--angle", as_angle, "angle range start:stop:step, rad");
    as_cmd->add_flag("--internal", as_internal, "angles are internal (default: external)");
    as_cmd->add_flag("--orthogonal", as_orthogonal, "scan in the plane orthogonal to the optic axis");

    // fringe
    CommonOptions fr_common;
    double fr_theta1 = 45.0;
    std::string fr_theta2 = "-90:90:1";
    std::optional<double> fr_lambda, fr_angle;
    std::optional<double> fr_hwp, fr_qwp;
    bool fr_internal = false;
    auto* fr_cmd = app.add_subcommand("fringe", "polarization fringe versus prism 2 angle, with visibility");
    fr_common.attach(fr_cmd);
    fr_cmd->add_option("--theta1", fr_theta1, "fixed prism 1 angle, deg")->default_val(45.0);
    fr_cmd->add_option("--theta2", fr_theta2, "prism 2 range start:stop:step, deg")->default_val("-90:90:1");
    fr_cmd->add_option("--lambda", fr_lambda, "wavelength of the mode, nm (default: degenerate)");
    fr_cmd->add_option("--angle", fr_angle, "scattering angle of the mode, rad");
    fr_cmd->add_flag("--internal", fr_internal, "--angle is internal (default: external)");
    fr_cmd->add_option("--hwp", fr_hwp, "half-wave plate on both photons, deg");
    fr_cmd->add_option("--qwp", fr_qwp, "quarter-wave plate on both photons, deg");

    // fiber
    CommonOptions fb_common;
    AnalyzerOptions fb_an;
    std::string fb_delay;
    std::optional<double> fb_length, fb_gvd, fb_jitter;
    auto* fb_cmd = app.add_subcommand("fiber", "coincidences versus arrival delay after a dispersive fiber");
    fb_common.attach(fb_cmd);
    fb_an.attach(fb_cmd);
    fb_cmd->add_option("--delay", fb_delay, "delay range start:stop:step, ns");
    fb_cmd->add_option("--fiber-length", fb_length, "fiber length, m");
    fb_cmd->add_option("--gvd", fb_gvd, "fiber GVD, s^2/m");
    fb_cmd->add_option("--jitter", fb_jitter, "detector jitter sigma, ns");

    // classify
    CommonOptions cl_common;
    std::optional<double> cl_lambda, cl_omega, cl_angle, cl_tol;
    bool cl_internal = false;
    auto* cl_cmd = app.add_subcommand("classify", "Bell state generated at one mode point");
    cl_common.attach(cl_cmd);
    cl_cmd->add_option("--lambda", cl_lambda, "wavelength, nm");
    cl_cmd->add_option("--omega", cl_omega, "frequency offset, rad/s");
    cl_cmd->add_option("--angle", cl_angle, "scattering angle, rad");
    cl_cmd->add_flag("--internal", cl_internal, "--angle is internal (default: external)");
    cl_cmd->add_option("--tol", cl_tol, "phase tolerance, rad");

    // fit
    CommonOptions ft_common;
    AnalyzerOptions ft_an;
    std::string ft_model, ft_data, ft_crossed, ft_unit, ft_report;
    std::vector<std::string> ft_init;
    std::optional<double> ft_ratio;
    bool ft_internal = false;
    auto* ft_cmd = app.add_subcommand("fit", "fit a coincidence formula to a measured curve");
    ft_common.attach(ft_cmd);
    ft_an.attach(ft_cmd);
    ft_cmd->add_option("--model", ft_model, "eq11, eq12, eq13, eq14 or eq15")->required();
    ft_cmd->add_option("--data", ft_data, "CSV with abscissa, rate[, sigma]")->required();
    ft_cmd->add_option("--crossed-data", ft_crossed,
                       "second curve taken with prism 2 rotated by 90 deg, fitted jointly with --data");
    ft_cmd->add_option("--unit", ft_unit, "abscissa unit of the data: nm, rad/s or rad");
    ft_cmd->add_option("--init", ft_init, "initial value name=value (repeatable)");
    ft_cmd->add_option("--ratio", ft_ratio, "envelope ratio for eq13/eq15 (default from dispersion)");
    ft_cmd->add_option("--report", ft_report, "key-value report file (default: error stream)");
    ft_cmd->add_flag("--internal", ft_internal, "angular data are internal angles (default: external)");

    // angle-convert
    CommonOptions ac_common;
    std::optional<double> ac_external, ac_internal;
    auto* ac_cmd = app.add_subcommand("angle-convert", "external <-> internal scattering angle");
    ac_common.attach(ac_cmd);
    ac_cmd->add_option("--external", ac_external, "external angle, rad");
    ac_cmd->add_option("--internal", ac_internal, "internal angle, rad");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (map_cmd->parsed()) {
            Settings s = map_common.settings();
            if (map_theta_points) s["grid.theta_points"] = std::to_string(*map_theta_points);
            if (map_omega_points) s["grid.omega_points"] = std::to_string(*map_omega_points);
            if (map_rad_s) s["units.frequency"] = "rad_s";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            if (contours && rc.output_path.empty())
                throw ConfigError("--contours needs --output so the contour files can be written next to it");
            const double l0 = rc.setup.degenerate_wavelength_nm();
            const double w = wavelength_to_offset(l0 - rc.lambda_half_width_nm, l0);
            const auto map = spectrum_map(rc.setup, ctx.coeffs, {-rc.theta_max, rc.theta_max}, {-w, w},
                                          rc.theta_points, rc.omega_points);
            auto lines = detail::header(ctx, "map");
            lines.push_back("theta = internal angle, rad");
            const auto conv = detail::to_axis(rc);
            const char* col = detail::frequency_column(rc);
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_map_csv(os, map, col, conv);
            });
            if (contours) {
                auto write_levels = [&](const std::string& suffix, std::vector<double> levels) {
                    std::ofstream f(detail::sidecar_path(rc.output_path, suffix), std::ios::binary);
                    if (!f) throw ConfigError("cannot open contour file for '" + rc.output_path + "'");
                    write_provenance(f, lines);
                    f << "level,line,vertex,theta," << col << '\n';
                    for (double level : levels) {
                        const auto polys = bell_contours(map, level);
                        for (std::size_t l = 0; l < polys.size(); ++l)
                            for (std::size_t v = 0; v < polys[l].points.size(); ++v)
                                f << fmt_num(level) << ',' << l << ',' << v << ',' << fmt_num(polys[l].points[v][0])
                                  << ',' << fmt_num(conv(polys[l].points[v][1])) << '\n';
                    }
                };
                write_levels("_contour_0", {0.0});
                write_levels("_contour_pi", {-kPi, kPi});
            }
            return 0;
        }

        if (fs_cmd->parsed()) {
            Settings s = fs_common.settings();
            if (fs_rad_s) s["units.frequency"] = "rad_s";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            const auto a = fs_an.settings();
            const auto omegas = detail::frequency_samples(rc, fs_lambda, fs_omega, 0.1);
            const auto rate = detail::frequency_rate(ctx, a);
            std::vector<double> x, y;
            const auto conv = detail::to_axis(rc);
            for (double w : omegas) {
                x.push_back(conv(w));
                y.push_back(rate(w));
            }
            const ScanCurve curve(rc.frequency_in_nm ? AbscissaUnit::Nanometer : AbscissaUnit::RadPerSecond,
                                  std::move(x), std::move(y));
            auto lines = detail::header(ctx, "freq-scan");
            lines.push_back(fs_an.describe());
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_curve_csv(os, curve, detail::frequency_column(rc), "rate");
            });
            return 0;
        }

        if (as_cmd->parsed()) {
            Settings s = as_common.settings();
            if (as_internal) s["units.angle"] = "internal";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            const auto a = as_an.settings();
            const auto angles = parse_range(as_angle.empty() ? "-0.03:0.03:0.0001" : as_angle, "--angle");
            const auto rate = detail::angular_rate(ctx, a, as_orthogonal ? ScanPlane::Orthogonal : ScanPlane::OpticAxis);
            const double n = rc.angle_index_value();
            std::vector<double> y;
            for (double t : angles) y.push_back(rate(rc.external_angle ? external_to_internal_angle(t, n) : t));
            const ScanCurve curve(AbscissaUnit::Radian, angles, std::move(y));
            auto lines = detail::header(ctx, "ang-scan");
            lines.push_back(as_an.describe());
            lines.push_back(std::string("plane = ") + (as_orthogonal ? "orthogonal to the optic axis" : "optic axis"));
            lines.push_back(detail::angle_conversion_line(rc));
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_curve_csv(os, curve, rc.external_angle ? "theta_external_rad" : "theta_internal_rad", "rate");
            });
            return 0;
        }

        if (fr_cmd->parsed()) {
            Settings s = fr_common.settings();
            if (fr_internal) s["units.angle"] = "internal";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            const double l0 = rc.setup.degenerate_wavelength_nm();
            double theta = fr_angle.value_or(0.0);
            if (rc.external_angle) theta = external_to_internal_angle(theta, rc.angle_index_value());
            const ModePoint p{theta, wavelength_to_offset(fr_lambda.value_or(l0), l0)};
            auto grid = parse_range(fr_theta2, "--theta2");
            for (double& g : grid) g = deg_to_rad(g);
            auto rate = [&](const AnalyzerSettings& base) {
                AnalyzerSettings a = base;
                if (fr_hwp) a.hwp_angle = deg_to_rad(*fr_hwp);
                if (fr_qwp) a.qwp_angle = deg_to_rad(*fr_qwp);
                return rate_via_state(rc.setup, ctx.coeffs, p, a);
            };
            const auto curve = fringe_scan(rate, deg_to_rad(fr_theta1), grid);
            std::vector<double> deg;
            for (double g : curve.abscissa()) deg.push_back(rad_to_deg(g));
            const ScanCurve printed(AbscissaUnit::Radian, std::move(deg), curve.rate());
            auto lines = detail::header(ctx, "fringe");
            lines.push_back("mode = theta " + fmt_num(p.theta) + " rad (internal), omega " + fmt_num(p.omega) + " rad/s");
            lines.push_back("visibility = " + fmt_num(visibility(curve)));
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_curve_csv(os, printed, "theta2_deg", "rate");
            });
            return 0;
        }

        if (fb_cmd->parsed()) {
            Settings s = fb_common.settings();
            if (fb_length) s["fiber.length_m"] = fmt_full(*fb_length);
            if (fb_gvd) s["fiber.gvd_s2_per_m"] = fmt_full(*fb_gvd);
            if (fb_jitter) s["fiber.jitter_ns"] = fmt_full(*fb_jitter);
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            if (rc.setup.scheme != Scheme::TypeII) throw ConfigError("fiber applies to the type2 scheme only");
            std::vector<double> delays;
            if (fb_delay.empty()) {
                const double l0 = rc.setup.degenerate_wavelength_nm();
                const double edge =
                    std::abs(delay_of_offset(rc.fiber, wavelength_to_offset(l0 - rc.lambda_half_width_nm, l0)));
                const double step = rc.fiber.jitter_sigma > 0.0 ? rc.fiber.jitter_sigma / 8.0 : edge / 500.0;
                const auto half = static_cast<long>(std::ceil(edge / step));
                for (long i = -half; i <= half; ++i) delays.push_back(static_cast<double>(i) * step);
            } else {
                delays = parse_range(fb_delay, "--delay");
                for (double& d : delays) d *= 1e-9;
            }
            const auto curve = time_distribution(rc.setup, ctx.coeffs, rc.fiber, fb_an.settings(), delays);
            auto lines = detail::header(ctx, "fiber");
            lines.push_back(fb_an.describe());
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_curve_csv(os, curve, "delay_ns", "rate");
            });
            return 0;
        }

        if (cl_cmd->parsed()) {
            Settings s = cl_common.settings();
            if (cl_internal) s["units.angle"] = "internal";
            if (cl_tol) s["classify.tol"] = fmt_full(*cl_tol);
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            if (cl_lambda && cl_omega) throw ConfigError("give either --lambda or --omega, not both");
            const double l0 = rc.setup.degenerate_wavelength_nm();
            const double omega = cl_omega ? *cl_omega : wavelength_to_offset(cl_lambda.value_or(l0), l0);
            double theta = cl_angle.value_or(0.0);
            if (rc.external_angle) theta = external_to_internal_angle(theta, rc.angle_index_value());
            const auto amp = two_photon_amplitude(rc.setup, ctx.coeffs, {theta, omega});
            const auto label = classify(amp, rc.classify_tol);
            auto lines = detail::header(ctx, "classify");
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                os << "theta_internal_rad,omega_rad_s,wavelength_nm,magnitude,phase,label\n";
                os << fmt_num(theta) << ',' << fmt_num(omega) << ',' << fmt_num(offset_to_wavelength_nm(omega, l0))
                   << ',' << fmt_num(amp.magnitude) << ',' << fmt_num(amp.relative_phase) << ','
                   << to_string(label.kind) << '\n';
            });
            return 0;
        }

        if (ft_cmd->parsed()) {
            Settings s = ft_common.settings();
            if (ft_internal) s["units.angle"] = "internal";
            const auto model = parse_fit_model(ft_model);
            if (s.find("setup.scheme") == s.end())
                s["setup.scheme"] = model == FitModel::Eq13 || model == FitModel::Eq15 ? "type1" : "type2";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            const bool want_type2 = model == FitModel::Eq11 || model == FitModel::Eq12 || model == FitModel::Eq14;
            if (want_type2 != (rc.setup.scheme == Scheme::TypeII))
                throw ConfigError(std::string(to_string(model)) + " does not apply to scheme " +
                                  std::string(to_string(rc.setup.scheme)));
            const auto file_unit = header_unit(ft_data);
            if (!ft_unit.empty() && file_unit && parse_unit(ft_unit) != *file_unit)
                throw ConfigError("--unit " + ft_unit + " contradicts the data header (" +
                                  std::string(to_string(*file_unit)) + ")");
            const AbscissaUnit unit = !ft_unit.empty()       ? parse_unit(ft_unit)
                                      : file_unit            ? *file_unit
                                      : is_angular(model)    ? AbscissaUnit::Radian
                                      : rc.frequency_in_nm   ? AbscissaUnit::Nanometer
                                                             : AbscissaUnit::RadPerSecond;
            const bool unit_ok = is_angular(model) ? unit == AbscissaUnit::Radian
                                                   : unit == AbscissaUnit::Nanometer || unit == AbscissaUnit::RadPerSecond;
            if (!unit_ok)
                throw ConfigError("unit mismatch: " + std::string(to_string(model)) + " cannot use data in " +
                                  std::string(to_string(unit)) + (is_angular(model) ? " (expected rad)" : " (expected nm or rad/s)"));
            auto load = [&](const std::string& path) {
                if (const auto u = header_unit(path); u && *u != unit)
                    throw ConfigError("data header of '" + path + "' is in " + std::string(to_string(*u)) +
                                      ", expected " + std::string(to_string(unit)));
                const ScanCurve raw = ingest_curve(path, unit);
                if (unit == AbscissaUnit::Nanometer) return to_frequency_offsets(raw, rc.setup.degenerate_wavelength_nm());
                if (is_angular(model) && rc.external_angle) {
                    std::vector<double> internal;
                    for (double t : raw.abscissa()) internal.push_back(external_to_internal_angle(t, rc.angle_index_value()));
                    return ScanCurve(AbscissaUnit::Radian, std::move(internal), raw.rate(), raw.sigma());
                }
                return raw;
            };
            const ScanCurve data = load(ft_data);

            ModelOptions mo;
            mo.analyzer = ft_an.settings();
            if (mo.analyzer.has_plates()) throw ConfigError("fit models do not take waveplate settings");
            mo.tau_extra = rc.setup.extra_eo_delay;
            const double L = rc.setup.crystal_length, L2 = rc.setup.second_crystal_length;
            if (model == FitModel::Eq13) mo.envelope_ratio = ft_ratio.value_or(ctx.coeffs.gvd_o * L / (ctx.coeffs.gvd_e * L2));
            if (model == FitModel::Eq15) mo.envelope_ratio = ft_ratio.value_or(ctx.coeffs.k_o * L / (ctx.coeffs.k_e * L2));

            ParamVector init = initial_guess(model, mo, data);
            const auto names = param_names(model);
            for (const auto& item : ft_init) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw ConfigError("--init expects name=value, got '" + item + "'");
                const std::string name = item.substr(0, eq);
                const auto v = spdcbell::detail::parse_double(item.substr(eq + 1));
                if (!v) throw ConfigError("--init value for '" + name + "' is not a number");
                bool found = false;
                for (std::size_t j = 0; j < kFitParams; ++j)
                    if (names[j] == name) {
                        init[j] = *v;
                        found = true;
                    }
                if (!found) throw ConfigError("--init: model " + std::string(to_string(model)) + " has no parameter '" + name + "'");
            }
            std::vector<FitSeries> series{{mo, data}};
            if (!ft_crossed.empty()) {
                ModelOptions crossed = mo;
                crossed.analyzer.theta2 += kPi / 2;
                series.push_back({crossed, load(ft_crossed)});
            }
            const auto result = fit_joint(model, series, init);

            auto lines = detail::header(ctx, "fit");
            lines.push_back(ft_an.describe());
            lines.push_back("data = " + ft_data + " (" + std::string(to_string(unit)) + ")");
            if (!ft_crossed.empty()) lines.push_back("crossed_data = " + ft_crossed + " (prism 2 + 90 deg)");
            if (is_angular(model)) lines.push_back(detail::angle_conversion_line(rc));
            lines.push_back("envelope_ratio = " + fmt_full(mo.envelope_ratio));
            lines.push_back("converged = " + std::string(result.converged ? "true" : "false"));
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                write_fit_params_csv(os, result);
            });
            if (ft_report.empty()) {
                write_fit_report(err, result);
            } else {
                std::ofstream f(ft_report, std::ios::binary);
                if (!f) throw ConfigError("cannot open report file '" + ft_report + "'");
                write_provenance(f, lines);
                write_fit_report(f, result);
            }
            if (!result.converged) err << "warning: fit did not converge in " << result.iterations << " iterations\n";
            return 0;
        }

        if (ac_cmd->parsed()) {
            Settings s = ac_common.settings();
            if (s.find("setup.scheme") == s.end()) s["setup.scheme"] = "type2";
            const auto ctx = detail::make_context(s);
            const auto& rc = ctx.rc;
            if (ac_external.has_value() == ac_internal.has_value())
                throw ConfigError("give exactly one of --external or --internal");
            const double n = rc.angle_index_value();
            const double ext = ac_external ? *ac_external : internal_to_external_angle(*ac_internal, n);
            const double in = ac_internal ? *ac_internal : external_to_internal_angle(*ac_external, n);
            if (!std::isfinite(ext) || !std::isfinite(in)) throw DomainError("angle beyond total internal reflection");
            auto lines = detail::header(ctx, "angle-convert");
            lines.push_back(detail::angle_conversion_line(rc));
            detail::emit(rc, out, [&](std::ostream& os) {
                write_provenance(os, lines);
                os << "external_rad,internal_rad,index\n" << fmt_num(ext) << ',' << fmt_num(in) << ',' << fmt_num(n) << '\n';
            });
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"spdcbell"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spdcbell::cli
