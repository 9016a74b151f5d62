#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coincidence.hpp"
#include "dual.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "scan_curve.hpp"
#include "units.hpp"

namespace spdcbell {

/// Coincidence-rate model fitted to a scan.
enum class FitModel {
    Eq11,  ///< type-II frequency scan, coefficient tau0 (s)
    Eq12,  ///< type-II frequency scan with a fixed plate delay, coefficient tau0 (s)
    Eq13,  ///< two-type-I frequency scan, coefficient gvd_e * L (s^2)
    Eq14,  ///< type-II angular scan, coefficient B * L (1/rad)
    Eq15,  ///< two-type-I angular scan, coefficient k_e * L (1/rad^2)
};

constexpr std::string_view to_string(FitModel m) {
    switch (m) {
        case FitModel::Eq11: return "eq11";
        case FitModel::Eq12: return "eq12";
        case FitModel::Eq13: return "eq13";
        case FitModel::Eq14: return "eq14";
        case FitModel::Eq15: return "eq15";
    }
    return "?";
}

inline FitModel parse_fit_model(std::string_view s) {
    for (auto m : {FitModel::Eq11, FitModel::Eq12, FitModel::Eq13, FitModel::Eq14, FitModel::Eq15})
        if (s == to_string(m)) return m;
    throw ConfigError("unknown fit model '" + std::string(s) + "' (expected eq11..eq15)");
}

constexpr bool is_angular(FitModel m) { return m == FitModel::Eq14 || m == FitModel::Eq15; }

/// Power of the abscissa entering the phase: 1 for linear mismatch, 2 for quadratic.
constexpr int abscissa_power(FitModel m) { return m == FitModel::Eq13 || m == FitModel::Eq15 ? 2 : 1; }

inline constexpr std::size_t kFitParams = 4;
using ParamVector = std::array<double, kFitParams>;
enum ParamIndex : std::size_t { kCoefficient = 0, kAmplitude = 1, kBackground = 2, kCenter = 3 };

inline std::array<std::string_view, kFitParams> param_names(FitModel m) {
    std::string_view coef = "tau0";
    if (m == FitModel::Eq13) coef = "gvd_e_L";
    if (m == FitModel::Eq14) coef = "B_L";
    if (m == FitModel::Eq15) coef = "k_e_L";
    return {coef, "amplitude", "background", "center"};
}

/// Fixed (non-fitted) inputs of a model.
struct ModelOptions {
    AnalyzerSettings analyzer = AnalyzerSettings::degrees(45, 45);
    double tau_extra = 0.0;       // eq12 plate delay, s
    double envelope_ratio = 1.0;  // eq13: gvd_o/gvd_e, eq15: k_o/k_e
};

/// Model value A * R(x - center) + background for parameters p (double or Dual).
template <class T>
T model_value(FitModel m, const ModelOptions& o, double x, const std::array<T, kFitParams>& p) {
    using std::cos;
    using std::sin;
    auto sq = [](const T& v) { return v * v; };
    const double t1 = o.analyzer.theta1, t2 = o.analyzer.theta2;
    const double s_plus = std::pow(std::sin(t1 + t2), 2), s_minus = std::pow(std::sin(t1 - t2), 2);
    const T u = x - p[kCenter];
    const T& coef = p[kCoefficient];
    T shape = T(0.0);
    switch (m) {
        case FitModel::Eq11:
        case FitModel::Eq12: {
            const T mod = u * (coef + (m == FitModel::Eq12 ? o.tau_extra : 0.0));
            shape = sq(sinc(u * coef)) * (s_plus * sq(cos(mod)) + s_minus * sq(sin(mod)));
            break;
        }
        case FitModel::Eq13: {
            const T half = coef * u * u / 2.0;
            const double c_minus = std::pow(std::cos(t1 - t2), 2), c_plus = std::pow(std::cos(t1 + t2), 2);
            shape = sq(sinc(o.envelope_ratio * half)) * (c_minus * sq(cos(half)) + c_plus * sq(sin(half)));
            break;
        }
        case FitModel::Eq14: {
            const T half = coef * u / 2.0;
            shape = sq(sinc(half)) * (s_plus * sq(cos(half)) + s_minus * sq(sin(half)));
            break;
        }
        case FitModel::Eq15: {
            const T half = coef * u * u / 2.0;
            shape = sq(sinc(o.envelope_ratio * half)) * (s_plus * sq(cos(half)) + s_minus * sq(sin(half)));
            break;
        }
    }
    return p[kAmplitude] * shape + p[kBackground];
}

inline double model_value(FitModel m, const ModelOptions& o, double x, const ParamVector& p) {
    return model_value<double>(m, o, x, p);
}

/// Per-point errors: the curve's own, or Poisson sqrt(max(rate, 1)).
inline std::vector<double> effective_sigma(const ScanCurve& data) {
    if (data.sigma()) return *data.sigma();
    std::vector<double> s(data.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(data.rate()[i], 1.0));
    return s;
}

inline void require_fit_unit(FitModel m, const ScanCurve& data) {
    const auto want = is_angular(m) ? AbscissaUnit::Radian : AbscissaUnit::RadPerSecond;
    if (data.unit() != want)
        throw ConfigError("unit mismatch: " + std::string(to_string(m)) + " expects abscissa in " +
                          std::string(to_string(want)) + ", data is in " + std::string(to_string(data.unit())));
}

/// Converts a wavelength-abscissa curve to frequency offsets around `center_nm`.
inline ScanCurve to_frequency_offsets(const ScanCurve& c, double center_nm) {
    if (c.unit() != AbscissaUnit::Nanometer) throw ConfigError("to_frequency_offsets expects a curve in nm");
    std::vector<double> w;
    w.reserve(c.size());
    for (double l : c.abscissa()) w.push_back(wavelength_to_offset(l, center_nm));
    return ScanCurve(AbscissaUnit::RadPerSecond, std::move(w), c.rate(), c.sigma());
}

/// (model - data) / sigma.
inline std::vector<double> residuals(FitModel m, const ModelOptions& o, const ParamVector& p, const ScanCurve& data) {
    const auto sigma = effective_sigma(data);
    std::vector<double> r(data.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = (model_value(m, o, data.abscissa()[i], p) - data.rate()[i]) / sigma[i];
    return r;
}

/// d(model)/d(param) at abscissa x, by forward-mode differentiation.
inline ParamVector model_gradient(FitModel m, const ModelOptions& o, double x, const ParamVector& p) {
    std::array<Dual<kFitParams>, kFitParams> dp;
    for (std::size_t j = 0; j < kFitParams; ++j) dp[j] = Dual<kFitParams>::variable(p[j], j);
    const auto f = model_value(m, o, x, dp);
    return f.d;
}

struct FitBounds {
    ParamVector lower{0.0, 0.0, -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    ParamVector upper{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
};

/// Coefficient is nonnegative except for eq12, whose sign relative to the plate delay matters.
inline FitBounds default_bounds(FitModel m) {
    FitBounds b;
    if (m == FitModel::Eq12) b.lower[kCoefficient] = -std::numeric_limits<double>::infinity();
    return b;
}

struct FitControl {
    int max_iterations = 200;
    double chi2_rel_tol = 1e-8;
    double step_tol = 1e-10;
    double lambda0 = 1e-3;
    double lambda_factor = 10.0;
};

struct FitResult {
    FitModel model = FitModel::Eq11;
    std::array<std::string_view, kFitParams> names{};
    ParamVector params{};
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
    double chi2 = 0.0;
    std::size_t dof = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> chi2_history;  // chi2 after each accepted step, starting with the initial value

    double value(std::string_view name) const {
        for (std::size_t i = 0; i < kFitParams; ++i)
            if (names[i] == name) return params[i];
        throw ConfigError("fit result has no parameter '" + std::string(name) + "'");
    }
    double error(std::size_t i) const { return std::sqrt(std::max(covariance(i, i), 0.0)); }
};

namespace detail {

// Normal matrix in Jacobi-scaled form; throws when it is numerically singular.
inline Eigen::Matrix4d scaled_normal(const Eigen::Matrix4d& a, Eigen::Vector4d& inv_sqrt_diag) {
    for (int i = 0; i < 4; ++i) {
        if (!(a(i, i) > 0.0) || !std::isfinite(a(i, i)))
            throw FitError("degenerate fit: the model does not depend on parameter " + std::to_string(i));
        inv_sqrt_diag(i) = 1.0 / std::sqrt(a(i, i));
    }
    Eigen::Matrix4d s = inv_sqrt_diag.asDiagonal() * a * inv_sqrt_diag.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(s, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()(0) < 1e-13 * eig.eigenvalues()(3))
        throw FitError("degenerate fit: singular normal matrix (parameters not separately identifiable)");
    return s;
}

inline void linear_amplitude_background(const std::vector<double>& g, const ScanCurve& data,
                                        const std::vector<double>& sigma, double& amp, double& bg, double& chi2) {
    double sw = 0, sg = 0, sgg = 0, sy = 0, sgy = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        const double y = data.rate()[i];
        sw += w;
        sg += w * g[i];
        sgg += w * g[i] * g[i];
        sy += w * y;
        sgy += w * g[i] * y;
    }
    const double det = sw * sgg - sg * sg;
    if (std::abs(det) <= 1e-300) {
        amp = 0.0;
        bg = sy / sw;
    } else {
        amp = (sw * sgy - sg * sy) / det;
        bg = (sgg * sy - sg * sgy) / det;
    }
    if (amp < 0.0) {
        amp = 0.0;
        bg = sy / sw;
    }
    chi2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = (amp * g[i] + bg - data.rate()[i]) / sigma[i];
        chi2 += r * r;
    }
}

}  // namespace detail

/// Seeds all four parameters. Frequency/angle scale: the first zero of the
/// curve when the analyzer setting has its maximum at the center (the
/// (45, 45)-type curve), converted through the model's phase; otherwise a
/// log grid scan of the coefficient. Amplitude and background then come from
/// a weighted linear least-squares solve.
inline ParamVector initial_guess(FitModel m, const ModelOptions& o, const ScanCurve& data) {
    require_fit_unit(m, data);
    const auto& x = data.abscissa();
    const auto& y = data.rate();
    const auto sigma = effective_sigma(data);
    const std::size_t n = x.size();
    const double t1 = o.analyzer.theta1, t2 = o.analyzer.theta2;
    const int power = abscissa_power(m);

    const bool center_peaked = m == FitModel::Eq13
                                   ? std::pow(std::cos(t1 - t2), 2) >= std::pow(std::cos(t1 + t2), 2)
                                   : std::pow(std::sin(t1 + t2), 2) >= std::pow(std::sin(t1 - t2), 2);

    double center = 0.0;
    {
        double sy = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy += y[i];
            sxy += x[i] * y[i];
        }
        if (sy > 0.0) center = sxy / sy;
    }

    // A zero at distance z fixes the modulation rate; for eq12 that is
    // |tau0 + tau|, so both signs of tau0 + tau are candidates.
    auto coefficients_from_zero = [&](double z) -> std::vector<double> {
        const double zp = power == 1 ? z : z * z;
        switch (m) {
            case FitModel::Eq11: return {kPi / (2.0 * zp)};
            case FitModel::Eq12: return {kPi / (2.0 * zp) - o.tau_extra, -kPi / (2.0 * zp) - o.tau_extra};
            default: return {kPi / zp};
        }
    };

    std::optional<double> coef;
    std::vector<double> candidates;
    if (center_peaked) {
        const std::size_t peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
        center = x[peak];
        const double lo = *std::min_element(y.begin(), y.end());
        const double range = y[peak] - lo;
        // Walk outward until the curve drops below 25% of the range, then
        // track the minimum until it recovers by 10% of the range.
        auto first_zero = [&](int dir) -> double {
            std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak);
            const auto last = static_cast<std::ptrdiff_t>(n) - 1;
            while (i >= 0 && i <= last && y[i] > lo + 0.25 * range) i += dir;
            if (i < 0 || i > last) return -1.0;
            std::ptrdiff_t best = i;
            while (i >= 0 && i <= last && y[i] < y[best] + 0.1 * range) {
                if (y[i] < y[best]) best = i;
                i += dir;
            }
            if (i < 0 || i > last) return -1.0;
            return std::abs(x[best] - center);
        };
        double sum = 0.0;
        int found = 0;
        for (int dir : {-1, 1}) {
            const double z = first_zero(dir);
            if (z > 0.0) {
                sum += z;
                ++found;
            }
        }
        if (found > 0) candidates = coefficients_from_zero(sum / found);
    }

    std::vector<double> g(n);
    auto shape_for = [&](double c) {
        const ParamVector p{c, 1.0, 0.0, center};
        for (std::size_t i = 0; i < n; ++i) g[i] = model_value(m, o, x[i], p);
    };
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double c) {
        if (c == 0.0 || (m != FitModel::Eq12 && !(c > 0.0))) return;
        shape_for(c);
        double a, b, q;
        detail::linear_amplitude_background(g, data, sigma, a, b, q);
        if (q < best) {
            best = q;
            coef = c;
        }
    };
    for (double c : candidates) consider(c);

    double amp = 0.0, bg = 0.0, chi2 = 0.0;
    if (!coef) {
        double reach = 0.0;
        for (double xi : x) reach = std::max(reach, std::abs(xi - center));
        const double reach_p = power == 1 ? reach : reach * reach;
        constexpr int kGrid = 400;
        for (int k = 0; k < kGrid; ++k) {
            const double c = 0.05 * std::pow(1000.0, static_cast<double>(k) / (kGrid - 1)) / reach_p;
            if (m == FitModel::Eq12) {
                consider(c - o.tau_extra);
                consider(-c - o.tau_extra);
            } else {
                consider(c);
            }
        }
        if (!coef) throw FitError("could not seed the fit coefficient from the data");
    }
    shape_for(*coef);
    detail::linear_amplitude_background(g, data, sigma, amp, bg, chi2);
    if (!(amp > 0.0)) amp = std::max(*std::max_element(y.begin(), y.end()) - bg, 1e-12);
    return {*coef, amp, bg, center};
}

/// One measured curve and the analyzer settings it was taken with.
struct FitSeries {
    ModelOptions options;
    ScanCurve data;
};

/// Damped (Levenberg-Marquardt) least squares on the residuals (model - data)/sigma,
/// with one parameter set shared by every series.
/// The normal-matrix diagonal is multiplied by (1 + lambda); lambda shrinks by
/// lambda_factor on accepted steps and grows on rejected ones. Parameters
/// outside the bounds are clamped. Non-convergence is reported through
/// FitResult::converged, never thrown.
inline FitResult fit_joint(FitModel m, const std::vector<FitSeries>& series, const ParamVector& init,
                           const std::optional<FitBounds>& bounds_opt = {}, const FitControl& ctl = {}) {
    if (series.empty()) throw ConfigError("fit needs at least one data series");
    for (const auto& s : series) require_fit_unit(m, s.data);
    const FitBounds bounds = bounds_opt.value_or(default_bounds(m));
    for (std::size_t j = 0; j < kFitParams; ++j)
        if (!(init[j] >= bounds.lower[j] && init[j] <= bounds.upper[j]))
            throw ConfigError("initial value of " + std::string(param_names(m)[j]) + " lies outside its bounds");

    std::vector<double> x, y, sigma;
    std::vector<const ModelOptions*> opts;
    for (const auto& s : series) {
        const auto sg = effective_sigma(s.data);
        x.insert(x.end(), s.data.abscissa().begin(), s.data.abscissa().end());
        y.insert(y.end(), s.data.rate().begin(), s.data.rate().end());
        sigma.insert(sigma.end(), sg.begin(), sg.end());
        opts.insert(opts.end(), s.data.size(), &s.options);
    }
    const std::size_t n = x.size();

    // Internal parameters are p / scale so that all are O(1).
    ParamVector scale{};
    scale[kCoefficient] = init[kCoefficient] != 0.0 ? std::abs(init[kCoefficient]) : 1.0;
    scale[kAmplitude] = std::max(std::abs(init[kAmplitude]), 1e-12);
    scale[kBackground] = std::max(std::abs(init[kBackground]), 1e-2 * scale[kAmplitude]);
    {
        const double width = abscissa_power(m) == 1 ? 1.0 / scale[kCoefficient]
                                                    : 1.0 / std::sqrt(scale[kCoefficient]);
        scale[kCenter] = std::isfinite(width) && width > 0.0 ? width : 1.0;
    }

    Eigen::VectorXd r(n);
    Eigen::Matrix<double, Eigen::Dynamic, 4> jac(n, 4);
    auto evaluate = [&](const ParamVector& p, bool with_jacobian) {
        double chi2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double f;
            if (with_jacobian) {
                std::array<Dual<kFitParams>, kFitParams> dp;
                for (std::size_t j = 0; j < kFitParams; ++j) dp[j] = Dual<kFitParams>::variable(p[j], j);
                const auto fd = model_value(m, *opts[i], x[i], dp);
                f = fd.v;
                for (std::size_t j = 0; j < kFitParams; ++j) jac(i, j) = fd.d[j] * scale[j] / sigma[i];
            } else {
                f = model_value(m, *opts[i], x[i], p);
            }
            r(i) = (f - y[i]) / sigma[i];
            chi2 += r(i) * r(i);
        }
        return chi2;
    };

    FitResult res;
    res.model = m;
    res.names = param_names(m);
    res.dof = n > kFitParams ? n - kFitParams : 0;

    ParamVector p = init;
    double chi2 = evaluate(p, true);
    res.chi2_history.push_back(chi2);
    Eigen::Matrix4d a = jac.transpose() * jac;
    Eigen::Vector4d g = jac.transpose() * r;
    Eigen::Vector4d d;
    Eigen::Matrix4d s = detail::scaled_normal(a, d);

    double lambda = ctl.lambda0;
    int it = 0;
    while (it < ctl.max_iterations && !res.converged) {
        ++it;
        if (chi2 == 0.0) {
            res.converged = true;
            break;
        }
        Eigen::Matrix4d damped = s;
        damped.diagonal().array() *= (1.0 + lambda);
        const Eigen::Vector4d z = damped.ldlt().solve(-(d.asDiagonal() * g));
        const Eigen::Vector4d delta_u = d.asDiagonal() * z;

        ParamVector trial = p;
        double step2 = 0.0;
        for (std::size_t j = 0; j < kFitParams; ++j) {
            trial[j] = std::clamp(p[j] + delta_u(static_cast<int>(j)) * scale[j], bounds.lower[j], bounds.upper[j]);
            const double du = (trial[j] - p[j]) / scale[j];
            step2 += du * du;
        }
        const double trial_chi2 = evaluate(trial, false);
        if (std::isfinite(trial_chi2) && trial_chi2 < chi2) {
            const double rel = (chi2 - trial_chi2) / chi2;
            p = trial;
            chi2 = evaluate(p, true);
            res.chi2_history.push_back(chi2);
            a = jac.transpose() * jac;
            g = jac.transpose() * r;
            for (int i = 0; i < 4; ++i) d(i) = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 0.0;
            s = d.asDiagonal() * a * d.asDiagonal();
            lambda = std::max(lambda / ctl.lambda_factor, 1e-12);
            if (rel < ctl.chi2_rel_tol) res.converged = true;
        } else {
            lambda *= ctl.lambda_factor;
        }
        if (std::sqrt(step2) < ctl.step_tol) res.converged = true;
    }

    evaluate(p, true);
    a = jac.transpose() * jac;
    s = detail::scaled_normal(a, d);
    const Eigen::Matrix4d cov_u = d.asDiagonal() * s.inverse() * d.asDiagonal();
    Eigen::Vector4d sc;
    for (int j = 0; j < 4; ++j) sc(j) = scale[j];
    res.covariance = sc.asDiagonal() * cov_u * sc.asDiagonal();
    if (res.dof > 0) res.covariance *= chi2 / static_cast<double>(res.dof);
    res.params = p;
    res.chi2 = chi2;
    res.iterations = it;
    return res;
}

/// Single-curve fit; see fit_joint().
inline FitResult fit_curve(FitModel m, const ModelOptions& o, const ScanCurve& data, const ParamVector& init,
                           const std::optional<FitBounds>& bounds = {}, const FitControl& ctl = {}) {
    return fit_joint(m, {FitSeries{o, data}}, init, bounds, ctl);
}

/// Flat `key = value` report.
inline void write_fit_report(std::ostream& os, const FitResult& r) {
    os << "model = " << to_string(r.model) << '\n';
    for (std::size_t i = 0; i < kFitParams; ++i) {
        os << r.names[i] << " = " << fmt_num(r.params[i]) << '\n';
        os << r.names[i] << "_error = " << fmt_num(r.error(i)) << '\n';
    }
    os << "chi2 = " << fmt_num(r.chi2) << '\n';
    os << "dof = " << r.dof << '\n';
    os << "iterations = " << r.iterations << '\n';
    os << "converged = " << (r.converged ? "true" : "false") << '\n';
}

/// name,value,error rows.
inline void write_fit_params_csv(std::ostream& os, const FitResult& r) {
    os << "name,value,error\n";
    for (std::size_t i = 0; i < kFitParams; ++i)
        os << r.names[i] << ',' << fmt_num(r.params[i]) << ',' << fmt_num(r.error(i)) << '\n';
}

}  // namespace spdcbell
