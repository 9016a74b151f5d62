#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "setup.hpp"
#include "units.hpp"

namespace spdcbell {

enum class Polarization { Ordinary, Extraordinary };

/// n^2 = a + b / (l^2 - c) - d * l^2, with l the vacuum wavelength in micrometers.
struct SellmeierCoefficients {
    double a = 1.0;
    double b = 0.0;  // um^2
    double c = 0.0;  // um^2
    double d = 0.0;  // um^-2

    double index(double wavelength_um) const {
        const double l2 = wavelength_um * wavelength_um;
        return std::sqrt(a + b / (l2 - c) - d * l2);
    }
};

/// Uniaxial-crystal refractive-index model (ordinary + principal extraordinary branch).
struct DispersionModel {
    std::string name;
    SellmeierCoefficients ordinary;
    SellmeierCoefficients extraordinary;
    double min_wavelength_nm = 0.0;
    double max_wavelength_nm = 0.0;

    bool in_range(double wavelength_nm) const {
        return wavelength_nm >= min_wavelength_nm && wavelength_nm <= max_wavelength_nm;
    }
};

/// Beta-barium borate, Eimerl et al., J. Appl. Phys. 62, 1968 (1987).
inline DispersionModel bbo_eimerl1987() {
    return DispersionModel{
        "BBO (Eimerl et al., J. Appl. Phys. 62, 1968, 1987)",
        {2.7405, 0.0184, 0.0179, 0.0155},
        {2.3730, 0.0128, 0.0156, 0.0044},
        220.0,
        1060.0,
    };
}

inline void require_in_range(const DispersionModel& model, double wavelength_nm) {
    if (!(model.in_range(wavelength_nm))) {
        std::ostringstream os;
        os.precision(6);
        os << "wavelength " << wavelength_nm << " nm outside the valid range [" << model.min_wavelength_nm
           << ", " << model.max_wavelength_nm << "] nm of " << model.name;
        throw DomainError(os.str());
    }
}

/// Refractive index of a wave with the given polarization travelling at
/// `angle_to_axis` from the optic axis. The extraordinary index follows the
/// index ellipsoid 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2.
inline double refractive_index(const DispersionModel& model, Polarization pol, double wavelength_nm,
                               double angle_to_axis = 0.0) {
    require_in_range(model, wavelength_nm);
    if (!(angle_to_axis >= -1e-12 && angle_to_axis <= kPi / 2 + 1e-12))
        throw DomainError("angle to optic axis " + std::to_string(angle_to_axis) + " rad outside [0, pi/2]");
    const double um = wavelength_nm * 1e-3;
    const double n_o = model.ordinary.index(um);
    const double s = std::sin(angle_to_axis);
    if (pol == Polarization::Ordinary || s == 0.0) return n_o;
    const double n_e = model.extraordinary.index(um);
    const double c = std::cos(angle_to_axis);
    return 1.0 / std::sqrt(c * c / (n_o * n_o) + s * s / (n_e * n_e));
}

/// Wavenumber 2 pi n / lambda in 1/m.
inline double wavevector(const DispersionModel& model, Polarization pol, double wavelength_nm,
                         double angle_to_axis = 0.0) {
    return 2.0 * kPi * refractive_index(model, pol, wavelength_nm, angle_to_axis) / (wavelength_nm * 1e-9);
}

/// Same as wavevector() but parameterized by angular frequency (rad/s).
inline double wavevector_at(const DispersionModel& model, Polarization pol, double omega,
                            double angle_to_axis = 0.0) {
    return wavevector(model, pol, wavelength_nm(omega), angle_to_axis);
}

/// Checks the model invariants (n > 1, normal dispersion) at `samples` points across the valid range.
inline void validate_model(const DispersionModel& model, int samples = 50) {
    if (!(model.min_wavelength_nm > 0.0 && model.max_wavelength_nm > model.min_wavelength_nm))
        throw ConfigError("dispersion model '" + model.name + "' has an empty valid range");
    for (Polarization pol : {Polarization::Ordinary, Polarization::Extraordinary}) {
        double prev = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double l = model.min_wavelength_nm +
                             (model.max_wavelength_nm - model.min_wavelength_nm) * i / (samples - 1);
            const double n = refractive_index(model, pol, l, pol == Polarization::Ordinary ? 0.0 : kPi / 2);
            if (!std::isfinite(n) || n <= 1.0)
                throw ConfigError("dispersion model '" + model.name + "': index not real and > 1 at " +
                                  std::to_string(l) + " nm");
            if (i > 0 && !(n < prev))
                throw ConfigError("dispersion model '" + model.name + "': dispersion not normal near " +
                                  std::to_string(l) + " nm");
            prev = n;
        }
    }
}

/// Longitudinal mismatch of the collinear degenerate pair, k_1 + k_2 - k_p, for a crystal cut at `cut_angle`.
/// The pump is extraordinary in both schemes (negative uniaxial crystal).
inline double collinear_mismatch(const DispersionModel& model, double pump_nm, Scheme scheme, double cut_angle) {
    const double signal_nm = degenerate_wavelength_nm(pump_nm);
    const double k_p = wavevector(model, Polarization::Extraordinary, pump_nm, cut_angle);
    const double k_o = wavevector(model, Polarization::Ordinary, signal_nm);
    const double k_other = scheme == Scheme::TypeII
                               ? wavevector(model, Polarization::Extraordinary, signal_nm, cut_angle)
                               : k_o;
    return k_other + k_o - k_p;
}

/// Cut angle for collinear frequency-degenerate phase matching, found by a
/// coarse bracket scan over (0, pi/2) followed by bisection.
inline double phase_matching_angle(const DispersionModel& model, double pump_nm, Scheme scheme) {
    require_in_range(model, pump_nm);
    require_in_range(model, degenerate_wavelength_nm(pump_nm));
    auto f = [&](double a) { return collinear_mismatch(model, pump_nm, scheme, a); };

    constexpr int kBracketSteps = 180;
    double lo = 0.0;
    double f_lo = f(lo);
    double hi = -1.0;
    for (int i = 1; i <= kBracketSteps; ++i) {
        const double a = kPi / 2 * i / kBracketSteps;
        const double fa = f(a);
        if ((f_lo <= 0.0) != (fa <= 0.0)) {
            hi = a;
            break;
        }
        lo = a;
        f_lo = fa;
    }
    if (hi < 0.0)
        throw ConfigError("no phase matching: collinear degenerate mismatch for " + std::string(to_string(scheme)) +
                          " at " + std::to_string(pump_nm) + " nm pump has no sign change in (0, pi/2)");

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < 1e-6 || hi - lo < 1e-15) break;
        if ((fm <= 0.0) == (f_lo <= 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    if (std::abs(f(mid)) >= 0.1)
        throw ConfigError("phase-matching bisection did not reach |dz| < 0.1 1/m");
    return mid;
}

/// Derivatives of the wavevectors at the collinear degenerate point that
/// parameterize the linear (type-II) and quadratic (type-I) mismatch expansions.
struct DispersionCoefficients {
    double D = 0.0;      // s/m, dk_e/dOmega - dk_o/dOmega
    double B = 0.0;      // 1/(m rad), dk_e/dtheta
    double gvd_o = 0.0;  // s^2/m
    double gvd_e = 0.0;  // s^2/m, extraordinary wave at the cut angle
    double k_o = 0.0;    // 1/m at the degenerate wavelength
    double k_e = 0.0;    // 1/m at the degenerate wavelength and cut angle
    /// d^2(dz)/dtheta^2 for the pair scanned in the plane orthogonal to the optic axis, 1/(m rad^2).
    double transverse_curvature = 0.0;
    double wavelength_nm = 0.0;
    double cut_angle = 0.0;

    /// e-o delay for a pair born at the crystal center, tau0 = D L / 2.
    double tau0(double crystal_length) const { return D * crystal_length / 2.0; }
};

namespace detail {

// Central difference (order 1 or 2) with step halving until two successive
// estimates agree to `rel_tol`.
template <class F>
double converged_difference(F&& f, double x0, double step, int order, double rel_tol = 1e-4) {
    auto estimate = [&](double h) {
        if (order == 1) return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
    };
    double prev = estimate(step);
    for (int i = 0; i < 10; ++i) {
        step /= 2.0;
        const double cur = estimate(step);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    throw ConfigError("finite-difference derivative failed to converge under step halving");
}

}  // namespace detail

/// Initial finite-difference steps; each derivative is refined by step halving.
struct FiniteDifferenceSteps {
    double omega = 1e11;  // rad/s
    double theta = 1e-4;  // rad
};

inline DispersionCoefficients dispersion_coefficients(const DispersionModel& model, const SetupConfig& setup,
                                                      FiniteDifferenceSteps steps = {}) {
    const double residual =
        collinear_mismatch(model, setup.pump_wavelength_nm, setup.scheme, setup.cut_angle);
    if (!(std::abs(residual) < 0.1))
        throw ConfigError("setup is not phase matched at the degenerate point: |dz(0,0)| = " +
                          std::to_string(std::abs(residual)) + " 1/m (cut angle " +
                          std::to_string(rad_to_deg(setup.cut_angle)) + " deg)");

    const double w0 = setup.omega0();
    const double cut = setup.cut_angle;
    using P = Polarization;
    auto k_o = [&](double w) { return wavevector_at(model, P::Ordinary, w); };
    auto k_e = [&](double w) { return wavevector_at(model, P::Extraordinary, w, cut); };
    auto k_e_angle = [&](double a) { return wavevector_at(model, P::Extraordinary, w0, a); };

    DispersionCoefficients c;
    c.wavelength_nm = setup.degenerate_wavelength_nm();
    c.cut_angle = cut;
    c.k_o = k_o(w0);
    c.k_e = k_e(w0);
    c.D = detail::converged_difference(k_e, w0, steps.omega, 1) -
          detail::converged_difference(k_o, w0, steps.omega, 1);
    c.B = detail::converged_difference(k_e_angle, cut, steps.theta, 1);
    c.gvd_o = detail::converged_difference(k_o, w0, steps.omega, 2);
    c.gvd_e = detail::converged_difference(k_e, w0, steps.omega, 2);

    const double k_p = wavevector(model, P::Extraordinary, setup.pump_wavelength_nm, cut);
    auto orthogonal_mismatch = [&](double theta) {
        const double k1 = setup.scheme == Scheme::TypeII
                              ? k_e_angle(std::acos(std::cos(cut) * std::cos(theta)))
                              : c.k_o;
        return (k1 + c.k_o) * std::cos(theta) - k_p;
    };
    c.transverse_curvature = detail::converged_difference(orthogonal_mismatch, 0.0, 10.0 * steps.theta, 2);
    return c;
}

}  // namespace spdcbell
