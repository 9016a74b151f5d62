#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "dispersion.hpp"
#include "errors.hpp"
#include "setup.hpp"

namespace spdcbell {

/// A pair-emission mode: internal scattering angle of photon 1 (the
/// extraordinary photon for type-II) and its angular-frequency offset from
/// the degenerate frequency. Photon 2 sits at (-theta, -omega).
struct ModePoint {
    double theta = 0.0;  // rad
    double omega = 0.0;  // rad/s
};

/// Validity guard for the expansions; offsets beyond these are rejected.
struct PointLimits {
    double max_theta = 0.2;           // rad
    double max_omega_fraction = 0.2;  // of omega0
};

inline void check_point(const SetupConfig& setup, ModePoint p, PointLimits limits = {}) {
    if (!std::isfinite(p.theta) || !std::isfinite(p.omega))
        throw DomainError("mode point has non-finite coordinates");
    if (std::abs(p.theta) >= limits.max_theta)
        throw DomainError("scattering angle " + std::to_string(p.theta) + " rad outside the guard |theta| < " +
                          std::to_string(limits.max_theta));
    const double w_max = limits.max_omega_fraction * setup.omega0();
    if (std::abs(p.omega) >= w_max)
        throw DomainError("frequency offset " + std::to_string(p.omega) + " rad/s outside the guard |omega| < " +
                          std::to_string(w_max));
}

/// Plane in which the scattering angle is scanned.
enum class ScanPlane {
    OpticAxis,   ///< plane containing the optic axis (angle adds to the cut angle)
    Orthogonal,  ///< plane orthogonal to it (angle to the axis changes only at second order)
};

/// Requested configuration; unset fields get scheme defaults in make_setup().
struct SetupParams {
    Scheme scheme = Scheme::TypeII;
    std::optional<double> crystal_length;  // m; 0.5 mm for type-II, 1 mm for two type-I
    double pump_wavelength_nm = 351.0;
    std::optional<double> cut_angle;  // rad; solved for collinear degenerate phase matching if unset
    double extra_eo_delay = 0.0;      // s
    std::optional<double> second_crystal_length;  // m; defaults to crystal_length
};

inline double default_crystal_length(Scheme s) { return s == Scheme::TypeII ? 0.5e-3 : 1e-3; }

inline SetupConfig make_setup(const DispersionModel& model, const SetupParams& p) {
    SetupConfig s;
    s.scheme = p.scheme;
    s.crystal_length = p.crystal_length.value_or(default_crystal_length(p.scheme));
    s.second_crystal_length = p.second_crystal_length.value_or(s.crystal_length);
    s.pump_wavelength_nm = p.pump_wavelength_nm;
    s.extra_eo_delay = p.extra_eo_delay;
    if (!(s.crystal_length > 0.0) || !(s.second_crystal_length > 0.0))
        throw ConfigError("crystal length must be positive");
    if (!std::isfinite(s.extra_eo_delay)) throw ConfigError("extra e-o delay must be finite");
    if (!model.in_range(s.pump_wavelength_nm) || !model.in_range(s.degenerate_wavelength_nm()))
        throw ConfigError("pump wavelength " + std::to_string(s.pump_wavelength_nm) +
                          " nm (or its degenerate wavelength) outside the dispersion range [" +
                          std::to_string(model.min_wavelength_nm) + ", " + std::to_string(model.max_wavelength_nm) +
                          "] nm");
    s.cut_angle = p.cut_angle ? *p.cut_angle : phase_matching_angle(model, s.pump_wavelength_nm, s.scheme);
    const double residual = collinear_mismatch(model, s.pump_wavelength_nm, s.scheme, s.cut_angle);
    if (!(std::abs(residual) < 0.1))
        throw ConfigError("cut angle " + std::to_string(rad_to_deg(s.cut_angle)) +
                          " deg is not phase matched: |dz(0,0)| = " + std::to_string(std::abs(residual)) + " 1/m");
    return s;
}

/// Exact longitudinal mismatch for type-II:
/// k_e(theta, w0 + omega) cos(theta) + k_o(-theta, w0 - omega) cos(theta) - k_p.
inline double delta_z_exact_typeII(const DispersionModel& model, const SetupConfig& setup, ModePoint p,
                                   ScanPlane plane = ScanPlane::OpticAxis, PointLimits limits = {}) {
    if (setup.scheme != Scheme::TypeII) throw ConfigError("delta_z_exact_typeII requires a type-II setup");
    check_point(setup, p, limits);
    const double w0 = setup.omega0();
    const double axis_angle = plane == ScanPlane::OpticAxis
                                  ? setup.cut_angle + p.theta
                                  : std::acos(std::cos(setup.cut_angle) * std::cos(p.theta));
    const double k_e = wavevector_at(model, Polarization::Extraordinary, w0 + p.omega, axis_angle);
    const double k_o = wavevector_at(model, Polarization::Ordinary, w0 - p.omega);
    const double k_p = wavevector(model, Polarization::Extraordinary, setup.pump_wavelength_nm, setup.cut_angle);
    return (k_e + k_o) * std::cos(p.theta) - k_p;
}

/// Exact longitudinal mismatch for one type-I crystal (both photons ordinary).
inline double delta_z_exact_typeI(const DispersionModel& model, const SetupConfig& setup, ModePoint p,
                                  PointLimits limits = {}) {
    if (setup.scheme != Scheme::TwoTypeI) throw ConfigError("delta_z_exact_typeI requires a two-type-I setup");
    check_point(setup, p, limits);
    const double w0 = setup.omega0();
    const double k1 = wavevector_at(model, Polarization::Ordinary, w0 + p.omega);
    const double k2 = wavevector_at(model, Polarization::Ordinary, w0 - p.omega);
    const double k_p = wavevector(model, Polarization::Extraordinary, setup.pump_wavelength_nm, setup.cut_angle);
    return (k1 + k2) * std::cos(p.theta) - k_p;
}

/// Linear expansion D * omega + B * theta.
inline double delta_z_linear_typeII(const DispersionCoefficients& c, ModePoint p) {
    return c.D * p.omega + c.B * p.theta;
}

/// Quadratic expansion gvd_o * omega^2 - k_o * theta^2 (same form in both crystals).
inline double delta_z_typeI(const DispersionCoefficients& c, const SetupConfig& setup, ModePoint p) {
    if (setup.scheme != Scheme::TwoTypeI) throw ConfigError("delta_z_typeI requires a two-type-I setup");
    return c.gvd_o * p.omega * p.omega - c.k_o * p.theta * p.theta;
}

/// Phase acquired by the pair from the first crystal while crossing the
/// second one as extraordinary waves, (gvd_e omega^2 - k_e theta^2) * L2.
/// Raw value, not reduced mod 2 pi.
inline double phase_typeI(const DispersionCoefficients& c, const SetupConfig& setup, ModePoint p) {
    if (setup.scheme != Scheme::TwoTypeI) throw ConfigError("phase_typeI requires a two-type-I setup");
    return (c.gvd_e * p.omega * p.omega - c.k_e * p.theta * p.theta) * setup.second_crystal_length;
}

}  // namespace spdcbell
