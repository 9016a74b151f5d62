#pragma once

#include <cmath>
#include <numbers>

namespace spdcbell {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Angular frequency (rad/s) of light with vacuum wavelength `nm`.
inline double angular_frequency(double wavelength_nm) {
    return 2.0 * kPi * kSpeedOfLight / (wavelength_nm * 1e-9);
}

/// Vacuum wavelength in nm of light with angular frequency `omega` (rad/s).
inline double wavelength_nm(double omega) {
    return 2.0 * kPi * kSpeedOfLight / omega * 1e9;
}

/// Degenerate signal/idler wavelength for a given pump.
constexpr double degenerate_wavelength_nm(double pump_nm) { return 2.0 * pump_nm; }

// Frequency offsets are mapped to wavelength linearly around the degenerate
// wavelength: dl = l0^2 * Omega / (2 pi c). Positive Omega blue-shifts the
// selected (extraordinary) photon, so it maps to a shorter wavelength.

inline double offset_to_wavelength_nm(double omega, double center_nm) {
    const double l0 = center_nm * 1e-9;
    return center_nm - l0 * l0 * omega / (2.0 * kPi * kSpeedOfLight) * 1e9;
}

inline double wavelength_to_offset(double wavelength_nm, double center_nm) {
    const double l0 = center_nm * 1e-9;
    return 2.0 * kPi * kSpeedOfLight * (center_nm - wavelength_nm) * 1e-9 / (l0 * l0);
}

/// Snell refraction at the crystal exit face: sin(external) = n sin(internal).
inline double external_to_internal_angle(double external, double index) {
    return std::asin(std::sin(external) / index);
}

inline double internal_to_external_angle(double internal, double index) {
    return std::asin(index * std::sin(internal));
}

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

/// Reduce an angle into [0, 2pi).
inline double wrap_phase(double phase) {
    double r = std::fmod(phase, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r = 0.0;
    return r;
}

}  // namespace spdcbell
