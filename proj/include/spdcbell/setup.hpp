#pragma once

#include <string_view>

#include "units.hpp"

namespace spdcbell {

/// Crystal arrangement producing the polarization-entangled pair.
enum class Scheme {
    TypeII,    ///< one type-II crystal, pair is HV/VH
    TwoTypeI,  ///< two type-I crystals with optic axes in orthogonal planes, pair is HH/VV
};

constexpr std::string_view to_string(Scheme s) {
    return s == Scheme::TypeII ? "type2" : "type1";
}

/// Fully resolved crystal configuration. Lengths in meters, delays in seconds.
/// Use make_setup() (mismatch.hpp) to build one with a validated cut angle.
struct SetupConfig {
    Scheme scheme = Scheme::TypeII;
    double crystal_length = 0.5e-3;
    double pump_wavelength_nm = 351.0;
    double cut_angle = 0.0;       // propagation angle to the optic axis, rad
    double extra_eo_delay = 0.0;  // birefringent-plate e-o delay tau added after the crystal
    double second_crystal_length = 1e-3;  // only used by TwoTypeI

    double degenerate_wavelength_nm() const { return spdcbell::degenerate_wavelength_nm(pump_wavelength_nm); }
    double omega0() const { return angular_frequency(degenerate_wavelength_nm()); }
};

}  // namespace spdcbell
