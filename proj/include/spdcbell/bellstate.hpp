#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <thread>
#include <vector>

#include "contour.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "mismatch.hpp"
#include "units.hpp"

namespace spdcbell {

/// Two-photon polarization basis of the generated pair.
enum class PairBasis {
    HV_VH,  ///< (|HV> + e^{i phi}|VH>)/sqrt(2), type-II
    HH_VV,  ///< (|HH> + e^{i phi}|VV>)/sqrt(2), two type-I
};

/// Amplitude of the pair at one mode point. The first basis component
/// carries phase 0; the relative phase sits on the second.
struct TwoPhotonAmplitude {
    double magnitude = 1.0;       // |sinc(dz L / 2)|
    double relative_phase = 0.0;  // [0, 2pi)
    double unwrapped_phase = 0.0; // same phase before reduction
    PairBasis basis = PairBasis::HV_VH;
};

inline PairBasis basis_of(Scheme s) { return s == Scheme::TypeII ? PairBasis::HV_VH : PairBasis::HH_VV; }

inline TwoPhotonAmplitude two_photon_amplitude(const SetupConfig& setup, const DispersionCoefficients& c,
                                               ModePoint p, PointLimits limits = {}) {
    check_point(setup, p, limits);
    TwoPhotonAmplitude a;
    a.basis = basis_of(setup.scheme);
    if (setup.scheme == Scheme::TypeII) {
        const double dz = delta_z_linear_typeII(c, p);
        a.magnitude = std::abs(sinc(dz * setup.crystal_length / 2.0));
        a.unwrapped_phase = dz * setup.crystal_length + 2.0 * setup.extra_eo_delay * p.omega;
    } else {
        const double dz = delta_z_typeI(c, setup, p);
        a.magnitude = std::abs(sinc(dz * setup.crystal_length / 2.0));
        a.unwrapped_phase = phase_typeI(c, setup, p);
    }
    a.relative_phase = wrap_phase(a.unwrapped_phase);
    return a;
}

enum class BellKind { PsiPlus, PsiMinus, PhiPlus, PhiMinus, Intermediate };

constexpr std::string_view to_string(BellKind k) {
    switch (k) {
        case BellKind::PsiPlus: return "Psi+";
        case BellKind::PsiMinus: return "Psi-";
        case BellKind::PhiPlus: return "Phi+";
        case BellKind::PhiMinus: return "Phi-";
        case BellKind::Intermediate: break;
    }
    return "intermediate";
}

struct BellLabel {
    BellKind kind = BellKind::Intermediate;
    double phase = 0.0;
};

inline constexpr double kDefaultClassifyTolerance = 0.05;

/// Names the Bell state when the relative phase is within `tol` of 0 or pi (mod 2pi).
inline BellLabel classify(const TwoPhotonAmplitude& amp, double tol = kDefaultClassifyTolerance) {
    if (!(tol > 0.0 && tol < kPi / 4)) throw ConfigError("classification tolerance must lie in (0, pi/4)");
    const double phi = wrap_phase(amp.relative_phase);
    const bool psi = amp.basis == PairBasis::HV_VH;
    if (std::min(phi, 2.0 * kPi - phi) <= tol)
        return {psi ? BellKind::PsiPlus : BellKind::PhiPlus, phi};
    if (std::abs(phi - kPi) <= tol) return {psi ? BellKind::PsiMinus : BellKind::PhiMinus, phi};
    return {BellKind::Intermediate, phi};
}

struct AxisRange {
    double min = 0.0;
    double max = 0.0;
};

/// Dense frequency-angular map. Arrays are row-major: row = omega index, column = theta index.
struct SpectrumMap {
    Scheme scheme = Scheme::TypeII;
    std::vector<double> theta_axis;  // rad, internal
    std::vector<double> omega_axis;  // rad/s
    std::vector<double> intensity;   // magnitude^2
    std::vector<double> phase;       // relative phase in [0, 2pi)
    std::vector<double> unwrapped;   // relative phase before reduction, used for contours

    std::size_t index(std::size_t i_omega, std::size_t j_theta) const { return i_omega * theta_axis.size() + j_theta; }

    /// Bilinear interpolation of the intensity array at (theta, omega).
    double intensity_at(double theta, double omega) const {
        auto locate = [](const std::vector<double>& ax, double v) {
            auto it = std::upper_bound(ax.begin(), ax.end(), v);
            std::size_t i = it == ax.begin() ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
            i = std::min(i, ax.size() - 2);
            return std::pair{i, (v - ax[i]) / (ax[i + 1] - ax[i])};
        };
        const auto [j, tx] = locate(theta_axis, theta);
        const auto [i, ty] = locate(omega_axis, omega);
        const double a = intensity[index(i, j)], b = intensity[index(i, j + 1)];
        const double c = intensity[index(i + 1, j)], d = intensity[index(i + 1, j + 1)];
        return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
    }
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
    return v;
}

/// Map window: theta in [-0.03, 0.03] rad and +-25 nm (type-II) or +-60 nm (two type-I) around degeneracy.
inline std::pair<AxisRange, AxisRange> default_map_ranges(const SetupConfig& setup) {
    const double half_nm = setup.scheme == Scheme::TypeII ? 25.0 : 60.0;
    const double l0 = setup.degenerate_wavelength_nm();
    const double w = wavelength_to_offset(l0 - half_nm, l0);
    return {AxisRange{-0.03, 0.03}, AxisRange{-w, w}};
}

inline SpectrumMap spectrum_map(const SetupConfig& setup, const DispersionCoefficients& c, AxisRange theta_range,
                                AxisRange omega_range, std::size_t theta_points, std::size_t omega_points,
                                unsigned threads = 0) {
    if (theta_points < 16 || omega_points < 16) throw ConfigError("map resolution must be at least 16 per axis");
    SpectrumMap m;
    m.scheme = setup.scheme;
    m.theta_axis = linspace(theta_range.min, theta_range.max, theta_points);
    m.omega_axis = linspace(omega_range.min, omega_range.max, omega_points);
    const std::size_t n = theta_points * omega_points;
    m.intensity.resize(n);
    m.phase.resize(n);
    m.unwrapped.resize(n);

    // Validate the corners up front so worker threads never throw.
    for (double t : {theta_range.min, theta_range.max})
        for (double w : {omega_range.min, omega_range.max}) check_point(setup, {t, w});

    auto rows = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < theta_points; ++j) {
                const auto a = two_photon_amplitude(setup, c, {m.theta_axis[j], m.omega_axis[i]});
                const std::size_t k = m.index(i, j);
                m.intensity[k] = a.magnitude * a.magnitude;
                m.phase[k] = a.relative_phase;
                m.unwrapped[k] = a.unwrapped_phase;
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, omega_points));
    std::vector<std::jthread> pool;
    const std::size_t chunk = (omega_points + threads - 1) / threads;
    for (std::size_t b = 0; b < omega_points; b += chunk) pool.emplace_back(rows, b, std::min(b + chunk, omega_points));
    pool.clear();
    return m;
}

/// Iso-lines of the unwrapped relative phase at `level` (0 for Psi+/Phi+, +-pi for Psi-/Phi-),
/// as polylines in (theta, omega).
inline std::vector<Polyline> bell_contours(const SpectrumMap& m, double level) {
    return iso_lines(m.unwrapped, m.theta_axis, m.omega_axis, level);
}

}  // namespace spdcbell
