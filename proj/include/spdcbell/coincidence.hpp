#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bellstate.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "mismatch.hpp"
#include "scan_curve.hpp"
#include "units.hpp"

namespace spdcbell {

using cplx = std::complex<double>;

/// Glan-prism angles (rad) and optional waveplates placed before the beamsplitter.
struct AnalyzerSettings {
    double theta1 = kPi / 4;
    double theta2 = kPi / 4;
    std::optional<double> hwp_angle;
    std::optional<double> qwp_angle;

    static AnalyzerSettings degrees(double t1, double t2) { return {deg_to_rad(t1), deg_to_rad(t2), {}, {}}; }
    bool has_plates() const { return hwp_angle.has_value() || qwp_angle.has_value(); }
};

/// Two-photon polarization state over {HH, HV, VH, VV}; the first letter is photon 1.
struct PolarizationState {
    std::array<cplx, 4> amp{};

    double norm2() const {
        double s = 0.0;
        for (const auto& a : amp) s += std::norm(a);
        return s;
    }
    void normalize() {
        const double n = std::sqrt(norm2());
        for (auto& a : amp) a /= n;
    }
};

enum StateIndex : std::size_t { HH = 0, HV = 1, VH = 2, VV = 3 };

/// (|first> + e^{i phase}|second>)/sqrt(2) in the pair basis.
inline PolarizationState bell_state(PairBasis basis, double phase) {
    PolarizationState s;
    const double r = 1.0 / std::sqrt(2.0);
    const auto first = basis == PairBasis::HV_VH ? HV : HH;
    const auto second = basis == PairBasis::HV_VH ? VH : VV;
    s.amp[first] = r;
    s.amp[second] = r * std::polar(1.0, phase);
    return s;
}

inline PolarizationState state_from_amplitude(const TwoPhotonAmplitude& a) {
    return bell_state(a.basis, a.relative_phase);
}

enum class Retarder { HWP, QWP };
enum class Arm { Both, First, Second };

using Jones = std::array<std::array<cplx, 2>, 2>;

/// Jones matrix of a retarder with its fast axis at `angle` from H.
/// HWP: [[cos 2a, sin 2a], [sin 2a, -cos 2a]] (determinant -1).
/// QWP: R(-a) diag(1, i) R(a).
inline Jones jones_matrix(Retarder r, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    if (r == Retarder::HWP) {
        const double c2 = std::cos(2 * angle), s2 = std::sin(2 * angle);
        return {{{c2, s2}, {s2, -c2}}};
    }
    const cplx i{0.0, 1.0};
    return {{{c * c + i * s * s, (1.0 - i) * s * c}, {(1.0 - i) * s * c, s * s + i * c * c}}};
}

inline PolarizationState apply_jones(const PolarizationState& st, const Jones& m1, const Jones& m2) {
    PolarizationState out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            cplx acc{};
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) acc += m1[a][c] * m2[b][d] * st.amp[2 * c + d];
            out.amp[2 * a + b] = acc;
        }
    return out;
}

inline PolarizationState apply_waveplate(const PolarizationState& st, Retarder plate, double angle,
                                         Arm arm = Arm::Both) {
    const Jones m = jones_matrix(plate, angle);
    const Jones id{{{1.0, 0.0}, {0.0, 1.0}}};
    auto out = apply_jones(st, arm == Arm::Second ? id : m, arm == Arm::First ? id : m);
    out.normalize();
    return out;
}

/// |<theta1, theta2|state>|^2 with linear-polarization bras, after any
/// waveplates in `a` (HWP then QWP) act on both photons.
inline double coincidence_projection(PolarizationState st, const AnalyzerSettings& a) {
    if (a.hwp_angle) st = apply_waveplate(st, Retarder::HWP, *a.hwp_angle);
    if (a.qwp_angle) st = apply_waveplate(st, Retarder::QWP, *a.qwp_angle);
    const double c1 = std::cos(a.theta1), s1 = std::sin(a.theta1);
    const double c2 = std::cos(a.theta2), s2 = std::sin(a.theta2);
    const cplx amp = c1 * c2 * st.amp[HH] + c1 * s2 * st.amp[HV] + s1 * c2 * st.amp[VH] + s1 * s2 * st.amp[VV];
    return std::norm(amp);
}

// A maximally entangled pair projects onto a product of polarizers with
// probability at most 1/2; the closed-form rates are normalized to peak 1,
// i.e. they count only pairs split by the beamsplitter. This is that factor.
inline constexpr double kSplitPairNormalization = 2.0;

/// Normalized rate from the constructed state: sinc^2 * 2 * projection.
inline double rate_via_state(const SetupConfig& setup, const DispersionCoefficients& c, ModePoint p,
                             const AnalyzerSettings& a) {
    const auto amp = two_photon_amplitude(setup, c, p);
    return amp.magnitude * amp.magnitude * kSplitPairNormalization * coincidence_projection(state_from_amplitude(amp), a);
}

namespace detail {
inline void require_no_plates(const AnalyzerSettings& a) {
    if (a.has_plates())
        throw ConfigError("closed-form rates assume no waveplates; use rate_via_state for plate settings");
}
inline double sq(double v) { return v * v; }
}  // namespace detail

/// Type-II frequency spectrum of coincidences (with a plate delay tau = setup.extra_eo_delay):
/// sinc^2(W t0) [sin^2(T1+T2) cos^2(W (t0+tau)) + sin^2(T1-T2) sin^2(W (t0+tau))].
inline double rc_typeII_freq(const SetupConfig& setup, const DispersionCoefficients& c, double omega,
                             const AnalyzerSettings& a) {
    if (setup.scheme != Scheme::TypeII) throw ConfigError("rc_typeII_freq requires a type-II setup");
    detail::require_no_plates(a);
    using detail::sq;
    const double tau0 = c.tau0(setup.crystal_length);
    const double x = omega * (tau0 + setup.extra_eo_delay);
    return sq(sinc(omega * tau0)) * (sq(std::sin(a.theta1 + a.theta2)) * sq(std::cos(x)) +
                                     sq(std::sin(a.theta1 - a.theta2)) * sq(std::sin(x)));
}

/// Two-type-I frequency spectrum:
/// sinc^2(gvd_o W^2 L/2) [cos^2(T1-T2) cos^2(gvd_e W^2 L/2) + cos^2(T1+T2) sin^2(gvd_e W^2 L/2)].
inline double rc_typeI_freq(const SetupConfig& setup, const DispersionCoefficients& c, double omega,
                            const AnalyzerSettings& a) {
    if (setup.scheme != Scheme::TwoTypeI) throw ConfigError("rc_typeI_freq requires a two-type-I setup");
    detail::require_no_plates(a);
    using detail::sq;
    const double w2 = omega * omega;
    const double env = c.gvd_o * w2 * setup.crystal_length / 2.0;
    const double x = c.gvd_e * w2 * setup.second_crystal_length / 2.0;
    return sq(sinc(env)) * (sq(std::cos(a.theta1 - a.theta2)) * sq(std::cos(x)) +
                            sq(std::cos(a.theta1 + a.theta2)) * sq(std::sin(x)));
}

/// Type-II angular spectrum at the degenerate frequency:
/// sinc^2(B theta L/2) [sin^2(T1+T2) cos^2(B theta L/2) + sin^2(T1-T2) sin^2(B theta L/2)].
/// In the plane orthogonal to the optic axis the mismatch is even in theta, the
/// relative phase vanishes and the rate is sin^2(T1+T2) sinc^2(dz L/2).
inline double rc_typeII_ang(const SetupConfig& setup, const DispersionCoefficients& c, double theta,
                            const AnalyzerSettings& a, ScanPlane plane = ScanPlane::OpticAxis) {
    if (setup.scheme != Scheme::TypeII) throw ConfigError("rc_typeII_ang requires a type-II setup");
    detail::require_no_plates(a);
    using detail::sq;
    const double L = setup.crystal_length;
    if (plane == ScanPlane::Orthogonal) {
        const double dz = 0.5 * c.transverse_curvature * theta * theta;
        return sq(std::sin(a.theta1 + a.theta2)) * sq(sinc(dz * L / 2.0));
    }
    const double x = c.B * theta * L / 2.0;
    return sq(sinc(x)) * (sq(std::sin(a.theta1 + a.theta2)) * sq(std::cos(x)) +
                          sq(std::sin(a.theta1 - a.theta2)) * sq(std::sin(x)));
}

/// Two-type-I angular spectrum, implemented as printed:
/// sinc^2(k_o theta^2 L/2) [sin^2(T1+T2) cos^2(k_e theta^2 L/2) + sin^2(T1-T2) sin^2(k_e theta^2 L/2)].
/// Note the prism convention differs from rc_typeI_freq: this equals the
/// HH/VV-state projection with prism 2 read at pi/2 - theta2 (see eq15_analyzer()).
inline double rc_typeI_ang(const SetupConfig& setup, const DispersionCoefficients& c, double theta,
                           const AnalyzerSettings& a) {
    if (setup.scheme != Scheme::TwoTypeI) throw ConfigError("rc_typeI_ang requires a two-type-I setup");
    detail::require_no_plates(a);
    using detail::sq;
    const double t2 = theta * theta;
    const double env = c.k_o * t2 * setup.crystal_length / 2.0;
    const double x = c.k_e * t2 * setup.second_crystal_length / 2.0;
    return sq(sinc(env)) * (sq(std::sin(a.theta1 + a.theta2)) * sq(std::cos(x)) +
                            sq(std::sin(a.theta1 - a.theta2)) * sq(std::sin(x)));
}

/// Analyzer under which the physical HH/VV projection reproduces rc_typeI_ang.
inline AnalyzerSettings eq15_analyzer(AnalyzerSettings a) {
    a.theta2 = kPi / 2 - a.theta2;
    return a;
}

/// Samples `rate` at each prism-2 angle in `theta2_grid` (rad) with prism 1 fixed.
inline ScanCurve fringe_scan(const std::function<double(const AnalyzerSettings&)>& rate, double theta1,
                             std::span<const double> theta2_grid) {
    std::vector<double> x(theta2_grid.begin(), theta2_grid.end());
    std::vector<double> y;
    y.reserve(x.size());
    for (double t2 : x) y.push_back(rate(AnalyzerSettings{theta1, t2, {}, {}}));
    return ScanCurve(AbscissaUnit::Radian, std::move(x), std::move(y));
}

/// (max - min) / (max + min) over the sampled points.
inline double visibility(const ScanCurve& curve) {
    const auto& y = curve.rate();
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    if (*mx + *mn <= 0.0) throw ValidationError("visibility undefined for an all-zero curve");
    return (*mx - *mn) / (*mx + *mn);
}

}  // namespace spdcbell
