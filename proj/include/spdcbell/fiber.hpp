#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "coincidence.hpp"
#include "errors.hpp"
#include "scan_curve.hpp"

namespace spdcbell {

/// Fused silica (Malitson Sellmeier) group-velocity dispersion at 702 nm.
inline constexpr double kSilicaGvd702 = 4.4738e-26;  // s^2/m

struct FiberParams {
    double length = 1000.0;        // m
    double gvd = kSilicaGvd702;    // s^2/m
    double jitter_sigma = 0.3e-9;  // s, Gaussian detector jitter

    void validate() const {
        if (!(length > 0.0)) throw ConfigError("fiber length must be positive");
        if (gvd == 0.0 || !std::isfinite(gvd)) throw ConfigError("fiber GVD must be finite and nonzero");
        if (!(jitter_sigma >= 0.0)) throw ConfigError("detector jitter must be nonnegative");
    }
};

/// Signal-idler arrival-time difference of a pair with offsets +-omega after the fiber
/// (stationary-phase mapping of frequency to time).
inline double delay_of_offset(const FiberParams& f, double omega) { return 2.0 * f.gvd * f.length * omega; }

inline double offset_of_delay(const FiberParams& f, double delay) { return delay / (2.0 * f.gvd * f.length); }

/// |d omega / d delay|; constant because the mapping is linear.
inline double fiber_jacobian(const FiberParams& f) { return 1.0 / std::abs(2.0 * f.gvd * f.length); }

/// Discrete convolution with a sum-normalized Gaussian of width `sigma` on a
/// uniform grid of spacing `step`. Counts pushed past the window edges are lost.
inline std::vector<double> gaussian_convolve(std::span<const double> y, double step, double sigma) {
    if (sigma == 0.0) return {y.begin(), y.end()};
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(6.0 * sigma / step));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0.0;
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
        const double t = m * step / sigma;
        kernel[m + half] = std::exp(-0.5 * t * t);
        sum += kernel[m + half];
    }
    for (auto& k : kernel) k /= sum;

    const auto n = static_cast<std::ptrdiff_t>(y.size());
    std::vector<double> out(y.size(), 0.0);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        if (y[j] == 0.0) continue;
        for (std::ptrdiff_t m = -half; m <= half; ++m) {
            const std::ptrdiff_t i = j + m;
            if (i >= 0 && i < n) out[i] += y[j] * kernel[m + half];
        }
    }
    return out;
}

/// Coincidence distribution versus signal-idler delay for the type-II source
/// seen through a dispersive fiber, smeared by detector jitter.
///
/// `delay_grid` is in seconds and must be uniform; the returned curve is in ns.
/// Rates keep the peak-1 normalization of rc_typeII_freq: the constant
/// Jacobian of the linear delay mapping (fiber_jacobian) is factored out.
/// For a single polarizer before the fiber pass {theta, theta}.
inline ScanCurve time_distribution(const SetupConfig& setup, const DispersionCoefficients& c, const FiberParams& fiber,
                                   const AnalyzerSettings& a, std::span<const double> delay_grid) {
    fiber.validate();
    if (delay_grid.size() < ScanCurve::kMinSamples)
        throw ValidationError("delay grid needs at least 8 samples");
    const double step = (delay_grid.back() - delay_grid.front()) / static_cast<double>(delay_grid.size() - 1);
    if (!(step > 0.0)) throw ValidationError("delay grid must be increasing");
    for (std::size_t i = 1; i < delay_grid.size(); ++i)
        if (std::abs(delay_grid[i] - delay_grid[i - 1] - step) > 1e-6 * step)
            throw ValidationError("delay grid must be uniform");
    if (fiber.jitter_sigma > 0.0 && step > fiber.jitter_sigma / 4.0)
        throw ValidationError("delay grid too coarse: need at least 4 samples per jitter sigma");

    std::vector<double> rate(delay_grid.size());
    for (std::size_t i = 0; i < delay_grid.size(); ++i)
        rate[i] = rc_typeII_freq(setup, c, offset_of_delay(fiber, delay_grid[i]), a);
    rate = gaussian_convolve(rate, step, fiber.jitter_sigma);

    std::vector<double> ns(delay_grid.size());
    for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = delay_grid[i] * 1e9;
    return ScanCurve(AbscissaUnit::Nanosecond, std::move(ns), std::move(rate));
}

}  // namespace spdcbell
