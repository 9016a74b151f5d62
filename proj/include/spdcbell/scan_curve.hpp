#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace spdcbell {

enum class AbscissaUnit { Nanometer, RadPerSecond, Radian, Nanosecond };

constexpr std::string_view to_string(AbscissaUnit u) {
    switch (u) {
        case AbscissaUnit::Nanometer: return "nm";
        case AbscissaUnit::RadPerSecond: return "rad/s";
        case AbscissaUnit::Radian: return "rad";
        case AbscissaUnit::Nanosecond: return "ns";
    }
    return "?";
}

inline AbscissaUnit parse_unit(std::string_view s) {
    if (s == "nm") return AbscissaUnit::Nanometer;
    if (s == "rad/s" || s == "rad_s") return AbscissaUnit::RadPerSecond;
    if (s == "rad") return AbscissaUnit::Radian;
    if (s == "ns") return AbscissaUnit::Nanosecond;
    throw ConfigError("unknown abscissa unit '" + std::string(s) + "' (expected nm, rad/s, rad or ns)");
}

/// A sampled 1D curve: strictly monotone abscissa, nonnegative rates, optional per-point errors.
class ScanCurve {
public:
    static constexpr std::size_t kMinSamples = 8;

    ScanCurve(AbscissaUnit unit, std::vector<double> abscissa, std::vector<double> rate,
              std::optional<std::vector<double>> sigma = std::nullopt)
        : unit_(unit), x_(std::move(abscissa)), y_(std::move(rate)), sigma_(std::move(sigma)) {
        if (x_.size() != y_.size() || (sigma_ && sigma_->size() != x_.size()))
            throw ValidationError("scan curve columns have different lengths");
        if (x_.size() < kMinSamples)
            throw ValidationError("scan curve needs at least " + std::to_string(kMinSamples) + " samples, got " +
                                  std::to_string(x_.size()));
        const bool increasing = x_[1] > x_[0];
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
                throw ValidationError("scan curve sample " + std::to_string(i) + " is not finite");
            if (y_[i] < 0.0) throw ValidationError("scan curve rate at sample " + std::to_string(i) + " is negative");
            if (sigma_ && !((*sigma_)[i] > 0.0))
                throw ValidationError("scan curve sigma at sample " + std::to_string(i) + " is not positive");
            if (i > 0 && ((x_[i] > x_[i - 1]) != increasing || x_[i] == x_[i - 1]))
                throw ValidationError("scan curve abscissa is not strictly monotone at sample " + std::to_string(i));
        }
    }

    AbscissaUnit unit() const { return unit_; }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& abscissa() const { return x_; }
    const std::vector<double>& rate() const { return y_; }
    const std::optional<std::vector<double>>& sigma() const { return sigma_; }

private:
    AbscissaUnit unit_;
    std::vector<double> x_;
    std::vector<double> y_;
    std::optional<std::vector<double>> sigma_;
};

}  // namespace spdcbell
