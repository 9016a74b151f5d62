#include <gtest/gtest.h>

#include <random>

#include <spdcbell/bellstate.hpp>
#include <spdcbell/contour.hpp>

#include "oracles.hpp"

using namespace spdcbell;

namespace {

const DispersionModel kBbo = bbo_eimerl1987();

SetupConfig type2(double tau = 0.0) {
    SetupParams p;
    p.extra_eo_delay = tau;
    return make_setup(kBbo, p);
}

SetupConfig type1() {
    SetupParams p;
    p.scheme = Scheme::TwoTypeI;
    return make_setup(kBbo, p);
}

const DispersionCoefficients& c2() {
    static const auto c = dispersion_coefficients(kBbo, type2());
    return c;
}

const DispersionCoefficients& c1() {
    static const auto c = dispersion_coefficients(kBbo, type1());
    return c;
}

}  // namespace

TEST(Amplitude, Origin) {
    const auto a = two_photon_amplitude(type2(), c2(), {0, 0});
    EXPECT_EQ(a.magnitude, 1.0);
    EXPECT_EQ(a.relative_phase, 0.0);
    EXPECT_EQ(a.basis, PairBasis::HV_VH);
    const auto b = two_photon_amplitude(type1(), c1(), {0, 0});
    EXPECT_EQ(b.magnitude, 1.0);
    EXPECT_EQ(b.basis, PairBasis::HH_VV);
}

TEST(Amplitude, SidebandOfPsiMinus) {
    const auto s = type2();
    const double w = kPi / (c2().D * s.crystal_length);
    const auto a = two_photon_amplitude(s, c2(), {0, w});
    EXPECT_NEAR(a.magnitude, 2.0 / kPi, 1e-12);
    EXPECT_NEAR(a.magnitude * a.magnitude, 0.405, 5e-4);
    EXPECT_NEAR(a.relative_phase, kPi, 1e-12);
    EXPECT_EQ(classify(a).kind, BellKind::PsiMinus);
}

TEST(Amplitude, PlateDelayRestoresPsiPlus) {
    const double tau0 = c2().tau0(0.5e-3);
    const auto s = type2(tau0);
    const auto a = two_photon_amplitude(s, c2(), {0, kPi / (2 * tau0)});
    EXPECT_NEAR(a.unwrapped_phase, 2 * kPi, 1e-12);
    EXPECT_NEAR(std::min(a.relative_phase, 2 * kPi - a.relative_phase), 0.0, 1e-9);
    EXPECT_EQ(classify(a).kind, BellKind::PsiPlus);
}

TEST(Amplitude, MagnitudeIsSinc) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> th(-0.02, 0.02), om(-1.5e14, 1.5e14);
    const auto s2 = type2();
    const auto s1 = type1();
    for (int i = 0; i < 200; ++i) {
        const ModePoint p{th(rng), om(rng)};
        const double dz2 = c2().D * p.omega + c2().B * p.theta;
        EXPECT_DOUBLE_EQ(two_photon_amplitude(s2, c2(), p).magnitude, std::abs(oracle::sinc(dz2 * s2.crystal_length / 2)));
        const double dz1 = c1().gvd_o * p.omega * p.omega - c1().k_o * p.theta * p.theta;
        EXPECT_DOUBLE_EQ(two_photon_amplitude(s1, c1(), p).magnitude, std::abs(oracle::sinc(dz1 * s1.crystal_length / 2)));
    }
}

TEST(Classify, Examples) {
    EXPECT_EQ(classify({1.0, 0.0, 0.0, PairBasis::HV_VH}).kind, BellKind::PsiPlus);
    EXPECT_EQ(classify({1.0, kPi, kPi, PairBasis::HH_VV}).kind, BellKind::PhiMinus);
    EXPECT_EQ(classify({1.0, kPi, kPi, PairBasis::HV_VH}).kind, BellKind::PsiMinus);
    EXPECT_EQ(classify({1.0, 2 * kPi - 0.01, 0.0, PairBasis::HH_VV}).kind, BellKind::PhiPlus);
    const auto mid = classify({1.0, kPi / 2, kPi / 2, PairBasis::HV_VH});
    EXPECT_EQ(mid.kind, BellKind::Intermediate);
    EXPECT_DOUBLE_EQ(mid.phase, kPi / 2);
    EXPECT_EQ(classify({1.0, 0.2, 0.2, PairBasis::HV_VH}, 0.3).kind, BellKind::PsiPlus);
    EXPECT_EQ(classify({1.0, 0.2, 0.2, PairBasis::HV_VH}, 0.1).kind, BellKind::Intermediate);
    EXPECT_THROW(classify({}, 0.0), ConfigError);
    EXPECT_THROW(classify({}, 1.0), ConfigError);
}

TEST(Classify, Symmetries) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> th(-0.02, 0.02), om(-1.5e14, 1.5e14);
    const auto s2 = type2();
    const auto s1 = type1();
    for (int i = 0; i < 200; ++i) {
        const ModePoint p{th(rng), om(rng)};
        EXPECT_EQ(classify(two_photon_amplitude(s1, c1(), p)).kind, classify(two_photon_amplitude(s1, c1(), {p.theta, -p.omega})).kind);
        EXPECT_EQ(classify(two_photon_amplitude(s2, c2(), p)).kind, classify(two_photon_amplitude(s2, c2(), {-p.theta, -p.omega})).kind);
    }
}

TEST(Map, ShapeAndRange) {
    const auto s = type2();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c2(), tr, wr, 33, 17);
    EXPECT_EQ(m.theta_axis.size(), 33u);
    EXPECT_EQ(m.omega_axis.size(), 17u);
    EXPECT_EQ(m.intensity.size(), 33u * 17u);
    EXPECT_EQ(m.phase.size(), m.intensity.size());
    for (double v : m.intensity) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_NEAR(m.omega_axis.back(), wavelength_to_offset(702.0 - 25.0, 702.0), 1.0);
    EXPECT_DOUBLE_EQ(m.theta_axis.front(), -0.03);
    // the grid includes the origin, where the intensity peaks at 1
    EXPECT_EQ(*std::max_element(m.intensity.begin(), m.intensity.end()), 1.0);
    EXPECT_THROW(spectrum_map(s, c2(), tr, wr, 15, 64), ConfigError);
    EXPECT_THROW(spectrum_map(s, c2(), {-0.3, 0.3}, wr, 16, 16), DomainError);
}

TEST(Map, ThreadCountDoesNotChangeResult) {
    const auto s = type1();
    const auto [tr, wr] = default_map_ranges(s);
    const auto a = spectrum_map(s, c1(), tr, wr, 40, 40, 1);
    const auto b = spectrum_map(s, c1(), tr, wr, 40, 40, 7);
    EXPECT_EQ(a.intensity, b.intensity);
    EXPECT_EQ(a.phase, b.phase);
}

TEST(Map, PhaseEqualsMismatchForTypeII) {
    const auto s = type2();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c2(), tr, wr, 41, 41);
    for (std::size_t i = 0; i < 41; ++i)
        for (std::size_t j = 0; j < 41; ++j) {
            const double dzl = (c2().D * m.omega_axis[i] + c2().B * m.theta_axis[j]) * s.crystal_length;
            const double want = std::fmod(std::fmod(dzl, 2 * kPi) + 2 * kPi, 2 * kPi);
            const double got = m.phase[m.index(i, j)];
            EXPECT_NEAR(std::remainder(got - want, 2 * kPi), 0.0, 1e-9);
        }
}

TEST(Contours, TypeIIZeroLevelIsTheLine) {
    const auto s = type2();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c2(), tr, wr, 128, 128);
    const auto lines = bell_contours(m, 0.0);
    ASSERT_EQ(lines.size(), 1u);
    const double dt = m.theta_axis[1] - m.theta_axis[0], dw = m.omega_axis[1] - m.omega_axis[0];
    const double tol = std::abs(c2().D) * dw + std::abs(c2().B) * dt;
    EXPECT_GT(lines[0].points.size(), 10u);
    for (const auto& p : lines[0].points) EXPECT_LT(std::abs(c2().D * p[1] + c2().B * p[0]), tol);
}

TEST(Contours, TypeIIPiLevelsStraddleTheZeroLine) {
    const auto s = type2();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c2(), tr, wr, 128, 128);
    const double L = s.crystal_length;
    for (double level : {kPi, -kPi}) {
        const auto lines = bell_contours(m, level);
        ASSERT_EQ(lines.size(), 1u) << level;
        for (const auto& p : lines[0].points)
            EXPECT_NEAR((c2().D * p[1] + c2().B * p[0]) * L, level, 1e-6);
    }
}

TEST(Contours, SidebandIntensityOnPiContours) {
    const auto s = type2();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c2(), tr, wr, 256, 256);
    for (double level : {kPi, -kPi})
        for (const auto& line : bell_contours(m, level))
            for (const auto& p : line.points) EXPECT_NEAR(m.intensity_at(p[0], p[1]) / (4 / (kPi * kPi)), 1.0, 0.02);
}

TEST(Contours, TypeIPiLevelCrossesAxisAtSidebands) {
    const auto s = type1();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c1(), tr, wr, 129, 129);
    const double want = std::sqrt(kPi / (c1().gvd_e * s.second_crystal_length));
    const double dw = m.omega_axis[1] - m.omega_axis[0];
    std::vector<double> hits;
    for (const auto& line : bell_contours(m, kPi))
        for (std::size_t k = 0; k + 1 < line.points.size(); ++k) {
            const auto a = line.points[k], b = line.points[k + 1];
            if ((a[0] < 0) != (b[0] < 0)) {
                const double t = a[0] == b[0] ? 0.0 : -a[0] / (b[0] - a[0]);
                hits.push_back(a[1] + t * (b[1] - a[1]));
            }
        }
    ASSERT_EQ(hits.size(), 2u);
    std::sort(hits.begin(), hits.end());
    EXPECT_NEAR(hits[0], -want, dw);
    EXPECT_NEAR(hits[1], want, dw);
}

TEST(Contours, TypeIZeroLevelIsSymmetric) {
    const auto s = type1();
    const auto [tr, wr] = default_map_ranges(s);
    const auto m = spectrum_map(s, c1(), tr, wr, 128, 128);
    const auto lines = bell_contours(m, 0.0);
    ASSERT_FALSE(lines.empty());
    int quadrant[4] = {0, 0, 0, 0};
    const double ratio = std::sqrt(c1().k_e / c1().gvd_e);
    const double dt = m.theta_axis[1] - m.theta_axis[0], dw = m.omega_axis[1] - m.omega_axis[0];
    for (const auto& l : lines)
        for (const auto& p : l.points) {
            quadrant[(p[0] > 0 ? 1 : 0) + (p[1] > 0 ? 2 : 0)]++;
            EXPECT_LT(std::abs(std::abs(p[1]) - ratio * std::abs(p[0])), dw + ratio * dt);
        }
    for (int q : quadrant) EXPECT_GT(q, 10);
    EXPECT_TRUE(bell_contours(m, 100.0).empty());
}

TEST(IsoLines, ClosedLoopAroundPeak) {
    std::vector<double> x(21), y(21), f(21 * 21);
    for (int i = 0; i < 21; ++i) x[i] = y[i] = -1.0 + 0.1 * i;
    for (int r = 0; r < 21; ++r)
        for (int c = 0; c < 21; ++c) f[r * 21 + c] = x[c] * x[c] + y[r] * y[r];
    const auto lines = iso_lines(f, x, y, 0.25);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_TRUE(lines[0].closed);
    for (const auto& p : lines[0].points) EXPECT_NEAR(std::hypot(p[0], p[1]), 0.5, 0.02);
    EXPECT_THROW(iso_lines(std::vector<double>(5), x, y, 0.0), ValidationError);
}
