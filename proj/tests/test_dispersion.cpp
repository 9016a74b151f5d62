#include <gtest/gtest.h>

#include <spdcbell/dispersion.hpp>
#include <spdcbell/mismatch.hpp>

#include "oracles.hpp"

using namespace spdcbell;

namespace {

const DispersionModel kBbo = bbo_eimerl1987();

SetupConfig type2() { return make_setup(kBbo, {}); }

SetupConfig type1() {
    SetupParams p;
    p.scheme = Scheme::TwoTypeI;
    return make_setup(kBbo, p);
}

}  // namespace

TEST(RefractiveIndex, OrdinaryMatchesSellmeierFormula) {
    for (double nm : {351.0, 658.0, 702.0, 746.0})
        EXPECT_NEAR(refractive_index(kBbo, Polarization::Ordinary, nm), oracle::n_o(nm), 1e-14) << nm;
}

TEST(RefractiveIndex, ExtraordinaryOnAxisEqualsOrdinary) {
    for (int i = 0; i < 50; ++i) {
        const double nm = 220.0 + (1060.0 - 220.0) * i / 49.0;
        EXPECT_EQ(refractive_index(kBbo, Polarization::Extraordinary, nm, 0.0),
                  refractive_index(kBbo, Polarization::Ordinary, nm, 0.7));
    }
}

TEST(RefractiveIndex, ExtraordinaryFollowsIndexEllipsoid) {
    for (double a : {0.1, 0.5, 0.85, 1.2}) EXPECT_NEAR(refractive_index(kBbo, Polarization::Extraordinary, 702, a), oracle::n_e(702, a), 1e-14);
    EXPECT_NEAR(refractive_index(kBbo, Polarization::Extraordinary, 702, kPi / 2), oracle::sellmeier(oracle::bbo_e, 702),
                1e-14);
}

TEST(RefractiveIndex, OrdinaryIsAngleIndependent) {
    EXPECT_EQ(refractive_index(kBbo, Polarization::Ordinary, 702, 0.0),
              refractive_index(kBbo, Polarization::Ordinary, 702, 1.0));
}

TEST(RefractiveIndex, NormalDispersion) {
    EXPECT_GT(refractive_index(kBbo, Polarization::Ordinary, 351), refractive_index(kBbo, Polarization::Ordinary, 702));
    EXPECT_NO_THROW(validate_model(kBbo));
    for (auto pol : {Polarization::Ordinary, Polarization::Extraordinary}) {
        double prev = 10.0;
        for (int i = 0; i < 50; ++i) {
            const double nm = 220.0 + (1060.0 - 220.0) * i / 49.0;
            const double n = refractive_index(kBbo, pol, nm, kPi / 2);
            EXPECT_GT(n, 1.0);
            EXPECT_LT(n, prev);
            prev = n;
        }
    }
}

TEST(RefractiveIndex, OutOfRangeNamesInterval) {
    try {
        refractive_index(kBbo, Polarization::Ordinary, 1500);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("[220, 1060]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(refractive_index(kBbo, Polarization::Ordinary, 100), DomainError);
    EXPECT_THROW(refractive_index(kBbo, Polarization::Extraordinary, 702, 2.0), DomainError);
    EXPECT_THROW(refractive_index(kBbo, Polarization::Extraordinary, 702, -0.1), DomainError);
}

TEST(RefractiveIndex, ModelValidationRejectsAnomalousDispersion) {
    DispersionModel m = kBbo;
    m.ordinary = {2.0, -0.05, 0.01, 0.0};  // index rises with wavelength
    EXPECT_THROW(validate_model(m), ConfigError);
}

TEST(Wavevector, Definition) {
    const double n = refractive_index(kBbo, Polarization::Ordinary, 702);
    EXPECT_NEAR(wavevector(kBbo, Polarization::Ordinary, 702), oracle::k_of(oracle::n_o(702), 702), 1e-6);
    EXPECT_DOUBLE_EQ(wavevector(kBbo, Polarization::Ordinary, 702), 2.0 * kPi * n / 702e-9);
    EXPECT_EQ(wavevector(kBbo, Polarization::Ordinary, 702), wavevector(kBbo, Polarization::Extraordinary, 702, 0.0));
    // hypothetical n = 1.6 arithmetic
    EXPECT_NEAR(2.0 * kPi * 1.6 / 702e-9, 1.432e7, 0.001e7);
}

TEST(PhaseMatching, TypeIIAgreesWithGridScan) {
    const double a = phase_matching_angle(kBbo, 351, Scheme::TypeII);
    const double grid = oracle::grid_root(oracle::collinear_type2, 0.0, kPi / 2);
    ASSERT_TRUE(std::isfinite(grid));
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, kPi / 2);
    EXPECT_NEAR(a, grid, kPi / 2 / 10000);
    EXPECT_LT(std::abs(collinear_mismatch(kBbo, 351, Scheme::TypeII, a)), 0.1);
    EXPECT_LT(std::abs(collinear_mismatch(kBbo, 351, Scheme::TypeII, a) * 0.5e-3), 1e-4);
}

TEST(PhaseMatching, TypeIBelowTypeII) {
    const double a1 = phase_matching_angle(kBbo, 351, Scheme::TwoTypeI);
    const double a2 = phase_matching_angle(kBbo, 351, Scheme::TypeII);
    EXPECT_NEAR(a1, oracle::grid_root(oracle::collinear_type1, 0.0, kPi / 2), kPi / 2 / 10000);
    EXPECT_LT(a1, a2);
    EXPECT_LT(std::abs(collinear_mismatch(kBbo, 351, Scheme::TwoTypeI, a1)), 0.1);
}

TEST(PhaseMatching, NoBracketIsReported) {
    DispersionModel iso = kBbo;
    iso.extraordinary = iso.ordinary;
    try {
        phase_matching_angle(iso, 351, Scheme::TypeII);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("no phase matching"), std::string::npos);
    }
    EXPECT_THROW(phase_matching_angle(kBbo, 600, Scheme::TypeII), DomainError);  // 1200 nm out of range
}

TEST(Coefficients, FiniteAndSigned) {
    const auto c = dispersion_coefficients(kBbo, type2());
    for (double v : {c.D, c.B, c.gvd_o, c.gvd_e, c.k_o, c.k_e, c.transverse_curvature}) EXPECT_TRUE(std::isfinite(v));
    // D = dk_e/dW - dk_o/dW is negative for BBO: the extraordinary wave is faster.
    EXPECT_LT(c.D, 0.0);
    EXPECT_GT(c.gvd_o, 0.0);
    EXPECT_NEAR(c.tau0(0.5e-3) * 1e15, -62.6, 0.5);
}

TEST(Coefficients, MatchOracleDifferences) {
    const auto s = type2();
    const auto c = dispersion_coefficients(kBbo, s);
    const double w0 = oracle::omega_of_nm(702), h = 1e11;
    auto ke = [&](double w) { return oracle::k_of(oracle::n_e(oracle::nm_of_omega(w), s.cut_angle), oracle::nm_of_omega(w)); };
    auto ko = [&](double w) { return oracle::k_of(oracle::n_o(oracle::nm_of_omega(w)), oracle::nm_of_omega(w)); };
    const double d = (ke(w0 + h) - ke(w0 - h) - ko(w0 + h) + ko(w0 - h)) / (2 * h);
    EXPECT_NEAR(c.D / d, 1.0, 1e-4);
    const double gvd = (ko(w0 + h) - 2 * ko(w0) + ko(w0 - h)) / (h * h);
    EXPECT_NEAR(c.gvd_o / gvd, 1.0, 1e-3);
    const double t = 1e-5;
    const double b = (oracle::k_of(oracle::n_e(702, s.cut_angle + t), 702) - oracle::k_of(oracle::n_e(702, s.cut_angle - t), 702)) / (2 * t);
    EXPECT_NEAR(c.B / b, 1.0, 1e-5);
}

TEST(Coefficients, StableUnderStepHalving) {
    for (const auto& s : {type2(), type1()}) {
        const auto a = dispersion_coefficients(kBbo, s);
        const auto b = dispersion_coefficients(kBbo, s, {0.5e11, 0.5e-4});
        EXPECT_LT(std::abs(a.D / b.D - 1), 1e-3);
        EXPECT_LT(std::abs(a.B / b.B - 1), 1e-3);
        EXPECT_LT(std::abs(a.gvd_o / b.gvd_o - 1), 1e-3);
        EXPECT_LT(std::abs(a.gvd_e / b.gvd_e - 1), 1e-3);
        EXPECT_LT(std::abs(a.transverse_curvature / b.transverse_curvature - 1), 1e-3);
    }
}

TEST(Coefficients, PsiMinusWavelengthFromExactScan) {
    const auto s = type2();
    const auto c = dispersion_coefficients(kBbo, s);
    const double L = 0.5e-3;
    // root of dz L = -pi on the Omega > 0 side (D < 0), oracle mismatch only
    auto f = [&](double w) { return oracle::dz_type2(s.cut_angle, 0.0, w) * L + kPi; };
    const double w_plus = oracle::bisect(f, 0.0, 1e14);
    auto g = [&](double w) { return oracle::dz_type2(s.cut_angle, 0.0, w) * L - kPi; };
    const double w_minus = oracle::bisect(g, -1e14, 0.0);
    const double l0 = 702.0;
    EXPECT_NEAR(offset_to_wavelength_nm(w_plus, l0), 695.5, 1.5);
    EXPECT_NEAR(offset_to_wavelength_nm(w_minus, l0), 708.5, 1.5);
    // the linear coefficient predicts the same crossing
    const double w_lin = kPi / std::abs(c.D * L);
    EXPECT_NEAR(offset_to_wavelength_nm(-w_lin, l0), 708.5, 1.5);
    EXPECT_NEAR(w_lin / w_plus, 1.0, 0.01);
}

TEST(Coefficients, TypeIGvdMatchesSideband) {
    const auto c = dispersion_coefficients(kBbo, type1());
    // physical frequency offset of 658 nm light from the degenerate frequency
    const double w658 = oracle::omega_of_nm(658.0) - oracle::omega_of_nm(702.0);
    EXPECT_NEAR(c.gvd_o / (kPi / (w658 * w658 * 1e-3)), 1.0, 0.15);
}

TEST(Coefficients, RejectsUnmatchedSetup) {
    auto s = type2();
    s.cut_angle += 0.01;
    EXPECT_THROW(dispersion_coefficients(kBbo, s), ConfigError);
    SetupParams p;
    p.cut_angle = 0.5;
    EXPECT_THROW(make_setup(kBbo, p), ConfigError);
}
