// Type-II coincidence spectra for parallel and crossed prisms, plus the
// wavelengths where the singlet is produced.
#include <cstdio>

#include <spdcbell/spdcbell.hpp>

using namespace spdcbell;

int main() {
    const auto model = bbo_eimerl1987();
    const auto setup = make_setup(model, {});
    const auto c = dispersion_coefficients(model, setup);
    const double l0 = setup.degenerate_wavelength_nm();
    const double tau0 = c.tau0(setup.crystal_length);

    std::printf("cut angle %.4f deg, tau0 %.2f fs\n", rad_to_deg(setup.cut_angle), tau0 * 1e15);
    const double w_pi = kPi / std::abs(c.D * setup.crystal_length);
    std::printf("singlet at %.2f nm and %.2f nm\n", offset_to_wavelength_nm(w_pi, l0),
                offset_to_wavelength_nm(-w_pi, l0));

    const auto par = AnalyzerSettings::degrees(45, 45);
    const auto crossed = AnalyzerSettings::degrees(45, -45);
    std::printf("%8s %10s %10s\n", "nm", "(45,45)", "(45,-45)");
    for (double nm = 690.0; nm <= 714.0 + 1e-9; nm += 1.0) {
        const double w = wavelength_to_offset(nm, l0);
        std::printf("%8.1f %10.4f %10.4f\n", nm, rc_typeII_freq(setup, c, w, par), rc_typeII_freq(setup, c, w, crossed));
    }
}
