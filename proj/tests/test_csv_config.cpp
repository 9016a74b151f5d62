#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdcbell/config.hpp>
#include <spdcbell/csv.hpp>
#include <spdcbell/mismatch.hpp>

using namespace spdcbell;

namespace {

ScanCurve parse(const std::string& text, AbscissaUnit unit = AbscissaUnit::Nanometer) {
    std::istringstream in(text);
    return parse_curve(in, unit);
}

Settings settings(const std::string& text) {
    std::istringstream in(text);
    return parse_settings(in);
}

std::size_t parse_error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

std::string config_error(const std::string& text) {
    try {
        build_config(settings(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::string rows(int first, int n, const std::string& tail = "") {
    std::string out;
    for (int i = 0; i < n; ++i) out += std::to_string(first + i) + ",5" + tail + "\n";
    return out;
}

std::string source_path(const std::string& rel) { return std::string(SPDCBELL_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST(Csv, ThreeColumnsWithHeader) {
    const auto c = parse("# measured\nwavelength_nm,rate,sigma\n690,10,1.5\n691,12.5,2\n692,+9,3\n" + rows(693, 6, ",1"));
    ASSERT_EQ(c.size(), 9u);
    EXPECT_EQ(c.unit(), AbscissaUnit::Nanometer);
    EXPECT_DOUBLE_EQ(c.abscissa()[1], 691.0);
    EXPECT_DOUBLE_EQ(c.rate()[2], 9.0);
    ASSERT_TRUE(c.sigma().has_value());
    EXPECT_DOUBLE_EQ((*c.sigma())[0], 1.5);
}

TEST(Csv, TwoColumnsHaveNoSigma) {
    const auto c = parse("1e14, 4\n2e14, 0\n\n3e14, 100\n4e14,1\n5e14,1\n6e14,1\n7e14,1\n8e14,1\n9e14,1\n", AbscissaUnit::RadPerSecond);
    EXPECT_EQ(c.size(), 9u);
    EXPECT_FALSE(c.sigma().has_value());
}

TEST(Csv, RejectsBadRowsWithLineNumbers) {
    EXPECT_EQ(parse_error_line("x,y\n1,2\n2,nan\n3,4\n"), 3u);
    EXPECT_EQ(parse_error_line("x,y\n1,2\n2,inf\n"), 3u);
    EXPECT_EQ(parse_error_line("1,2\n2,3,4\n"), 2u);
    EXPECT_EQ(parse_error_line("1,2\n2,-1\n"), 2u);
    EXPECT_EQ(parse_error_line("1,2,1\n2,3,0\n"), 2u);
    EXPECT_EQ(parse_error_line("1\n"), 1u);
    EXPECT_EQ(parse_error_line("x,y\n1,2\nfoo,bar\n"), 3u);
    EXPECT_EQ(parse_error_line("# a\n# b\n1,2\n2,abc\n"), 4u);
}

TEST(Csv, RejectsNonMonotoneAbscissa) {
    EXPECT_THROW(parse(rows(1, 4) + "3,4\n" + rows(10, 4)), ValidationError);
    EXPECT_THROW(parse(rows(1, 8) + "8,3\n"), ValidationError);
    EXPECT_THROW(parse(rows(1, 7)), ValidationError);
}

TEST(Csv, MissingFileIsConfigError) {
    EXPECT_THROW(ingest_curve("/nonexistent/data.csv", AbscissaUnit::Nanometer), ConfigError);
}

TEST(Csv, WriteReadRoundTrip) {
    std::vector<double> x, y, sg;
    for (int i = 0; i < 12; ++i) {
        x.push_back(-0.01 + 0.0017 * i);
        y.push_back(1.0 / (1 + i * i));
        sg.push_back(0.1 + 0.013 * i);
    }
    const ScanCurve c(AbscissaUnit::Radian, x, y, sg);
    std::ostringstream os;
    write_provenance(os, {"spdcbell test"});
    write_curve_csv(os, c, "theta_internal_rad", "rate");  // 9 significant digits
    EXPECT_EQ(os.str().rfind("# spdcbell test\ntheta_internal_rad,rate,sigma\n", 0), 0u);
    const auto back = parse(os.str(), AbscissaUnit::Radian);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_NEAR(back.abscissa()[i], c.abscissa()[i], 1e-8 * std::abs(c.abscissa()[i]));
        EXPECT_NEAR(back.rate()[i], c.rate()[i], 1e-8 * c.rate()[i]);
        EXPECT_NEAR((*back.sigma())[i], (*c.sigma())[i], 1e-8 * (*c.sigma())[i]);
    }
}

TEST(Settings, ParsesCommentsAndWhitespace) {
    const auto s = settings("# c\n\n  setup.scheme =  type2  \nsetup.crystal_length_mm=0.5 # trailing\n");
    EXPECT_EQ(s.at("setup.scheme"), "type2");
    EXPECT_EQ(s.at("setup.crystal_length_mm"), "0.5");
}

TEST(Settings, RejectsUnknownAndMalformed) {
    try {
        settings("setup.scheme = type2\nsetup.lenght_mm = 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("setup.lenght_mm"), std::string::npos);
    }
    EXPECT_THROW(settings("setup.scheme type2\n"), ParseError);
    EXPECT_THROW(settings("setup.scheme =\n"), ParseError);
}

TEST(Config, MinimalGetsDefaults) {
    const auto rc = build_config(settings("setup.scheme = type2\n"));
    EXPECT_EQ(rc.setup.scheme, Scheme::TypeII);
    EXPECT_DOUBLE_EQ(rc.setup.pump_wavelength_nm, 351.0);
    EXPECT_EQ(rc.theta_points, 512u);
    EXPECT_DOUBLE_EQ(rc.lambda_half_width_nm, 25.0);
    EXPECT_DOUBLE_EQ(rc.fiber.length, 1000.0);
    EXPECT_DOUBLE_EQ(rc.fiber.jitter_sigma, 0.3e-9);
    EXPECT_TRUE(rc.cut_angle_solved);
    EXPECT_NEAR(rad_to_deg(rc.setup.cut_angle), 48.92, 0.01);
    EXPECT_EQ(build_config(settings("setup.scheme = type1\n")).lambda_half_width_nm, 60.0);
}

TEST(Config, EchoesEveryKeyWithOrigin) {
    const auto rc = build_config(settings("setup.scheme = type2\nfiber.length_m = 500\n"));
    const auto lines = rc.provenance();
    auto has = [&](const std::string& s) { return std::find(lines.begin(), lines.end(), s) != lines.end(); };
    EXPECT_TRUE(has("setup.scheme = type2"));
    EXPECT_TRUE(has("fiber.length_m = 500"));
    EXPECT_TRUE(has("grid.theta_points = 512 (default)"));
    EXPECT_EQ(lines[0], "spdcbell 1.0.0");
    EXPECT_EQ(lines[1].rfind("config_hash = ", 0), 0u);
    bool cut = false;
    for (const auto& l : lines)
        if (l.rfind("setup.cut_angle_deg = 48.92", 0) == 0 && l.find("(auto-solved)") != std::string::npos) cut = true;
    EXPECT_TRUE(cut);
    // the echoed value pasted back reproduces the solved angle
    const auto fixed = build_config(settings("setup.scheme = type2\nsetup.cut_angle_deg = " +
                                             fmt_full(rad_to_deg(rc.setup.cut_angle)) + "\n"));
    EXPECT_FALSE(fixed.cut_angle_solved);
    EXPECT_NEAR(fixed.setup.cut_angle, rc.setup.cut_angle, 1e-15);
    EXPECT_THROW(build_config(settings("setup.scheme = type2\nsetup.cut_angle_deg = 48.9\n")), ConfigError);
}

TEST(Config, ErrorsNameTheProblem) {
    EXPECT_NE(config_error("setup.crystal_length_mm = 1\n").find("setup.scheme"), std::string::npos);
    EXPECT_NE(config_error("setup.scheme = type3\n").find("type3"), std::string::npos);
    EXPECT_NE(config_error("setup.scheme = type2\nsetup.pump_wavelength_nm = 200\n").find("outside"), std::string::npos);
    EXPECT_NE(config_error("setup.scheme = type2\nunits.frequency = thz\n").find("units.frequency"), std::string::npos);
    EXPECT_NE(config_error("setup.scheme = type2\nfiber.jitter_ns = -1\n"), "");
    EXPECT_NE(config_error("setup.scheme = type2\ngrid.theta_points = 4\n"), "");
    EXPECT_NE(config_error("setup.scheme = type2\ndispersion.sellmeier_o = 1,2,3,4\n").find("custom"), std::string::npos);
    EXPECT_NE(config_error("setup.scheme = type2\ndispersion.model = custom\n").find("sellmeier"), std::string::npos);
    EXPECT_THROW(load_config("/nonexistent.cfg"), ConfigError);
}

TEST(Config, HashIsDeterministicAndSensitive) {
    const auto a = settings("setup.scheme = type2\nsetup.crystal_length_mm = 0.5\n");
    const auto b = settings("setup.crystal_length_mm=0.5\n# reordered\nsetup.scheme = type2\n");
    const auto c = settings("setup.scheme = type2\nsetup.crystal_length_mm = 0.6\n");
    EXPECT_EQ(settings_hash(a), settings_hash(b));
    EXPECT_NE(settings_hash(a), settings_hash(c));
}

TEST(Config, ShippedFilesLoad) {
    const auto t2 = load_config(source_path("configs/type2.cfg"));
    const auto t1 = load_config(source_path("configs/type1.cfg"));
    const auto fb = load_config(source_path("configs/fiber.cfg"));
    EXPECT_EQ(t2.setup.scheme, Scheme::TypeII);
    EXPECT_EQ(t1.setup.scheme, Scheme::TwoTypeI);
    EXPECT_DOUBLE_EQ(fb.fiber.length, 1000.0);
}

TEST(Config, ExplicitCustomModelMatchesBuiltin) {
    const auto custom = load_config(source_path("configs/bbo_eimerl1987.cfg"));
    const auto builtin = load_config(source_path("configs/type2.cfg"));
    EXPECT_EQ(custom.model.name, "BBO (Eimerl 1987, explicit)");
    EXPECT_DOUBLE_EQ(custom.setup.cut_angle, builtin.setup.cut_angle);
    EXPECT_NE(custom.hash, builtin.hash);
}

TEST(Config, CustomModelIsValidated) {
    const std::string bad =
        "dispersion.model = custom\n"
        "dispersion.sellmeier_o = 2.7405, 0.0184, 0.0179, 0.0155\n"
        "dispersion.sellmeier_e = 2.7405, 0.0184, 0.0179, 0.0155\n"
        "dispersion.valid_range_nm = 220, 1060\n"
        "setup.scheme = type2\n";
    EXPECT_NE(config_error(bad), "");  // isotropic crystal, no phase matching
    const std::string short_list =
        "dispersion.model = custom\n"
        "dispersion.sellmeier_o = 2.7405, 0.0184\n"
        "dispersion.sellmeier_e = 2.3730, 0.0128, 0.0156, 0.0044\n"
        "dispersion.valid_range_nm = 220, 1060\n"
        "setup.scheme = type2\n";
    EXPECT_NE(config_error(short_list).find("sellmeier_o"), std::string::npos);
}

TEST(Config, LoadReportsPathAndLine) {
    const auto path = std::filesystem::temp_directory_path() / "spdcbell_bad.cfg";
    std::ofstream(path) << "setup.scheme = type2\nbogus.key = 1\n";
    try {
        load_config(path.string());
        FAIL();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find(path.string()), std::string::npos);
        EXPECT_NE(what.find("line 2"), std::string::npos);
    }
    std::filesystem::remove(path);
}
