#include "qfc/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace qfc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Config parse_text(const std::string& text, std::vector<ConfigError>& errors) {
    std::istringstream is(text);
    return Config::parse(is, errors);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qfc-scenario-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(ConfigParse, QuantitiesAndUnits) {
    std::string problem;
    EXPECT_DOUBLE_EQ(*parse_quantity("250 mW", Unit::watt, problem), 0.25);
    EXPECT_DOUBLE_EQ(*parse_quantity("1.4 cm", Unit::centimeter, problem), 1.4);
    EXPECT_DOUBLE_EQ(*parse_quantity("400 ns", Unit::second, problem), 4e-7);
    EXPECT_DOUBLE_EQ(*parse_quantity("210 MHz", Unit::gigahertz, problem), 0.21);
    EXPECT_DOUBLE_EQ(*parse_quantity("95 %", Unit::dimensionless, problem), 0.95);
    EXPECT_DOUBLE_EQ(*parse_quantity("0.95", Unit::dimensionless, problem), 0.95);
    EXPECT_DOUBLE_EQ(*parse_quantity("86.1 %/W/cm^2", Unit::normalized_efficiency, problem),
                     0.861);
    EXPECT_DOUBLE_EQ(*parse_quantity("76 kHz/mW/cm/THz", Unit::noise_coefficient, problem),
                     76e3);

    // physical quantities must carry units
    EXPECT_FALSE(parse_quantity("0.25", Unit::watt, problem));
    EXPECT_NE(problem.find("missing unit"), std::string::npos);
    EXPECT_FALSE(parse_quantity("250 bananas", Unit::watt, problem));
    EXPECT_FALSE(parse_quantity("fast", Unit::second, problem));
}

TEST(ConfigParse, DiagnosticsCarryLines) {
    std::vector<ConfigError> errors;
    const auto cfg = parse_text(
        "top = 1\n"
        "[scenario\n"
        "[scenario]\n"
        "name fig3-noise\n"
        "seed = 7\n"
        "seed = 8\n",
        errors);
    ASSERT_EQ(errors.size(), 4u);
    EXPECT_EQ(errors[0].line, 1);  // key outside section
    EXPECT_EQ(errors[1].line, 2);  // unterminated header
    EXPECT_EQ(errors[2].line, 4);  // missing '='
    EXPECT_EQ(errors[3].line, 6);  // duplicate key
    EXPECT_TRUE(cfg.has("scenario.seed"));
}

TEST(Scenario, PaperDefaultsValidate) {
    std::vector<ConfigError> errors;
    const auto cfg = parse_text(
        "[scenario]\n"
        "name = fig4a-correlations\n"
        "seed = 11\n"
        "window = 400 ns\n"
        "[waveguide]\n"
        "length = 1.4 cm\n"
        "eta_max = 95 %\n"
        "eta_n = 86.1 %/W/cm^2\n"
        "alpha_n = 76 kHz/mW/cm/THz\n"
        "[losses]\n"
        "signal_transmission = 0.93\n",
        errors);
    ASSERT_TRUE(errors.empty());
    const auto s = load_scenario(std::nullopt, &cfg, errors);
    ASSERT_TRUE(s) << (errors.empty() ? "" : errors.front().format());
    EXPECT_TRUE(errors.empty());
    EXPECT_EQ(s->seed, 11u);
    EXPECT_DOUBLE_EQ(s->chain.waveguide.eta_max, 0.95);
    EXPECT_DOUBLE_EQ(s->chain.waveguide.eta_n, 0.861);
}

TEST(Scenario, NegativePumpNamesTheField) {
    std::vector<ConfigError> errors;
    const auto cfg = parse_text(
        "[scenario]\n"
        "name = fig4a-correlations\n"
        "seed = 1\n"
        "[sweep]\n"
        "pump_powers = 100 mW, -5 mW\n"
        "durations = 1 s, 1 s\n",
        errors);
    ASSERT_TRUE(errors.empty());
    EXPECT_FALSE(load_scenario(std::nullopt, &cfg, errors));
    ASSERT_FALSE(errors.empty());
    bool found = false;
    for (const auto& e : errors)
        if (e.field == "sweep.pump_powers" && e.line == 5) found = true;
    EXPECT_TRUE(found);
}

TEST(Scenario, SeedIsMandatoryForConfigRuns) {
    std::vector<ConfigError> errors;
    const auto cfg = parse_text("[scenario]\nname = fig3-noise\n", errors);
    ASSERT_TRUE(errors.empty());
    EXPECT_FALSE(load_scenario(std::nullopt, &cfg, errors));
    ASSERT_FALSE(errors.empty());
    EXPECT_EQ(errors.front().field, "scenario.seed");
}

TEST(Scenario, UnknownKeysAndNamesAreDiagnosed) {
    std::vector<ConfigError> errors;
    const auto cfg = parse_text(
        "[scenario]\nname = fig3-noise\nseed = 1\n[waveguide]\nlenght = 1.4 cm\n",
        errors);
    ASSERT_TRUE(errors.empty());
    EXPECT_FALSE(load_scenario(std::nullopt, &cfg, errors));
    ASSERT_EQ(errors.size(), 1u);
    EXPECT_EQ(errors.front().field, "waveguide.lenght");
    EXPECT_EQ(errors.front().message, "unknown key");

    errors.clear();
    EXPECT_FALSE(load_scenario(std::optional<std::string>("fig9-nope"), nullptr, errors));
    EXPECT_FALSE(errors.empty());
}

TEST(Scenario, BuiltinTableIsCompleteAndUnique) {
    const auto& table = builtin_scenarios();
    EXPECT_GE(table.size(), 7u);
    std::set<std::string> names;
    for (const auto& s : table) {
        EXPECT_TRUE(names.insert(s.name).second) << "duplicate " << s.name;
        EXPECT_FALSE(std::string(s.description).empty());
        EXPECT_NO_THROW(make_builtin_scenario(s.name));
    }
}

TEST(Scenario, GoldenCsvHeaders) {
    // pin the documented schemas: header row and column order
    auto small = [](const std::string& name) {
        Scenario s = make_builtin_scenario(name);
        s.seed = 5;
        s.grid_points = 4;
        s.sweep_powers_w = {0.1, 0.25};
        s.sweep_durations_s = {1.0, 1.0};
        s.wcs_pulses_per_point = 20'000;
        s.wcs_mean_inputs = {0.1, 0.5, 1.0};
        s.heralded_duration_s = 5.0;
        s.source_g2_duration_s = 2.0;
        return s;
    };
    struct Expect {
        const char* scenario;
        const char* file;
        const char* header;
    };
    const Expect cases[] = {
        {"fig2a-efficiency", "efficiency.csv",
         "pump_w,internal_efficiency,device_efficiency"},
        {"fig2b-mu1", "mu1.csv",
         "pump_w,mu1_model,mu1_simulated,mu1_simulated_err,snr_at_unit_input"},
        {"fig3-noise", "noise.csv",
         "pump_mw,telecom_rate_hz_per_ghz,backconverted_rate_hz_per_ghz"},
        {"fig4a-correlations", "correlations.csv",
         "pump_mw,g2_converted,g2_converted_err,g2_unconverted,g2_unconverted_err,"
         "g2_converted_predicted"},
        {"fig4b-heralded-g2", "heralded_g2.csv",
         "value,std_error,herald_total,heralds_with_out1,heralds_with_out2,"
         "g2_herald_converted,g2_herald_unconverted"},
        {"fig4b-heralded-g2", "triple_histogram.csv", "bin,count"},
        {"fit-efficiency", "efficiency_fit.csv", "parameter,value,std_error"},
        {"fit-noise", "noise_fit.csv", "parameter,value,std_error"},
    };
    for (const auto& c : cases) {
        const auto dir = fresh_dir(std::string("golden-") + c.scenario);
        run_scenario(small(c.scenario), dir.string());
        const auto content = slurp(dir / c.file);
        ASSERT_FALSE(content.empty()) << c.file;
        EXPECT_EQ(content.substr(0, content.find('\n')), c.header) << c.file;
    }
}

TEST(Scenario, RerunsAreByteIdentical) {
    Scenario s = make_builtin_scenario("fig2b-mu1");
    s.seed = 99;
    s.sweep_powers_w = {0.3, 0.5};
    s.wcs_pulses_per_point = 20'000;
    s.wcs_mean_inputs = {0.1, 0.5, 1.0};

    const auto d1 = fresh_dir("rerun-a");
    const auto d2 = fresh_dir("rerun-b");
    const auto d3 = fresh_dir("rerun-c");
    run_scenario(s, d1.string(), false, 1);
    run_scenario(s, d2.string(), false, 1);
    run_scenario(s, d3.string(), false, 2);  // thread count must not matter
    EXPECT_EQ(slurp(d1 / "mu1.csv"), slurp(d2 / "mu1.csv"));
    EXPECT_EQ(slurp(d1 / "manifest.txt"), slurp(d2 / "manifest.txt"));
    EXPECT_EQ(slurp(d1 / "mu1.csv"), slurp(d3 / "mu1.csv"));

    for (const auto& entry : fs::directory_iterator(d1))
        EXPECT_EQ(entry.path().extension() == ".tmp", false) << entry.path();
}

TEST(Scenario, ManifestReproducesTheRun) {
    Scenario s = make_builtin_scenario("fig3-noise");
    s.seed = 123;
    s.grid_points = 7;
    const auto d1 = fresh_dir("manifest-a");
    run_scenario(s, d1.string());

    std::vector<ConfigError> errors;
    auto cfg = Config::parse_file((d1 / "manifest.txt").string(), errors);
    ASSERT_TRUE(errors.empty());
    const auto reloaded = load_scenario(std::nullopt, &cfg, errors);
    ASSERT_TRUE(reloaded) << (errors.empty() ? "" : errors.front().format());

    const auto d2 = fresh_dir("manifest-b");
    run_scenario(*reloaded, d2.string());
    EXPECT_EQ(slurp(d1 / "noise.csv"), slurp(d2 / "noise.csv"));
    EXPECT_EQ(slurp(d1 / "manifest.txt"), slurp(d2 / "manifest.txt"));
}

TEST(Scenario, PlotsAreWrittenOnRequest) {
    Scenario s = make_builtin_scenario("fig2a-efficiency");
    s.seed = 3;
    s.grid_points = 8;
    const auto dir = fresh_dir("plots");
    run_scenario(s, dir.string(), true);
    const auto svg = slurp(dir / "efficiency.svg");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("<path"), std::string::npos);
}

TEST(Scenario, FitScenarioReadsExternalDataset) {
    // a user-supplied dataset CSV replaces the synthetic sweep
    const auto dir = fresh_dir("fit-input");
    const auto data_path = (dir / "input.csv").string();
    {
        Dataset d;
        WaveguideParams wg{1.4, 0.9, 0.7, 0.0};
        for (int i = 1; i <= 20; ++i) {
            const double p = 0.53 * i / 20.0;
            d.points.push_back({p, internal_efficiency(p, wg), std::nullopt});
        }
        std::ofstream os(data_path);
        dataset_to_csv(os, d);
    }
    Scenario s = make_builtin_scenario("fit-efficiency");
    s.seed = 1;
    s.fit_input_csv = data_path;
    run_scenario(s, dir.string());
    const auto csv = slurp(dir / "efficiency_fit.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    EXPECT_NEAR(std::stod(line.substr(8)), 0.9, 1e-6);
    // the dataset artifact echoes the input
    EXPECT_EQ(slurp(dir / "dataset.csv"), slurp(data_path));
}

TEST(Scenario, FitScenariosRecoverTruth) {
    Scenario s = make_builtin_scenario("fit-efficiency");
    s.seed = 31;
    const auto dir = fresh_dir("fit-eff");
    run_scenario(s, dir.string());
    const auto csv = slurp(dir / "efficiency_fit.csv");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);  // header
    std::getline(is, line);
    EXPECT_EQ(line.find("eta_max,"), 0u);
    const double eta_max = std::stod(line.substr(8));
    EXPECT_NEAR(eta_max, 0.95, 0.03);

    Scenario n = make_builtin_scenario("fit-noise");
    n.seed = 32;
    const auto ndir = fresh_dir("fit-noise");
    run_scenario(n, ndir.string());
    const auto ncsv = slurp(ndir / "noise_fit.csv");
    EXPECT_NE(ncsv.find("alpha_n_full_model,"), std::string::npos);
}

}  // namespace
