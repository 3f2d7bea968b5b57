#pragma once

// Scenario-driven front end: named experiment recipes with paper-like
// defaults, overridable through the config file format, each emitting CSV
// artifacts plus a manifest that reproduces the run byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfc/config.hpp"
#include "qfc/experiment.hpp"
#include "qfc/model_fit.hpp"
#include "qfc/svg.hpp"

namespace qfc {

inline constexpr const char* kToolVersion = "1.0.0";

struct Scenario {
    std::string name;
    std::uint64_t seed = 42;
    double window_ns = 400.0;

    ChainConfig chain;

    // sweep axes: explicit pump points for Monte Carlo scenarios, a uniform
    // grid for the model dumps
    std::vector<double> sweep_powers_w;
    std::vector<double> sweep_durations_s;
    int grid_points = 61;
    double grid_max_power_w = 1.5;

    // weak-coherent-state sweep
    WcsParams wcs_pulse{1.0, 200.0, 2000.0};
    std::vector<double> wcs_mean_inputs{0.04, 0.1, 0.2, 0.4, 0.7, 1.0};
    std::uint64_t wcs_pulses_per_point = 100'000;

    // frequency-beam-splitter operating point
    double heralded_pump_w = 0.25;
    double heralded_duration_s = 240.0;

    // reference measurement behind the predicted-correlation column
    double source_g2_duration_s = 60.0;

    // fit scenarios
    int fit_points = 25;
    double fit_noise = 0.01;
    double fit_max_power_w = 0.53;
    int fit_k_points = 3;
    std::optional<std::string> fit_input_csv;
};

struct ScenarioInfo {
    const char* name;
    const char* description;
};

inline const std::vector<ScenarioInfo>& builtin_scenarios() {
    static const std::vector<ScenarioInfo> table{
        {"fig2a-efficiency",
         "internal and device conversion efficiency vs coupled pump power (model)"},
        {"fig2b-mu1",
         "mu1 noise figure vs pump power: model curve and simulated WCS extraction"},
        {"fig3-noise",
         "telecom and back-converted noise densities vs pump power (model)"},
        {"fig4a-correlations",
         "herald cross-correlations of converted/unconverted photons vs pump power"},
        {"fig4b-heralded-g2",
         "triple-coincidence heralded autocorrelation at the frequency beam splitter"},
        {"fit-efficiency",
         "recover (eta_max, eta_n) from an efficiency sweep by damped least squares"},
        {"fit-noise",
         "recover alpha_n from a telecom noise sweep: first-points slope and full model"},
    };
    return table;
}

inline bool is_builtin_scenario(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (name == s.name) return true;
    return false;
}

/// Builtin defaults. fig4b boosts transmissions and detector efficiencies so
/// the triple-coincidence statistics reach desk scale; the heralded estimate
/// itself is invariant under detector efficiency.
inline Scenario make_builtin_scenario(const std::string& name) {
    if (!is_builtin_scenario(name))
        throw std::invalid_argument("unknown scenario: " + name);
    Scenario s;
    s.name = name;
    if (name == "fig4a-correlations") {
        s.sweep_powers_w = {0.0, 0.1, 0.25, 0.44, 0.8, 1.45};
        s.sweep_durations_s = {60.0, 60.0, 45.0, 30.0, 30.0, 15.0};
    } else if (name == "fig2b-mu1") {
        s.sweep_powers_w = {0.1, 0.2, 0.3, 0.4, 0.5};
        s.wcs_pulses_per_point = 100'000;
    } else if (name == "fig3-noise") {
        s.grid_points = 54;
        s.grid_max_power_w = 0.53;
    } else if (name == "fig4b-heralded-g2") {
        s.chain.source.signal_chain_transmission = 0.4;
        s.chain.herald_detector = DetectorParams{0.25, 400.0};
        s.chain.unconverted.detector = DetectorParams{0.6, 100.0};
        s.chain.converted.detector = DetectorParams{0.6, 10.0};
    }
    return s;
}

// --- config application -----------------------------------------------------

namespace detail {

inline void check_fraction(double v, const char* field, int line,
                           std::vector<ConfigError>& errors, bool allow_zero = false) {
    if (v < 0.0 || v > 1.0 || (!allow_zero && v == 0.0))
        errors.push_back({line, field, "must be a fraction in (0,1]"});
}

inline void check_positive(double v, const char* field, int line,
                           std::vector<ConfigError>& errors) {
    if (v <= 0.0) errors.push_back({line, field, "must be positive"});
}

inline void check_nonnegative(double v, const char* field, int line,
                              std::vector<ConfigError>& errors) {
    if (v < 0.0) errors.push_back({line, field, "must not be negative"});
}

inline void apply_branch(const Config& cfg, const std::string& section, BranchConfig& b,
                         std::vector<ConfigError>& errors) {
    auto line = [&](const char* key) { return cfg.line_of(section + "." + key); };
    if (auto v = cfg.quantity(section + ".filter_bandwidth", Unit::gigahertz, errors)) {
        b.filter.bandwidth_ghz = *v;
        check_positive(*v, "filter_bandwidth", line("filter_bandwidth"), errors);
    }
    if (auto v = cfg.quantity(section + ".filter_transmission", Unit::dimensionless, errors)) {
        b.filter.transmission = *v;
        check_fraction(*v, "filter_transmission", line("filter_transmission"), errors);
    }
    if (auto v = cfg.quantity(section + ".extra_filter_transmission", Unit::dimensionless,
                              errors)) {
        b.extra_filter_transmission = *v;
        check_fraction(*v, "extra_filter_transmission", line("extra_filter_transmission"),
                       errors);
    }
    if (auto v = cfg.quantity(section + ".effective_noise_bandwidth", Unit::gigahertz,
                              errors)) {
        b.effective_noise_bandwidth_ghz = *v;
        check_positive(*v, "effective_noise_bandwidth", line("effective_noise_bandwidth"),
                       errors);
    }
    if (auto v = cfg.quantity(section + ".fiber_coupling", Unit::dimensionless, errors)) {
        b.fiber_coupling = *v;
        check_fraction(*v, "fiber_coupling", line("fiber_coupling"), errors);
    }
    if (auto v = cfg.boolean(section + ".single_mode", errors)) b.single_mode = *v;
    if (auto v = cfg.quantity(section + ".detector_efficiency", Unit::dimensionless,
                              errors)) {
        b.detector.efficiency = *v;
        check_fraction(*v, "detector_efficiency", line("detector_efficiency"), errors,
                       true);
    }
    if (auto v = cfg.quantity(section + ".detector_dark_rate", Unit::hertz, errors)) {
        b.detector.dark_rate_hz = *v;
        check_nonnegative(*v, "detector_dark_rate", line("detector_dark_rate"), errors);
    }
}

}  // namespace detail

/// Overlays config-file keys onto a scenario, appending a diagnostic for
/// every malformed value, out-of-range invariant or unknown key.
inline void apply_config(Scenario& s, const Config& cfg, std::vector<ConfigError>& errors) {
    using detail::check_fraction;
    using detail::check_nonnegative;
    using detail::check_positive;

    if (auto v = cfg.string("scenario.name")) {
        if (*v != s.name)
            errors.push_back({cfg.line_of("scenario.name"), "scenario.name",
                              "config is for scenario '" + *v + "', expected '" + s.name +
                                  "'"});
    }
    if (auto v = cfg.integer("scenario.seed", errors)) s.seed = *v;
    if (auto v = cfg.quantity("scenario.window", Unit::second, errors)) {
        s.window_ns = *v * 1e9;
        check_positive(s.window_ns, "scenario.window", cfg.line_of("scenario.window"),
                       errors);
    }

    if (auto v = cfg.quantity_list("sweep.pump_powers", Unit::watt, errors)) {
        s.sweep_powers_w = *v;
        for (double p : *v)
            check_nonnegative(p, "sweep.pump_powers", cfg.line_of("sweep.pump_powers"),
                              errors);
    }
    if (auto v = cfg.quantity_list("sweep.durations", Unit::second, errors)) {
        s.sweep_durations_s = *v;
        for (double d : *v)
            check_positive(d, "sweep.durations", cfg.line_of("sweep.durations"), errors);
    }
    if (auto v = cfg.integer("sweep.points", errors)) {
        s.grid_points = static_cast<int>(*v);
        if (*v < 2)
            errors.push_back({cfg.line_of("sweep.points"), "sweep.points",
                              "need at least 2 grid points"});
    }
    if (auto v = cfg.quantity("sweep.max_power", Unit::watt, errors)) {
        s.grid_max_power_w = *v;
        check_positive(*v, "sweep.max_power", cfg.line_of("sweep.max_power"), errors);
    }

    auto& src = s.chain.source;
    if (auto v = cfg.quantity("source.mean_pairs_per_cell", Unit::dimensionless, errors)) {
        src.mean_pairs_per_cell = *v;
        check_nonnegative(*v, "source.mean_pairs_per_cell",
                          cfg.line_of("source.mean_pairs_per_cell"), errors);
    }
    if (auto v = cfg.integer("source.background_modes", errors))
        src.background_modes = static_cast<int>(*v);
    if (auto v = cfg.quantity("source.cell_length", Unit::second, errors)) {
        src.cell_length_ns = *v * 1e9;
        check_positive(src.cell_length_ns, "source.cell_length",
                       cfg.line_of("source.cell_length"), errors);
    }
    if (auto v = cfg.quantity("source.herald_chain_transmission", Unit::dimensionless,
                              errors)) {
        src.herald_chain_transmission = *v;
        check_fraction(*v, "source.herald_chain_transmission",
                       cfg.line_of("source.herald_chain_transmission"), errors);
    }
    if (auto v = cfg.quantity("source.signal_chain_transmission", Unit::dimensionless,
                              errors)) {
        src.signal_chain_transmission = *v;
        check_fraction(*v, "source.signal_chain_transmission",
                       cfg.line_of("source.signal_chain_transmission"), errors);
    }

    auto& wg = s.chain.waveguide;
    if (auto v = cfg.quantity("waveguide.length", Unit::centimeter, errors)) {
        wg.length_cm = *v;
        check_positive(*v, "waveguide.length", cfg.line_of("waveguide.length"), errors);
    }
    if (auto v = cfg.quantity("waveguide.eta_max", Unit::dimensionless, errors)) {
        wg.eta_max = *v;
        check_fraction(*v, "waveguide.eta_max", cfg.line_of("waveguide.eta_max"), errors,
                       true);
    }
    if (auto v = cfg.quantity("waveguide.eta_n", Unit::normalized_efficiency, errors)) {
        wg.eta_n = *v;
        check_positive(*v, "waveguide.eta_n", cfg.line_of("waveguide.eta_n"), errors);
    }
    if (auto v = cfg.quantity("waveguide.alpha_n", Unit::noise_coefficient, errors)) {
        wg.alpha_n = *v;
        check_nonnegative(*v, "waveguide.alpha_n", cfg.line_of("waveguide.alpha_n"),
                          errors);
    }

    auto& losses = s.chain.losses;
    const std::pair<const char*, double*> loss_keys[] = {
        {"losses.signal_transmission", &losses.signal_transmission},
        {"losses.waveguide_coupling", &losses.waveguide_coupling},
        {"losses.filter_transmission", &losses.filter_transmission},
        {"losses.fiber_coupling", &losses.fiber_coupling},
    };
    for (const auto& [key, slot] : loss_keys)
        if (auto v = cfg.quantity(key, Unit::dimensionless, errors)) {
            *slot = *v;
            check_fraction(*v, key, cfg.line_of(key), errors);
        }

    if (auto v = cfg.quantity("herald_detector.efficiency", Unit::dimensionless, errors)) {
        s.chain.herald_detector.efficiency = *v;
        check_fraction(*v, "herald_detector.efficiency",
                       cfg.line_of("herald_detector.efficiency"), errors, true);
    }
    if (auto v = cfg.quantity("herald_detector.dark_rate", Unit::hertz, errors)) {
        s.chain.herald_detector.dark_rate_hz = *v;
        check_nonnegative(*v, "herald_detector.dark_rate",
                          cfg.line_of("herald_detector.dark_rate"), errors);
    }
    detail::apply_branch(cfg, "converted_branch", s.chain.converted, errors);
    detail::apply_branch(cfg, "unconverted_branch", s.chain.unconverted, errors);

    if (auto v = cfg.quantity_list("wcs.mean_inputs", Unit::dimensionless, errors)) {
        s.wcs_mean_inputs = *v;
        for (double m : *v)
            check_positive(m, "wcs.mean_inputs", cfg.line_of("wcs.mean_inputs"), errors);
    }
    if (auto v = cfg.integer("wcs.pulses_per_point", errors)) {
        s.wcs_pulses_per_point = *v;
        if (*v == 0)
            errors.push_back({cfg.line_of("wcs.pulses_per_point"), "wcs.pulses_per_point",
                              "must be positive"});
    }
    if (auto v = cfg.quantity("wcs.pulse_fwhm", Unit::second, errors))
        s.wcs_pulse.pulse_fwhm_ns = *v * 1e9;
    if (auto v = cfg.quantity("wcs.repetition_period", Unit::second, errors))
        s.wcs_pulse.repetition_period_ns = *v * 1e9;
    if (s.wcs_pulse.pulse_fwhm_ns >= s.wcs_pulse.repetition_period_ns)
        errors.push_back({cfg.line_of("wcs.pulse_fwhm"), "wcs.pulse_fwhm",
                          "pulse FWHM must be below the repetition period"});

    if (auto v = cfg.quantity("heralded.pump_power", Unit::watt, errors)) {
        s.heralded_pump_w = *v;
        check_positive(*v, "heralded.pump_power", cfg.line_of("heralded.pump_power"),
                       errors);
    }
    if (auto v = cfg.quantity("heralded.duration", Unit::second, errors)) {
        s.heralded_duration_s = *v;
        check_positive(*v, "heralded.duration", cfg.line_of("heralded.duration"), errors);
    }
    if (auto v = cfg.quantity("correlations.source_g2_duration", Unit::second, errors)) {
        s.source_g2_duration_s = *v;
        check_positive(*v, "correlations.source_g2_duration",
                       cfg.line_of("correlations.source_g2_duration"), errors);
    }

    if (auto v = cfg.integer("fit.points", errors)) {
        s.fit_points = static_cast<int>(*v);
        if (*v < 2)
            errors.push_back({cfg.line_of("fit.points"), "fit.points",
                              "need at least 2 points"});
    }
    if (auto v = cfg.quantity("fit.noise", Unit::dimensionless, errors)) {
        s.fit_noise = *v;
        check_nonnegative(*v, "fit.noise", cfg.line_of("fit.noise"), errors);
    }
    if (auto v = cfg.quantity("fit.max_power", Unit::watt, errors)) {
        s.fit_max_power_w = *v;
        check_positive(*v, "fit.max_power", cfg.line_of("fit.max_power"), errors);
    }
    if (auto v = cfg.integer("fit.k_points", errors)) s.fit_k_points = static_cast<int>(*v);
    if (auto v = cfg.string("fit.input")) s.fit_input_csv = *v;

    if (s.name == "fig4a-correlations" &&
        s.sweep_powers_w.size() != s.sweep_durations_s.size()) {
        if (cfg.has("sweep.durations"))
            errors.push_back({cfg.line_of("sweep.durations"), "sweep.durations",
                              "must list one duration per pump point"});
        else
            s.sweep_durations_s.assign(s.sweep_powers_w.size(), 15.0);
    }

    cfg.report_unused(errors);
}

/// Resolves a scenario from a builtin name, a config file, or both. Seeds are
/// mandatory: a config-only invocation must set scenario.seed explicitly.
inline std::optional<Scenario> load_scenario(const std::optional<std::string>& builtin,
                                             const Config* cfg,
                                             std::vector<ConfigError>& errors) {
    std::string name;
    if (builtin) {
        name = *builtin;
        if (!is_builtin_scenario(name)) {
            std::string names;
            for (const auto& b : builtin_scenarios())
                names += std::string(names.empty() ? "" : ", ") + b.name;
            errors.push_back({0, "scenario", "unknown scenario '" + name +
                                                 "'; available: " + names});
            return std::nullopt;
        }
    } else {
        if (!cfg) {
            errors.push_back({0, "scenario", "no scenario name or config given"});
            return std::nullopt;
        }
        auto n = cfg->string("scenario.name");
        if (!n) {
            errors.push_back({0, "scenario.name", "config must name a scenario"});
            return std::nullopt;
        }
        name = *n;
        if (!is_builtin_scenario(name)) {
            errors.push_back({cfg->line_of("scenario.name"), "scenario.name",
                              "unknown scenario '" + name + "'"});
            return std::nullopt;
        }
        if (!cfg->has("scenario.seed")) {
            errors.push_back({0, "scenario.seed",
                              "seed is mandatory (wall-clock seeding is not supported)"});
        }
    }
    Scenario s = make_builtin_scenario(name);
    if (cfg) apply_config(s, *cfg, errors);
    if (!errors.empty()) return std::nullopt;
    try {
        s.chain.validate();
    } catch (const std::exception& e) {
        errors.push_back({0, "scenario", e.what()});
        return std::nullopt;
    }
    return s;
}

// --- manifest ----------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& vs, const char* unit) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += fmt(vs[i]);
        if (*unit) out += std::string(" ") + unit;
    }
    return out;
}

}  // namespace detail

/// Full resolved configuration; itself a valid config file, so `run
/// --config manifest.txt` reproduces the outputs byte for byte.
inline std::string render_manifest(const Scenario& s) {
    using detail::fmt;
    using detail::fmt_list;
    std::ostringstream os;
    os << "# resolved scenario manifest (tool version " << kToolVersion << ")\n";
    os << "[scenario]\n";
    os << "name = " << s.name << "\n";
    os << "seed = " << s.seed << "\n";
    os << "window = " << fmt(s.window_ns) << " ns\n";
    os << "\n[sweep]\n";
    if (!s.sweep_powers_w.empty())
        os << "pump_powers = " << fmt_list(s.sweep_powers_w, "W") << "\n";
    if (!s.sweep_durations_s.empty())
        os << "durations = " << fmt_list(s.sweep_durations_s, "s") << "\n";
    os << "points = " << s.grid_points << "\n";
    os << "max_power = " << fmt(s.grid_max_power_w) << " W\n";
    const auto& src = s.chain.source;
    os << "\n[source]\n";
    os << "mean_pairs_per_cell = " << fmt(src.mean_pairs_per_cell) << "\n";
    os << "background_modes = " << src.background_modes << "\n";
    os << "cell_length = " << fmt(src.cell_length_ns) << " ns\n";
    os << "herald_chain_transmission = " << fmt(src.herald_chain_transmission) << "\n";
    os << "signal_chain_transmission = " << fmt(src.signal_chain_transmission) << "\n";
    const auto& wg = s.chain.waveguide;
    os << "\n[waveguide]\n";
    os << "length = " << fmt(wg.length_cm) << " cm\n";
    os << "eta_max = " << fmt(wg.eta_max) << "\n";
    os << "eta_n = " << fmt(wg.eta_n) << " /W/cm^2\n";
    os << "alpha_n = " << fmt(wg.alpha_n) << " Hz/mW/cm/THz\n";
    const auto& l = s.chain.losses;
    os << "\n[losses]\n";
    os << "signal_transmission = " << fmt(l.signal_transmission) << "\n";
    os << "waveguide_coupling = " << fmt(l.waveguide_coupling) << "\n";
    os << "filter_transmission = " << fmt(l.filter_transmission) << "\n";
    os << "fiber_coupling = " << fmt(l.fiber_coupling) << "\n";
    os << "\n[herald_detector]\n";
    os << "efficiency = " << fmt(s.chain.herald_detector.efficiency) << "\n";
    os << "dark_rate = " << fmt(s.chain.herald_detector.dark_rate_hz) << " Hz\n";
    auto branch = [&](const char* section, const BranchConfig& b) {
        os << "\n[" << section << "]\n";
        os << "filter_bandwidth = " << fmt(b.filter.bandwidth_ghz) << " GHz\n";
        os << "filter_transmission = " << fmt(b.filter.transmission) << "\n";
        os << "extra_filter_transmission = " << fmt(b.extra_filter_transmission) << "\n";
        os << "effective_noise_bandwidth = " << fmt(b.effective_noise_bandwidth_ghz)
           << " GHz\n";
        os << "fiber_coupling = " << fmt(b.fiber_coupling) << "\n";
        os << "single_mode = " << (b.single_mode ? "true" : "false") << "\n";
        os << "detector_efficiency = " << fmt(b.detector.efficiency) << "\n";
        os << "detector_dark_rate = " << fmt(b.detector.dark_rate_hz) << " Hz\n";
    };
    branch("converted_branch", s.chain.converted);
    branch("unconverted_branch", s.chain.unconverted);
    os << "\n[wcs]\n";
    os << "mean_inputs = " << fmt_list(s.wcs_mean_inputs, "") << "\n";
    os << "pulses_per_point = " << s.wcs_pulses_per_point << "\n";
    os << "pulse_fwhm = " << fmt(s.wcs_pulse.pulse_fwhm_ns) << " ns\n";
    os << "repetition_period = " << fmt(s.wcs_pulse.repetition_period_ns) << " ns\n";
    os << "\n[heralded]\n";
    os << "pump_power = " << fmt(s.heralded_pump_w) << " W\n";
    os << "duration = " << fmt(s.heralded_duration_s) << " s\n";
    os << "\n[correlations]\n";
    os << "source_g2_duration = " << fmt(s.source_g2_duration_s) << " s\n";
    os << "\n[fit]\n";
    os << "points = " << s.fit_points << "\n";
    os << "noise = " << fmt(s.fit_noise) << "\n";
    os << "max_power = " << fmt(s.fit_max_power_w) << " W\n";
    os << "k_points = " << s.fit_k_points << "\n";
    if (s.fit_input_csv) os << "input = " << *s.fit_input_csv << "\n";
    return os.str();
}

// --- run ----------------------------------------------------------------------

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write: " + tmp);
        os << content;
        if (!os) throw std::runtime_error("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : "nan";
}

struct Artifact {
    std::string filename;
    std::string content;
};

inline WcsChainConfig wcs_chain_of(const Scenario& s) {
    WcsChainConfig cfg;
    cfg.pulse = s.wcs_pulse;
    cfg.waveguide = s.chain.waveguide;
    cfg.losses = s.chain.losses;
    cfg.converted = s.chain.converted;
    cfg.converted.single_mode = false;  // coherent input has no cavity modes
    return cfg;
}

inline std::vector<Artifact> run_fig2a(const Scenario& s, bool plot) {
    std::string csv = "pump_w,internal_efficiency,device_efficiency\n";
    SvgSeries internal{"internal", {}}, device{"device", {}};
    for (int i = 0; i < s.grid_points; ++i) {
        const double p = s.grid_max_power_w * i / (s.grid_points - 1);
        const double eta = internal_efficiency(p, s.chain.waveguide);
        const double dev = device_efficiency(p, s.chain.waveguide, s.chain.losses);
        csv += fmt(p) + "," + fmt(eta) + "," + fmt(dev) + "\n";
        internal.points.emplace_back(p, eta);
        device.points.emplace_back(p, dev);
    }
    std::vector<Artifact> out{{"efficiency.csv", csv}};
    if (plot)
        out.push_back({"efficiency.svg",
                       render_svg_line_chart("conversion efficiency", "pump power (W)",
                                             "efficiency", {internal, device})});
    return out;
}

inline std::vector<Artifact> run_fig3(const Scenario& s, bool plot) {
    std::string csv = "pump_mw,telecom_rate_hz_per_ghz,backconverted_rate_hz_per_ghz\n";
    SvgSeries telecom{"telecom 1552 nm", {}}, visible{"back-converted 606 nm", {}};
    for (int i = 0; i < s.grid_points; ++i) {
        const double p = s.grid_max_power_w * i / (s.grid_points - 1);
        const double tel = telecom_noise_rate(p, s.chain.waveguide);
        const double vis = backconverted_noise_rate(p, s.chain.waveguide);
        csv += fmt(p * 1e3) + "," + fmt(tel) + "," + fmt(vis) + "\n";
        telecom.points.emplace_back(p * 1e3, tel);
        visible.points.emplace_back(p * 1e3, vis);
    }
    std::vector<Artifact> out{{"noise.csv", csv}};
    if (plot)
        out.push_back({"noise.svg",
                       render_svg_line_chart("conversion noise at the waveguide output",
                                             "pump power (mW)", "counts/s/GHz",
                                             {telecom, visible})});
    return out;
}

inline std::vector<Artifact> run_fig2b(const Scenario& s, bool plot, int parallel) {
    const auto cfg = wcs_chain_of(s);
    struct Row {
        double pump = 0.0;
        double model = 0.0;
        std::optional<double> sim, sim_err, snr_unit;
    };
    std::vector<Row> rows(s.sweep_powers_w.size());
    const auto window_ns = static_cast<std::int64_t>(s.window_ns);
    parallel_for(s.sweep_powers_w.size(), parallel, [&](std::size_t i) {
        Row r;
        r.pump = s.sweep_powers_w[i];
        r.model = mu1_model(r.pump, cfg.waveguide, cfg.losses,
                            FilterSpec{cfg.converted.effective_noise_bandwidth_ghz,
                                       cfg.converted.filter.transmission},
                            cfg.converted.extra_filter_transmission, s.window_ns * 1e-9);
        try {
            const auto sweep =
                wcs_snr_sweep(cfg, r.pump, s.wcs_mean_inputs, s.wcs_pulses_per_point,
                              window_ns, derive_seed(s.seed, "fig2b/point", i));
            r.sim = sweep.mu1;
            r.sim_err = sweep.mu1_std_error;
            for (const auto& pt : sweep.points)
                if (pt.mean_input == 1.0) r.snr_unit = pt.snr;
        } catch (const estimator_error&) {
            // too few noise counts at this point; model column stands alone
        }
        rows[i] = r;
    });
    std::string csv = "pump_w,mu1_model,mu1_simulated,mu1_simulated_err,snr_at_unit_input\n";
    SvgSeries model{"model", {}}, sim{"simulated", {}};
    for (const auto& r : rows) {
        csv += fmt(r.pump) + "," + fmt(r.model) + "," + fmt_opt(r.sim) + "," +
               fmt_opt(r.sim_err) + "," + fmt_opt(r.snr_unit) + "\n";
        model.points.emplace_back(r.pump, r.model);
        if (r.sim) sim.points.emplace_back(r.pump, *r.sim);
    }
    std::vector<Artifact> out{{"mu1.csv", csv}};
    if (plot)
        out.push_back({"mu1.svg",
                       render_svg_line_chart("mu1 vs pump power", "pump power (W)",
                                             "mu1 (photons/pulse)", {model, sim})});
    return out;
}

inline std::vector<Artifact> run_fig4a(const Scenario& s, bool plot, int parallel) {
    const auto window_ns = static_cast<std::int64_t>(s.window_ns);
    // reference taken with dark counts on (same detectors as the sweep), so
    // the prediction uses the dark-diluted effective heralding efficiency
    const auto ref = measure_source_g2(s.chain, s.heralded_pump_w,
                                       s.source_g2_duration_s, window_ns,
                                       derive_seed(s.seed, "fig4a/source-ref"), true);
    const double eta_eff = effective_heralding_efficiency(s.chain, s.window_ns, true);
    const auto rows =
        g2_vs_pump_sweep(s.chain, s.sweep_powers_w, s.sweep_durations_s, window_ns,
                         derive_seed(s.seed, "fig4a/sweep"), ref.value, eta_eff,
                         parallel);
    std::string csv =
        "pump_mw,g2_converted,g2_converted_err,g2_unconverted,g2_unconverted_err,"
        "g2_converted_predicted\n";
    SvgSeries conv{"converted", {}}, unconv{"unconverted", {}}, pred{"predicted", {}};
    for (const auto& r : rows) {
        csv += fmt(r.pump_w * 1e3) + ",";
        csv += (r.g2_converted ? fmt(r.g2_converted->value) : "nan") + std::string(",");
        csv += (r.g2_converted ? fmt(r.g2_converted->std_error) : "nan") + std::string(",");
        csv += (r.g2_unconverted ? fmt(r.g2_unconverted->value) : "nan") + std::string(",");
        csv += (r.g2_unconverted ? fmt(r.g2_unconverted->std_error) : "nan") +
               std::string(",");
        csv += fmt_opt(r.predicted_g2_converted) + "\n";
        if (r.g2_converted) conv.points.emplace_back(r.pump_w * 1e3, r.g2_converted->value);
        if (r.g2_unconverted)
            unconv.points.emplace_back(r.pump_w * 1e3, r.g2_unconverted->value);
        if (r.predicted_g2_converted)
            pred.points.emplace_back(r.pump_w * 1e3, *r.predicted_g2_converted);
    }
    std::vector<Artifact> out{{"correlations.csv", csv}};
    if (plot)
        out.push_back({"correlations.svg",
                       render_svg_line_chart("herald cross-correlations vs pump power",
                                             "pump power (mW)", "g2",
                                             {conv, unconv, pred})});
    return out;
}

inline std::vector<Artifact> run_fig4b(const Scenario& s, bool plot) {
    const auto window_ns = static_cast<std::int64_t>(s.window_ns);
    const auto r = heralded_autocorr_experiment(s.chain, s.heralded_pump_w,
                                                s.heralded_duration_s, window_ns,
                                                derive_seed(s.seed, "fig4b"));
    const std::string hist_csv = to_csv(r.heralded.histogram);
    SvgSeries bars{"triples", {}};
    for (std::size_t k = 0; k < r.heralded.histogram.bins.size(); ++k)
        bars.points.emplace_back(static_cast<double>(k),
                                 static_cast<double>(r.heralded.histogram.bins[k]));
    std::string csv =
        "value,std_error,herald_total,heralds_with_out1,heralds_with_out2,"
        "g2_herald_converted,g2_herald_unconverted\n";
    csv += fmt(r.heralded.value) + "," + fmt(r.heralded.std_error) + "," +
           std::to_string(r.heralded.histogram.herald_total) + "," +
           std::to_string(r.heralded.heralds_with_out1) + "," +
           std::to_string(r.heralded.heralds_with_out2) + "," +
           fmt(r.g2_herald_converted.value) + "," + fmt(r.g2_herald_unconverted.value) +
           "\n";
    std::vector<Artifact> out{{"heralded_g2.csv", csv}, {"triple_histogram.csv", hist_csv}};
    if (plot)
        out.push_back({"triple_histogram.svg",
                       render_svg_line_chart("triple coincidences by herald separation",
                                             "intervening heralds", "count", {bars})});
    return out;
}

inline Dataset synthetic_efficiency_dataset(const Scenario& s) {
    Dataset d;
    Rng rng(s.seed, "fit-efficiency/data");
    for (int i = 1; i <= s.fit_points; ++i) {
        const double p = s.fit_max_power_w * i / s.fit_points;
        double y = internal_efficiency(p, s.chain.waveguide);
        if (s.fit_noise > 0) y *= 1.0 + s.fit_noise * rng.gaussian(0.0, 1.0);
        d.points.push_back({p, y, std::nullopt});
    }
    return d;
}

inline Dataset synthetic_noise_dataset(const Scenario& s) {
    Dataset d;
    Rng rng(s.seed, "fit-noise/data");
    for (int i = 1; i <= s.fit_points; ++i) {
        const double p = s.fit_max_power_w * i / s.fit_points;
        double y = telecom_noise_rate(p, s.chain.waveguide);
        if (s.fit_noise > 0) y *= 1.0 + s.fit_noise * rng.gaussian(0.0, 1.0);
        d.points.push_back({p, y, std::nullopt});
    }
    return d;
}

inline Dataset load_or_synthesize(const Scenario& s, bool noise_data) {
    if (s.fit_input_csv) {
        std::ifstream is(*s.fit_input_csv);
        if (!is) throw std::runtime_error("cannot open dataset: " + *s.fit_input_csv);
        return dataset_from_csv(is);
    }
    return noise_data ? synthetic_noise_dataset(s) : synthetic_efficiency_dataset(s);
}

inline std::vector<Artifact> run_fit_efficiency(const Scenario& s) {
    const Dataset d = load_or_synthesize(s, false);
    const auto fit = fit_efficiency_curve(d, s.chain.waveguide.length_cm);
    std::ostringstream data_csv;
    dataset_to_csv(data_csv, d);
    std::string csv = "parameter,value,std_error\n";
    for (std::size_t i = 0; i < fit.parameters.size(); ++i)
        csv += fit.parameter_names[i] + "," + fmt(fit.parameters[i]) + "," +
               fmt(fit.std_errors[i]) + "\n";
    std::ostringstream report;
    report << "efficiency curve fit (" << d.points.size() << " points, L = "
           << fmt(s.chain.waveguide.length_cm) << " cm)\n";
    report << "  converged: " << (fit.converged ? "yes" : "NO") << " after "
           << fit.iterations << " iterations\n";
    report << "  eta_max = " << fmt(fit.parameters[0]) << " +- " << fmt(fit.std_errors[0])
           << "\n";
    report << "  eta_n   = " << fmt(fit.parameters[1]) << " +- " << fmt(fit.std_errors[1])
           << " /W/cm^2\n";
    report << "  residual norm = " << fmt(fit.residual_norm) << "\n";
    return {{"dataset.csv", data_csv.str()},
            {"efficiency_fit.csv", csv},
            {"efficiency_fit_report.txt", report.str()}};
}

inline std::vector<Artifact> run_fit_noise(const Scenario& s) {
    const Dataset d = load_or_synthesize(s, true);
    const auto [slope_alpha, slope_err] =
        fit_noise_slope(d, s.fit_k_points, s.chain.waveguide.length_cm);
    const auto [model_alpha, model_err] = fit_noise_model(d, s.chain.waveguide);
    std::ostringstream data_csv;
    dataset_to_csv(data_csv, d);
    std::string csv = "parameter,value,std_error\n";
    csv += "alpha_n_linear_slope," + fmt(slope_alpha) + "," + fmt(slope_err) + "\n";
    csv += "alpha_n_full_model," + fmt(model_alpha) + "," + fmt(model_err) + "\n";
    std::ostringstream report;
    report << "telecom noise fit (" << d.points.size() << " points)\n";
    report << "  first-" << s.fit_k_points << "-points slope: alpha_n = "
           << fmt(slope_alpha * 1e-3) << " +- " << fmt(slope_err * 1e-3)
           << " kHz/mW/cm/THz\n";
    report << "  full back-conversion model: alpha_n = " << fmt(model_alpha * 1e-3)
           << " +- " << fmt(model_err * 1e-3) << " kHz/mW/cm/THz\n";
    return {{"dataset.csv", data_csv.str()},
            {"noise_fit.csv", csv},
            {"noise_fit_report.txt", report.str()}};
}

}  // namespace detail

/// Runs a scenario into `out_dir` (one CSV per measured quantity, a manifest,
/// optional SVG charts). Files are written through temp-and-rename so an
/// interrupted run never leaves a partial artifact.
inline std::vector<std::string> run_scenario(const Scenario& s, const std::string& out_dir,
                                             bool plot = false, int parallel = 1) {
    std::vector<detail::Artifact> artifacts;
    if (s.name == "fig2a-efficiency")
        artifacts = detail::run_fig2a(s, plot);
    else if (s.name == "fig2b-mu1")
        artifacts = detail::run_fig2b(s, plot, parallel);
    else if (s.name == "fig3-noise")
        artifacts = detail::run_fig3(s, plot);
    else if (s.name == "fig4a-correlations")
        artifacts = detail::run_fig4a(s, plot, parallel);
    else if (s.name == "fig4b-heralded-g2")
        artifacts = detail::run_fig4b(s, plot);
    else if (s.name == "fit-efficiency")
        artifacts = detail::run_fit_efficiency(s);
    else if (s.name == "fit-noise")
        artifacts = detail::run_fit_noise(s);
    else
        throw std::invalid_argument("unknown scenario: " + s.name);

    artifacts.push_back({"manifest.txt", render_manifest(s)});
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    for (const auto& a : artifacts) {
        const auto path = std::filesystem::path(out_dir) / a.filename;
        detail::write_file_atomic(path, a.content);
        written.push_back(path.string());
    }
    return written;
}

}  // namespace qfc
