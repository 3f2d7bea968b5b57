#pragma once

// Full experimental chains assembled from the simulator primitives, plus the
// sweep-level measurements: cross-correlation vs pump power, the heralded
// autocorrelation at the frequency beam splitter, and the weak-coherent-state
// SNR sweep that the mu1 extraction runs on.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "qfc/coincidence_analysis.hpp"
#include "qfc/device_model.hpp"
#include "qfc/photon_sim.hpp"

namespace qfc {

/// Index-parallel loop over independent work items. Results must be written
/// to pre-sized slots; per-item seeds keep the outcome independent of the
/// thread count.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// One detection branch after the waveguide: spectral filter, fiber coupling,
/// detector. `effective_noise_bandwidth_ghz` is the passband width the
/// conversion noise is injected over; `single_mode` marks a filter narrow
/// enough to pass only the heralded source mode.
struct BranchConfig {
    FilterSpec filter;
    double extra_filter_transmission = 1.0;
    double effective_noise_bandwidth_ghz = 0.21;
    double fiber_coupling = 0.79;
    bool single_mode = false;
    DetectorParams detector;
};

struct ChainConfig {
    SourceParams source;
    WaveguideParams waveguide;
    LossBudget losses;
    DetectorParams herald_detector{0.1, 400.0};
    BranchConfig converted{
        FilterSpec{0.21, 0.95}, 0.65, 0.136, 0.79, true, DetectorParams{0.1, 10.0}};
    BranchConfig unconverted{
        FilterSpec{10.0, 0.675}, 1.0, 10.0, 0.79, false, DetectorParams{0.1, 100.0}};

    void validate() const {
        source.validate();
        waveguide.validate();
        losses.validate();
        herald_detector.validate();
        for (const BranchConfig* b : {&converted, &unconverted}) {
            b->filter.validate();
            b->detector.validate();
            if (b->extra_filter_transmission <= 0 || b->extra_filter_transmission > 1)
                throw std::domain_error("BranchConfig: extra filter transmission not in (0,1]");
            if (b->effective_noise_bandwidth_ghz <= 0)
                throw std::domain_error("BranchConfig: effective noise bandwidth must be positive");
            if (b->fiber_coupling <= 0 || b->fiber_coupling > 1)
                throw std::domain_error("BranchConfig: fiber coupling not in (0,1]");
        }
    }
};

struct ChainStreams {
    EventStream herald;
    EventStream unconverted;
    EventStream converted;
};

/// Runs source -> input optics -> frequency beam splitter -> branch filters
/// and detectors. Every operation draws from a labeled substream of `seed`.
/// `inject_noise`/`dark_counts` switch those processes off for reference
/// (noise-free) runs.
inline ChainStreams run_chain(const ChainConfig& cfg, double pump_w, double duration_s,
                              std::uint64_t seed, bool inject_noise = true,
                              bool dark_counts = true) {
    cfg.validate();
    auto [herald, signal] =
        simulate_pair_source(cfg.source, duration_s, derive_seed(seed, "chain/source"));

    DetectorParams d1 = cfg.herald_detector;
    if (!dark_counts) d1.dark_rate_hz = 0.0;
    herald = apply_detector(herald, d1, duration_s, derive_seed(seed, "chain/d1"));

    signal = apply_loss(signal, cfg.losses.signal_transmission,
                        derive_seed(seed, "chain/input-optics"));
    signal = apply_loss(signal, cfg.losses.waveguide_coupling,
                        derive_seed(seed, "chain/wg-coupling"));

    auto [conv, unconv] = apply_frequency_beamsplitter(signal, pump_w, cfg.waveguide,
                                                       derive_seed(seed, "chain/bs"));

    if (cfg.converted.single_mode) conv = select_single_mode(conv);
    if (inject_noise && pump_w > 0.0)
        conv = inject_conversion_noise(conv, NoiseBranch::converted, pump_w, cfg.waveguide,
                                       cfg.converted.effective_noise_bandwidth_ghz,
                                       derive_seed(seed, "chain/noise-telecom"));
    conv = apply_loss(conv,
                      cfg.converted.filter.transmission *
                          cfg.converted.extra_filter_transmission,
                      derive_seed(seed, "chain/conv-filter"));
    conv = apply_loss(conv, cfg.converted.fiber_coupling,
                      derive_seed(seed, "chain/conv-fiber"));
    DetectorParams d3 = cfg.converted.detector;
    if (!dark_counts) d3.dark_rate_hz = 0.0;
    conv = apply_detector(conv, d3, duration_s, derive_seed(seed, "chain/d3"));

    if (cfg.unconverted.single_mode) unconv = select_single_mode(unconv);
    if (inject_noise && pump_w > 0.0)
        unconv = inject_conversion_noise(unconv, NoiseBranch::unconverted, pump_w,
                                         cfg.waveguide,
                                         cfg.unconverted.effective_noise_bandwidth_ghz,
                                         derive_seed(seed, "chain/noise-visible"));
    unconv = apply_loss(unconv,
                        cfg.unconverted.filter.transmission *
                            cfg.unconverted.extra_filter_transmission,
                        derive_seed(seed, "chain/unconv-filter"));
    unconv = apply_loss(unconv, cfg.unconverted.fiber_coupling,
                        derive_seed(seed, "chain/unconv-fiber"));
    DetectorParams d2 = cfg.unconverted.detector;
    if (!dark_counts) d2.dark_rate_hz = 0.0;
    unconv = apply_detector(unconv, d2, duration_s, derive_seed(seed, "chain/d2"));

    return {std::move(herald), std::move(unconv), std::move(conv)};
}

struct PumpSweepRow {
    double pump_w = 0.0;
    std::optional<G2Result> g2_converted;
    std::optional<G2Result> g2_unconverted;
    std::optional<double> predicted_g2_converted;
};

/// Source cross-correlation as seen through the converted branch with
/// conversion noise switched off; this is "the source g2" that the
/// correlation-degradation model takes as input. Dark counts are optional:
/// off for the clean model comparison, on when the reference should match a
/// sweep taken with real detectors.
inline G2Result measure_source_g2(const ChainConfig& cfg, double pump_w,
                                  double duration_s, std::int64_t window_ns,
                                  std::uint64_t seed, bool include_darks = false) {
    const auto streams = run_chain(cfg, pump_w, duration_s, seed, false, include_darks);
    return g2_cross(streams.herald, streams.converted, window_ns, duration_s);
}

/// Fraction of herald-partner pairs that land in the same grid window: a
/// boundary splits the pair with probability E|dt| / window = cell / (3 w).
inline double herald_window_capture(double cell_length_ns, double window_ns) {
    const double split = cell_length_ns / (3.0 * window_ns);
    return split >= 1.0 ? 0.0 : 1.0 - split;
}

/// Heralding efficiency of the detected herald stream as the windowed
/// estimators see it: the configured chain transmission, reduced by the
/// window capture fraction and (optionally) by the fraction of heralds that
/// are dark counts rather than idler detections.
inline double effective_heralding_efficiency(const ChainConfig& cfg, double window_ns,
                                             bool dark_diluted) {
    double eta = cfg.source.signal_chain_transmission *
                 herald_window_capture(cfg.source.cell_length_ns, window_ns);
    if (dark_diluted) {
        const double real_rate = cfg.source.mean_pairs_per_cell /
                                 (cfg.source.cell_length_ns * 1e-9) *
                                 cfg.source.herald_chain_transmission *
                                 cfg.herald_detector.efficiency;
        eta *= real_rate / (real_rate + cfg.herald_detector.dark_rate_hz);
    }
    return eta;
}

/// Herald-converted and herald-unconverted cross-correlations per pump point,
/// with the model prediction alongside when a source g2 reference is given.
inline std::vector<PumpSweepRow> g2_vs_pump_sweep(
    const ChainConfig& cfg, const std::vector<double>& pump_powers_w,
    const std::vector<double>& durations_s, std::int64_t window_ns, std::uint64_t seed,
    std::optional<double> source_g2_reference = {},
    std::optional<double> herald_efficiency_for_prediction = {}, int parallel = 1) {
    if (pump_powers_w.size() < 2)
        throw std::invalid_argument("g2_vs_pump_sweep: need at least two pump points");
    if (durations_s.size() != pump_powers_w.size())
        throw std::invalid_argument("g2_vs_pump_sweep: one duration per pump point");
    std::vector<PumpSweepRow> rows(pump_powers_w.size());
    parallel_for(pump_powers_w.size(), parallel, [&](std::size_t i) {
        const double p = pump_powers_w[i];
        PumpSweepRow row;
        row.pump_w = p;
        const auto streams = run_chain(cfg, p, durations_s[i],
                                       derive_seed(seed, "sweep/point", i));
        if (p > 0.0) {
            try {
                row.g2_converted = g2_cross(streams.herald, streams.converted, window_ns,
                                            durations_s[i]);
            } catch (const estimator_error&) {
                row.g2_converted = std::nullopt;
            }
        }  // pump off: conversion disabled, converted g2 undefined
        try {
            row.g2_unconverted =
                g2_cross(streams.herald, streams.unconverted, window_ns, durations_s[i]);
        } catch (const estimator_error&) {
            row.g2_unconverted = std::nullopt;
        }
        if (source_g2_reference && p > 0.0) {
            const double m1 = mu1_model(
                p, cfg.waveguide, cfg.losses,
                FilterSpec{cfg.converted.effective_noise_bandwidth_ghz,
                           cfg.converted.filter.transmission},
                cfg.converted.extra_filter_transmission,
                static_cast<double>(window_ns) * 1e-9);
            const double eta = herald_efficiency_for_prediction
                                   ? *herald_efficiency_for_prediction
                                   : cfg.source.signal_chain_transmission;
            row.predicted_g2_converted =
                predicted_g2_converted(*source_g2_reference, eta, m1);
        }
        rows[i] = std::move(row);
    });
    return rows;
}

struct HeraldedExperimentResult {
    HeraldedG2 heralded;
    G2Result g2_herald_converted;
    G2Result g2_herald_unconverted;
};

/// Triple-coincidence measurement at the frequency beam splitter operating
/// point: heralded autocorrelation between the two outputs.
inline HeraldedExperimentResult heralded_autocorr_experiment(const ChainConfig& cfg,
                                                             double pump_w,
                                                             double duration_s,
                                                             std::int64_t window_ns,
                                                             std::uint64_t seed) {
    const auto streams = run_chain(cfg, pump_w, duration_s, seed);
    HeraldedExperimentResult r{
        heralded_g2(streams.herald, streams.unconverted, streams.converted, window_ns),
        g2_cross(streams.herald, streams.converted, window_ns, duration_s),
        g2_cross(streams.herald, streams.unconverted, window_ns, duration_s)};
    return r;
}

// --- weak-coherent-state SNR sweep -----------------------------------------

struct WcsChainConfig {
    WcsParams pulse;                       // mean photons overridden per point
    WaveguideParams waveguide;
    LossBudget losses;
    BranchConfig converted{
        FilterSpec{0.21, 0.95}, 0.65, 0.136, 0.79, false, DetectorParams{0.1, 10.0}};
};

struct SnrPoint {
    double mean_input = 0.0;
    double snr = 0.0;
    std::uint64_t in_window_counts = 0;
    double noise_estimate = 0.0;
};

struct WcsSweepResult {
    std::vector<SnrPoint> points;
    double mu1 = 0.0;
    double mu1_std_error = 0.0;
};

/// Simulates the converted pulse train at one input level and measures SNR as
/// (in-window counts - noise) / noise, the noise level taken from a
/// background window between pulses.
inline SnrPoint measure_wcs_snr(const WcsChainConfig& cfg, double pump_w,
                                double mean_input, std::uint64_t n_pulses,
                                std::int64_t window_ns, std::uint64_t seed) {
    WcsParams pulse = cfg.pulse;
    pulse.mean_photons_per_pulse = mean_input;
    EventStream s = simulate_wcs(pulse, n_pulses, derive_seed(seed, "wcs/source"));
    const double duration_s = s.duration_s();
    s = apply_loss(s, cfg.losses.signal_transmission, derive_seed(seed, "wcs/input-optics"));
    s = apply_loss(s, cfg.losses.waveguide_coupling, derive_seed(seed, "wcs/wg-coupling"));
    auto [conv, unconv] =
        apply_frequency_beamsplitter(s, pump_w, cfg.waveguide, derive_seed(seed, "wcs/bs"));
    (void)unconv;
    conv = inject_conversion_noise(conv, NoiseBranch::converted, pump_w, cfg.waveguide,
                                   cfg.converted.effective_noise_bandwidth_ghz,
                                   derive_seed(seed, "wcs/noise"));
    conv = apply_loss(conv,
                      cfg.converted.filter.transmission * cfg.converted.extra_filter_transmission,
                      derive_seed(seed, "wcs/filter"));
    conv = apply_loss(conv, cfg.converted.fiber_coupling, derive_seed(seed, "wcs/fiber"));
    conv = apply_detector(conv, cfg.converted.detector, duration_s,
                          derive_seed(seed, "wcs/detector"));

    // pulse centers as a synthetic herald stream; the signal window is
    // centered on each pulse, the background window half a period later where
    // the Gaussian tail is negligible (otherwise the ~2% of signal outside
    // the gate contaminates the noise estimate)
    const double period = cfg.pulse.repetition_period_ns;
    const double sigma = cfg.pulse.pulse_fwhm_ns / 2.354820045030949;
    const auto w = static_cast<double>(window_ns);
    std::int64_t bg_window_ns = window_ns;
    if (period / 2.0 - 1.5 * w >= 4.0 * sigma)
        bg_window_ns = 3 * window_ns;
    else if (period / 2.0 - 0.5 * w < 4.0 * sigma)
        throw std::invalid_argument(
            "measure_wcs_snr: no signal-free background region in the repetition period");
    EventStream centers{Channel::herald, s.duration_ns, {}};
    centers.events.reserve(n_pulses);
    for (std::uint64_t p = 0; p < n_pulses; ++p) {
        const auto t = static_cast<std::uint64_t>((static_cast<double>(p) + 0.5) * period);
        centers.events.push_back({t, Channel::herald, Origin::pair});
    }
    const std::uint64_t in_window =
        count_coincidences(centers, conv, window_ns, -window_ns / 2);
    const std::uint64_t in_background = count_coincidences(
        centers, conv, bg_window_ns,
        static_cast<std::int64_t>(period / 2.0) - bg_window_ns / 2);
    if (in_background == 0)
        throw estimator_error("measure_wcs_snr: no background counts to estimate noise from");
    const double noise_in_windows = static_cast<double>(in_background) *
                                    static_cast<double>(window_ns) /
                                    static_cast<double>(bg_window_ns);
    SnrPoint pt;
    pt.mean_input = mean_input;
    pt.in_window_counts = in_window;
    pt.noise_estimate = noise_in_windows;
    pt.snr = (static_cast<double>(in_window) - noise_in_windows) / noise_in_windows;
    return pt;
}

/// SNR sweep over input photon numbers at fixed pump, with the line-through-
/// origin mu1 extraction.
inline WcsSweepResult wcs_snr_sweep(const WcsChainConfig& cfg, double pump_w,
                                    const std::vector<double>& mean_inputs,
                                    std::uint64_t n_pulses, std::int64_t window_ns,
                                    std::uint64_t seed) {
    WcsSweepResult out;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < mean_inputs.size(); ++i) {
        const auto pt = measure_wcs_snr(cfg, pump_w, mean_inputs[i], n_pulses, window_ns,
                                        derive_seed(seed, "wcs/point", i));
        out.points.push_back(pt);
        pts.emplace_back(pt.mean_input, pt.snr);
    }
    const auto [mu1, err] = extract_mu1(pts);
    out.mu1 = mu1;
    out.mu1_std_error = err;
    return out;
}

}  // namespace qfc
