#pragma once

// Monte Carlo generation of detection-event streams for the experimental
// chain: thermal pair source (or weak coherent pulses), frequency-domain beam
// splitter with parametric noise, passive losses and detectors.
//
// The pair source uses a coherence-cell model: time is partitioned into cells
// of one biphoton correlation time, the correlated mode draws a thermal pair
// number per cell, and each photon lands uniformly inside its cell. Herald
// and signal of one pair share the cell, which produces the finite
// correlation time; every per-cell moment is then analytically enumerable,
// which the oracle tests rely on. Cells are generated sparsely (geometric
// gaps between occupied cells), so cost scales with photons, not duration.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "qfc/device_model.hpp"
#include "qfc/events.hpp"
#include "qfc/rng.hpp"

namespace qfc {

struct SourceParams {
    double mean_pairs_per_cell = 0.0017;      // thermal occupancy of the correlated mode
    int background_modes = 7;                 // uncorrelated signal-arm modes
    double cell_length_ns = 120.9;            // biphoton correlation time
    double herald_chain_transmission = 0.8;   // idler filter cavity + fiber
    double signal_chain_transmission = 0.25;  // heralding efficiency into the fiber

    void validate() const {
        if (mean_pairs_per_cell < 0)
            throw std::domain_error("SourceParams: mean_pairs_per_cell must be >= 0");
        if (background_modes < 0)
            throw std::domain_error("SourceParams: background_modes must be >= 0");
        if (cell_length_ns <= 0)
            throw std::domain_error("SourceParams: cell_length must be positive");
        for (double t : {herald_chain_transmission, signal_chain_transmission})
            if (t < 0 || t > 1)
                throw std::domain_error("SourceParams: transmissions must be in [0,1]");
    }
};

struct DetectorParams {
    double efficiency = 0.1;
    double dark_rate_hz = 0.0;

    void validate() const {
        if (efficiency < 0 || efficiency > 1)
            throw std::domain_error("DetectorParams: efficiency must be in [0,1]");
        if (dark_rate_hz < 0)
            throw std::domain_error("DetectorParams: dark rate must be >= 0");
    }
};

struct WcsParams {
    double mean_photons_per_pulse = 1.0;
    double pulse_fwhm_ns = 200.0;
    double repetition_period_ns = 2000.0;

    void validate() const {
        if (mean_photons_per_pulse < 0)
            throw std::domain_error("WcsParams: mean photons must be >= 0");
        if (pulse_fwhm_ns <= 0 || repetition_period_ns <= 0)
            throw std::domain_error("WcsParams: times must be positive");
        if (pulse_fwhm_ns >= repetition_period_ns)
            throw std::domain_error("WcsParams: pulse FWHM must be below the repetition period");
    }
};

namespace detail {

// Visit occupied cells of one thermal mode: calls visit(cell_index, n >= 1).
template <class Visit>
void walk_occupied_cells(Rng& rng, std::uint64_t n_cells, double mu, Visit visit) {
    if (mu <= 0.0) return;
    const double q = mu / (1.0 + mu);      // P(n >= 1) for geometric occupancy
    const double log_q = std::log(q);
    std::uint64_t cell = rng.geometric_gap(q);
    while (cell < n_cells) {
        // n | n >= 1 is 1 + geometric
        const std::uint64_t n =
            1 + static_cast<std::uint64_t>(std::log(rng.uniform_pos()) / log_q);
        visit(cell, n);
        cell += 1 + rng.geometric_gap(q);
    }
}

inline std::uint64_t place_in_cell(Rng& rng, std::uint64_t cell, double cell_ns,
                                   std::uint64_t duration_ns) {
    const double t = (static_cast<double>(cell) + rng.uniform01()) * cell_ns;
    auto ts = static_cast<std::uint64_t>(t);
    return ts >= duration_ns ? duration_ns - 1 : ts;
}

}  // namespace detail

/// Thermal pair source. Returns (herald, signal) streams; the signal arm also
/// carries the uncorrelated background modes. Chain transmissions are applied
/// photon by photon.
inline std::pair<EventStream, EventStream> simulate_pair_source(const SourceParams& src,
                                                                double duration_s,
                                                                std::uint64_t seed) {
    src.validate();
    if (duration_s <= 0) throw std::domain_error("simulate_pair_source: duration must be positive");
    const auto duration_ns = static_cast<std::uint64_t>(duration_s * 1e9);
    const auto n_cells =
        static_cast<std::uint64_t>(static_cast<double>(duration_ns) / src.cell_length_ns);
    if (n_cells < 10'000)
        throw std::invalid_argument(
            "simulate_pair_source: duration must cover at least 1e4 coherence cells");

    EventStream herald{Channel::herald, duration_ns, {}};
    EventStream signal{Channel::unconverted, duration_ns, {}};

    Rng pair_rng(seed, "pair-source/correlated");
    detail::walk_occupied_cells(pair_rng, n_cells, src.mean_pairs_per_cell,
                                [&](std::uint64_t cell, std::uint64_t n) {
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto t_h = detail::place_in_cell(pair_rng, cell, src.cell_length_ns,
                                                   duration_ns);
            if (pair_rng.bernoulli(src.herald_chain_transmission))
                herald.events.push_back({t_h, Channel::herald, Origin::pair});
            const auto t_s = detail::place_in_cell(pair_rng, cell, src.cell_length_ns,
                                                   duration_ns);
            if (pair_rng.bernoulli(src.signal_chain_transmission))
                signal.events.push_back({t_s, Channel::unconverted, Origin::pair});
        }
    });

    for (int mode = 0; mode < src.background_modes; ++mode) {
        Rng bg_rng(seed, "pair-source/background", static_cast<std::uint64_t>(mode));
        detail::walk_occupied_cells(bg_rng, n_cells, src.mean_pairs_per_cell,
                                    [&](std::uint64_t cell, std::uint64_t n) {
            for (std::uint64_t i = 0; i < n; ++i) {
                const auto t = detail::place_in_cell(bg_rng, cell, src.cell_length_ns,
                                                     duration_ns);
                if (bg_rng.bernoulli(src.signal_chain_transmission))
                    signal.events.push_back({t, Channel::unconverted,
                                             Origin::background_mode});
            }
        });
    }

    herald.sort();
    signal.sort();
    return {std::move(herald), std::move(signal)};
}

/// Weak coherent pulse train: Poissonian photon number per pulse, Gaussian
/// temporal placement around each pulse center.
inline EventStream simulate_wcs(const WcsParams& w, std::uint64_t n_pulses,
                                std::uint64_t seed) {
    w.validate();
    if (n_pulses == 0) throw std::domain_error("simulate_wcs: need at least one pulse");
    const auto duration_ns =
        static_cast<std::uint64_t>(w.repetition_period_ns * static_cast<double>(n_pulses));
    EventStream out{Channel::unconverted, duration_ns, {}};
    const double sigma = w.pulse_fwhm_ns / 2.354820045030949;
    Rng rng(seed, "wcs");
    for (std::uint64_t p = 0; p < n_pulses; ++p) {
        const double center = (static_cast<double>(p) + 0.5) * w.repetition_period_ns;
        const std::uint64_t n = rng.poisson(w.mean_photons_per_pulse);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = rng.gaussian(center, sigma);
            if (t < 0.0 || t >= static_cast<double>(duration_ns)) continue;
            out.events.push_back({static_cast<std::uint64_t>(t), Channel::unconverted,
                                  Origin::pair});
        }
    }
    out.sort();
    return out;
}

/// Frequency-domain beam splitter: routes each photon to the converted output
/// with probability internal_efficiency(P). The two outputs partition the
/// input; timestamps are untouched.
inline std::pair<EventStream, EventStream> apply_frequency_beamsplitter(
    const EventStream& signal, double pump_power_w, const WaveguideParams& wg,
    std::uint64_t seed) {
    if (!signal.is_sorted())
        throw std::invalid_argument("apply_frequency_beamsplitter: input not sorted");
    const double t = internal_efficiency(pump_power_w, wg);
    EventStream converted{Channel::converted, signal.duration_ns, {}};
    EventStream unconverted{Channel::unconverted, signal.duration_ns, {}};
    Rng rng(seed, "beamsplitter");
    for (const auto& e : signal.events) {
        if (rng.bernoulli(t))
            converted.events.push_back({e.timestamp_ns, Channel::converted, e.origin});
        else
            unconverted.events.push_back({e.timestamp_ns, Channel::unconverted, e.origin});
    }
    return {std::move(converted), std::move(unconverted)};
}

enum class NoiseBranch { converted, unconverted };

/// Merges a homogeneous Poisson noise process into the stream. The rate is
/// the branch noise density at the waveguide output times the effective
/// bandwidth actually seen by the downstream filter.
inline EventStream inject_conversion_noise(const EventStream& stream, NoiseBranch branch,
                                           double pump_power_w, const WaveguideParams& wg,
                                           double effective_bandwidth_ghz,
                                           std::uint64_t seed) {
    if (effective_bandwidth_ghz <= 0)
        throw std::domain_error("inject_conversion_noise: bandwidth must be positive");
    const double density = branch == NoiseBranch::converted
                               ? telecom_noise_rate(pump_power_w, wg)
                               : backconverted_noise_rate(pump_power_w, wg);
    const double rate_hz = density * effective_bandwidth_ghz;
    if (rate_hz == 0.0) return stream;

    EventStream noise{stream.channel, stream.duration_ns, {}};
    Rng rng(seed, branch == NoiseBranch::converted ? "noise/telecom" : "noise/visible");
    double t_ns = 0.0;
    const auto horizon = static_cast<double>(stream.duration_ns);
    for (;;) {
        t_ns += rng.exponential(rate_hz) * 1e9;
        if (t_ns >= horizon) break;
        noise.events.push_back({static_cast<std::uint64_t>(t_ns), stream.channel,
                                Origin::conversion_noise});
    }
    return merge_streams(stream, noise);
}

/// Independent Bernoulli thinning.
inline EventStream apply_loss(const EventStream& stream, double transmission,
                              std::uint64_t seed) {
    if (transmission < 0 || transmission > 1)
        throw std::domain_error("apply_loss: transmission must be in [0,1]");
    EventStream out{stream.channel, stream.duration_ns, {}};
    if (transmission == 1.0) {
        out.events = stream.events;
        return out;
    }
    Rng rng(seed, "loss");
    for (const auto& e : stream.events)
        if (rng.bernoulli(transmission)) out.events.push_back(e);
    return out;
}

/// Narrow filter that passes a single source cavity mode: photons from the
/// uncorrelated background modes fall outside the passband and are dropped.
/// Insertion loss is applied separately via apply_loss.
inline EventStream select_single_mode(const EventStream& stream) {
    EventStream out{stream.channel, stream.duration_ns, {}};
    for (const auto& e : stream.events)
        if (e.origin != Origin::background_mode) out.events.push_back(e);
    return out;
}

/// Detection: efficiency thinning plus a Poisson dark-count process over the
/// full duration.
inline EventStream apply_detector(const EventStream& stream, const DetectorParams& det,
                                  double duration_s, std::uint64_t seed) {
    det.validate();
    if (duration_s <= 0) throw std::domain_error("apply_detector: duration must be positive");
    EventStream out = apply_loss(stream, det.efficiency, derive_seed(seed, "detector/thin"));
    if (det.dark_rate_hz > 0.0) {
        EventStream dark{stream.channel,
                         static_cast<std::uint64_t>(duration_s * 1e9),
                         {}};
        if (dark.duration_ns < out.duration_ns) dark.duration_ns = out.duration_ns;
        Rng rng(seed, "detector/dark");
        double t_ns = 0.0;
        const auto horizon = static_cast<double>(dark.duration_ns);
        for (;;) {
            t_ns += rng.exponential(det.dark_rate_hz) * 1e9;
            if (t_ns >= horizon) break;
            dark.events.push_back({static_cast<std::uint64_t>(t_ns), stream.channel,
                                   Origin::dark});
        }
        out = merge_streams(out, dark);
    }
    return out;
}

}  // namespace qfc
