#pragma once

// Closed-form device physics of the waveguide frequency converter: pump-power
// dependent conversion efficiency, parametric noise generation with
// back-conversion along the remaining waveguide length, the mu1 noise figure
// (input photons per pulse for SNR = 1), and the correlation degradation a
// noisy converter imposes on a heralded source.
//
// Unit policy: powers in W, lengths in cm (matching eta_n in W^-1 cm^-2),
// times in seconds, spectral densities per GHz. Conversions happen at the
// boundary only. alpha_n is stored in counts s^-1 mW^-1 cm^-1 per THz of
// bandwidth, the convention the noise coefficient is usually quoted in.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "qfc/quadrature.hpp"

namespace qfc {

/// Signal / converted / pump wavelengths of the mixing process.
struct ChannelSpec {
    double signal_wavelength_nm = 606.0;
    double converted_wavelength_nm = 1552.0;
    double pump_wavelength_nm = 994.0;

    /// Checks positivity and energy conservation of the difference-frequency
    /// process (1/l_c = 1/l_s - 1/l_p within 0.1%).
    void validate() const {
        if (signal_wavelength_nm <= 0 || converted_wavelength_nm <= 0 ||
            pump_wavelength_nm <= 0)
            throw std::domain_error("ChannelSpec: wavelengths must be positive");
        const double expected = 1.0 / signal_wavelength_nm - 1.0 / pump_wavelength_nm;
        const double actual = 1.0 / converted_wavelength_nm;
        if (expected <= 0 ||
            std::abs(expected - actual) > 1e-3 * actual)
            throw std::domain_error(
                "ChannelSpec: wavelengths violate energy conservation");
    }
};

struct WaveguideParams {
    double length_cm = 1.4;
    double eta_max = 0.95;          // peak internal conversion efficiency
    double eta_n = 0.861;           // normalized efficiency, W^-1 cm^-2
    double alpha_n = 76.0e3;        // noise coefficient, counts/s/mW/cm/THz

    void validate() const {
        if (length_cm <= 0) throw std::domain_error("WaveguideParams: length must be positive");
        if (eta_max < 0 || eta_max > 1)
            throw std::domain_error("WaveguideParams: eta_max must be in [0,1]");
        if (eta_n <= 0) throw std::domain_error("WaveguideParams: eta_n must be positive");
        if (alpha_n < 0) throw std::domain_error("WaveguideParams: alpha_n must be >= 0");
    }
};

/// Optical losses between the source fiber and the converted-photon fiber.
struct LossBudget {
    double signal_transmission = 0.93;
    double waveguide_coupling = 0.57;
    double filter_transmission = 0.62;
    double fiber_coupling = 0.79;

    double product() const {
        return signal_transmission * waveguide_coupling * filter_transmission *
               fiber_coupling;
    }
    void validate() const {
        for (double v : {signal_transmission, waveguide_coupling, filter_transmission,
                         fiber_coupling})
            if (v <= 0 || v > 1)
                throw std::domain_error("LossBudget: transmissions must be in (0,1]");
    }
};

/// A spectral filter reduced to a single effective passband.
struct FilterSpec {
    double bandwidth_ghz = 0.21;
    double transmission = 0.95;

    void validate() const {
        if (bandwidth_ghz <= 0) throw std::domain_error("FilterSpec: bandwidth must be positive");
        if (transmission <= 0 || transmission > 1)
            throw std::domain_error("FilterSpec: transmission must be in (0,1]");
    }
};

namespace detail {
inline void require_nonnegative_pump(double pump_power_w) {
    if (pump_power_w < 0.0)
        throw std::domain_error("pump power must be non-negative");
}
}  // namespace detail

/// Internal conversion efficiency eta_max * sin^2(L sqrt(eta_n P)).
inline double internal_efficiency(double pump_power_w, const WaveguideParams& wg) {
    detail::require_nonnegative_pump(pump_power_w);
    const double arg = wg.length_cm * std::sqrt(wg.eta_n * pump_power_w);
    const double s = std::sin(arg);
    return wg.eta_max * s * s;
}

/// Pump power of the first efficiency maximum, (pi / 2L)^2 / eta_n.
inline double first_maximum_pump_power(const WaveguideParams& wg) {
    const double u = 1.5707963267948966192313216916398 / wg.length_cm;
    return u * u / wg.eta_n;
}

/// Internal efficiency times the full loss budget.
inline double device_efficiency(double pump_power_w, const WaveguideParams& wg,
                                const LossBudget& losses) {
    return internal_efficiency(pump_power_w, wg) * losses.product();
}

namespace detail {

// Integral over the waveguide of the chosen survival/conversion weight for
// noise photons born at position x with remaining length L - x.
template <class Weight>
double noise_length_integral(double pump_power_w, const WaveguideParams& wg, Weight w) {
    const double k = std::sqrt(wg.eta_n * pump_power_w);
    auto integrand = [&](double x) {
        const double s = std::sin((wg.length_cm - x) * k);
        return w(wg.eta_max * s * s);
    };
    return integrate_adaptive(integrand, 0.0, wg.length_cm, 1e-12);
}

// counts/s/GHz from the per-THz, per-mW noise coefficient
inline double noise_rate_scale(double pump_power_w, const WaveguideParams& wg) {
    const double pump_mw = pump_power_w * 1e3;
    return wg.alpha_n * pump_mw * 1e-3;  // THz -> GHz
}

}  // namespace detail

/// Parametric noise surviving to the telecom output, counts/s/GHz at the
/// waveguide output. Noise born at x is depleted by conversion over the
/// remaining length; evaluated by adaptive quadrature.
inline double telecom_noise_rate(double pump_power_w, const WaveguideParams& wg) {
    detail::require_nonnegative_pump(pump_power_w);
    if (pump_power_w == 0.0) return 0.0;
    const double integral = detail::noise_length_integral(
        pump_power_w, wg, [](double conv) { return 1.0 - conv; });
    return detail::noise_rate_scale(pump_power_w, wg) * integral;
}

/// Noise photons sum-frequency converted to the visible branch, counts/s/GHz.
/// Complements telecom_noise_rate: the two sum to alpha_n * P * L.
inline double backconverted_noise_rate(double pump_power_w, const WaveguideParams& wg) {
    detail::require_nonnegative_pump(pump_power_w);
    if (pump_power_w == 0.0) return 0.0;
    const double integral = detail::noise_length_integral(
        pump_power_w, wg, [](double conv) { return conv; });
    return detail::noise_rate_scale(pump_power_w, wg) * integral;
}

/// Mean input photons per pulse that yield SNR = 1 at the converter output.
/// Noise photons inside the effective passband pass the filter chain and
/// fiber; the signal is referred back to the device input through the device
/// efficiency. Detector efficiency cancels and is excluded.
inline double mu1_model(double pump_power_w, const WaveguideParams& wg,
                        const LossBudget& losses, const FilterSpec& filter,
                        double extra_filter_transmission, double window_s) {
    if (pump_power_w <= 0.0)
        throw std::domain_error("mu1_model: pump power must be positive");
    if (window_s <= 0.0) throw std::domain_error("mu1_model: window must be positive");
    const double eff = device_efficiency(pump_power_w, wg, losses);
    // sin^2 nodes land within rounding of zero, never exactly on it
    if (eff < 1e-12)
        throw std::domain_error("mu1_model: device efficiency vanishes at this pump power");
    const double noise_per_window = telecom_noise_rate(pump_power_w, wg) *
                                    filter.bandwidth_ghz * filter.transmission *
                                    extra_filter_transmission * losses.fiber_coupling *
                                    window_s;
    return noise_per_window / eff;
}

/// SNR of converted light for a given mean input photon number per pulse.
inline double snr(double mean_input_photons, double pump_power_w,
                  const WaveguideParams& wg, const LossBudget& losses,
                  const FilterSpec& filter, double extra_filter_transmission,
                  double window_s) {
    if (mean_input_photons < 0.0)
        throw std::domain_error("snr: mean input photons must be >= 0");
    return mean_input_photons /
           mu1_model(pump_power_w, wg, losses, filter, extra_filter_transmission,
                     window_s);
}

/// Cross-correlation of the converted photon with its herald, given the
/// source cross-correlation, the heralding efficiency at the device input and
/// the converter's mu1. Monotone in mu1, bounded by [1, g2_source].
inline double predicted_g2_converted(double g2_source, double herald_efficiency,
                                     double mu1) {
    if (g2_source < 1.0) throw std::domain_error("predicted_g2_converted: g2_source < 1");
    if (herald_efficiency <= 0.0 || herald_efficiency > 1.0)
        throw std::domain_error("predicted_g2_converted: herald efficiency not in (0,1]");
    if (mu1 <= 0.0) throw std::domain_error("predicted_g2_converted: mu1 must be positive");
    const double x = herald_efficiency / mu1;
    return g2_source * (x + 1.0) / (x + g2_source);
}

/// Splitting ratio of the frequency-domain beam splitter: (converted,
/// unconverted) probabilities, summing to one. Losses apply downstream.
inline std::pair<double, double> beamsplitter_ratio(double pump_power_w,
                                                    const WaveguideParams& wg) {
    const double t = internal_efficiency(pump_power_w, wg);
    return {t, 1.0 - t};
}

}  // namespace qfc
