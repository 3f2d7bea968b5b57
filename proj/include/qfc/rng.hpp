#pragma once

// Deterministic random streams for the event simulator. Every operation draws
// from its own substream derived from (master seed, label, index), so results
// do not depend on the order in which operations run. All distributions are
// hand-rolled on top of a single uniform source to keep output bit-identical
// across platforms and standard libraries.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace qfc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Substream seed for one operation invocation.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
    std::uint64_t s = master ^ hash_label(label);
    std::uint64_t mixed = splitmix64(s);
    s ^= mixed + 0x9E3779B97F4A7C15ULL * (index + 1);
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        splitmix64(state_);
    }
    Rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0)
        : Rng(derive_seed(master, label, index)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log argument.
    double uniform_pos() { return 1.0 - uniform01(); }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    /// Exponential waiting time, mean 1/rate.
    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double gaussian(double mean, double sigma) {
        if (!have_spare_) {
            double u1 = uniform_pos();
            double u2 = uniform01();
            double r = std::sqrt(-2.0 * std::log(u1));
            double a = 6.283185307179586476925286766559 * u2;
            spare_ = r * std::sin(a);
            have_spare_ = true;
            return mean + sigma * r * std::cos(a);
        }
        have_spare_ = false;
        return mean + sigma * spare_;
    }

    /// Poisson count by inversion; means above 64 are split so the
    /// exp() product never underflows.
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::domain_error("poisson: negative mean");
        if (mean == 0.0) return 0;
        std::uint64_t n = 0;
        while (mean > 64.0) {
            n += poisson_small(64.0);
            mean -= 64.0;
        }
        return n + poisson_small(mean);
    }

    /// Thermal (geometric) photon number with the given mean occupancy.
    std::uint64_t thermal(double mean) {
        if (mean < 0.0) throw std::domain_error("thermal: negative mean");
        if (mean == 0.0) return 0;
        const double q = mean / (1.0 + mean);  // P(n >= 1)
        double u = uniform_pos();
        if (u > q) return 0;
        // P(n = k | n >= 1) = (1-q) q^(k-1); reuse u, uniform on (0, q]
        return 1 + static_cast<std::uint64_t>(std::log(u / q) / std::log(q));
    }

    /// Failures before the first success in Bernoulli(p) trials.
    std::uint64_t geometric_gap(double p) {
        if (p <= 0.0) throw std::domain_error("geometric_gap: p must be positive");
        if (p >= 1.0) return 0;
        return static_cast<std::uint64_t>(std::log(uniform_pos()) / std::log1p(-p));
    }

private:
    std::uint64_t poisson_small(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace qfc
