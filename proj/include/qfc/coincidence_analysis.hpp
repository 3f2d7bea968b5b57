#pragma once

// Estimators turning event streams into figures of merit: windowed
// coincidence counting, normalized cross-correlation, the triple-coincidence
// heralded autocorrelation with its herald-separation histogram, and the mu1
// extraction from an SNR sweep. Estimators only read timestamps; provenance
// tags are invisible to them.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfc/events.hpp"

namespace qfc {

/// Raised when an estimate is undefined on the given data (e.g. no singles).
struct estimator_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct G2Result {
    double value = 0.0;
    double std_error = 0.0;   // Poisson counting statistics only
    std::uint64_t coincidences = 0;
    std::uint64_t singles_a = 0;
    std::uint64_t singles_b = 0;
    std::int64_t window_ns = 0;
};

/// Pairs (t_a, t_b) with t_b - t_a - offset in [0, window). Two-pointer sweep,
/// O(|a| + |b|) since both bounds advance monotonically.
inline std::uint64_t count_coincidences(const EventStream& a, const EventStream& b,
                                        std::int64_t window_ns, std::int64_t offset_ns) {
    if (window_ns <= 0) throw std::invalid_argument("count_coincidences: window must be positive");
    if (!a.is_sorted() || !b.is_sorted())
        throw std::invalid_argument("count_coincidences: streams must be sorted");
    std::uint64_t count = 0;
    std::size_t lo = 0, hi = 0;
    for (const auto& ea : a.events) {
        const auto ta = static_cast<std::int64_t>(ea.timestamp_ns);
        const std::int64_t begin = ta + offset_ns;
        const std::int64_t end = begin + window_ns;
        while (lo < b.events.size() &&
               static_cast<std::int64_t>(b.events[lo].timestamp_ns) < begin)
            ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.events.size() &&
               static_cast<std::int64_t>(b.events[hi].timestamp_ns) < end)
            ++hi;
        count += hi - lo;
    }
    return count;
}

/// Coincidence-window convention. `grid` partitions the run into
/// non-overlapping windows and correlates per-window counts; `sliding` counts
/// event pairs within +-window/2 of each other. The grid convention
/// reproduces the per-cell moment formulas the source oracles are built on.
enum class WindowMode { grid, sliding };

/// Normalized cross-correlation g2 = N_ab * M / (N_a * N_b) with M trials of
/// one window each.
inline G2Result g2_cross(const EventStream& a, const EventStream& b,
                         std::int64_t window_ns, double duration_s,
                         WindowMode mode = WindowMode::grid) {
    if (window_ns <= 0) throw std::invalid_argument("g2_cross: window must be positive");
    if (duration_s <= 0) throw std::invalid_argument("g2_cross: duration must be positive");
    if (!a.is_sorted() || !b.is_sorted())
        throw std::invalid_argument("g2_cross: streams must be sorted");
    const auto duration_ns = static_cast<std::int64_t>(duration_s * 1e9);

    std::uint64_t n_ab = 0, n_a = 0, n_b = 0;
    double trials = 0.0;
    if (mode == WindowMode::grid) {
        const std::uint64_t m = static_cast<std::uint64_t>(duration_ns / window_ns);
        if (m == 0) throw std::invalid_argument("g2_cross: duration shorter than window");
        trials = static_cast<double>(m);
        std::size_t ia = 0, ib = 0;
        for (std::uint64_t bin = 0; bin < m; ++bin) {
            const std::uint64_t end = (bin + 1) * static_cast<std::uint64_t>(window_ns);
            std::uint64_t ca = 0, cb = 0;
            while (ia < a.events.size() && a.events[ia].timestamp_ns < end) ++ia, ++ca;
            while (ib < b.events.size() && b.events[ib].timestamp_ns < end) ++ib, ++cb;
            n_a += ca;
            n_b += cb;
            n_ab += ca * cb;
        }
    } else {
        n_a = a.events.size();
        n_b = b.events.size();
        n_ab = count_coincidences(a, b, window_ns, -window_ns / 2);
        trials = static_cast<double>(duration_ns) / static_cast<double>(window_ns);
    }
    if (n_a == 0 || n_b == 0)
        throw estimator_error("g2_cross: no singles on one channel, estimate undefined");

    G2Result r;
    r.coincidences = n_ab;
    r.singles_a = n_a;
    r.singles_b = n_b;
    r.window_ns = window_ns;
    r.value = static_cast<double>(n_ab) * trials /
              (static_cast<double>(n_a) * static_cast<double>(n_b));
    r.std_error = n_ab > 0 ? r.value / std::sqrt(static_cast<double>(n_ab)) : 0.0;
    return r;
}

/// Cross-check normalization for g2: zero-offset coincidences against the
/// accidental level measured at a far offset (several windows away), instead
/// of the duration/window trial count.
inline G2Result g2_cross_accidentals(const EventStream& a, const EventStream& b,
                                     std::int64_t window_ns,
                                     std::int64_t accidental_offset_ns) {
    if (std::llabs(accidental_offset_ns) < 2 * window_ns)
        throw std::invalid_argument(
            "g2_cross_accidentals: accidental offset must clear the correlation window");
    const std::uint64_t peak = count_coincidences(a, b, window_ns, -window_ns / 2);
    const std::uint64_t accidental =
        count_coincidences(a, b, window_ns, accidental_offset_ns - window_ns / 2);
    if (accidental == 0)
        throw estimator_error("g2_cross_accidentals: no accidental coincidences");
    G2Result r;
    r.coincidences = peak;
    r.singles_a = a.events.size();
    r.singles_b = b.events.size();
    r.window_ns = window_ns;
    r.value = static_cast<double>(peak) / static_cast<double>(accidental);
    r.std_error = r.value * std::sqrt(1.0 / static_cast<double>(std::max<std::uint64_t>(peak, 1)) +
                                      1.0 / static_cast<double>(accidental));
    return r;
}

/// Triple coincidences sorted by how many heralds separate the two output
/// detections; bin 0 holds same-herald triples.
struct TripleHistogram {
    static constexpr int max_separation = 10;
    std::vector<std::uint64_t> bins = std::vector<std::uint64_t>(max_separation + 1, 0);
    std::uint64_t herald_total = 0;
};

struct HeraldedG2 {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t heralds_with_out1 = 0;
    std::uint64_t heralds_with_out2 = 0;
    TripleHistogram histogram;
};

/// Heralded autocorrelation g2 = N_h * N_12 / (N_1 * N_2) over windows
/// centered on each herald. N_1/N_2 count heralds with a detection in one
/// output, N_12 heralds with detections in both (histogram bin 0).
inline HeraldedG2 heralded_g2(const EventStream& herald, const EventStream& out1,
                              const EventStream& out2, std::int64_t window_ns) {
    if (window_ns <= 0) throw std::invalid_argument("heralded_g2: window must be positive");
    if (!herald.is_sorted() || !out1.is_sorted() || !out2.is_sorted())
        throw std::invalid_argument("heralded_g2: streams must be sorted");
    if (herald.empty()) throw estimator_error("heralded_g2: empty herald stream");

    auto heralds_with_click = [&](const EventStream& out) {
        std::vector<std::uint64_t> hit;
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 0; i < herald.events.size(); ++i) {
            const auto t = static_cast<std::int64_t>(herald.events[i].timestamp_ns);
            const std::int64_t begin = t - window_ns / 2;
            const std::int64_t end = begin + window_ns;
            while (lo < out.events.size() &&
                   static_cast<std::int64_t>(out.events[lo].timestamp_ns) < begin)
                ++lo;
            if (hi < lo) hi = lo;
            while (hi < out.events.size() &&
                   static_cast<std::int64_t>(out.events[hi].timestamp_ns) < end)
                ++hi;
            if (hi > lo) hit.push_back(i);
        }
        return hit;
    };

    const auto hit1 = heralds_with_click(out1);
    const auto hit2 = heralds_with_click(out2);
    if (hit1.empty() || hit2.empty())
        throw estimator_error("heralded_g2: an output has no heralded detections");

    HeraldedG2 r;
    r.histogram.herald_total = herald.events.size();
    r.heralds_with_out1 = hit1.size();
    r.heralds_with_out2 = hit2.size();

    // herald-index separations |i - j| up to the histogram depth
    std::size_t lo = 0;
    for (const std::uint64_t i : hit1) {
        while (lo < hit2.size() &&
               hit2[lo] + TripleHistogram::max_separation < i)
            ++lo;
        for (std::size_t j = lo; j < hit2.size(); ++j) {
            const std::uint64_t k = hit2[j] > i ? hit2[j] - i : i - hit2[j];
            if (k > TripleHistogram::max_separation) {
                if (hit2[j] > i) break;
                continue;
            }
            ++r.histogram.bins[static_cast<std::size_t>(k)];
        }
    }

    const double n_h = static_cast<double>(herald.events.size());
    const double n12 = static_cast<double>(r.histogram.bins[0]);
    r.value = n_h * n12 /
              (static_cast<double>(hit1.size()) * static_cast<double>(hit2.size()));
    r.std_error = n12 > 0 ? r.value / std::sqrt(n12) : 0.0;
    return r;
}

/// Least-squares line through the origin on (mean input photons, SNR) points;
/// mu1 is the inverse slope.
inline std::pair<double, double> extract_mu1(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2)
        throw std::invalid_argument("extract_mu1: need at least two points");
    double xmin = points.front().first, xmax = points.front().first;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        sxx += x * x;
        sxy += x * y;
    }
    if (xmin <= 0 || xmax / xmin < 5.0)
        throw std::invalid_argument("extract_mu1: inputs must span at least a factor 5");
    const double slope = sxy / sxx;
    if (slope <= 0.0) throw estimator_error("extract_mu1: non-positive slope, no signal");
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
        const double r = y - slope * x;
        ss_res += r * r;
    }
    const double slope_var = ss_res / (static_cast<double>(points.size()) - 1.0) / sxx;
    const double mu1 = 1.0 / slope;
    const double mu1_err = std::sqrt(slope_var) / (slope * slope);
    return {mu1, mu1_err};
}

/// CSV helpers (documented headers, stable column order).
inline std::string g2_csv_header() {
    return "value,std_error,coincidences,singles_a,singles_b,window_ns";
}
inline std::string to_csv_row(const G2Result& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%llu,%llu,%llu,%lld", r.value, r.std_error,
                  static_cast<unsigned long long>(r.coincidences),
                  static_cast<unsigned long long>(r.singles_a),
                  static_cast<unsigned long long>(r.singles_b),
                  static_cast<long long>(r.window_ns));
    return buf;
}
inline std::string to_csv(const TripleHistogram& h) {
    std::string out = "bin,count\n";
    for (std::size_t k = 0; k < h.bins.size(); ++k)
        out += std::to_string(k) + "," + std::to_string(h.bins[k]) + "\n";
    return out;
}

}  // namespace qfc
