#pragma once

// Least-squares recovery of device parameters from sweep data: a damped
// Gauss-Newton fit of the sin^2 efficiency curve with its analytic Jacobian,
// linear fits for the noise coefficient (first-k-points slope, and the full
// noise model which is linear in alpha_n and solved as a weighted
// projection), plus a finite-difference Jacobian checker.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfc/device_model.hpp"

namespace qfc {

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dataset {
    struct Point {
        double x = 0.0;
        double y = 0.0;
        std::optional<double> sigma;
    };
    std::vector<Point> points;

    bool has_sigmas() const {
        return !points.empty() && points.front().sigma.has_value();
    }
    void validate(std::size_t min_points) const {
        if (points.size() < min_points)
            throw fit_error("Dataset: needs at least " + std::to_string(min_points) +
                            " points");
        for (const auto& p : points)
            if (p.sigma && *p.sigma <= 0.0)
                throw fit_error("Dataset: sigmas must be positive");
    }
};

struct FitResult {
    std::vector<std::string> parameter_names;
    std::vector<double> parameters;
    std::vector<double> std_errors;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct FitOptions {
    int max_iterations = 200;
    double param_tol = 1e-10;
    double gradient_tol = 1e-12;
    // accepted-step residual norms; exposed for the monotonicity property
    std::vector<double>* trace = nullptr;
};

/// Efficiency model eta(P) = eta_max sin^2(L sqrt(eta_n P)) and its analytic
/// Jacobian with respect to (eta_max, eta_n).
inline double efficiency_model(double pump_w, double length_cm,
                               std::span<const double, 2> p) {
    const double s = std::sin(length_cm * std::sqrt(std::max(p[1], 0.0) * pump_w));
    return p[0] * s * s;
}

inline std::array<double, 2> efficiency_model_jacobian(double pump_w, double length_cm,
                                                       std::span<const double, 2> p) {
    const double eta_n = std::max(p[1], 0.0);
    const double u = length_cm * std::sqrt(eta_n * pump_w);
    const double s = std::sin(u);
    std::array<double, 2> j{s * s, 0.0};
    if (eta_n > 0.0 && pump_w > 0.0)
        j[1] = p[0] * std::sin(2.0 * u) * u / (2.0 * eta_n);
    return j;
}

namespace detail {

struct NormalEq2 {
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
};

inline bool solve2(const NormalEq2& n, double lambda, double& dx, double& dy) {
    const double a11 = n.a11 * (1.0 + lambda);
    const double a22 = n.a22 * (1.0 + lambda);
    const double det = a11 * a22 - n.a12 * n.a12;
    if (!(std::abs(det) > 1e-300)) return false;
    dx = (n.b1 * a22 - n.b2 * n.a12) / det;
    dy = (n.b2 * a11 - n.b1 * n.a12) / det;
    return std::isfinite(dx) && std::isfinite(dy);
}

}  // namespace detail

/// Fits (eta_max, eta_n) to efficiency-vs-pump data by damped Gauss-Newton
/// with the analytic Jacobian. Multiplicative damping: x10 on a rejected
/// step, /10 on an accepted one. Initial guess defaults to eta_max = max(y)
/// and eta_n from small-angle linearization over the first quarter of the
/// sweep. Non-convergence is reported through FitResult.converged with the
/// best parameters found.
inline FitResult fit_efficiency_curve(const Dataset& data, double length_cm,
                                      std::optional<std::array<double, 2>> init = {},
                                      const FitOptions& opt = {}) {
    data.validate(2);
    if (length_cm <= 0) throw std::domain_error("fit_efficiency_curve: length must be positive");
    double xmax = 0.0;
    for (const auto& p : data.points) xmax = std::max(xmax, p.x);
    if (xmax <= 0.0)
        throw fit_error("fit_efficiency_curve: all pump powers are zero, parameters not identifiable");
    {
        // data indistinguishable from a line through the origin stays in the
        // quadratic regime, where only the product eta_max * eta_n is fixed
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (const auto& d : data.points) {
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        const double c = sxx > 0 ? sxy / sxx : 0.0;
        double res = 0.0;
        for (const auto& d : data.points) res += (d.y - c * d.x) * (d.y - c * d.x);
        if (syy > 0 && std::sqrt(res / syy) < 3e-3)
            throw fit_error(
                "fit_efficiency_curve: data does not reach the nonlinear part of the "
                "sin^2 rise; eta_max and eta_n are not separable");
    }

    std::array<double, 2> p{};
    if (init) {
        p = *init;
    } else {
        double ymax = 0.0;
        for (const auto& d : data.points) ymax = std::max(ymax, d.y);
        p[0] = std::clamp(ymax, 1e-3, 1.0);
        // small-angle: y ~ eta_max eta_n L^2 P over the first quarter
        double sxx = 0.0, sxy = 0.0;
        for (const auto& d : data.points)
            if (d.x <= 0.25 * xmax) {
                sxx += d.x * d.x;
                sxy += d.x * d.y;
            }
        const double slope = sxx > 0 ? sxy / sxx : 0.0;
        p[1] = std::max(slope / (p[0] * length_cm * length_cm), 1e-3);
    }
    {
        bool constrained = false;
        for (const auto& d : data.points)
            if (length_cm * std::sqrt(std::max(p[1], 0.0) * d.x) > 0.5) constrained = true;
        if (!constrained)
            throw fit_error(
                "fit_efficiency_curve: no point reaches 0.5 rad of the sin^2 argument "
                "at the initial guess");
    }

    auto weight = [&](const Dataset::Point& d) {
        return d.sigma ? 1.0 / (*d.sigma * *d.sigma) : 1.0;
    };
    auto chi2 = [&](std::span<const double, 2> q) {
        double s = 0.0;
        for (const auto& d : data.points) {
            const double r = d.y - efficiency_model(d.x, length_cm, q);
            s += weight(d) * r * r;
        }
        return s;
    };

    FitResult out;
    out.parameter_names = {"eta_max", "eta_n"};
    double lambda = 1e-3;
    double cost = chi2(p);
    if (opt.trace) opt.trace->push_back(std::sqrt(cost));
    bool converged = false;
    int iter = 0;
    for (; iter < opt.max_iterations && !converged; ++iter) {
        detail::NormalEq2 n;
        for (const auto& d : data.points) {
            const double w = weight(d);
            const auto j = efficiency_model_jacobian(d.x, length_cm, p);
            const double r = d.y - efficiency_model(d.x, length_cm, p);
            n.a11 += w * j[0] * j[0];
            n.a12 += w * j[0] * j[1];
            n.a22 += w * j[1] * j[1];
            n.b1 += w * j[0] * r;
            n.b2 += w * j[1] * r;
        }
        const double grad_norm = std::hypot(n.b1, n.b2);
        if (grad_norm < opt.gradient_tol) {
            converged = true;
            break;
        }
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            double d0, d1;
            if (!detail::solve2(n, lambda, d0, d1)) {
                lambda *= 10.0;
                continue;
            }
            std::array<double, 2> cand{p[0] + d0, p[1] + d1};
            const double cand_cost =
                std::isfinite(cand[0]) && std::isfinite(cand[1]) && cand[1] > 0.0
                    ? chi2(cand)
                    : std::numeric_limits<double>::infinity();
            if (std::isfinite(cand_cost) && cand_cost <= cost) {
                const double rel = std::max(std::abs(d0) / std::max(std::abs(p[0]), 1e-30),
                                            std::abs(d1) / std::max(std::abs(p[1]), 1e-30));
                p = cand;
                cost = cand_cost;
                lambda = std::max(lambda / 10.0, 1e-14);
                accepted = true;
                if (opt.trace) opt.trace->push_back(std::sqrt(cost));
                if (rel < opt.param_tol) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) break;  // stalled; report best-so-far
    }

    out.parameters = {p[0], p[1]};
    out.residual_norm = std::sqrt(cost);
    out.converged = converged;
    out.iterations = iter;

    // linearized covariance at the solution
    detail::NormalEq2 n;
    for (const auto& d : data.points) {
        const double w = weight(d);
        const auto j = efficiency_model_jacobian(d.x, length_cm, p);
        n.a11 += w * j[0] * j[0];
        n.a12 += w * j[0] * j[1];
        n.a22 += w * j[1] * j[1];
    }
    const double det = n.a11 * n.a22 - n.a12 * n.a12;
    if (det > 0.0) {
        const double scale =
            data.has_sigmas() || data.points.size() <= 2
                ? 1.0
                : cost / (static_cast<double>(data.points.size()) - 2.0);
        out.std_errors = {std::sqrt(std::max(n.a22 / det * scale, 0.0)),
                          std::sqrt(std::max(n.a11 / det * scale, 0.0))};
    } else {
        out.std_errors = {0.0, 0.0};
    }
    return out;
}

/// Ordinary least squares through the origin on the first k points of a
/// pump-sorted noise sweep; returns alpha_n in counts/s/mW/cm/THz (data: x in
/// W, y in counts/s/GHz at the waveguide output).
inline std::pair<double, double> fit_noise_slope(const Dataset& data, int k_points,
                                                 double length_cm) {
    if (k_points < 2) throw std::invalid_argument("fit_noise_slope: need k >= 2");
    if (static_cast<std::size_t>(k_points) > data.points.size())
        throw std::invalid_argument("fit_noise_slope: k exceeds data length");
    if (length_cm <= 0) throw std::domain_error("fit_noise_slope: length must be positive");
    if (!std::is_sorted(data.points.begin(), data.points.end(),
                        [](const auto& a, const auto& b) { return a.x < b.x; }))
        throw std::invalid_argument("fit_noise_slope: data must be sorted by pump power");
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < k_points; ++i) {
        sxx += data.points[i].x * data.points[i].x;
        sxy += data.points[i].x * data.points[i].y;
    }
    if (sxx == 0.0) return {0.0, 0.0};
    const double slope = sxy / sxx;  // counts/s/GHz per W
    double ss = 0.0;
    for (int i = 0; i < k_points; ++i) {
        const double r = data.points[i].y - slope * data.points[i].x;
        ss += r * r;
    }
    const double slope_var = k_points > 2 ? ss / (k_points - 1.0) / sxx : 0.0;
    // y = alpha * P_W * L  =>  alpha = slope / L (the mW->W and THz->GHz
    // factors cancel)
    return {slope / length_cm, std::sqrt(slope_var) / length_cm};
}

/// One-parameter fit of the full back-conversion noise model. The model is
/// linear in alpha_n, so the weighted projection is the exact least-squares
/// solution.
inline std::pair<double, double> fit_noise_model(const Dataset& data,
                                                 const WaveguideParams& wg) {
    data.validate(1);
    WaveguideParams unit = wg;
    unit.alpha_n = 1.0;
    double sgg = 0.0, sgy = 0.0;
    for (const auto& d : data.points) {
        const double g = telecom_noise_rate(d.x, unit);
        const double w = d.sigma ? 1.0 / (*d.sigma * *d.sigma) : 1.0;
        sgg += w * g * g;
        sgy += w * g * d.y;
    }
    if (sgg == 0.0)
        throw fit_error("fit_noise_model: model vanishes on all points, alpha_n not identifiable");
    const double alpha = sgy / sgg;
    double ss = 0.0;
    for (const auto& d : data.points) {
        const double w = d.sigma ? 1.0 / (*d.sigma * *d.sigma) : 1.0;
        const double r = d.y - alpha * telecom_noise_rate(d.x, unit);
        ss += w * r * r;
    }
    const double var = data.points.size() > 1
                           ? ss / (static_cast<double>(data.points.size()) - 1.0) / sgg
                           : 0.0;
    return {alpha, std::sqrt(var)};
}

/// Dataset CSV: header "x,y" or "x,y,sigma", plain numbers in the caller's
/// unit convention.
inline Dataset dataset_from_csv(std::istream& is) {
    Dataset d;
    std::string line;
    if (!std::getline(is, line) || (line != "x,y" && line != "x,y,sigma"))
        throw std::runtime_error("dataset CSV: header must be 'x,y' or 'x,y,sigma'");
    const bool with_sigma = line == "x,y,sigma";
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        Dataset::Point p;
        char comma = 0;
        if (!(row >> p.x >> comma >> p.y) || comma != ',')
            throw std::runtime_error("dataset CSV: malformed row: " + line);
        if (with_sigma) {
            double s = 0.0;
            if (!(row >> comma >> s) || comma != ',')
                throw std::runtime_error("dataset CSV: missing sigma: " + line);
            p.sigma = s;
        }
        d.points.push_back(p);
    }
    return d;
}

inline void dataset_to_csv(std::ostream& os, const Dataset& d) {
    os << (d.has_sigmas() ? "x,y,sigma\n" : "x,y\n");
    char buf[96];
    for (const auto& p : d.points) {
        if (p.sigma)
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", p.x, p.y, *p.sigma);
        else
            std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.x, p.y);
        os << buf;
    }
}

/// Worst relative deviation between an analytic Jacobian and central finite
/// differences (step 1e-6 relative) over the given abscissae.
template <class Model, class Jacobian>
double jacobian_check(Model&& model, Jacobian&& jac, std::span<const double> params,
                      std::span<const double> xs) {
    std::vector<double> p(params.begin(), params.end());
    double worst = 0.0;
    for (const double x : xs) {
        const auto analytic = jac(x, std::span<const double>(p));
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double h = 1e-6 * std::max(std::abs(p[k]), 1e-12);
            const double saved = p[k];
            p[k] = saved + h;
            const double fp = model(x, std::span<const double>(p));
            p[k] = saved - h;
            const double fm = model(x, std::span<const double>(p));
            p[k] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double denom = std::max(std::abs(analytic[k]), std::abs(fd)) + 1e-9;
            worst = std::max(worst, std::abs(analytic[k] - fd) / denom);
        }
    }
    return worst;
}

}  // namespace qfc
