#pragma once

// Adaptive Simpson integration. The device noise model integrates a smooth
// sin^2 integrand, so plain Simpson subdivision with the 1/15 error estimate
// converges quickly; tolerances down to 1e-12 relative are practical.

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qfc {

namespace detail {

template <class F>
double adaptive_simpson_step(F& f, double a, double b, double fa, double fm, double fb,
                             double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h = b - a;
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double refined = left + right;
    const double err = (refined - whole) / 15.0;
    if (depth <= 0 || std::abs(err) <= tol) return refined + err;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integrate f over [a, b] to the requested relative tolerance (with a small
/// absolute floor so integrals near zero terminate).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                          double abs_floor = 1e-300) {
    if (!(b >= a)) throw std::invalid_argument("integrate_adaptive: bad interval");
    if (a == b) return 0.0;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::abs(whole) * rel_tol, abs_floor);
    return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace qfc
