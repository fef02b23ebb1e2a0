#pragma once

// Test-only numerical oracles: adaptive Simpson quadrature (plain and
// log-domain) and tail-safe normal distribution helpers. Independent of the
// library's asymptotic formulas by construction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace lnt_test {

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / 2.5066282746310005024;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730951); }

/// log Phi(z), usable far into the left tail where erfc underflows.
inline double log_normal_cdf(double z) {
    if (z > -36.0) return std::log(normal_cdf(z));
    const double z2 = z * z;
    // Mills-type expansion: Phi(z) = phi(z)/|z| (1 - 1/z^2 + 3/z^4 - ...)
    return -0.5 * z2 - std::log(-z) - 0.91893853320467274178 +
           std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole, double tol,
                       int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, m, fa, flm, fm);
    const double right = simpson(f, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10, int depth = 48) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, b, fa, fm, fb);
    const double scale = std::max(std::abs(whole), 1e-300);
    return detail::adaptive(f, a, b, fa, fm, fb, whole, rel_tol * scale, depth);
}

/// log of the integral of exp(log_f) over [a, b]: scans a coarse grid for the
/// maximum, then integrates the shifted integrand adaptively.
inline double log_integrate(const std::function<double(double)>& log_f, double a, double b,
                            double rel_tol = 1e-9) {
    const int grid = 4000;
    double peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        peak = std::max(peak, log_f(a + (b - a) * i / grid));
    }
    if (peak == -std::numeric_limits<double>::infinity()) return peak;
    auto g = [&](double t) {
        const double l = log_f(t);
        return std::isfinite(l) ? std::exp(l - peak) : 0.0;
    };
    const double integral = integrate(g, a, b, rel_tol);
    return peak + std::log(integral);
}

}  // namespace lnt_test
