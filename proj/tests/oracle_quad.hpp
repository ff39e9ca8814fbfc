#pragma once

// Test-side integration oracles, kept independent of the library's quadrature
// paths: adaptive Simpson in 1D and a dense polar product rule in 2D.

#include <cmath>
#include <functional>
#include <numbers>

#include "fenelab/weights.hpp"

namespace oracle {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson on [a, b].
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-11, int depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Radial integral over the disk of radius sqrt(b): int_B F(rho) dm = pi int_0^b F drho.
/// Integrands with endpoint singularities get a geometric split near rho = 0.
inline double disk_radial(const std::function<double(double)>& F, double b,
                          double tol = 1e-11) {
    double total = 0.0;
    double lo = 1e-13 * b;
    const double first = integrate_1d(F, lo, b, tol);
    // geometric refinement toward the boundary rho -> 0
    double hi = lo;
    double tail = 0.0;
    double step = lo;
    for (int k = 0; k < 40 && hi > 1e-300; ++k) {
        const double next = hi * 0.25;
        tail += integrate_1d(F, next, hi, tol * 0.01);
        hi = next;
        (void)step;
    }
    total = first + tail;
    return std::numbers::pi * total;
}

/// Full 2D integral over the disk with a dense tensor rule (trapezoid in the
/// angle, adaptive radial): int_B f(m) w(rho) dm.
inline double disk_integral(const std::function<double(const fene::Vec2&)>& f,
                            const std::function<double(double)>& w, double b,
                            int n_theta = 256, double tol = 1e-10) {
    const double dth = 2.0 * std::numbers::pi / n_theta;
    auto radial = [&](double rho) {
        const double r = std::sqrt(b - rho);
        double s = 0.0;
        for (int j = 0; j < n_theta; ++j) {
            const double th = dth * j;
            s += f(fene::Vec2(r * std::cos(th), r * std::sin(th)));
        }
        return 0.5 * s * dth * w(rho);
    };
    double total = integrate_1d(radial, 1e-12 * b, b, tol);
    double hi = 1e-12 * b;
    for (int k = 0; k < 30 && hi > 1e-300; ++k) {
        const double next = hi * 0.25;
        total += integrate_1d(radial, next, hi, tol * 0.01);
        hi = next;
    }
    return total;
}

}  // namespace oracle
