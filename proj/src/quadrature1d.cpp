#include "fenelab/quadrature1d.hpp"

#include <cmath>

namespace fene {

namespace {

// Gauss-Kronrod 7-15 pair on [-1, 1]; even nodes form the embedded Gauss-7 rule.
constexpr double kXgk[15] = {
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691, -0.7415311855993945,
    -0.5860872354676911, -0.4058451513773972, -0.2077849550078985, 0.0,
    0.2077849550078985,  0.4058451513773972,  0.5860872354676911,  0.7415311855993945,
    0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
constexpr double kWk[15] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
    0.1047900103222502, 0.0630920926299786, 0.0229353220105292};
constexpr double kWg[7] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                           0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
                           0.1294849661688697};

struct GkResult {
    double value;
    double error;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fx = f(mid + half * kXgk[i]);
        kron += kWk[i] * fx;
        if (i % 2 == 1) gauss += kWg[i / 2] * fx;
    }
    kron *= half;
    gauss *= half;
    return {kron, std::abs(kron - gauss)};
}

double recurse(const std::function<double(double)>& f, double a, double b, double abs_tol,
               double rel_tol, int depth, const GkResult& whole) {
    if (whole.error <= abs_tol + rel_tol * std::abs(whole.value) || depth <= 0 ||
        !(b - a > 1e-300))
        return whole.value;
    const double mid = 0.5 * (a + b);
    const GkResult left = gk15(f, a, mid);
    const GkResult right = gk15(f, mid, b);
    return recurse(f, a, mid, 0.5 * abs_tol, rel_tol, depth - 1, left) +
           recurse(f, mid, b, 0.5 * abs_tol, rel_tol, depth - 1, right);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    const GkResult whole = gk15(f, a, b);
    return recurse(f, a, b, abs_tol, rel_tol, max_depth, whole);
}

}  // namespace fene
