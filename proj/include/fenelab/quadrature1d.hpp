#pragma once

#include <functional>

namespace fene {

/// Adaptive Gauss-Kronrod (7-15) integration of f on [a, b].
/// Splits recursively until the local error estimate meets
/// abs_tol + rel_tol * |integral|; max_depth bounds the recursion.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-12, double rel_tol = 1e-12, int max_depth = 48);

}  // namespace fene
