#pragma once

#include <functional>
#include <vector>

#include "fenelab/weights.hpp"

namespace fene {

/// Scalar field on the configuration ball.
using ScalarFn = std::function<double(const Vec2&)>;
/// Radial weight rho -> value.
using RadialFn = std::function<double(double)>;

/// Per-cell Gauss rule in the rho = b - r^2 variable. In two configuration
/// dimensions the volume element is dm = r dr dtheta = (1/2) drho dtheta, so
/// polynomial integrands in rho are integrated exactly.
struct CellQuad {
    double rho_lo, rho_hi;
    std::vector<double> pts;  ///< rho values, strictly inside (rho_lo, rho_hi)
    std::vector<double> wts;  ///< plain 1D weights on [rho_lo, rho_hi]
};

/// Boundary-graded mesh of [0, sqrt(b)]. Cell widths shrink toward r = sqrt(b)
/// when grading_exponent > 1; the last node is exactly sqrt(b).
struct RadialMesh {
    double b = 0.0;
    double grading_exponent = 1.0;
    std::vector<double> nodes;       ///< ascending radii, nodes.front() == 0
    std::vector<CellQuad> cells;     ///< cells[i] covers r in [nodes[i], nodes[i+1]]

    int n_cells() const { return static_cast<int>(nodes.size()) - 1; }
    /// rho at node i; exactly 0 at the boundary node.
    double node_rho(int i) const {
        return (i == n_cells()) ? 0.0 : b - nodes[i] * nodes[i];
    }
    double last_cell_width() const { return nodes.back() - nodes[nodes.size() - 2]; }
};

/// nodes r_i = sqrt(b) (1 - (1 - i/n)^grading_exponent); interior cells carry a
/// 6-point Gauss rule, the boundary cell a 3-point rule whose nearest point
/// stays at distance >= (cell width)/10 from r = sqrt(b).
RadialMesh build_radial_mesh(double b, int n_cells, double grading_exponent);

/// One real Fourier mode in the polar angle.
struct AngularMode {
    int freq;     ///< j in cos(j theta) / sin(j theta)
    bool is_sin;  ///< false: cos branch (freq 0 is the constant mode)
};

/// Tensor grid: graded radial mesh x real Fourier modes (N = 2).
struct ConfigGrid {
    RadialMesh radial;
    int n_angular = 16;     ///< number of Fourier modes (even, >= 2)
    int n_theta_quad = 64;  ///< trapezoid points for volume quadrature

    ConfigGrid(RadialMesh mesh, int n_ang);

    std::vector<AngularMode> modes() const;
    int max_freq() const { return n_angular / 2; }
    double b() const { return radial.b; }

    /// Angles of the volume-quadrature rule.
    std::vector<double> theta_points() const;
    /// Angles of the boundary trapezoid rule (n_angular points).
    std::vector<double> boundary_theta_points() const;
};

enum class WeightKind { One, Mu, Nu, MuStar, Mu0 };

RadialFn weight_fn(WeightKind kind, const ModelParams& params);

/// Integral over B of g(m) * weight(rho(m)) by per-cell Gauss in rho and
/// trapezoid in the angle. Weight-domain errors (mu* at rho <= 0) propagate,
/// but no constructed mesh places a quadrature point at rho = 0.
double weighted_integral(const ScalarFn& g, WeightKind kind, const ConfigGrid& grid,
                         const ModelParams& params);
double weighted_integral(const ScalarFn& g, const RadialFn& weight, const ConfigGrid& grid);

/// Integral over the boundary circle of radius sqrt(b); trapezoid rule on
/// n_angular points, exact for trigonometric polynomials of degree < n_angular/2.
double surface_integral(const ScalarFn& g, const ConfigGrid& grid);

}  // namespace fene
