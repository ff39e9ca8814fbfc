#include "fenelab/geometry.hpp"

#include <cmath>
#include <numbers>

namespace fene {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kG3x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kG3w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
constexpr double kG6x[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                            0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr double kG6w[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                            0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

CellQuad make_cell(double rho_lo, double rho_hi, bool boundary_cell) {
    CellQuad c;
    c.rho_lo = rho_lo;
    c.rho_hi = rho_hi;
    const double mid = 0.5 * (rho_lo + rho_hi);
    const double half = 0.5 * (rho_hi - rho_lo);
    const int n = boundary_cell ? 3 : 6;
    const double* x = boundary_cell ? kG3x : kG6x;
    const double* w = boundary_cell ? kG3w : kG6w;
    for (int q = 0; q < n; ++q) {
        c.pts.push_back(mid + half * x[q]);
        c.wts.push_back(half * w[q]);
    }
    return c;
}

}  // namespace

RadialMesh build_radial_mesh(double b, int n_cells, double grading_exponent) {
    if (n_cells < 4) throw std::invalid_argument("build_radial_mesh: n_cells must be >= 4");
    if (grading_exponent < 1.0)
        throw std::invalid_argument("build_radial_mesh: grading_exponent must be >= 1");
    if (!(b > 0.0)) throw std::invalid_argument("build_radial_mesh: b must be positive");

    RadialMesh mesh;
    mesh.b = b;
    mesh.grading_exponent = grading_exponent;
    const double sb = std::sqrt(b);
    mesh.nodes.resize(n_cells + 1);
    mesh.nodes[0] = 0.0;
    mesh.nodes[n_cells] = sb;
    for (int i = 1; i < n_cells; ++i) {
        const double s = 1.0 - static_cast<double>(i) / n_cells;
        mesh.nodes[i] = sb * (1.0 - std::pow(s, grading_exponent));
    }
    for (int i = 0; i + 1 <= n_cells; ++i) {
        if (!(mesh.nodes[i] < mesh.nodes[i + 1]))
            throw std::runtime_error("build_radial_mesh: nodes not strictly increasing");
    }
    mesh.cells.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        const double rho_hi = b - mesh.nodes[i] * mesh.nodes[i];
        const double rho_lo = (i + 1 == n_cells) ? 0.0 : b - mesh.nodes[i + 1] * mesh.nodes[i + 1];
        mesh.cells[i] = make_cell(rho_lo, rho_hi, i + 1 == n_cells);
    }
    return mesh;
}

ConfigGrid::ConfigGrid(RadialMesh mesh, int n_ang) : radial(std::move(mesh)), n_angular(n_ang) {
    if (n_angular < 2 || n_angular % 2 != 0)
        throw std::invalid_argument("ConfigGrid: n_angular must be even and >= 2");
    n_theta_quad = std::max(64, 4 * n_angular);
}

std::vector<AngularMode> ConfigGrid::modes() const {
    std::vector<AngularMode> m;
    m.push_back({0, false});
    int f = 1;
    while (static_cast<int>(m.size()) < n_angular) {
        m.push_back({f, false});
        if (static_cast<int>(m.size()) < n_angular) m.push_back({f, true});
        ++f;
    }
    return m;
}

std::vector<double> ConfigGrid::theta_points() const {
    std::vector<double> t(n_theta_quad);
    for (int j = 0; j < n_theta_quad; ++j)
        t[j] = 2.0 * std::numbers::pi * j / n_theta_quad;
    return t;
}

std::vector<double> ConfigGrid::boundary_theta_points() const {
    std::vector<double> t(n_angular);
    for (int j = 0; j < n_angular; ++j) t[j] = 2.0 * std::numbers::pi * j / n_angular;
    return t;
}

RadialFn weight_fn(WeightKind kind, const ModelParams& params) {
    switch (kind) {
        case WeightKind::One: return [](double) { return 1.0; };
        case WeightKind::Mu: return [params](double r) { return mu_weight(r, params); };
        case WeightKind::Nu: return [params](double r) { return nu_weight(r, params); };
        case WeightKind::MuStar:
            return [params](double r) { return mu_star_weight(r, params); };
        case WeightKind::Mu0: return [params](double r) { return mu0_weight(r, params); };
    }
    throw std::logic_error("weight_fn: unknown kind");
}

double weighted_integral(const ScalarFn& g, WeightKind kind, const ConfigGrid& grid,
                         const ModelParams& params) {
    return weighted_integral(g, weight_fn(kind, params), grid);
}

double weighted_integral(const ScalarFn& g, const RadialFn& weight, const ConfigGrid& grid) {
    const double b = grid.b();
    const auto thetas = grid.theta_points();
    const double dtheta = 2.0 * std::numbers::pi / grid.n_theta_quad;
    double total = 0.0;
    for (const auto& cell : grid.radial.cells) {
        for (size_t q = 0; q < cell.pts.size(); ++q) {
            const double rho_q = cell.pts[q];
            const double r = std::sqrt(b - rho_q);
            const double wq = 0.5 * cell.wts[q] * weight(rho_q);
            double ang = 0.0;
            for (double th : thetas) ang += g(Vec2(r * std::cos(th), r * std::sin(th)));
            total += wq * ang * dtheta;
        }
    }
    return total;
}

double surface_integral(const ScalarFn& g, const ConfigGrid& grid) {
    const double sb = std::sqrt(grid.b());
    double sum = 0.0;
    for (double th : grid.boundary_theta_points())
        sum += g(Vec2(sb * std::cos(th), sb * std::sin(th)));
    return sum * 2.0 * std::numbers::pi * sb / grid.n_angular;
}

}  // namespace fene
