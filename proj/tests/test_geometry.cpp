#include <catch2/catch_amalgamated.hpp>

#include "fenelab/geometry.hpp"
#include "oracle_quad.hpp"

using namespace fene;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("mesh construction", "[geometry]") {
    auto mesh = build_radial_mesh(4.0, 4, 1.0);
    REQUIRE(mesh.nodes.size() == 5);
    CHECK(mesh.nodes[0] == 0.0);
    CHECK(mesh.nodes[1] == Approx(0.5).margin(1e-15));
    CHECK(mesh.nodes[2] == Approx(1.0).margin(1e-15));
    CHECK(mesh.nodes[3] == Approx(1.5).margin(1e-15));
    CHECK(mesh.nodes[4] == 2.0);

    auto graded = build_radial_mesh(4.0, 8, 2.0);
    CHECK(graded.nodes.back() == 2.0);
    const auto& n = graded.nodes;
    // widths decrease toward the boundary
    for (size_t i = 0; i + 2 < n.size(); ++i)
        CHECK(n[i + 2] - n[i + 1] < n[i + 1] - n[i]);

    CHECK_THROWS_AS(build_radial_mesh(4.0, 3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_radial_mesh(4.0, 8, 0.5), std::invalid_argument);

    // all quadrature points strictly interior, distance >= last width / 10
    for (double grading : {1.0, 2.0, 3.0}) {
        auto m = build_radial_mesh(3.0, 24, grading);
        double min_rho = 1e300;
        for (const auto& c : m.cells)
            for (double p : c.pts) {
                CHECK(p > 0.0);
                min_rho = std::min(min_rho, p);
            }
        const double hw = m.last_cell_width();
        const double r_closest = std::sqrt(3.0 - min_rho);
        CHECK(std::sqrt(3.0) - r_closest >= hw / 10.0 * (1.0 - 1e-12));
    }
}

TEST_CASE("weighted integrals against closed forms", "[geometry]") {
    ModelParams p3(3.0);
    ConfigGrid grid(build_radial_mesh(3.0, 96, 3.0), 16);
    // int_B mu dm, b=3: 2 pi sqrt(3)
    const double exact = 2.0 * kPi * std::sqrt(3.0);
    CHECK(weighted_integral([](const Vec2&) { return 1.0; }, WeightKind::Mu, grid, p3) ==
          Approx(exact).epsilon(1e-9));
    // oracle cross-check
    const double via_oracle =
        oracle::disk_radial([&](double rho) { return mu_weight(rho, p3); }, 3.0);
    CHECK(via_oracle == Approx(exact).epsilon(1e-9));

    // area of disk radius 2
    ModelParams p4(4.0);
    ConfigGrid grid4(build_radial_mesh(4.0, 32, 2.0), 16);
    CHECK(weighted_integral([](const Vec2&) { return 1.0; }, WeightKind::One, grid4, p4) ==
          Approx(4.0 * kPi).epsilon(1e-12));

    // equilibrium profile mass, b=2: pi b^{b/2+1}/(b/2+1) = 2 pi
    ModelParams p2(2.0);
    ConfigGrid grid2(build_radial_mesh(2.0, 64, 2.0), 16);
    const double got = weighted_integral(
        [&](const Vec2& m) { return std::pow(rho(m, 2.0), 1.0); }, WeightKind::One, grid2, p2);
    CHECK(got == Approx(2.0 * kPi).epsilon(1e-10));
    CHECK(oracle::disk_radial([](double r) { return r; }, 2.0) ==
          Approx(2.0 * kPi).epsilon(1e-10));
}

TEST_CASE("quadrature of rho powers with harmonics", "[geometry]") {
    const double b = 3.0;
    ModelParams p(b);
    ConfigGrid grid(build_radial_mesh(b, 32, 2.0), 16);
    for (int k = 0; k <= 3; ++k) {
        // int rho^k dm = pi b^{k+1}/(k+1)
        const double exact = kPi * std::pow(b, k + 1) / (k + 1);
        const double got = weighted_integral(
            [&](const Vec2& m) { return std::pow(rho(m, b), k); }, WeightKind::One, grid, p);
        CHECK(got == Approx(exact).epsilon(1e-10));
        // angular harmonic makes it vanish
        const double got2 = weighted_integral(
            [&](const Vec2& m) {
                const double th = std::atan2(m[1], m[0]);
                return std::pow(rho(m, b), k) * std::cos(2.0 * th);
            },
            WeightKind::One, grid, p);
        CHECK(std::abs(got2) < 1e-10);
    }
}

TEST_CASE("refinement convergence of smooth weighted integrals", "[geometry]") {
    // order >= 4 in radial cell count for smooth integrands
    ModelParams p(4.0);
    auto value = [&](int n) {
        ConfigGrid grid(build_radial_mesh(4.0, n, 2.0), 8);
        return weighted_integral(
            [](const Vec2& m) { return std::exp(-m.squaredNorm()) + m[0] * m[0]; },
            WeightKind::Mu, grid, p);
    };
    const double v32 = value(32), v64 = value(64), v128 = value(128);
    const double e1 = std::abs(v32 - v128), e2 = std::abs(v64 - v128);
    if (e2 > 1e-14) {
        const double order = std::log2(e1 / e2);
        CHECK(order >= 4.0);
    }
    // mu* evaluation never faults on constructed meshes
    ModelParams p3(3.0);
    ConfigGrid g3(build_radial_mesh(3.0, 48, 2.0), 8);
    CHECK_NOTHROW(weighted_integral([](const Vec2&) { return 1.0; }, WeightKind::MuStar, g3, p3));
}

TEST_CASE("surface integrals", "[geometry]") {
    ModelParams p(4.0);
    ConfigGrid grid(build_radial_mesh(4.0, 8, 1.0), 16);
    CHECK(surface_integral([](const Vec2&) { return 1.0; }, grid) ==
          Approx(4.0 * kPi).epsilon(1e-13));
    CHECK(std::abs(surface_integral(
              [](const Vec2& m) { return m[0] / m.norm(); }, grid)) < 1e-12);
    const double qbar = 2.75;
    CHECK(surface_integral([&](const Vec2&) { return qbar; }, grid) ==
          Approx(qbar * 2.0 * kPi * 2.0).epsilon(1e-13));
}
