#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "fenelab/fp_solver.hpp"

using namespace fene;
using Catch::Approx;

namespace {

ConfigGrid desk_grid(double b, int cells = 24, int modes = 8) {
    return ConfigGrid(build_radial_mesh(b, cells, 2.0), modes);
}

Vector smooth_zero_trace(const DiscreteForms& forms, unsigned seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double b = forms.params().b;
    const double a0 = u(rng), a1 = u(rng), a2 = u(rng), a3 = u(rng);
    return forms.interpolate([=](const Vec2& m) {
        const double s = rho(m, b) / b;
        const double th = std::atan2(m[1], m[0]);
        const double rr = m.norm() / std::sqrt(b);
        return amp * s * (a0 + a1 * s + a2 * rr * std::cos(th) + a3 * rr * rr * std::sin(2 * th));
    });
}

}  // namespace

TEST_CASE("zero state with zero source stays zero", "[fp_solver]") {
    ModelParams p(3.0);
    auto grid = desk_grid(3.0, 12, 4);
    DiscreteForms forms(grid, p);
    const Vector h = Vector::Zero(forms.layout().total);
    WState w{Vector::Zero(forms.layout().total), 0.0};
    auto w1 = step(w, 1e-2, forms, KappaMatrix::shear(1.0), h, h);
    CHECK(w1.coeffs.norm() == 0.0);
    CHECK(w1.time == Approx(1e-2));
}

TEST_CASE("T = 0 returns the initial state only", "[fp_solver]") {
    ModelParams p(2.0);
    auto grid = desk_grid(2.0, 12, 4);
    DiscreteForms forms(grid, p);
    const Vector w0 = smooth_zero_trace(forms, 3);
    auto traj = solve_fp(w0, BoundaryProfile::zero(), [](double) { return KappaMatrix::zero(); },
                         0.0, 1e-3, forms);
    REQUIRE(traj.states.size() == 1);
    CHECK((traj.states[0].coeffs - w0).norm() == 0.0);
}

TEST_CASE("sub-critical equilibrium is exactly steady", "[fp_solver]") {
    // b < 2: f = rho^{b/2} lives entirely in q = 1, w = 0
    ModelParams p(1.0);
    auto grid = desk_grid(1.0, 16, 6);
    DiscreteForms forms(grid, p);
    const Vector w0 = Vector::Zero(forms.layout().total);
    auto traj = solve_fp(w0, BoundaryProfile::constant(1.0),
                         [](double) { return KappaMatrix::zero(); }, 0.05, 1e-3, forms);
    for (const auto& st : traj.states) CHECK(st.coeffs.norm() < 1e-8);
    // mass stays at the equilibrium mass
    const double m0 = traj.records.front().mass;
    for (const auto& r : traj.records) CHECK(r.mass == Approx(m0).epsilon(1e-10));
}

TEST_CASE("super-critical equilibrium is steady and conserves mass", "[fp_solver]") {
    for (double b : {2.0, 3.0, 4.0}) {
        ModelParams p(b);
        auto grid = desk_grid(b, 24, 6);
        DiscreteForms forms(grid, p);
        const Vector w0 = forms.equilibrium_coeffs();
        REQUIRE(w0.norm() > 0.0);
        auto traj = solve_fp(w0, BoundaryProfile::zero(),
                             [](double) { return KappaMatrix::zero(); }, 0.05, 1e-3, forms);
        const double scale = w0.norm();
        CHECK((traj.back().coeffs - w0).norm() < 1e-10 * scale);
        const double m0 = traj.records.front().mass;
        for (const auto& r : traj.records) CHECK(std::abs(r.mass - m0) < 1e-10 * std::abs(m0));
    }
}

TEST_CASE("mass conserved under shear for b >= 2", "[fp_solver]") {
    for (double b : {2.0, 3.0, 4.0}) {
        ModelParams p(b);
        auto grid = desk_grid(b, 24, 8);
        DiscreteForms forms(grid, p);
        Vector w0 = forms.equilibrium_coeffs() + smooth_zero_trace(forms, 11, 0.2);
        auto kp = [](double t) { return KappaMatrix::shear(1.0 + 0.3 * std::sin(3.0 * t)); };
        auto traj = solve_fp(w0, BoundaryProfile::zero(), kp, 0.1, 1e-3, forms);
        const double m0 = traj.records.front().mass;
        for (const auto& r : traj.records) CHECK(std::abs(r.mass - m0) <= 1e-10 * std::abs(m0));
    }
}

TEST_CASE("reconstructed f matches the equilibrium profile", "[fp_solver]") {
    // w = 0, q = 1, b < 2 -> f = rho^{b/2}
    ModelParams p(1.0);
    auto grid = desk_grid(1.0, 12, 4);
    DiscreteForms forms(grid, p);
    auto f = reconstruct_f(forms, Vector::Zero(forms.layout().total),
                           BoundaryProfile::constant(1.0), 0.0);
    for (double r : {0.0, 0.3, 0.7, 0.9}) {
        const Vec2 m(r, 0.1);
        CHECK(f(m) == Approx(std::pow(rho(m, 1.0), 0.5)).epsilon(1e-12));
    }
    // w = 0, q = 0 -> f = 0
    auto f0 = reconstruct_f(forms, Vector::Zero(forms.layout().total),
                            BoundaryProfile::zero(), 0.0);
    CHECK(f0(Vec2(0.2, 0.4)) == 0.0);
    // b = 4, w + q = 1 -> f = rho
    ModelParams p4(4.0);
    auto grid4 = desk_grid(4.0, 12, 4);
    DiscreteForms forms4(grid4, p4);
    auto f4 = reconstruct_f(forms4, Vector::Zero(forms4.layout().total),
                            BoundaryProfile::constant(1.0), 0.0);
    CHECK(f4(Vec2(1.0, 0.5)) == Approx(4.0 - 1.25).epsilon(1e-12));
}

TEST_CASE("second-order self convergence in dt", "[fp_solver]") {
    ModelParams p(3.0);
    auto grid = desk_grid(3.0, 16, 4);
    DiscreteForms forms(grid, p);
    const Vector w0 = forms.equilibrium_coeffs() + smooth_zero_trace(forms, 17, 0.5);
    auto kp = [](double t) { return KappaMatrix::shear(std::cos(2.0 * t)); };
    auto run = [&](double dt) {
        return solve_fp(w0, BoundaryProfile::zero(), kp, 0.2, dt, forms).back().coeffs;
    };
    const Vector a = run(4e-3), b2 = run(2e-3), c = run(1e-3);
    const double e1 = (a - c).norm(), e2 = (b2 - c).norm();
    // errors vs the dt reference shrink ~4x when dt halves (ratio (4-1)/(1-...) ~ 4)
    CHECK(e1 / e2 == Approx(4.0).margin(1.2));
}

TEST_CASE("solver is linear in initial data and source", "[fp_solver]") {
    ModelParams p(2.0);
    auto grid = desk_grid(2.0, 16, 6);
    DiscreteForms forms(grid, p);
    auto kp = [](double) { return KappaMatrix::extensional(0.5); };
    const Vector wa = smooth_zero_trace(forms, 21);
    const Vector wb = smooth_zero_trace(forms, 22);
    auto qa = BoundaryProfile::constant(0.7);
    auto ra = solve_fp(wa, qa, kp, 0.05, 1e-3, forms).back().coeffs;
    auto rb = solve_fp(wb, BoundaryProfile::zero(), kp, 0.05, 1e-3, forms).back().coeffs;
    auto rab = solve_fp(wa + wb, qa, kp, 0.05, 1e-3, forms).back().coeffs;
    CHECK((rab - ra - rb).norm() < 1e-10 * (ra.norm() + rb.norm()));
}

TEST_CASE("positivity preserved from smooth nonnegative data", "[fp_solver]") {
    for (double b : {1.0, 2.0, 4.0}) {
        ModelParams p(b);
        auto grid = desk_grid(b, 24, 8);
        DiscreteForms forms(grid, p);
        std::mt19937_64 rng(501 + static_cast<unsigned>(b));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double a1 = u(rng), a2 = u(rng);
        // w0 = zero-trace square of a smooth field -> f0 = nu (w0 + q) >= 0, q >= 0
        const Vector w0 = forms.interpolate([=](const Vec2& m) {
            const double g = 0.6 + a1 * m[0] / std::sqrt(b) + a2 * m[1] * m[1] / b;
            return (rho(m, b) / b) * g * g;
        });
        auto q = BoundaryProfile::constant(0.5);
        auto traj = solve_fp(w0, q, [](double) { return KappaMatrix::shear(0.5); }, 0.1, 1e-3,
                             forms);
        double min_f = 0.0;
        for (const auto& r : traj.records) min_f = std::min(min_f, r.min_f);
        const double scale = std::abs(mass_of(forms, w0, q, 0.0)) + 1.0;
        CHECK(min_f >= -1e-8 * scale);
    }
}

TEST_CASE("negative initial data detected at t = 0", "[fp_solver]") {
    ModelParams p(2.0);
    auto grid = desk_grid(2.0, 12, 4);
    DiscreteForms forms(grid, p);
    const Vector w0 = forms.interpolate([](const Vec2& m) { return -1.0 + m[0] * 0.1; });
    const double mn = min_f_sample(forms, w0, BoundaryProfile::zero(), 0.0);
    CHECK(mn < 0.0);
}

TEST_CASE("relaxation toward the equilibrium projection is monotone", "[fp_solver]") {
    ModelParams p(4.0);
    auto grid = desk_grid(4.0, 24, 6);
    DiscreteForms forms(grid, p);
    const Vector geq = forms.equilibrium_coeffs();
    const Vector w0 = geq + smooth_zero_trace(forms, 77, 0.3);
    auto traj = solve_fp(w0, BoundaryProfile::zero(), [](double) { return KappaMatrix::zero(); },
                         0.2, 2e-3, forms);
    const auto& M = forms.mass_mu();
    const double gnorm = geq.dot(M * geq);
    double prev = 1e300;
    bool monotone = true;
    for (size_t i = 1; i < traj.states.size(); ++i) {
        const Vector& w = traj.states[i].coeffs;
        const Vector d = w - (w.dot(M * geq) / gnorm) * geq;
        const double dist = std::sqrt(d.dot(M * d));
        if (dist > prev * (1.0 + 1e-12)) monotone = false;
        prev = dist;
    }
    CHECK(monotone);
}

TEST_CASE("discrete coercivity with a fitted constant", "[fp_solver]") {
    // 1/4 |grad w|^2_mu <= B[w,w] + C (1+|kappa|^2) |w|^2_mu over random samples
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double b : {1.0, 2.0, 3.0}) {
        ModelParams p(b);
        auto grid = desk_grid(b, 16, 6);
        DiscreteForms forms(grid, p);
        const auto& M = forms.mass_mu();
        const auto& S = forms.stiffness();
        double C_fit = 0.0;
        std::vector<KappaMatrix> kappas = {KappaMatrix::zero(), KappaMatrix::shear(1.0),
                                           KappaMatrix::from_entries(u(rng), u(rng), u(rng),
                                                                     u(rng))};
        for (const auto& kap : kappas) {
            const SpMat B = forms.bilinear(kap);
            const double k2 = 1.0 + kap.frobenius() * kap.frobenius();
            for (int s = 0; s < 50; ++s) {
                Vector w(forms.layout().total);
                for (int i = 0; i < w.size(); ++i) w[i] = u(rng);
                const double grad = 0.5 * w.dot((2.0 * S) * w);  // 1/4 |grad w|^2
                const double bw = w.dot(B * w);
                const double mw = w.dot(M * w);
                C_fit = std::max(C_fit, (grad - bw) / (k2 * mw));
            }
        }
        // re-check on fresh samples
        for (const auto& kap : kappas) {
            const SpMat B = forms.bilinear(kap);
            const double k2 = 1.0 + kap.frobenius() * kap.frobenius();
            for (int s = 0; s < 50; ++s) {
                Vector w(forms.layout().total);
                for (int i = 0; i < w.size(); ++i) w[i] = u(rng);
                CHECK(0.5 * w.dot(2.0 * S * w) <=
                      w.dot(B * w) + (C_fit * 1.5 + 1.0) * k2 * w.dot(M * w));
            }
        }
        // b < 2, kappa = 0: C = 0 works (B[w,w] = 1/2 |grad w|^2 exactly)
        if (b < 2.0) {
            const SpMat B0 = forms.bilinear(KappaMatrix::zero());
            for (int s = 0; s < 20; ++s) {
                Vector w(forms.layout().total);
                for (int i = 0; i < w.size(); ++i) w[i] = u(rng);
                CHECK(0.25 * w.dot(2.0 * S * w) <= w.dot(B0 * w) * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}

TEST_CASE("a-priori energy bound along trajectories", "[fp_solver]") {
    // Crank-Nicolson energy identity: the discrete Gronwall envelope built from
    // the fitted coercivity constant dominates the trajectory.
    ModelParams p(3.0);
    auto grid = desk_grid(3.0, 16, 6);
    DiscreteForms forms(grid, p);
    DualNorm dual(forms);
    const double dt = 1e-3, T = 0.1;
    auto kp = [](double t) { return KappaMatrix::shear(std::sin(5.0 * t)); };
    auto q = BoundaryProfile::constant(0.5);
    const Vector w0 = smooth_zero_trace(forms, 33);
    auto traj = solve_fp(w0, q, kp, T, dt, forms);

    // fitted coercivity constant over the kappa range of the run
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double C_fit = 0.0;
    const auto& M = forms.mass_mu();
    const auto& S = forms.stiffness();
    for (double t = 0.0; t < T; t += 10 * dt) {
        const auto kap = kp(t);
        const SpMat B = forms.bilinear(kap);
        const double k2 = 1.0 + kap.frobenius() * kap.frobenius();
        for (int s = 0; s < 20; ++s) {
            Vector w(forms.layout().total);
            for (int i = 0; i < w.size(); ++i) w[i] = u(rng);
            C_fit = std::max(C_fit, (0.5 * w.dot(2.0 * S * w) - w.dot(B * w)) /
                                        (k2 * w.dot(M * w)));
        }
    }
    C_fit = std::max(C_fit, 0.0);

    // envelope recursion per step with sigma = 2 C (1+|kappa|^2) + 1/2
    const int n = static_cast<int>(traj.states.size());
    double env = w0.dot(M * w0);
    double grad_acc = 0.0;
    bool ok = true;
    for (int s = 0; s + 1 < n; ++s) {
        const double t_mid = traj.states[s].time + 0.5 * dt;
        const auto kap = kp(t_mid);
        const double k2 = 1.0 + kap.frobenius() * kap.frobenius();
        const double sigma = 2.0 * C_fit * k2 + 0.5;
        auto qf = q.q;
        auto qtf = q.qt;
        const Vector h = forms.source_from_q(
            kap, [&](const Vec2& m) { return qf(traj.states[s].time, m); },
            [&](const Vec2& m) { return qtf(traj.states[s].time, m); });
        const double hn = dual(h);
        const Vector mid = 0.5 * (traj.states[s].coeffs + traj.states[s + 1].coeffs);
        grad_acc += 0.25 * dt * mid.dot(2.0 * S * mid);
        env = (env * (1.0 + 0.5 * dt * sigma) + 4.0 * dt * hn * hn) /
              (1.0 - 0.5 * dt * sigma);
        const double lhs = traj.states[s + 1].coeffs.dot(M * traj.states[s + 1].coeffs);
        if (lhs + grad_acc > env * (1.0 + 1e-9) + 1e-12) ok = false;
    }
    CHECK(ok);
}

TEST_CASE("alt-theta first-order term is nonnegative on discrete samples", "[fp_solver]") {
    ModelParams p(6.0, 2, 0.5);
    auto grid = desk_grid(6.0, 20, 6);
    DiscreteForms forms(grid, p);
    const auto& T0 = forms.alt_first_order();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 40; ++s) {
        Vector w(forms.layout().total);
        for (int i = 0; i < w.size(); ++i) w[i] = u(rng);
        const double norm2 = w.dot(forms.mass_mu() * w);
        CHECK(w.dot(T0 * w) >= -1e-10 * std::max(1.0, norm2));
    }
}

TEST_CASE("trajectory CSV export", "[fp_solver]") {
    ModelParams p(2.0);
    auto grid = desk_grid(2.0, 8, 4);
    DiscreteForms forms(grid, p);
    auto traj = solve_fp(smooth_zero_trace(forms, 9), BoundaryProfile::zero(),
                         [](double) { return KappaMatrix::zero(); }, 0.01, 5e-3, forms);
    const auto path = std::filesystem::temp_directory_path() / "fenelab_traj_test.csv";
    export_trajectory_csv(path.string(), traj, forms, BoundaryProfile::zero());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,r,theta,w,f");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == static_cast<int>(traj.states.size()) * 9 * 4);
    std::filesystem::remove(path);
}
