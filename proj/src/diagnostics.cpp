#include "fenelab/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace fene {

double mass(const ScalarFn& f_field, const ConfigGrid& grid, const ModelParams& params) {
    return weighted_integral(f_field, WeightKind::One, grid, params);
}

double flux_rate_predicted(const BoundaryProfile& q, const ModelParams& params,
                           const ConfigGrid& grid, double t) {
    if (params.b < 2.0)
        throw std::domain_error("flux_rate_predicted: flux law asserted for b >= 2 only");
    auto qf = q.q;
    const double surf = surface_integral([&](const Vec2& m) { return qf(t, m); }, grid);
    return -0.5 * c0(params.b) * std::sqrt(params.b) * surf;
}

double flux_rate_measured(const std::vector<DiagnosticsRecord>& window) {
    if (window.size() < 3)
        throw std::invalid_argument("flux_rate_measured: need at least 3 snapshots");
    const size_t mid = window.size() / 2;
    return (window[mid + 1].mass - window[mid - 1].mass) /
           (window[mid + 1].t - window[mid - 1].t);
}

namespace {

// 12-point Gauss on [0,1]
constexpr double kGx[12] = {0.009219682876640378, 0.047941371814762571, 0.115048662902847656,
                            0.206341022856691276, 0.316084250500909903, 0.437383295744265542,
                            0.562616704255734458, 0.683915749499090097, 0.793658977143308724,
                            0.884951337097152344, 0.952058628185237429, 0.990780317123359622};
constexpr double kGw[12] = {0.023587668193255914, 0.053469662997659215, 0.080039164271673113,
                            0.101583713361532961, 0.116746268269177404, 0.124573522906701393,
                            0.124573522906701393, 0.116746268269177404, 0.101583713361532961,
                            0.080039164271673113, 0.053469662997659215, 0.023587668193255914};

}  // namespace

double shell_flux_estimate(const DiscreteForms& forms, const Vector& w_coeffs,
                           const BoundaryProfile& q, double t, const KappaMatrix& kappa,
                           int eps_cells) {
    const auto& grid = forms.grid();
    const auto& mesh = grid.radial;
    const ModelParams& params = forms.params();
    const double b = params.b;
    if (b < 2.0) throw std::domain_error("shell_flux_estimate: b >= 2 only");
    const int n = mesh.n_cells();
    if (eps_cells < 1 || eps_cells >= n)
        throw std::invalid_argument("shell_flux_estimate: bad eps_cells");
    const double sb = std::sqrt(b);
    const double eps = sb - mesh.nodes[n - eps_cells];
    const double r_lo = sb - eps, r_hi = sb - 0.5 * eps;
    const double flux_w = -c0(b);  // rho^{b/2} d/dr (nu rho^{-b/2}) = -C0 r
    const int n_theta = grid.n_theta_quad;
    const double dth = 2.0 * std::numbers::pi / n_theta;
    const double dq_h = 1e-7 * sb;

    double acc = 0.0;
    for (int g = 0; g < 12; ++g) {
        const double r = r_lo + (r_hi - r_lo) * kGx[g];
        const double wq = (r_hi - r_lo) * kGw[g];
        const double rho_r = b - r * r;
        const double nu_r = nu_weight(rho_r, params);
        for (int j = 0; j < n_theta; ++j) {
            const double th = dth * j;
            const Vec2 er(std::cos(th), std::sin(th));
            const Vec2 m = r * er;
            const double wv = forms.evaluate(w_coeffs, r, th);
            const double qv = q.q(t, m);
            const double phi = wv + qv;
            const double dq_dr =
                (q.q(t, (r + dq_h) * er) - q.q(t, (r - dq_h) * er)) / (2.0 * dq_h);
            const double dphi_dr = forms.evaluate_gradient(w_coeffs, r, th)[0] + dq_dr;
            const double f = nu_r * phi;
            // gradient of the cutoff is -2/eps e_r on the band
            const double integrand = 0.5 * nu_r * dphi_dr + 0.5 * phi * flux_w * r -
                                     f * kappa.apply(m).dot(er);
            acc += wq * integrand * r * dth;  // dm = r dr dtheta
        }
    }
    return acc * (2.0 / eps);
}

double shell_flux_richardson(const DiscreteForms& forms, const Vector& w_coeffs,
                             const BoundaryProfile& q, double t, const KappaMatrix& kappa) {
    const auto& mesh = forms.grid().radial;
    const double sb = std::sqrt(forms.params().b);
    const int n = mesh.n_cells();
    const double e2 = sb - mesh.nodes[n - 2];
    const double e4 = sb - mesh.nodes[n - 4];
    const double f2 = shell_flux_estimate(forms, w_coeffs, q, t, kappa, 2);
    const double f4 = shell_flux_estimate(forms, w_coeffs, q, t, kappa, 4);
    return (e4 * f2 - e2 * f4) / (e4 - e2);
}

namespace {

struct Window {
    int cell_lo, cell_hi;  // [lo, hi): boundary-adjacent fitting cells
};

Window fit_window(const ConfigGrid& grid, double window_fraction) {
    const int n = grid.radial.n_cells();
    const int skip = 2;
    const int count = std::max(2, static_cast<int>(std::ceil(window_fraction * n)));
    const int hi = n - skip;
    const int lo = std::max(0, hi - count);
    if (hi - lo < 2) throw std::invalid_argument("fit window too small");
    return {lo, hi};
}

}  // namespace

double decay_exponent_fit(const ScalarFn& f_field, const ConfigGrid& grid,
                          double window_fraction) {
    const auto win = fit_window(grid, window_fraction);
    const auto thetas = grid.theta_points();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npts = 0;
    for (int c = win.cell_lo; c < win.cell_hi; ++c) {
        const auto& cell = grid.radial.cells[c];
        for (double rho_q : cell.pts) {
            const double r = std::sqrt(grid.b() - rho_q);
            double mean = 0.0;
            for (double th : thetas)
                mean += f_field(Vec2(r * std::cos(th), r * std::sin(th)));
            mean /= static_cast<double>(thetas.size());
            if (!(mean > 0.0))
                throw std::runtime_error("decay_exponent_fit: f <= 0 in the fit window");
            const double x = std::log(rho_q), y = std::log(mean);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++npts;
        }
    }
    const double denom = npts * sxx - sx * sx;
    return (npts * sxy - sx * sy) / denom;
}

double window_mean(const ScalarFn& f_field, const ConfigGrid& grid, double window_fraction) {
    const auto win = fit_window(grid, window_fraction);
    const auto thetas = grid.theta_points();
    double acc = 0.0;
    int npts = 0;
    for (int c = win.cell_lo; c < win.cell_hi; ++c) {
        for (double rho_q : grid.radial.cells[c].pts) {
            const double r = std::sqrt(grid.b() - rho_q);
            for (double th : thetas) {
                acc += f_field(Vec2(r * std::cos(th), r * std::sin(th)));
                ++npts;
            }
        }
    }
    return acc / npts;
}

PositivityReport positivity_report(const FpTrajectory& traj, const DiscreteForms& forms,
                                   const BoundaryProfile& q, double tol_scale) {
    PositivityReport rep;
    bool first = true;
    for (const auto& st : traj.states) {
        const double mn = min_f_sample(forms, st.coeffs, q, st.time);
        // track the max scale from node samples as well
        const auto& mesh = forms.grid().radial;
        double mx = rep.max_abs_f;
        for (int i = 0; i <= mesh.n_cells(); ++i) {
            const double nu_i = nu_weight(mesh.node_rho(i), forms.params());
            for (double th : forms.grid().theta_points()) {
                const Vec2 m(mesh.nodes[i] * std::cos(th), mesh.nodes[i] * std::sin(th));
                mx = std::max(mx, std::abs(nu_i * (forms.evaluate(st.coeffs, mesh.nodes[i], th) +
                                                   q.q(st.time, m))));
            }
        }
        rep.max_abs_f = mx;
        if (first || mn < rep.min_f) rep.min_f = mn;
        first = false;
        if (!rep.violated && mn < -tol_scale * std::max(rep.max_abs_f, 1e-300)) {
            rep.violated = true;
            rep.first_violation_time = st.time;
        }
    }
    return rep;
}

double solution_distance(const FpTrajectory& a, const FpTrajectory& b,
                         const DiscreteForms& forms) {
    if (a.states.size() != b.states.size())
        throw std::invalid_argument("solution_distance: trajectories differ in length");
    const auto& M = forms.mass_mu();
    double best = 0.0;
    for (size_t i = 0; i < a.states.size(); ++i) {
        if (std::abs(a.states[i].time - b.states[i].time) > 1e-12)
            throw std::invalid_argument("solution_distance: time axes differ");
        if (a.states[i].coeffs.size() != b.states[i].coeffs.size())
            throw std::invalid_argument("solution_distance: grid mismatch");
        const Vector d = a.states[i].coeffs - b.states[i].coeffs;
        best = std::max(best, std::sqrt(std::max(0.0, d.dot(M * d))));
    }
    return best;
}

void export_diagnostics_csv(const std::string& path,
                            const std::vector<DiagnosticsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_diagnostics_csv: cannot open " + path);
    out.precision(17);
    out << "t,mass,min_f,l2mu,h1mu_semi,flux_rate\n";
    for (const auto& r : records)
        out << r.t << ',' << r.mass << ',' << r.min_f << ',' << r.l2mu << ',' << r.h1mu_semi
            << ',' << r.flux_rate << '\n';
}

}  // namespace fene
