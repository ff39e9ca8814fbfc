#include "fenelab/analysis_lab.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <random>

#include "fenelab/quadrature1d.hpp"

namespace fene {

namespace {

AnalyticField rho_power(double b, double k, std::string label) {
    return {[b, k](const Vec2& m) { return std::pow(rho(m, b), k); },
            [b, k](const Vec2& m) {
                return Vec2(-2.0 * k * std::pow(rho(m, b), k - 1.0) * m);
            },
            std::move(label)};
}

// Re/Im((m1 + i m2)^j) and gradients
double harmonic(const Vec2& m, int j, bool imag) {
    const std::complex<double> z(m[0], m[1]);
    const auto zj = std::pow(z, j);
    return imag ? zj.imag() : zj.real();
}
Vec2 harmonic_grad(const Vec2& m, int j, bool imag) {
    if (j == 0) return Vec2::Zero();
    const std::complex<double> z(m[0], m[1]);
    const auto zj1 = static_cast<double>(j) * std::pow(z, j - 1);
    return imag ? Vec2(zj1.imag(), zj1.real()) : Vec2(zj1.real(), -zj1.imag());
}

}  // namespace

TestFunctionFamily TestFunctionFamily::radial_powers(double b, int kmin, int kmax) {
    TestFunctionFamily fam;
    for (int k = kmin; k <= kmax; ++k)
        fam.members.push_back(rho_power(b, k, "rho^" + std::to_string(k)));
    fam.zero_trace = kmin >= 1;
    return fam;
}

TestFunctionFamily TestFunctionFamily::power_harmonics(double b, int kmax, int jmax) {
    TestFunctionFamily fam;
    for (int k = 1; k <= kmax; ++k)
        for (int j = 0; j <= jmax; ++j)
            for (int im = 0; im <= (j > 0 ? 1 : 0); ++im) {
                const double kk = k;
                fam.members.push_back(
                    {[b, kk, j, im](const Vec2& m) {
                         return std::pow(rho(m, b), kk) * harmonic(m, j, im != 0);
                     },
                     [b, kk, j, im](const Vec2& m) {
                         const double rk = std::pow(rho(m, b), kk);
                         const double h = harmonic(m, j, im != 0);
                         return Vec2(-2.0 * kk * std::pow(rho(m, b), kk - 1.0) * h * m +
                                     rk * harmonic_grad(m, j, im != 0));
                     },
                     "rho^" + std::to_string(k) + "*h" + std::to_string(j) +
                         (im ? "s" : "c")});
            }
    fam.zero_trace = true;
    return fam;
}

TestFunctionFamily TestFunctionFamily::bumps(double b, const std::vector<double>& centers_rho,
                                             double width_factor) {
    TestFunctionFamily fam;
    for (double c : centers_rho) {
        const double w = width_factor * c;
        fam.members.push_back(
            {[b, c, w](const Vec2& m) {
                 const double s = (rho(m, b) - c) / w;
                 if (std::abs(s) >= 1.0) return 0.0;
                 return std::exp(1.0 - 1.0 / (1.0 - s * s));
             },
             [b, c, w](const Vec2& m) {
                 const double s = (rho(m, b) - c) / w;
                 if (std::abs(s) >= 1.0) return Vec2(Vec2::Zero());
                 const double e = std::exp(1.0 - 1.0 / (1.0 - s * s));
                 const double d = 1.0 - s * s;
                 const double dds = -2.0 * s / (d * d);
                 return Vec2(e * dds / w * (-2.0) * m);
             },
             "bump@" + std::to_string(c)});
    }
    fam.zero_trace = true;
    return fam;
}

TestFunctionFamily TestFunctionFamily::with_trace(double b, int kmax) {
    TestFunctionFamily fam;
    fam.members.push_back({[](const Vec2&) { return 1.0; },
                           [](const Vec2&) { return Vec2(Vec2::Zero()); }, "const"});
    for (int k = 1; k <= kmax; ++k) {
        auto p = rho_power(b, k, "rho^" + std::to_string(k) + "+1");
        auto pv = p.value;
        auto pg = p.grad;
        fam.members.push_back(
            {[pv](const Vec2& m) { return pv(m) + 1.0; }, pg, p.label});
    }
    fam.zero_trace = false;
    return fam;
}

TestFunctionFamily TestFunctionFamily::mu_inverse_truncated(double b,
                                                            const std::vector<double>& deltas) {
    if (b <= 2.0)
        throw std::invalid_argument("mu_inverse_truncated: designed for b > 2");
    TestFunctionFamily fam;
    const double expo = 0.5 * b - 2.0;  // mu^{-1} = rho^{b/2-2}
    for (double delta : deltas) {
        fam.members.push_back(
            {[b, expo, delta](const Vec2& m) {
                 const double r = rho(m, b);
                 const double ramp = std::min(r / delta, 1.0);
                 return std::pow(r, expo) * ramp;
             },
             [b, expo, delta](const Vec2& m) {
                 const double r = rho(m, b);
                 double dval;
                 if (r < delta)
                     dval = (expo + 1.0) * std::pow(r, expo) / delta;
                 else
                     dval = expo * std::pow(r, expo - 1.0);
                 return Vec2(-2.0 * dval * m);
             },
             "mu_inv@" + std::to_string(delta)});
    }
    fam.zero_trace = true;
    return fam;
}

TestFunctionFamily TestFunctionFamily::random_zero_trace(double b, int count, unsigned seed) {
    TestFunctionFamily fam;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> kd(1, 3), jd(0, 3);
    for (int i = 0; i < count; ++i) {
        struct Term {
            double a;
            int k, j;
            bool im;
        };
        std::vector<Term> terms;
        for (int t = 0; t < 3; ++t)
            terms.push_back({u(rng), kd(rng), jd(rng), u(rng) > 0.0});
        fam.members.push_back(
            {[b, terms](const Vec2& m) {
                 double acc = 0.0;
                 for (const auto& t : terms)
                     acc += t.a * std::pow(rho(m, b), t.k) * harmonic(m, t.j, t.im);
                 return acc;
             },
             [b, terms](const Vec2& m) {
                 Vec2 acc = Vec2::Zero();
                 for (const auto& t : terms) {
                     const double rk = std::pow(rho(m, b), t.k);
                     acc += t.a * (-2.0 * t.k * std::pow(rho(m, b), t.k - 1.0) *
                                       harmonic(m, t.j, t.im) * m +
                                   rk * harmonic_grad(m, t.j, t.im));
                 }
                 return acc;
             },
             "rand" + std::to_string(i)});
    }
    fam.zero_trace = true;
    return fam;
}

TestFunctionFamily TestFunctionFamily::concat(const TestFunctionFamily& other) const {
    TestFunctionFamily fam = *this;
    fam.members.insert(fam.members.end(), other.members.begin(), other.members.end());
    fam.zero_trace = zero_trace && other.zero_trace;
    return fam;
}

namespace {

double h1mu_sq(const AnalyticField& phi, const RadialFn& weight, const ConfigGrid& grid) {
    auto v = phi.value;
    auto g = phi.grad;
    return weighted_integral(
        [v, g](const Vec2& m) {
            const double x = v(m);
            return x * x + g(m).squaredNorm();
        },
        weight, grid);
}

double l2_sq(const AnalyticField& phi, const RadialFn& weight, const ConfigGrid& grid) {
    auto v = phi.value;
    return weighted_integral([v](const Vec2& m) { const double x = v(m); return x * x; },
                             weight, grid);
}

double grad_sq(const AnalyticField& phi, const RadialFn& weight, const ConfigGrid& grid) {
    auto g = phi.grad;
    return weighted_integral([g](const Vec2& m) { return g(m).squaredNorm(); }, weight, grid);
}

}  // namespace

double embedding_ratio(const AnalyticField& phi, const ModelParams& params,
                       const ConfigGrid& grid) {
    const double num = l2_sq(phi, weight_fn(WeightKind::MuStar, params), grid);
    const double den = h1mu_sq(phi, weight_fn(WeightKind::Mu, params), grid);
    if (den == 0.0) throw std::domain_error("embedding_ratio: zero test function");
    return num / den;
}

double embedding_ratio_theta(const AnalyticField& phi, double delta, double theta,
                             const ConfigGrid& grid) {
    if (!(delta > 0.0) || theta > 1.0)
        throw std::invalid_argument("embedding_ratio_theta: need delta > 0, theta <= 1");
    const double num =
        l2_sq(phi, [delta](double r) { return std::pow(r, -1.0 + delta); }, grid);
    const double den =
        h1mu_sq(phi, [theta](double r) { return std::pow(r, theta); }, grid);
    if (den == 0.0) throw std::domain_error("embedding_ratio_theta: zero test function");
    return num / den;
}

double hardy_ratio(const std::function<double(double)>& g) {
    auto G = [g](double x) { return integrate_adaptive(g, 0.0, x, 1e-13, 1e-12); };
    const double left = integrate_adaptive(
        [&](double x) {
            if (x <= 0.0) return 0.0;
            const double Gx = G(x);
            return Gx * Gx / x;
        },
        0.0, 1.0, 1e-11, 1e-10, 30);
    const double right = integrate_adaptive(
        [&](double x) {
            if (x <= 0.0) return 0.0;
            const double lx = std::log(x);
            const double gv = g(x);
            return gv * gv * x * lx * lx;
        },
        0.0, 1.0, 1e-12, 1e-12);
    if (right == 0.0) throw std::domain_error("hardy_ratio: zero right-hand side");
    return left / right;
}

InequalityReport embedding_report(const TestFunctionFamily& family, const ModelParams& params,
                                  const ConfigGrid& grid) {
    InequalityReport rep;
    rep.inequality_id = "embedding";
    rep.resolution = grid.radial.n_cells();
    for (size_t i = 0; i < family.members.size(); ++i) {
        const double r = embedding_ratio(family.members[i], params, grid);
        rep.ratios.push_back({static_cast<int>(i), r});
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    rep.fitted_constant = rep.max_ratio;
    rep.pass = std::isfinite(rep.max_ratio);
    return rep;
}

InequalityReport coercivity_fit(const ConfigGrid& grid, const ModelParams& params,
                                const std::vector<KappaMatrix>& kappa_samples,
                                int n_w_samples, unsigned seed) {
    // needs the discrete forms; assembled here on demand
    InequalityReport rep;
    rep.inequality_id = "coercivity";
    rep.resolution = grid.radial.n_cells();
    DiscreteForms forms(grid, params);
    const auto& M = forms.mass_mu();
    const auto& S = forms.stiffness();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double C = -1e300;
    int idx = 0;
    for (const auto& kap : kappa_samples) {
        const SpMat B = forms.bilinear(kap);
        const double k2 = 1.0 + kap.frobenius() * kap.frobenius();
        for (int s = 0; s < n_w_samples; ++s, ++idx) {
            Vector w(forms.layout().total);
            for (int i = 0; i < w.size(); ++i) w[i] = gauss(rng);
            const double lhs = 0.25 * w.dot(2.0 * S * w);
            const double bw = w.dot(B * w);
            const double mw = w.dot(M * w);
            const double c_needed = (lhs - bw) / (k2 * mw);
            rep.ratios.push_back({idx, c_needed});
            C = std::max(C, c_needed);
        }
    }
    rep.fitted_constant = C;
    rep.max_ratio = C;
    rep.pass = std::isfinite(C);
    return rep;
}

std::vector<InequalityReport> stress_bound_check(const TestFunctionFamily& family,
                                                 const ModelParams& params,
                                                 const ConfigGrid& grid,
                                                 const std::vector<double>& eps_list) {
    // weight nu/rho of the stress functional
    const ModelParams p = params;
    RadialFn nu_over_rho = [p](double r) { return nu_weight(r, p) / r; };
    std::vector<double> lin(family.members.size()), l2(family.members.size()),
        grad2(family.members.size()), h1(family.members.size());
    const auto mu_w = weight_fn(WeightKind::Mu, params);
    for (size_t i = 0; i < family.members.size(); ++i) {
        lin[i] = weighted_integral(family.members[i].value, nu_over_rho, grid);
        l2[i] = l2_sq(family.members[i], mu_w, grid);
        grad2[i] = grad_sq(family.members[i], mu_w, grid);
        h1[i] = l2[i] + grad2[i];
    }
    std::vector<InequalityReport> out;
    if (family.zero_trace) {
        for (double eps : eps_list) {
            InequalityReport rep;
            rep.inequality_id = "stress_eps=" + std::to_string(eps);
            rep.resolution = grid.radial.n_cells();
            double C = -1e300;
            for (size_t i = 0; i < family.members.size(); ++i) {
                const double c_needed = (lin[i] * lin[i] - eps * grad2[i]) / l2[i];
                rep.ratios.push_back({static_cast<int>(i), c_needed});
                C = std::max(C, c_needed);
            }
            rep.fitted_constant = C;
            rep.max_ratio = C;
            rep.pass = std::isfinite(C);
            out.push_back(std::move(rep));
        }
    } else {
        InequalityReport rep;
        rep.inequality_id = "stress_weak";
        rep.resolution = grid.radial.n_cells();
        double C = -1e300;
        for (size_t i = 0; i < family.members.size(); ++i) {
            const double c_needed = lin[i] * lin[i] / h1[i];
            rep.ratios.push_back({static_cast<int>(i), c_needed});
            C = std::max(C, c_needed);
        }
        rep.fitted_constant = C;
        rep.max_ratio = C;
        rep.pass = std::isfinite(C);
        out.push_back(std::move(rep));
    }
    return out;
}

double sign_check(const TestFunctionFamily& samples, const ModelParams& params,
                  const ConfigGrid& grid) {
    if (!params.theta) throw std::domain_error("sign_check: rho^theta regime only");
    if (!samples.zero_trace) throw std::domain_error("sign_check: zero-trace samples required");
    const double factor = 2.0 - 0.5 * params.b - *params.theta;
    const double theta = *params.theta;
    double mn = 1e300;
    for (const auto& w : samples.members) {
        auto v = w.value;
        auto g = w.grad;
        const double val = factor * weighted_integral(
                                        [v, g](const Vec2& m) { return m.dot(g(m)) * v(m); },
                                        [theta](double r) { return std::pow(r, theta - 1.0); },
                                        grid);
        mn = std::min(mn, val);
    }
    return mn;
}

double mu_inverse_mass(const ModelParams& params) {
    if (params.b <= 2.0)
        throw std::domain_error("mu_inverse_mass: finite for b > 2 only");
    // int rho^{b/2-2} dm = pi b^{b/2-1} / (b/2-1)
    return std::numbers::pi * std::pow(params.b, 0.5 * params.b - 1.0) / (0.5 * params.b - 1.0);
}

void export_reports_csv(const std::string& path,
                        const std::vector<InequalityReport>& reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_reports_csv: cannot open " + path);
    out.precision(17);
    out << "inequality,member,ratio,fitted_constant,resolution\n";
    for (const auto& rep : reports)
        for (const auto& r : rep.ratios)
            out << rep.inequality_id << ',' << r.member << ',' << r.ratio << ','
                << rep.fitted_constant << ',' << rep.resolution << '\n';
}

}  // namespace fene
