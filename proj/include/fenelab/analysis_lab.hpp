#pragma once

#include <string>

#include "fenelab/geometry.hpp"

namespace fene {

/// Analytic scalar field with gradient, the currency of the inequality checks.
struct AnalyticField {
    ScalarFn value;
    std::function<Vec2(const Vec2&)> grad;
    std::string label;
};

struct TestFunctionFamily {
    std::vector<AnalyticField> members;
    bool zero_trace = true;

    /// rho^k for k in [kmin, kmax]
    static TestFunctionFamily radial_powers(double b, int kmin, int kmax);
    /// rho^k Re/Im((m1 + i m2)^j): boundary-layer powers times harmonics
    static TestFunctionFamily power_harmonics(double b, int kmax, int jmax);
    /// mollified radial bumps centered at varying distance from the boundary
    static TestFunctionFamily bumps(double b, const std::vector<double>& centers_rho,
                                    double width_factor = 0.5);
    /// nonzero-trace members: 1 and rho^k + 1
    static TestFunctionFamily with_trace(double b, int kmax);
    /// ramp-truncated mu^{-1}, the near-extremizers of the stress bound (b > 2)
    static TestFunctionFamily mu_inverse_truncated(double b,
                                                   const std::vector<double>& deltas);
    /// deterministic random combinations of power harmonics, zero trace
    static TestFunctionFamily random_zero_trace(double b, int count, unsigned seed);

    TestFunctionFamily concat(const TestFunctionFamily& other) const;
};

struct RatioEntry {
    int member = 0;
    double ratio = 0.0;
};

struct InequalityReport {
    std::string inequality_id;
    std::vector<RatioEntry> ratios;
    double max_ratio = 0.0;
    double fitted_constant = 0.0;
    bool pass = false;
    int resolution = 0;
};

/// (int phi^2 mu* dm) / (int (phi^2 + |grad phi|^2) mu dm). Throws for phi = 0.
double embedding_ratio(const AnalyticField& phi, const ModelParams& params,
                       const ConfigGrid& grid);

/// Variant with rho^{-1+delta} against rho^theta (theta <= 1).
double embedding_ratio_theta(const AnalyticField& phi, double delta, double theta,
                             const ConfigGrid& grid);

/// [int_0^1 (int_0^x g)^2 dx/x] / [int_0^1 g^2 x ln^2 x dx] by adaptive quadrature.
double hardy_ratio(const std::function<double(double)>& g);

/// Fit of the report over a family: max ratio and refinement-ready constant.
InequalityReport embedding_report(const TestFunctionFamily& family, const ModelParams& params,
                                  const ConfigGrid& grid);

/// Smallest C with 1/4 |grad w|^2_mu <= B[w,w] + C (1+|kappa|^2) |w|^2_mu over
/// random discrete samples and the provided kappa values.
InequalityReport coercivity_fit(const ConfigGrid& grid, const ModelParams& params,
                                const std::vector<KappaMatrix>& kappa_samples,
                                int n_w_samples, unsigned seed);

/// Per-epsilon fitted C_eps with |int phi nu/rho dm|^2 <= C_eps |phi|^2_mu
/// + eps |grad phi|^2_mu (zero-trace family), plus the weaker single-constant
/// variant against the full H1_mu norm when the family carries a trace.
std::vector<InequalityReport> stress_bound_check(const TestFunctionFamily& family,
                                                 const ModelParams& params,
                                                 const ConfigGrid& grid,
                                                 const std::vector<double>& eps_list);

/// Minimum over samples of int (2 - b/2 - theta) m.grad(w) w rho^{theta-1} dm.
double sign_check(const TestFunctionFamily& samples, const ModelParams& params,
                  const ConfigGrid& grid);

/// int mu^{-1} dm, the closed-form stress constant for b > 2.
double mu_inverse_mass(const ModelParams& params);

void export_reports_csv(const std::string& path, const std::vector<InequalityReport>& reports);

}  // namespace fene
