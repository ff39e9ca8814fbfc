#pragma once

#include "fenelab/fp_solver.hpp"

namespace fene {

/// int_B f dm by grid quadrature.
double mass(const ScalarFn& f_field, const ConfigGrid& grid, const ModelParams& params);

/// Asymptotic boundary-flux rate of the total mass for b >= 2:
///   dM/dt -> -(C0/2) sqrt(b) int_{boundary} q dS,
/// the Gauss limit of the (1/2)-diffusion flux of the scaled equation.
double flux_rate_predicted(const BoundaryProfile& q, const ModelParams& params,
                           const ConfigGrid& grid, double t);

/// Central-difference slope of the recorded mass series at its midpoint.
double flux_rate_measured(const std::vector<DiagnosticsRecord>& window);

/// Mollified-shell estimate of dM/dt from one state: the flux integrand is
/// integrated against a radial cutoff transitioning over eps_cells boundary
/// cells; the eps -> 0 limit is approached by Richardson extrapolation.
double shell_flux_estimate(const DiscreteForms& forms, const Vector& w_coeffs,
                           const BoundaryProfile& q, double t, const KappaMatrix& kappa,
                           int eps_cells);
double shell_flux_richardson(const DiscreteForms& forms, const Vector& w_coeffs,
                             const BoundaryProfile& q, double t, const KappaMatrix& kappa);

/// Least-squares slope of ln f against ln rho over the boundary-adjacent
/// window: innermost window_fraction of cells, excluding the two cells nearest
/// the boundary. Throws if f <= 0 anywhere in the window.
double decay_exponent_fit(const ScalarFn& f_field, const ConfigGrid& grid,
                          double window_fraction = 0.15);

/// Mean of f over the decay-fit window (used for the b = 2 log-corrected decay
/// check, with f pre-divided by rho ln(e/rho)).
double window_mean(const ScalarFn& f_field, const ConfigGrid& grid,
                   double window_fraction = 0.15);

struct PositivityReport {
    double min_f = 0.0;
    double max_abs_f = 0.0;
    bool violated = false;
    double first_violation_time = -1.0;
};

/// Minimum of the reconstructed f over all snapshots.
PositivityReport positivity_report(const FpTrajectory& traj, const DiscreteForms& forms,
                                   const BoundaryProfile& q, double tol_scale = 1e-8);

/// sup over shared snapshot times of || w_a - w_b ||_{L2_mu}.
double solution_distance(const FpTrajectory& a, const FpTrajectory& b,
                         const DiscreteForms& forms);

/// Diagnostics series as CSV with columns t,mass,min_f,l2mu,h1mu_semi,flux_rate.
void export_diagnostics_csv(const std::string& path,
                            const std::vector<DiagnosticsRecord>& records);

}  // namespace fene
