#pragma once

#include <memory>
#include <string>

#include "fenelab/fp_forms.hpp"

namespace fene {

/// Coefficients of the transformed unknown w at one time; boundary node
/// excluded (homogeneous Dirichlet).
struct WState {
    Vector coeffs;
    double time = 0.0;
};

/// Prescribed boundary-behavior data q and its time derivative, smooth on the
/// closed ball.
struct BoundaryProfile {
    std::function<double(double, const Vec2&)> q;
    std::function<double(double, const Vec2&)> qt;
    std::string tag;
    bool is_zero = false;

    static BoundaryProfile zero();
    static BoundaryProfile constant(double c);
    /// c (r/sqrt(b))^j cos(j theta): polynomial in m, trace c cos(j theta).
    static BoundaryProfile angular(double c, int j, double b);
    /// The ratio rho^{b/2}/nu; identically 1 for b < 2.
    static BoundaryProfile equilibrium(const ModelParams& params);
};

using KappaPath = std::function<KappaMatrix(double)>;

/// Per-step observables of a run.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double min_f = 0.0;
    double l2mu = 0.0;
    double h1mu_semi = 0.0;
    double flux_rate = 0.0;
};

struct FpTrajectory {
    std::vector<WState> states;
    std::vector<DiagnosticsRecord> records;
    double dt = 0.0;

    const WState& back() const { return states.back(); }
};

/// Crank-Nicolson stepper for mu dw/dt + B(kappa) w = h. The kappa-independent
/// matrix M + dt/2 (S + R0 [+ first-order term]) is block tridiagonal per
/// angular mode (plus the steady-profile border) and is factored once; the
/// kappa coupling is folded in by defect correction, falling back to a sparse
/// LU of the full matrix when the iteration stalls.
class FpStepper {
  public:
    FpStepper(const DiscreteForms& forms, double dt);
    ~FpStepper();
    FpStepper(FpStepper&&) noexcept;

    double dt() const { return dt_; }
    const DiscreteForms& forms() const { return *forms_; }

    /// One step from w at time t to t+dt. h_prev/h_next are dual vectors of the
    /// source at t and t+dt; kappa is evaluated at the half step by the caller.
    Vector advance(const Vector& w, const KappaMatrix& kappa,
                   const Vector& h_prev, const Vector& h_next) const;

    /// Solve (M + dt/2 B(kappa)) x = rhs.
    Vector solve(const Vector& rhs, const KappaMatrix& kappa) const;

    /// Prebuild the sparse-LU fallback for a kappa that defeats the defect
    /// iteration (large |kappa| dt).
    void ensure_full_factor(const KappaMatrix& kappa);

  private:
    struct Impl;
    const DiscreteForms* forms_;
    double dt_;
    std::unique_ptr<Impl> impl_;
};

struct SolveOptions {
    int snapshot_every = 1;    ///< keep every k-th state (records kept per step)
    int startup_be_steps = 0;  ///< damped (backward Euler) startup steps for
                               ///< data incompatible with the boundary condition
};

/// Time integration on [t0, t0+T]; deterministic for fixed inputs.
FpTrajectory solve_fp(const Vector& w0, const BoundaryProfile& q, const KappaPath& kappa_path,
                      double T, double dt, const DiscreteForms& forms,
                      const SolveOptions& opts = {});

/// Single Crank-Nicolson step matching the stepper's scheme.
WState step(const WState& w, double dt, const DiscreteForms& forms, const KappaMatrix& kappa,
            const Vector& h_prev, const Vector& h_next);

/// f = nu (w + q) as a callable field at time t.
ScalarFn reconstruct_f(const DiscreteForms& forms, const Vector& w_coeffs,
                       const BoundaryProfile& q, double t);

/// Minimum of nu (w + q) over radial nodes x a dense angle sample.
double min_f_sample(const DiscreteForms& forms, const Vector& w_coeffs,
                    const BoundaryProfile& q, double t);

/// Total mass int f dm of the reconstructed f.
double mass_of(const DiscreteForms& forms, const Vector& w_coeffs, const BoundaryProfile& q,
               double t);

/// Discrete H1_mu-dual norm sqrt(h^T (M + 2 S)^{-1} h).
class DualNorm {
  public:
    explicit DualNorm(const DiscreteForms& forms);
    ~DualNorm();
    DualNorm(DualNorm&&) noexcept;
    double operator()(const Vector& h) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Trajectory snapshots as CSV with columns t,r,theta,w,f.
void export_trajectory_csv(const std::string& path, const FpTrajectory& traj,
                           const DiscreteForms& forms, const BoundaryProfile& q);

}  // namespace fene
