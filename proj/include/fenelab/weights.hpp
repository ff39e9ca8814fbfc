#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include <Eigen/Core>

namespace fene {

using Vec2 = Eigen::Vector2d;

// Spring constant of the scaled system. Fixed by the nondimensionalization;
// kept as a named constant for documentation only.
inline constexpr double kSpringConst = 1.0;

/// Model parameters for the configuration-space problem on the ball B(0, sqrt(b)).
struct ModelParams {
    double b;                     ///< maximum square extension, b > 0
    int n_conf = 2;               ///< configuration dimension N entering the formulas
    std::optional<double> theta;  ///< activates the rho^theta weight (requires b >= 6)

    ModelParams(double b_, int n_conf_ = 2, std::optional<double> theta_ = std::nullopt)
        : b(b_), n_conf(n_conf_), theta(theta_) {
        if (!(b > 0.0)) throw std::invalid_argument("ModelParams: b must be positive");
        if (n_conf < 2) throw std::invalid_argument("ModelParams: n_conf must be >= 2");
        if (theta) {
            if (b < 6.0) throw std::invalid_argument("ModelParams: theta requires b >= 6");
            if (!(*theta > -1.0 && *theta < 1.0))
                throw std::invalid_argument("ModelParams: theta must lie in (-1,1)");
        }
    }

    double sqrt_b() const { return std::sqrt(b); }
};

/// Which branch of the weight definitions applies.
enum class WeightRegime { Sub2, Critical, Super2, AltTheta };

WeightRegime regime(const ModelParams& params);

const char* regime_name(WeightRegime r);

/// Trace-free velocity-gradient matrix driving the configuration drift.
/// The trace is removed at construction so Tr(kappa) == 0 holds exactly.
class KappaMatrix {
  public:
    KappaMatrix() : e_{{0.0, 0.0, 0.0, 0.0}} {}

    static KappaMatrix from_entries(double k11, double k12, double k21, double k22) {
        KappaMatrix k;
        const double diag = 0.5 * (k11 - k22);  // negating the stored value keeps
        k.e_ = {diag, k12, k21, -diag};         // the trace zero in exact arithmetic
        return k;
    }
    static KappaMatrix zero() { return KappaMatrix(); }
    static KappaMatrix shear(double gamma) { return from_entries(0.0, gamma, 0.0, 0.0); }
    static KappaMatrix extensional(double s) { return from_entries(s, 0.0, 0.0, -s); }
    static KappaMatrix rotation(double omega) { return from_entries(0.0, omega, -omega, 0.0); }

    double k11() const { return e_[0]; }
    double k12() const { return e_[1]; }
    double k21() const { return e_[2]; }
    double k22() const { return e_[3]; }
    double trace() const { return e_[0] + e_[3]; }

    /// m . (kappa m)
    double quad_form(const Vec2& m) const {
        return m[0] * (e_[0] * m[0] + e_[1] * m[1]) + m[1] * (e_[2] * m[0] + e_[3] * m[1]);
    }
    Vec2 apply(const Vec2& m) const {
        return {e_[0] * m[0] + e_[1] * m[1], e_[2] * m[0] + e_[3] * m[1]};
    }
    double frobenius() const {
        return std::sqrt(e_[0] * e_[0] + e_[1] * e_[1] + e_[2] * e_[2] + e_[3] * e_[3]);
    }
    bool near(const KappaMatrix& o, double tol) const {
        return std::abs(e_[0] - o.e_[0]) <= tol && std::abs(e_[1] - o.e_[1]) <= tol &&
               std::abs(e_[2] - o.e_[2]) <= tol && std::abs(e_[3] - o.e_[3]) <= tol;
    }

  private:
    std::array<double, 4> e_;
};

/// rho = b - |m|^2, the regularized distance to the boundary sphere.
double rho(const Vec2& m, double b);

/// ln(e/rho) evaluated as 1 - ln(rho) to avoid cancellation near rho = e.
inline double log_e_over(double rho_val) { return 1.0 - std::log(rho_val); }

struct WeightValues {
    double nu;
    double mu;
    double mu_star;
    std::optional<double> mu0;  ///< present in the AltTheta regime only
};

/// All weights at a given rho. Branches:
///   nu  = rho^{b/2} | rho ln(e/rho) | rho
///   mu  = rho^{b/2} | rho ln^2(e/rho) | rho^{2-b/2}
///   mu* = rho^{b/2-2} | 1/rho | rho^{-b/2}
/// plus mu0 = rho^theta when the theta variant is active.
WeightValues eval_weights(double rho_val, const ModelParams& params);

// Individual weight evaluators with the continuous extension nu(0) = mu(0) = 0.
double nu_weight(double rho_val, const ModelParams& params);
double mu_weight(double rho_val, const ModelParams& params);
double mu_star_weight(double rho_val, const ModelParams& params);  ///< throws for rho <= 0
double mu0_weight(double rho_val, const ModelParams& params);

/// Equilibrium ratio rho^{b/2}/nu = nu/mu:
///   1 for b<2, 1/ln(e/rho) for b=2, rho^{b/2-1} for b>2.
/// This is the stationary profile of the transformed problem for b >= 2 and the
/// weight against which the total mass of f is measured.
double equilibrium_ratio(double rho_val, const ModelParams& params);

/// d/drho of equilibrium_ratio (unbounded at rho = 0 for b < 4).
double equilibrium_ratio_drho(double rho_val, const ModelParams& params);

/// Zeroth-order reaction coefficient produced by conjugating the Fokker-Planck
/// operator with nu: 0 for b<2, (N+2 kappa m.m) ln(e/rho) at b=2,
/// (N+2 kappa m.m)(b/2-1) rho^{1-b/2} for b>2.
double k_coeff(const Vec2& m, const KappaMatrix& kappa, const ModelParams& params);

/// Reaction coefficient of the rho^theta variant:
/// [N(b/2-1) + 2 kappa m.m (1-theta)] rho^{theta-1}.
double k0_coeff(const Vec2& m, const KappaMatrix& kappa, const ModelParams& params);

/// Exact boundary-flux constant: -2 at b=2, 2-b for b>2; undefined for b<2.
double c0(double b);

/// FENE spring potential -(b/2) ln(1 - |m|^2/b), H = 1.
double potential(const Vec2& m, const ModelParams& params);

}  // namespace fene
