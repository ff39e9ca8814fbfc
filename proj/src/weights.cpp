#include "fenelab/weights.hpp"

#include <cmath>
#include <limits>

namespace fene {

WeightRegime regime(const ModelParams& params) {
    if (params.theta) return WeightRegime::AltTheta;
    if (params.b < 2.0) return WeightRegime::Sub2;
    if (params.b == 2.0) return WeightRegime::Critical;
    return WeightRegime::Super2;
}

const char* regime_name(WeightRegime r) {
    switch (r) {
        case WeightRegime::Sub2: return "Sub2";
        case WeightRegime::Critical: return "Critical";
        case WeightRegime::Super2: return "Super2";
        case WeightRegime::AltTheta: return "AltTheta";
    }
    return "?";
}

double rho(const Vec2& m, double b) {
    const double r2 = m.squaredNorm();
    if (r2 > b) throw std::domain_error("rho: point outside the configuration ball");
    return b - r2;
}

double nu_weight(double rho_val, const ModelParams& params) {
    if (rho_val < 0.0) throw std::domain_error("nu_weight: rho < 0");
    if (rho_val == 0.0) return 0.0;
    if (params.b < 2.0) return std::pow(rho_val, 0.5 * params.b);
    if (params.b == 2.0) return rho_val * log_e_over(rho_val);
    return rho_val;
}

double mu_weight(double rho_val, const ModelParams& params) {
    if (rho_val < 0.0) throw std::domain_error("mu_weight: rho < 0");
    if (rho_val == 0.0) {
        // continuous extension: the exponent 2-b/2 changes sign at b=4
        if (params.b < 4.0) return 0.0;
        if (params.b == 4.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    if (params.b < 2.0) return std::pow(rho_val, 0.5 * params.b);
    if (params.b == 2.0) {
        const double l = log_e_over(rho_val);
        return rho_val * l * l;
    }
    return std::pow(rho_val, 2.0 - 0.5 * params.b);
}

double mu_star_weight(double rho_val, const ModelParams& params) {
    if (rho_val <= 0.0) throw std::domain_error("mu_star_weight: requires rho > 0");
    if (params.b < 2.0) return std::pow(rho_val, 0.5 * params.b - 2.0);
    if (params.b == 2.0) return 1.0 / rho_val;
    return std::pow(rho_val, -0.5 * params.b);
}

double mu0_weight(double rho_val, const ModelParams& params) {
    if (!params.theta) throw std::domain_error("mu0_weight: theta not set");
    if (rho_val < 0.0) throw std::domain_error("mu0_weight: rho < 0");
    if (rho_val == 0.0) return (*params.theta > 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(rho_val, *params.theta);
}

WeightValues eval_weights(double rho_val, const ModelParams& params) {
    WeightValues w;
    w.nu = nu_weight(rho_val, params);
    w.mu = mu_weight(rho_val, params);
    w.mu_star = mu_star_weight(rho_val, params);
    if (regime(params) == WeightRegime::AltTheta) w.mu0 = mu0_weight(rho_val, params);
    return w;
}

double equilibrium_ratio(double rho_val, const ModelParams& params) {
    if (rho_val < 0.0) throw std::domain_error("equilibrium_ratio: rho < 0");
    if (params.b < 2.0) return 1.0;
    if (params.b == 2.0) return rho_val == 0.0 ? 0.0 : 1.0 / log_e_over(rho_val);
    return rho_val == 0.0 ? 0.0 : std::pow(rho_val, 0.5 * params.b - 1.0);
}

double equilibrium_ratio_drho(double rho_val, const ModelParams& params) {
    if (rho_val <= 0.0) throw std::domain_error("equilibrium_ratio_drho: requires rho > 0");
    if (params.b < 2.0) return 0.0;
    if (params.b == 2.0) {
        const double l = log_e_over(rho_val);
        return 1.0 / (rho_val * l * l);
    }
    return (0.5 * params.b - 1.0) * std::pow(rho_val, 0.5 * params.b - 2.0);
}

double k_coeff(const Vec2& m, const KappaMatrix& kappa, const ModelParams& params) {
    if (params.theta) throw std::domain_error("k_coeff: use k0_coeff in the theta regime");
    const double r = rho(m, params.b);
    if (params.b < 2.0) return 0.0;
    if (r <= 0.0) throw std::domain_error("k_coeff: unbounded on the boundary for b >= 2");
    const double front = params.n_conf + 2.0 * kappa.quad_form(m);
    if (params.b == 2.0) return front * log_e_over(r);
    return front * (0.5 * params.b - 1.0) * std::pow(r, 1.0 - 0.5 * params.b);
}

double k0_coeff(const Vec2& m, const KappaMatrix& kappa, const ModelParams& params) {
    if (!params.theta) throw std::domain_error("k0_coeff: theta regime only");
    const double r = rho(m, params.b);
    if (r <= 0.0) throw std::domain_error("k0_coeff: unbounded on the boundary");
    const double th = *params.theta;
    const double front =
        params.n_conf * (0.5 * params.b - 1.0) + 2.0 * kappa.quad_form(m) * (1.0 - th);
    return front * std::pow(r, th - 1.0);
}

double c0(double b) {
    if (b < 2.0) throw std::domain_error("c0: defined for b >= 2 only");
    if (b == 2.0) return -2.0;
    return 2.0 - b;
}

double potential(const Vec2& m, const ModelParams& params) {
    const double ratio = m.squaredNorm() / params.b;
    if (ratio >= 1.0) throw std::domain_error("potential: infinite at the boundary");
    return -0.5 * kSpringConst * params.b * std::log1p(-ratio);
}

}  // namespace fene
