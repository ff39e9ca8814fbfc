#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fenelab/geometry.hpp"

namespace fene {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Degree-of-freedom layout of the tensor basis: piecewise-linear (in rho)
/// radial hats x real Fourier modes, homogeneous Dirichlet at r = sqrt(b).
/// Modes with nonzero frequency also drop the center node (their gradient
/// energy is infinite there). For b >= 2 (except b == 4, where it is already
/// representable) the zero-frequency block carries one extra "steady profile"
/// function psi = g - I_h(g), g = rho^{b/2}/nu, so the discrete system admits
/// the same conserved mass functional as the continuous problem.
struct DofLayout {
    int n_modes = 0;
    int n_nodes = 0;  ///< non-boundary radial nodes (center included)
    std::vector<AngularMode> modes;
    std::vector<int> offset;
    std::vector<int> first_node;  ///< 0 for the constant mode, 1 otherwise
    int psi_index = -1;
    int total = 0;

    int radial_count(int km) const { return n_nodes - first_node[km]; }
    int index(int km, int node) const { return offset[km] + node - first_node[km]; }
    bool has_psi() const { return psi_index >= 0; }
};

/// Discrete realization of the time-dependent bilinear form
///   B[w, phi; t] = int( 1/2 grad w . grad phi mu - w mu kappa m . grad phi - K w phi ) dm
/// split into kappa-independent and kappa-linear component matrices, plus the
/// extra first-order term of the rho^theta variant. Entries are indexed
/// [test][trial], so phi^T (stiffness + drift + reaction) w = B[w, phi].
class DiscreteForms {
  public:
    DiscreteForms(const ConfigGrid& grid, const ModelParams& params);

    const DofLayout& layout() const { return layout_; }
    const ModelParams& params() const { return params_; }
    const ConfigGrid& grid() const { return *grid_; }

    const SpMat& mass_mu() const { return mass_; }
    const SpMat& stiffness() const { return stiffness_; }
    /// kappa-independent first-order term of the rho^theta operator (zero matrix otherwise).
    const SpMat& alt_first_order() const { return alt_term_; }

    SpMat drift(const KappaMatrix& kappa) const;
    SpMat reaction(const KappaMatrix& kappa) const;
    /// stiffness + drift + reaction (+ alt term), i.e. the full matrix of B[.,.;t].
    SpMat bilinear(const KappaMatrix& kappa) const;

    /// Matrix-free application of the kappa-linear part (drift + kappa-reaction).
    void apply_kappa_part(const KappaMatrix& kappa, const Vector& x, Vector& out) const;

    /// Weights of the discrete mass functional: int_B nu w dm = dot(mass_weights, w).
    const Vector& mass_weights() const { return mass_weights_; }

    /// Coefficients of the discrete steady profile (b >= 2): the interpolant of
    /// g = rho^{b/2}/nu plus the enrichment coefficient. Zero vector for b < 2.
    const Vector& equilibrium_coeffs() const { return equilibrium_; }

    /// Dual vector of the source h = -dt q - mu^{-1} L[q]:
    /// entries -(dt_q, phi_i)_mu - B[q, phi_i; t] with q interpolated into the
    /// boundary-lifted space so only first derivatives of q appear.
    Vector source_from_q(const KappaMatrix& kappa,
                         const std::function<double(const Vec2&)>& q,
                         const std::function<double(const Vec2&)>& qt) const;

    /// Nodal interpolation of an analytic field into the interior space
    /// (enrichment coefficient zero).
    Vector interpolate(const ScalarFn& f) const;

    /// Point evaluation of a coefficient vector at polar coordinates.
    double evaluate(const Vector& coeffs, double r, double theta) const;
    /// Gradient in (d/dr, (1/r) d/dtheta) components.
    Vec2 evaluate_gradient(const Vector& coeffs, double r, double theta) const;

    /// L2_mu and H1_mu-seminorm quadratic forms.
    double l2mu_sq(const Vector& w) const { return w.dot(mass_ * w); }
    double h1mu_semi_sq(const Vector& w) const { return 2.0 * w.dot(stiffness_ * w); }

    bool uses_alt_weight() const { return alt_; }

  private:
    void assemble();

    const ConfigGrid* grid_;
    ModelParams params_;
    DofLayout layout_;
    bool alt_ = false;
    bool enriched_ = false;

    SpMat mass_, stiffness_, alt_term_;
    SpMat drift_k11_, drift_k12_, drift_k21_;
    SpMat react_0_, react_k11_, react_ksym_;  // k12 and k21 enter symmetrically

    // boundary-lifted trial columns (one per mode), used by source_from_q
    Eigen::MatrixXd lift_mass_, lift_stiff_, lift_react0_;
    Eigen::MatrixXd lift_d11_, lift_d12_, lift_d21_, lift_r11_, lift_rsym_, lift_alt_;

    Vector mass_weights_;
    Vector equilibrium_;
    std::vector<double> g_nodal_;  // steady-profile nodal values on the k=0 block

    // psi = g - I_h g bookkeeping for point evaluation
    double psi_at(double rho_val) const;
    double psi_drho(double rho_val) const;

    friend class ModeBlockFactor;
};

/// Convenience wrapper matching the operation signature: assemble all
/// component matrices for the given grid/params (kappa enters linearly and is
/// applied when the matrices are queried).
inline DiscreteForms assemble_forms(const ConfigGrid& grid, const ModelParams& params,
                                    const KappaMatrix& /*kappa*/ = KappaMatrix::zero()) {
    return DiscreteForms(grid, params);
}

}  // namespace fene
