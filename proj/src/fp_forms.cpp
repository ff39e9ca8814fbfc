#include "fenelab/fp_forms.hpp"

#include <cmath>
#include <numbers>

#include "fenelab/quadrature1d.hpp"

namespace fene {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angular coupling tables, [trial][test]. Computed by a 512-point trapezoid
// rule, which is exact for these trigonometric products, then snapped to the
// exact multiples of pi/2 they must be.
struct AngularTables {
    Eigen::MatrixXd G0, Gc2, Gs2;  ///< against T_test
    Eigen::MatrixXd H0, Hc2, Hs2;  ///< against T_test'
    Eigen::MatrixXd GP;            ///< T_trial' T_test'
};

double snap(double x) {
    const double quarter = 0.5 * std::numbers::pi;
    const double k = std::round(x / quarter);
    return (std::abs(x - k * quarter) < 1e-10) ? k * quarter : x;
}

AngularTables build_tables(const std::vector<AngularMode>& modes) {
    const int n = static_cast<int>(modes.size());
    const int P = 512;
    auto val = [](const AngularMode& m, double t) {
        return m.is_sin ? std::sin(m.freq * t) : std::cos(m.freq * t);
    };
    auto dval = [](const AngularMode& m, double t) {
        return m.is_sin ? m.freq * std::cos(m.freq * t) : -m.freq * std::sin(m.freq * t);
    };
    AngularTables tab;
    for (auto* m : {&tab.G0, &tab.Gc2, &tab.Gs2, &tab.H0, &tab.Hc2, &tab.Hs2, &tab.GP})
        m->setZero(n, n);
    const double dth = kTwoPi / P;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double g0 = 0, gc = 0, gs = 0, h0 = 0, hc = 0, hs = 0, gp = 0;
            for (int j = 0; j < P; ++j) {
                const double t = dth * j;
                const double Ta = val(modes[a], t), Sb = val(modes[b], t);
                const double dTa = dval(modes[a], t), dSb = dval(modes[b], t);
                const double c2 = std::cos(2 * t), s2 = std::sin(2 * t);
                g0 += Ta * Sb;
                gc += Ta * c2 * Sb;
                gs += Ta * s2 * Sb;
                h0 += Ta * dSb;
                hc += Ta * c2 * dSb;
                hs += Ta * s2 * dSb;
                gp += dTa * dSb;
            }
            tab.G0(a, b) = snap(g0 * dth);
            tab.Gc2(a, b) = snap(gc * dth);
            tab.Gs2(a, b) = snap(gs * dth);
            tab.H0(a, b) = snap(h0 * dth);
            tab.Hc2(a, b) = snap(hc * dth);
            tab.Hs2(a, b) = snap(hs * dth);
            tab.GP(a, b) = snap(gp * dth);
        }
    return tab;
}

using Trip = Eigen::Triplet<double>;

// One bilinear-form component under assembly: sparse hat block, boundary-lift
// columns, and the steady-profile row/column/diagonal used to form the psi
// entries.
struct Component {
    std::vector<Trip> trips;
    Eigen::MatrixXd lift;   // [total x n_modes]
    Vector row_g, col_g;    // B[g, phi_i] and B[phi_j, g] over interior dofs
    Eigen::RowVectorXd col_g_lift;
    double gg = 0.0;        // B[g, g]

    void init(int total, int n_modes, int n_interior) {
        lift.setZero(total, n_modes);
        row_g.setZero(n_interior);
        col_g.setZero(n_interior);
        col_g_lift.setZero(n_modes);
    }
};

}  // namespace

DiscreteForms::DiscreteForms(const ConfigGrid& grid, const ModelParams& params)
    : grid_(&grid), params_(params) {
    alt_ = params_.theta.has_value();
    if (!alt_ && params_.b >= 10.0)
        throw std::invalid_argument(
            "DiscreteForms: hat basis leaves L2_mu for b >= 10; use the rho^theta variant");
    const auto reg = regime(params_);
    enriched_ = !alt_ && (reg == WeightRegime::Critical || reg == WeightRegime::Super2) &&
                std::abs(params_.b - 4.0) > 1e-9;
    assemble();
}

void DiscreteForms::assemble() {
    const auto& mesh = grid_->radial;
    const int n_cells = mesh.n_cells();
    const auto modes = grid_->modes();
    const int n_modes = static_cast<int>(modes.size());
    const double b = params_.b;
    const double N = params_.n_conf;

    layout_.n_modes = n_modes;
    layout_.modes = modes;
    layout_.n_nodes = n_cells;
    layout_.offset.resize(n_modes);
    layout_.first_node.resize(n_modes);
    int running = 0;
    for (int km = 0; km < n_modes; ++km) {
        layout_.first_node[km] = (modes[km].freq == 0) ? 0 : 1;
        layout_.offset[km] = running;
        running += layout_.n_nodes - layout_.first_node[km];
    }
    const int n_interior = running;
    layout_.psi_index = enriched_ ? running : -1;
    layout_.total = running + (enriched_ ? 1 : 0);
    const int total = layout_.total;

    const AngularTables tab = build_tables(modes);

    const bool has_k = (b >= 2.0) && !alt_;
    const double c_b = (b == 2.0) ? 1.0 : 0.5 * b - 1.0;  // mu * g'(rho), constant in rho
    const double theta = alt_ ? *params_.theta : 0.0;
    // reaction scaling: K = (N + 2 kappa m.m) k_tilde for the standard weights,
    // K0 = (N(b/2-1) + 2 kappa m.m (1-theta)) k_tilde with k_tilde = rho^{theta-1}
    const double r0_scale = alt_ ? N * (0.5 * b - 1.0) : N;
    const double rk_scale = alt_ ? (1.0 - theta) : 1.0;

    Component CM, CS, CD11, CD12, CD21, CR0, CR11, CRsym, CALT;
    for (auto* c : {&CM, &CS, &CD11, &CD12, &CD21, &CR0, &CR11, &CRsym, &CALT})
        c->init(total, n_modes, n_interior);

    Vector nu_functional = Vector::Zero(n_interior);  // int nu phi_i dm
    Eigen::RowVectorXd nu_functional_lift = Eigen::RowVectorXd::Zero(n_modes);
    double s_acc = 0.0;  // quadrature of nu * g over B / (2 pi)

    std::vector<double> node_rho(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) node_rho[i] = mesh.node_rho(i);

    for (int c = 0; c < n_cells; ++c) {
        const double rho_hi = node_rho[c], rho_lo = node_rho[c + 1];
        const double delta = rho_hi - rho_lo;
        const auto& cell = mesh.cells[c];

        // local index 0 -> node c, 1 -> node c+1 (boundary when c+1 == n_cells)
        double k_mass[2][2] = {}, k_s1[2][2] = {}, k_s2[2][2] = {}, k_d1[2][2] = {},
               k_r0[2][2] = {}, k_r1[2][2] = {}, k_alt[2][2] = {};
        double k_nu_v[2] = {}, k_nu_d[2] = {}, k_cb_v[2] = {}, k_cb_d[2] = {}, k_cbr_v[2] = {};
        for (size_t q = 0; q < cell.pts.size(); ++q) {
            const double rho_q = cell.pts[q];
            if (!(rho_q > 0.0)) throw std::runtime_error("assemble: quadrature point at rho <= 0");
            const double W = 0.5 * cell.wts[q];
            const double v[2] = {(rho_q - rho_lo) / delta, (rho_hi - rho_q) / delta};
            const double d[2] = {1.0 / delta, -1.0 / delta};
            const double rr = b - rho_q;  // = r^2
            const double mu = alt_ ? mu0_weight(rho_q, params_) : mu_weight(rho_q, params_);
            double kt = 0.0;
            if (has_k)
                kt = (b == 2.0) ? log_e_over(rho_q)
                                : (0.5 * b - 1.0) * std::pow(rho_q, 1.0 - 0.5 * b);
            else if (alt_)
                kt = std::pow(rho_q, theta - 1.0);
            const double nu_q = nu_weight(rho_q, params_);
            for (int p = 0; p < 2; ++p)
                for (int t = 0; t < 2; ++t) {
                    k_mass[p][t] += W * mu * v[p] * v[t];
                    k_s1[p][t] += W * 2.0 * rr * mu * d[p] * d[t];
                    k_s2[p][t] += W * mu / rr * v[p] * v[t];
                    k_d1[p][t] += W * rr * mu * v[p] * d[t];
                    k_r0[p][t] += W * kt * v[p] * v[t];
                    k_r1[p][t] += W * rr * kt * v[p] * v[t];
                    if (alt_) k_alt[p][t] += W * rr * kt * d[p] * v[t];
                }
            for (int t = 0; t < 2; ++t) {
                k_nu_v[t] += W * nu_q * v[t];
                k_nu_d[t] += W * rr * nu_q * d[t];
                k_cb_v[t] += W * c_b * v[t];
                k_cb_d[t] += W * 2.0 * rr * c_b * d[t];
                k_cbr_v[t] += W * rr * c_b * v[t];
            }
            if (enriched_) s_acc += W * nu_q * equilibrium_ratio(rho_q, params_);
        }

        // hat x hat distribution over coupled mode pairs
        for (int a = 0; a < n_modes; ++a) {
            for (int bm = 0; bm < n_modes; ++bm) {
                const double g0 = tab.G0(a, bm), gc2 = tab.Gc2(a, bm), gs2 = tab.Gs2(a, bm);
                const double h0 = tab.H0(a, bm), hc2 = tab.Hc2(a, bm), hs2 = tab.Hs2(a, bm);
                const double gp = tab.GP(a, bm);
                if (g0 == 0 && gc2 == 0 && gs2 == 0 && h0 == 0 && hc2 == 0 && hs2 == 0 && gp == 0)
                    continue;
                for (int t = 0; t < 2; ++t) {
                    const int node_t = c + t;
                    if (node_t >= n_cells || node_t < layout_.first_node[bm]) continue;
                    const int gi = layout_.index(bm, node_t);
                    for (int p = 0; p < 2; ++p) {
                        const int node_p = c + p;
                        const bool lift_p = (node_p == n_cells);
                        if (!lift_p && node_p < layout_.first_node[a]) continue;
                        const double m_v = k_mass[p][t] * g0;
                        const double s_v = k_s1[p][t] * g0 + 0.5 * k_s2[p][t] * gp;
                        const double d11 = 2.0 * k_d1[p][t] * gc2 + k_mass[p][t] * hs2;
                        const double d12 =
                            k_d1[p][t] * gs2 + 0.5 * k_mass[p][t] * (h0 - hc2);
                        const double d21 =
                            k_d1[p][t] * gs2 - 0.5 * k_mass[p][t] * (h0 + hc2);
                        const double r0 = -r0_scale * k_r0[p][t] * g0;
                        const double r11 = -2.0 * rk_scale * k_r1[p][t] * gc2;
                        const double rsym = -rk_scale * k_r1[p][t] * gs2;
                        const double altv =
                            alt_ ? -2.0 * (2.0 - 0.5 * b - theta) * k_alt[p][t] * g0 : 0.0;
                        if (lift_p) {
                            CM.lift(gi, a) += m_v;
                            CS.lift(gi, a) += s_v;
                            CD11.lift(gi, a) += d11;
                            CD12.lift(gi, a) += d12;
                            CD21.lift(gi, a) += d21;
                            CR0.lift(gi, a) += r0;
                            CR11.lift(gi, a) += r11;
                            CRsym.lift(gi, a) += rsym;
                            if (altv != 0) CALT.lift(gi, a) += altv;
                        } else {
                            const int gj = layout_.index(a, node_p);
                            if (m_v != 0) CM.trips.emplace_back(gi, gj, m_v);
                            if (s_v != 0) CS.trips.emplace_back(gi, gj, s_v);
                            if (d11 != 0) CD11.trips.emplace_back(gi, gj, d11);
                            if (d12 != 0) CD12.trips.emplace_back(gi, gj, d12);
                            if (d21 != 0) CD21.trips.emplace_back(gi, gj, d21);
                            if (r0 != 0) CR0.trips.emplace_back(gi, gj, r0);
                            if (r11 != 0) CR11.trips.emplace_back(gi, gj, r11);
                            if (rsym != 0) CRsym.trips.emplace_back(gi, gj, rsym);
                            if (altv != 0) CALT.trips.emplace_back(gi, gj, altv);
                        }
                    }
                }
            }
        }

        // mass functional int nu phi dm (constant test harmonic only)
        for (int t = 0; t < 2; ++t) {
            const int node = c + t;
            if (node < n_cells)
                nu_functional[layout_.index(0, node)] += k_nu_v[t] * kTwoPi;
            else
                nu_functional_lift(0) += k_nu_v[t] * kTwoPi;
        }

        if (!enriched_) continue;

        // steady-profile rows: trial = g (constant harmonic), test = (bm, node)
        for (int bm = 0; bm < n_modes; ++bm) {
            const double g0 = tab.G0(0, bm), gc2 = tab.Gc2(0, bm), gs2 = tab.Gs2(0, bm);
            const double h0 = tab.H0(0, bm), hc2 = tab.Hc2(0, bm), hs2 = tab.Hs2(0, bm);
            if (g0 == 0 && gc2 == 0 && gs2 == 0 && h0 == 0 && hc2 == 0 && hs2 == 0) continue;
            for (int t = 0; t < 2; ++t) {
                const int node = c + t;
                if (node >= n_cells || node < layout_.first_node[bm]) continue;
                const int gi = layout_.index(bm, node);
                CS.row_g[gi] += k_cb_d[t] * g0;
                CM.row_g[gi] += k_nu_v[t] * g0;
                CR0.row_g[gi] += -N * k_cb_v[t] * g0;
                CD11.row_g[gi] += 2.0 * k_nu_d[t] * gc2 + k_nu_v[t] * hs2;
                CD12.row_g[gi] += k_nu_d[t] * gs2 + 0.5 * k_nu_v[t] * (h0 - hc2);
                CD21.row_g[gi] += k_nu_d[t] * gs2 - 0.5 * k_nu_v[t] * (h0 + hc2);
                CR11.row_g[gi] += -2.0 * k_cbr_v[t] * gc2;
                CRsym.row_g[gi] += -k_cbr_v[t] * gs2;
            }
        }
        // steady-profile columns: trial = (a, node), test = g
        for (int a = 0; a < n_modes; ++a) {
            const double g0 = tab.G0(a, 0), gc2 = tab.Gc2(a, 0), gs2 = tab.Gs2(a, 0);
            if (g0 == 0 && gc2 == 0 && gs2 == 0) continue;
            for (int p = 0; p < 2; ++p) {
                const int node = c + p;
                const bool lift_p = (node == n_cells);
                if (!lift_p && node < layout_.first_node[a]) continue;
                const double cs = k_cb_d[p] * g0;
                const double cm = k_nu_v[p] * g0;
                const double cr0 = -N * k_cb_v[p] * g0;
                const double cd11 = 2.0 * k_cbr_v[p] * gc2;
                const double cdsym = k_cbr_v[p] * gs2;
                const double cr11 = -2.0 * k_cbr_v[p] * gc2;
                const double crsym = -k_cbr_v[p] * gs2;
                if (lift_p) {
                    CS.col_g_lift(a) += cs;
                    CM.col_g_lift(a) += cm;
                    CR0.col_g_lift(a) += cr0;
                    CD11.col_g_lift(a) += cd11;
                    CD12.col_g_lift(a) += cdsym;
                    CD21.col_g_lift(a) += cdsym;
                    CR11.col_g_lift(a) += cr11;
                    CRsym.col_g_lift(a) += crsym;
                } else {
                    const int gj = layout_.index(a, node);
                    CS.col_g[gj] += cs;
                    CM.col_g[gj] += cm;
                    CR0.col_g[gj] += cr0;
                    CD11.col_g[gj] += cd11;
                    CD12.col_g[gj] += cdsym;
                    CD21.col_g[gj] += cdsym;
                    CR11.col_g[gj] += cr11;
                    CRsym.col_g[gj] += crsym;
                }
            }
        }
    }

    g_nodal_.assign(layout_.n_nodes, 0.0);
    if (params_.b >= 2.0 && !alt_)
        for (int i = 0; i < layout_.n_nodes; ++i)
            g_nodal_[i] = equilibrium_ratio(node_rho[i], params_);

    if (enriched_) {
        double Ig;  // int_0^b g drho
        if (b == 2.0) {
            const ModelParams pp = params_;
            Ig = integrate_adaptive([pp](double r) { return equilibrium_ratio(r, pp); }, 0.0, b,
                                    1e-14, 1e-13);
        } else {
            Ig = std::pow(b, 0.5 * b) / (0.5 * b);
        }
        CS.gg = kTwoPi * c_b * Ig;
        CR0.gg = -std::numbers::pi * N * c_b * Ig;
        CM.gg = kTwoPi * s_acc;

        Vector gvec = Vector::Zero(total);
        for (int i = 0; i < layout_.n_nodes; ++i) gvec[layout_.index(0, i)] = g_nodal_[i];
        const int psi = layout_.psi_index;

        for (auto* comp : {&CM, &CS, &CD11, &CD12, &CD21, &CR0, &CR11, &CRsym}) {
            SpMat X(total, total);
            X.setFromTriplets(comp->trips.begin(), comp->trips.end());
            const Vector Xg = X * gvec;
            const Vector XTg = X.transpose() * gvec;
            for (int i = 0; i < n_interior; ++i) {
                const double trial_col = comp->row_g[i] - Xg[i];
                const double test_row = comp->col_g[i] - XTg[i];
                if (trial_col != 0) comp->trips.emplace_back(i, psi, trial_col);
                if (test_row != 0) comp->trips.emplace_back(psi, i, test_row);
            }
            const double diag = comp->gg - gvec.dot(comp->row_g) - gvec.dot(comp->col_g) +
                                gvec.dot(Xg);
            comp->trips.emplace_back(psi, psi, diag);
            for (int km = 0; km < n_modes; ++km)
                comp->lift(psi, km) = comp->col_g_lift(km) - gvec.dot(comp->lift.col(km));
        }
    }

    auto finish = [&](Component& comp) {
        SpMat m(total, total);
        m.setFromTriplets(comp.trips.begin(), comp.trips.end());
        m.makeCompressed();
        return m;
    };
    mass_ = finish(CM);
    stiffness_ = finish(CS);
    drift_k11_ = finish(CD11);
    drift_k12_ = finish(CD12);
    drift_k21_ = finish(CD21);
    react_0_ = finish(CR0);
    react_k11_ = finish(CR11);
    react_ksym_ = finish(CRsym);
    alt_term_ = finish(CALT);
    lift_mass_ = CM.lift;
    lift_stiff_ = CS.lift;
    lift_d11_ = CD11.lift;
    lift_d12_ = CD12.lift;
    lift_d21_ = CD21.lift;
    lift_react0_ = CR0.lift;
    lift_r11_ = CR11.lift;
    lift_rsym_ = CRsym.lift;
    lift_alt_ = CALT.lift;

    mass_weights_ = Vector::Zero(total);
    mass_weights_.head(n_interior) = nu_functional;
    if (enriched_) {
        Vector gint = Vector::Zero(n_interior);
        for (int i = 0; i < layout_.n_nodes; ++i) gint[layout_.index(0, i)] = g_nodal_[i];
        mass_weights_[layout_.psi_index] = CM.gg - gint.dot(nu_functional);
    }

    equilibrium_ = Vector::Zero(total);
    if (params_.b >= 2.0 && !alt_) {
        for (int i = 0; i < layout_.n_nodes; ++i) equilibrium_[layout_.index(0, i)] = g_nodal_[i];
        if (enriched_) equilibrium_[layout_.psi_index] = 1.0;
    }
}

SpMat DiscreteForms::drift(const KappaMatrix& kappa) const {
    SpMat d = kappa.k11() * drift_k11_;
    d += kappa.k12() * drift_k12_;
    d += kappa.k21() * drift_k21_;
    return d;
}

SpMat DiscreteForms::reaction(const KappaMatrix& kappa) const {
    SpMat r = react_0_;
    if (kappa.k11() != 0.0) r += kappa.k11() * react_k11_;
    const double ks = kappa.k12() + kappa.k21();
    if (ks != 0.0) r += ks * react_ksym_;
    return r;
}

SpMat DiscreteForms::bilinear(const KappaMatrix& kappa) const {
    SpMat bmat = stiffness_ + react_0_;
    if (alt_) bmat += alt_term_;
    if (kappa.k11() != 0.0) bmat += kappa.k11() * (drift_k11_ + react_k11_);
    if (kappa.k12() != 0.0) bmat += kappa.k12() * drift_k12_;
    if (kappa.k21() != 0.0) bmat += kappa.k21() * drift_k21_;
    const double ks = kappa.k12() + kappa.k21();
    if (ks != 0.0) bmat += ks * react_ksym_;
    return bmat;
}

void DiscreteForms::apply_kappa_part(const KappaMatrix& kappa, const Vector& x,
                                     Vector& out) const {
    out.setZero(x.size());
    if (kappa.k11() != 0.0) out += kappa.k11() * (drift_k11_ * x + react_k11_ * x);
    if (kappa.k12() != 0.0) out += kappa.k12() * (drift_k12_ * x);
    if (kappa.k21() != 0.0) out += kappa.k21() * (drift_k21_ * x);
    const double ks = kappa.k12() + kappa.k21();
    if (ks != 0.0) out += ks * (react_ksym_ * x);
}

double DiscreteForms::psi_at(double rho_val) const {
    // g minus its nodal interpolant; vanishes at every node
    const auto& mesh = grid_->radial;
    const int n = mesh.n_cells();
    double interp = 0.0;
    // locate cell by rho (node_rho decreases with node index)
    int lo = 0, hi = n;  // nodes lo..hi bracket
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (rho_val <= mesh.node_rho(mid)) lo = mid; else hi = mid;
    }
    const double rho_hi = mesh.node_rho(lo), rho_lo = mesh.node_rho(lo + 1);
    const double glo = (lo + 1 == n) ? 0.0 : g_nodal_[lo + 1];
    const double ghi = g_nodal_[lo];
    const double lam = (rho_val - rho_lo) / (rho_hi - rho_lo);
    interp = lam * ghi + (1.0 - lam) * glo;
    return equilibrium_ratio(rho_val, params_) - interp;
}

double DiscreteForms::psi_drho(double rho_val) const {
    const auto& mesh = grid_->radial;
    const int n = mesh.n_cells();
    int lo = 0, hi = n;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (rho_val <= mesh.node_rho(mid)) lo = mid; else hi = mid;
    }
    const double rho_hi = mesh.node_rho(lo), rho_lo = mesh.node_rho(lo + 1);
    const double glo = (lo + 1 == n) ? 0.0 : g_nodal_[lo + 1];
    const double ghi = g_nodal_[lo];
    return equilibrium_ratio_drho(rho_val, params_) - (ghi - glo) / (rho_hi - rho_lo);
}

double DiscreteForms::evaluate(const Vector& coeffs, double r, double theta) const {
    const auto& mesh = grid_->radial;
    const int n = mesh.n_cells();
    const double rho_v = std::max(0.0, params_.b - r * r);
    // locate radial cell
    int c = 0, hi = n;
    while (hi - c > 1) {
        const int mid = (c + hi) / 2;
        if (r >= mesh.nodes[mid]) c = mid; else hi = mid;
    }
    if (c >= n) c = n - 1;
    const double rho_hi = mesh.node_rho(c), rho_lo = mesh.node_rho(c + 1);
    const double lam = (rho_v - rho_lo) / (rho_hi - rho_lo);
    double out = 0.0;
    for (int km = 0; km < layout_.n_modes; ++km) {
        const auto& m = layout_.modes[km];
        double radial = 0.0;
        if (c >= layout_.first_node[km]) radial += lam * coeffs[layout_.index(km, c)];
        if (c + 1 < n && c + 1 >= layout_.first_node[km])
            radial += (1.0 - lam) * coeffs[layout_.index(km, c + 1)];
        if (radial == 0.0) continue;
        out += radial * (m.is_sin ? std::sin(m.freq * theta) : std::cos(m.freq * theta));
    }
    if (layout_.has_psi() && coeffs[layout_.psi_index] != 0.0)
        out += coeffs[layout_.psi_index] * psi_at(rho_v);
    return out;
}

Vec2 DiscreteForms::evaluate_gradient(const Vector& coeffs, double r, double theta) const {
    const auto& mesh = grid_->radial;
    const int n = mesh.n_cells();
    const double rho_v = std::max(0.0, params_.b - r * r);
    int c = 0, hi = n;
    while (hi - c > 1) {
        const int mid = (c + hi) / 2;
        if (r >= mesh.nodes[mid]) c = mid; else hi = mid;
    }
    if (c >= n) c = n - 1;
    const double rho_hi = mesh.node_rho(c), rho_lo = mesh.node_rho(c + 1);
    const double delta = rho_hi - rho_lo;
    const double lam = (rho_v - rho_lo) / delta;
    double ur = 0.0, ut = 0.0;  // d/dr and (1/r) d/dtheta
    for (int km = 0; km < layout_.n_modes; ++km) {
        const auto& m = layout_.modes[km];
        double radial = 0.0, radial_drho = 0.0;
        if (c >= layout_.first_node[km]) {
            radial += lam * coeffs[layout_.index(km, c)];
            radial_drho += coeffs[layout_.index(km, c)] / delta;
        }
        if (c + 1 < n && c + 1 >= layout_.first_node[km]) {
            radial += (1.0 - lam) * coeffs[layout_.index(km, c + 1)];
            radial_drho -= coeffs[layout_.index(km, c + 1)] / delta;
        }
        const double T = m.is_sin ? std::sin(m.freq * theta) : std::cos(m.freq * theta);
        const double dT = m.is_sin ? m.freq * std::cos(m.freq * theta)
                                   : -m.freq * std::sin(m.freq * theta);
        ur += radial_drho * (-2.0 * r) * T;
        if (m.freq != 0 && r > 1e-14) ut += radial * dT / r;
    }
    if (layout_.has_psi() && coeffs[layout_.psi_index] != 0.0)
        ur += coeffs[layout_.psi_index] * psi_drho(rho_v) * (-2.0 * r);
    return {ur, ut};
}

Vector DiscreteForms::interpolate(const ScalarFn& f) const {
    const auto& mesh = grid_->radial;
    Vector out = Vector::Zero(layout_.total);
    const auto thetas = grid_->theta_points();
    const int P = static_cast<int>(thetas.size());
    std::vector<double> fv(P);
    for (int i = 0; i < layout_.n_nodes; ++i) {
        const double r = mesh.nodes[i];
        for (int j = 0; j < P; ++j)
            fv[j] = f(Vec2(r * std::cos(thetas[j]), r * std::sin(thetas[j])));
        for (int km = 0; km < layout_.n_modes; ++km) {
            if (i < layout_.first_node[km]) continue;
            const auto& m = layout_.modes[km];
            double acc = 0.0;
            for (int j = 0; j < P; ++j)
                acc += fv[j] * (m.is_sin ? std::sin(m.freq * thetas[j])
                                         : std::cos(m.freq * thetas[j]));
            acc *= (m.freq == 0) ? 1.0 / P : 2.0 / P;
            out[layout_.index(km, i)] = acc;
        }
    }
    return out;
}

Vector DiscreteForms::source_from_q(const KappaMatrix& kappa,
                                    const std::function<double(const Vec2&)>& q,
                                    const std::function<double(const Vec2&)>& qt) const {
    const auto& mesh = grid_->radial;
    const int n = mesh.n_cells();
    const auto thetas = grid_->theta_points();
    const int P = static_cast<int>(thetas.size());

    // interpolate q and dq/dt into interior coefficients + one boundary ring per mode
    Vector qi = Vector::Zero(layout_.total), qti = Vector::Zero(layout_.total);
    Eigen::VectorXd qb = Eigen::VectorXd::Zero(layout_.n_modes), qtb = qb;
    std::vector<double> fv(P), ftv(P);
    for (int i = 0; i <= n; ++i) {
        const double r = mesh.nodes[i];
        for (int j = 0; j < P; ++j) {
            const Vec2 m(r * std::cos(thetas[j]), r * std::sin(thetas[j]));
            fv[j] = q(m);
            ftv[j] = qt(m);
        }
        for (int km = 0; km < layout_.n_modes; ++km) {
            if (i < n && i < layout_.first_node[km]) continue;
            const auto& md = layout_.modes[km];
            double aq = 0.0, aqt = 0.0;
            for (int j = 0; j < P; ++j) {
                const double T = md.is_sin ? std::sin(md.freq * thetas[j])
                                           : std::cos(md.freq * thetas[j]);
                aq += fv[j] * T;
                aqt += ftv[j] * T;
            }
            const double scale = (md.freq == 0) ? 1.0 / P : 2.0 / P;
            if (i == n) {
                qb[km] = aq * scale;
                qtb[km] = aqt * scale;
            } else {
                qi[layout_.index(km, i)] = aq * scale;
                qti[layout_.index(km, i)] = aqt * scale;
            }
        }
    }

    Vector h = -(mass_ * qti) - lift_mass_ * qtb;
    h -= stiffness_ * qi + lift_stiff_ * qb;
    h -= react_0_ * qi + lift_react0_ * qb;
    if (alt_) h -= alt_term_ * qi + lift_alt_ * qb;
    if (kappa.k11() != 0.0) {
        h -= kappa.k11() * (drift_k11_ * qi + react_k11_ * qi);
        h -= kappa.k11() * (lift_d11_ * qb + lift_r11_ * qb);
    }
    if (kappa.k12() != 0.0) {
        h -= kappa.k12() * (drift_k12_ * qi);
        h -= kappa.k12() * (lift_d12_ * qb);
    }
    if (kappa.k21() != 0.0) {
        h -= kappa.k21() * (drift_k21_ * qi);
        h -= kappa.k21() * (lift_d21_ * qb);
    }
    const double ks = kappa.k12() + kappa.k21();
    if (ks != 0.0) {
        h -= ks * (react_ksym_ * qi);
        h -= ks * (lift_rsym_ * qb);
    }
    return h;
}

}  // namespace fene
