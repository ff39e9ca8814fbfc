#include "fenelab/fp_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

namespace fene {

BoundaryProfile BoundaryProfile::zero() {
    BoundaryProfile p;
    p.q = [](double, const Vec2&) { return 0.0; };
    p.qt = [](double, const Vec2&) { return 0.0; };
    p.tag = "zero";
    p.is_zero = true;
    return p;
}

BoundaryProfile BoundaryProfile::constant(double c) {
    BoundaryProfile p;
    p.q = [c](double, const Vec2&) { return c; };
    p.qt = [](double, const Vec2&) { return 0.0; };
    p.tag = "constant(" + std::to_string(c) + ")";
    p.is_zero = (c == 0.0);
    return p;
}

BoundaryProfile BoundaryProfile::angular(double c, int j, double b) {
    BoundaryProfile p;
    const double scale = c / std::pow(std::sqrt(b), j);
    p.q = [scale, j](double, const Vec2& m) {
        // c (r/sqrt(b))^j cos(j theta) = c Re((m1 + i m2)^j) / b^{j/2}
        const std::complex<double> z(m[0], m[1]);
        return scale * std::pow(z, j).real();
    };
    p.qt = [](double, const Vec2&) { return 0.0; };
    p.tag = "angular(" + std::to_string(c) + "," + std::to_string(j) + ")";
    return p;
}

BoundaryProfile BoundaryProfile::equilibrium(const ModelParams& params) {
    BoundaryProfile p;
    const ModelParams pp = params;
    p.q = [pp](double, const Vec2& m) { return equilibrium_ratio(rho(m, pp.b), pp); };
    p.qt = [](double, const Vec2&) { return 0.0; };
    p.tag = "equilibrium_ratio";
    return p;
}

namespace {

// Tridiagonal LU without pivoting (kappa-independent blocks are strongly
// diagonally dominated by the mass matrix at practical dt).
struct Tridiag {
    Vector sub, diag, sup;  // factored in place
    bool ok = true;

    void factor() {
        const int n = static_cast<int>(diag.size());
        for (int i = 0; i < n - 1; ++i) {
            if (std::abs(diag[i]) < 1e-300) { ok = false; return; }
            const double m = sub[i] / diag[i];
            sub[i] = m;  // store multiplier
            diag[i + 1] -= m * sup[i];
        }
        if (n > 0 && std::abs(diag[n - 1]) < 1e-300) ok = false;
    }
    void solve_inplace(Eigen::Ref<Vector> x) const {
        const int n = static_cast<int>(diag.size());
        for (int i = 0; i < n - 1; ++i) x[i + 1] -= sub[i] * x[i];
        x[n - 1] /= diag[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - sup[i] * x[i + 1]) / diag[i];
    }
};

}  // namespace

struct FpStepper::Impl {
    SpMat A0;             // M + dt/2 (S + R0 [+ alt])
    SpMat M;
    std::vector<Tridiag> blocks;
    // steady-profile border of the constant-harmonic block
    bool has_psi = false;
    Vector border_col, border_row;  // A0[i][psi], A0[psi][i] over the k0 block
    double border_diag = 0.0;
    Vector psi_u;  // T^{-1} border_col
    double schur = 0.0;
    int k0_offset = 0, k0_count = 0, psi_index = -1;
    bool tensor_ok = true;

    std::unique_ptr<Eigen::SparseLU<SpMat>> full_lu;
    KappaMatrix full_kappa;
    bool full_valid = false;
};

FpStepper::~FpStepper() = default;
FpStepper::FpStepper(FpStepper&&) noexcept = default;

FpStepper::FpStepper(const DiscreteForms& forms, double dt) : forms_(&forms), dt_(dt) {
    impl_ = std::make_unique<Impl>();
    const auto& lay = forms.layout();
    impl_->M = forms.mass_mu();
    SpMat B0 = forms.stiffness() + forms.reaction(KappaMatrix::zero());
    if (forms.uses_alt_weight()) B0 += forms.alt_first_order();
    impl_->A0 = impl_->M + (0.5 * dt) * B0;
    impl_->A0.makeCompressed();

    // split A0 into per-mode tridiagonal blocks (+ border)
    const int n_modes = lay.n_modes;
    impl_->blocks.resize(n_modes);
    impl_->psi_index = lay.psi_index;
    impl_->has_psi = lay.has_psi();
    impl_->k0_offset = lay.offset[0];
    impl_->k0_count = lay.radial_count(0);
    std::vector<int> mode_of(lay.total, -1), local_of(lay.total, -1);
    for (int km = 0; km < n_modes; ++km)
        for (int i = 0; i < lay.radial_count(km); ++i) {
            mode_of[lay.offset[km] + i] = km;
            local_of[lay.offset[km] + i] = i;
        }
    for (int km = 0; km < n_modes; ++km) {
        const int n = lay.radial_count(km);
        impl_->blocks[km].sub = Vector::Zero(n - 1);
        impl_->blocks[km].diag = Vector::Zero(n);
        impl_->blocks[km].sup = Vector::Zero(n - 1);
    }
    if (impl_->has_psi) {
        impl_->border_col = Vector::Zero(impl_->k0_count);
        impl_->border_row = Vector::Zero(impl_->k0_count);
    }
    for (int col = 0; col < impl_->A0.outerSize(); ++col) {
        for (SpMat::InnerIterator it(impl_->A0, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            const double v = it.value();
            if (row == impl_->psi_index && col == impl_->psi_index) {
                impl_->border_diag = v;
            } else if (row == impl_->psi_index) {
                if (mode_of[col] != 0) { impl_->tensor_ok = false; continue; }
                impl_->border_row[local_of[col]] = v;
            } else if (col == impl_->psi_index) {
                if (mode_of[row] != 0) { impl_->tensor_ok = false; continue; }
                impl_->border_col[local_of[row]] = v;
            } else {
                const int km = mode_of[row];
                if (km != mode_of[col]) { impl_->tensor_ok = false; continue; }
                const int li = local_of[row], lj = local_of[col];
                auto& blk = impl_->blocks[km];
                if (li == lj) blk.diag[li] = v;
                else if (li == lj + 1) blk.sub[lj] = v;
                else if (lj == li + 1) blk.sup[li] = v;
                else impl_->tensor_ok = false;
            }
        }
    }
    if (impl_->tensor_ok) {
        for (auto& blk : impl_->blocks) {
            blk.factor();
            if (!blk.ok) { impl_->tensor_ok = false; break; }
        }
    }
    if (impl_->tensor_ok && impl_->has_psi) {
        impl_->psi_u = impl_->border_col;
        impl_->blocks[0].solve_inplace(impl_->psi_u);
        impl_->schur = impl_->border_diag - impl_->border_row.dot(impl_->psi_u);
        if (std::abs(impl_->schur) < 1e-300) impl_->tensor_ok = false;
    }
    if (!impl_->tensor_ok) ensure_full_factor(KappaMatrix::zero());
}

void FpStepper::ensure_full_factor(const KappaMatrix& kappa) {
    SpMat A = impl_->M + (0.5 * dt_) * forms_->bilinear(kappa);
    A.makeCompressed();
    impl_->full_lu = std::make_unique<Eigen::SparseLU<SpMat>>();
    impl_->full_lu->compute(A);
    if (impl_->full_lu->info() != Eigen::Success)
        throw std::runtime_error("FpStepper: sparse LU factorization failed");
    impl_->full_kappa = kappa;
    impl_->full_valid = true;
}

Vector FpStepper::solve(const Vector& rhs, const KappaMatrix& kappa) const {
    const auto& lay = forms_->layout();
    if (impl_->full_valid && kappa.near(impl_->full_kappa, 1e-14))
        return impl_->full_lu->solve(rhs);
    if (!impl_->tensor_ok) {
        // base factorization unusable and no matching LU: build one on the spot
        SpMat A = impl_->M + (0.5 * dt_) * forms_->bilinear(kappa);
        Eigen::SparseLU<SpMat> lu(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("FpStepper: sparse LU factorization failed");
        return lu.solve(rhs);
    }

    auto base_solve = [&](Vector x) {
        for (int km = 0; km < lay.n_modes; ++km) {
            auto seg = x.segment(lay.offset[km], lay.radial_count(km));
            if (impl_->has_psi && km == 0) {
                const double s = x[impl_->psi_index];
                Vector z = seg;
                impl_->blocks[0].solve_inplace(z);
                const double y = (s - impl_->border_row.dot(z)) / impl_->schur;
                seg = z - y * impl_->psi_u;
                x[impl_->psi_index] = y;
            } else {
                impl_->blocks[km].solve_inplace(seg);
            }
        }
        return x;
    };

    const bool kappa_zero = kappa.near(KappaMatrix::zero(), 0.0);
    Vector x = base_solve(rhs);
    if (kappa_zero) return x;

    const double rhs_norm = rhs.norm() + 1e-300;
    Vector kx(x.size()), r(x.size());
    for (int iter = 0; iter < 40; ++iter) {
        forms_->apply_kappa_part(kappa, x, kx);
        r = rhs - impl_->A0 * x - (0.5 * dt_) * kx;
        if (r.norm() <= 1e-13 * rhs_norm) return x;
        x += base_solve(r);
    }
    // defect correction stalled (large |kappa| dt): direct factorization
    SpMat A = impl_->M + (0.5 * dt_) * forms_->bilinear(kappa);
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("FpStepper: defect correction stalled and LU failed");
    return lu.solve(rhs);
}

Vector FpStepper::advance(const Vector& w, const KappaMatrix& kappa, const Vector& h_prev,
                          const Vector& h_next) const {
    Vector kx(w.size());
    forms_->apply_kappa_part(kappa, w, kx);
    Vector rhs = impl_->M * w - (impl_->A0 * w - impl_->M * w)  // = -dt/2 B0 w
                 - (0.5 * dt_) * kx + (0.5 * dt_) * (h_prev + h_next);
    return solve(rhs, kappa);
}

WState step(const WState& w, double dt, const DiscreteForms& forms, const KappaMatrix& kappa,
            const Vector& h_prev, const Vector& h_next) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    FpStepper stepper(forms, dt);
    WState out;
    out.coeffs = stepper.advance(w.coeffs, kappa, h_prev, h_next);
    if (!out.coeffs.allFinite()) throw std::runtime_error("step: non-finite solution");
    out.time = w.time + dt;
    return out;
}

ScalarFn reconstruct_f(const DiscreteForms& forms, const Vector& w_coeffs,
                       const BoundaryProfile& q, double t) {
    const DiscreteForms* f = &forms;
    const Vector w = w_coeffs;
    auto qf = q.q;
    const ModelParams params = forms.params();
    return [f, w, qf, t, params](const Vec2& m) {
        const double r = m.norm();
        const double theta = std::atan2(m[1], m[0]);
        const double rv = rho(m, params.b);
        return nu_weight(rv, params) * (f->evaluate(w, r, theta) + qf(t, m));
    };
}

double min_f_sample(const DiscreteForms& forms, const Vector& w_coeffs,
                    const BoundaryProfile& q, double t) {
    const auto& mesh = forms.grid().radial;
    const auto thetas = forms.grid().theta_points();
    const ModelParams& params = forms.params();
    double mn = 0.0;
    bool first = true;
    for (int i = 0; i <= mesh.n_cells(); ++i) {
        const double r = mesh.nodes[i];
        const double nu_i = nu_weight(mesh.node_rho(i), params);
        for (double th : thetas) {
            const Vec2 m(r * std::cos(th), r * std::sin(th));
            const double f = nu_i * (forms.evaluate(w_coeffs, r, th) + q.q(t, m));
            if (first || f < mn) { mn = f; first = false; }
        }
    }
    return mn;
}

double mass_of(const DiscreteForms& forms, const Vector& w_coeffs, const BoundaryProfile& q,
               double t) {
    double mass = forms.mass_weights().dot(w_coeffs);
    if (!q.is_zero) {
        auto qf = q.q;
        mass += weighted_integral([qf, t](const Vec2& m) { return qf(t, m); }, WeightKind::Nu,
                                  forms.grid(), forms.params());
    }
    return mass;
}

FpTrajectory solve_fp(const Vector& w0, const BoundaryProfile& q, const KappaPath& kappa_path,
                      double T, double dt, const DiscreteForms& forms,
                      const SolveOptions& opts) {
    if (T < 0.0) throw std::invalid_argument("solve_fp: T must be nonnegative");
    if (!(dt > 0.0)) throw std::invalid_argument("solve_fp: dt must be positive");
    FpTrajectory traj;
    traj.dt = dt;
    const int n_steps = (T == 0.0) ? 0 : static_cast<int>(std::llround(T / dt));

    FpStepper stepper(forms, dt);
    auto source_at = [&](double t, const KappaMatrix& kp) -> Vector {
        if (q.is_zero) return Vector::Zero(forms.layout().total);
        auto qf = q.q, qtf = q.qt;
        return forms.source_from_q(
            kp, [&](const Vec2& m) { return qf(t, m); },
            [&](const Vec2& m) { return qtf(t, m); });
    };
    auto record_at = [&](double t, const Vector& w) {
        DiagnosticsRecord rec;
        rec.t = t;
        rec.mass = mass_of(forms, w, q, t);
        rec.min_f = min_f_sample(forms, w, q, t);
        rec.l2mu = std::sqrt(std::max(0.0, forms.l2mu_sq(w)));
        rec.h1mu_semi = std::sqrt(std::max(0.0, forms.h1mu_semi_sq(w)));
        return rec;
    };

    Vector w = w0;
    double t = 0.0;
    traj.states.push_back({w, t});
    traj.records.push_back(record_at(t, w));

    // optional damped startup: backward Euler via the dt' = 2 dt factorization,
    // (M + dt B) w' = M w + dt h
    std::unique_ptr<FpStepper> be;
    if (opts.startup_be_steps > 0) be = std::make_unique<FpStepper>(forms, 2.0 * dt);

    KappaMatrix kappa_mid = kappa_path(0.5 * dt);
    Vector h_prev = source_at(0.0, kappa_mid);
    for (int s = 0; s < n_steps; ++s) {
        kappa_mid = kappa_path(t + 0.5 * dt);
        const Vector h_next = source_at(t + dt, kappa_mid);
        if (s < opts.startup_be_steps)
            w = be->solve(forms.mass_mu() * w + dt * h_next, kappa_mid);
        else
            w = stepper.advance(w, kappa_mid, h_prev, h_next);
        if (!w.allFinite()) throw std::runtime_error("solve_fp: non-finite state");
        t += dt;
        h_prev = h_next;
        if ((s + 1) % opts.snapshot_every == 0 || s + 1 == n_steps)
            traj.states.push_back({w, t});
        traj.records.push_back(record_at(t, w));
    }

    // central-difference mass slope
    auto& recs = traj.records;
    const int nr = static_cast<int>(recs.size());
    for (int i = 0; i < nr; ++i) {
        if (nr < 2) { recs[i].flux_rate = 0.0; continue; }
        if (i == 0)
            recs[i].flux_rate = (recs[1].mass - recs[0].mass) / dt;
        else if (i == nr - 1)
            recs[i].flux_rate = (recs[nr - 1].mass - recs[nr - 2].mass) / dt;
        else
            recs[i].flux_rate = (recs[i + 1].mass - recs[i - 1].mass) / (2.0 * dt);
    }
    return traj;
}

struct DualNorm::Impl {
    Eigen::SimplicialLDLT<SpMat> ldlt;
};

DualNorm::DualNorm(const DiscreteForms& forms) : impl_(std::make_unique<Impl>()) {
    SpMat H = forms.mass_mu() + 2.0 * forms.stiffness();
    impl_->ldlt.compute(H);
    if (impl_->ldlt.info() != Eigen::Success)
        throw std::runtime_error("DualNorm: H1_mu Gram factorization failed");
}
DualNorm::~DualNorm() = default;
DualNorm::DualNorm(DualNorm&&) noexcept = default;

double DualNorm::operator()(const Vector& h) const {
    return std::sqrt(std::max(0.0, h.dot(impl_->ldlt.solve(h))));
}

void export_trajectory_csv(const std::string& path, const FpTrajectory& traj,
                           const DiscreteForms& forms, const BoundaryProfile& q) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_trajectory_csv: cannot open " + path);
    out.precision(17);
    out << "t,r,theta,w,f\n";
    const auto& mesh = forms.grid().radial;
    const auto thetas = forms.grid().boundary_theta_points();
    const ModelParams& params = forms.params();
    for (const auto& st : traj.states) {
        for (int i = 0; i <= mesh.n_cells(); ++i) {
            const double r = mesh.nodes[i];
            const double nu_i = nu_weight(mesh.node_rho(i), params);
            for (double th : thetas) {
                const Vec2 m(r * std::cos(th), r * std::sin(th));
                const double w = forms.evaluate(st.coeffs, r, th);
                out << st.time << ',' << r << ',' << th << ',' << w << ','
                    << nu_i * (w + q.q(st.time, m)) << '\n';
            }
        }
    }
}

}  // namespace fene
