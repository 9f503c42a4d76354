#include "tpflow/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tpflow/rt0.hpp"

namespace tpf {

namespace {

struct CellArrays {
  Eigen::VectorXd lw, ln, lt, fw, fn, pc, dpc;
};

CellArrays cell_arrays(const Eigen::VectorXd& Sw, const FluidPair& fluids,
                       const RockModel& rock) {
  const int m = static_cast<int>(Sw.size());
  CellArrays a;
  a.lw.resize(m); a.ln.resize(m); a.lt.resize(m);
  a.fw.resize(m); a.fn.resize(m); a.pc.resize(m); a.dpc.resize(m);
  for (int i = 0; i < m; ++i) {
    const Mobility mo = mobilities(Sw[i], fluids, rock);
    a.lw[i] = mo.lw;
    a.ln[i] = mo.ln;
    a.lt[i] = mo.lt;
    a.fw[i] = mo.lw / mo.lt;
    a.fn[i] = 1.0 - a.fw[i];
    a.pc[i] = capillary_pressure(Sw[i], rock, i);
    a.dpc[i] = capillary_pressure_deriv(Sw[i], rock, i);
  }
  return a;
}

double depth(const FluidPair& fluids, const Vec2& x) {
  return fluids.grad_z.dot(x);
}

} // namespace

Simulator::Simulator(Mesh mesh, FluidPair fluids, RockModel rock,
                     Eigen::VectorXd Fw_density, Eigen::VectorXd Fn_density,
                     double pin_pressure)
    : mesh_(std::move(mesh)), fluids_(fluids), rock_(std::move(rock)),
      pin_pressure_(pin_pressure) {
  Fw_int_ = cell_integrals(mesh_, Fw_density);
  Fn_int_ = cell_integrals(mesh_, Fn_density);
  h_ = mesh_.min_diam();
  free_index_.assign(mesh_.n_edges(), -1);
  for (int e = 0; e < mesh_.n_edges(); ++e) {
    const BoundaryData* bd = mesh_.boundary_data(e);
    if (bd && bd->kind == BcKind::Dirichlet) has_dirichlet_ = true;
    if (!constrained(e)) {
      free_index_[e] = static_cast<int>(free_edges_.size());
      free_edges_.push_back(e);
    }
  }
}

bool Simulator::constrained(int edge) const {
  if (!mesh_.is_boundary(edge)) return false;
  const BoundaryData* bd = mesh_.boundary_data(edge);
  return !bd || bd->kind == BcKind::Neumann;
}

Eigen::VectorXd Simulator::constrained_values() const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh_.n_edges());
  for (int e = 0; e < mesh_.n_edges(); ++e) {
    if (!constrained(e)) continue;
    const BoundaryData* bd = mesh_.boundary_data(e);
    u[e] = bd ? bd->flux_t : 0.0;
  }
  return u;
}

SaddleSolution Simulator::reduced_saddle(const SpMat& A, const SpMat& B,
                                         const SpMat& C,
                                         const Eigen::VectorXd& ru_full,
                                         const Eigen::VectorXd& rp,
                                         const Eigen::VectorXd& u_fixed,
                                         Eigen::VectorXd* u_full) const {
  const int nf = static_cast<int>(free_edges_.size());
  const int m = mesh_.n_cells();
  SaddleSystem sys;
  std::vector<Eigen::Triplet<double>> ta, tb, tc;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = free_index_[it.row()], c = free_index_[it.col()];
      if (r >= 0 && c >= 0) ta.emplace_back(r, c, it.value());
    }
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      const int r = free_index_[it.row()];
      if (r >= 0) tb.emplace_back(r, static_cast<int>(it.col()), it.value());
    }
  for (int k = 0; k < C.outerSize(); ++k)
    for (SpMat::InnerIterator it(C, k); it; ++it) {
      const int r = free_index_[it.row()];
      if (r >= 0) tc.emplace_back(r, static_cast<int>(it.col()), it.value());
    }
  sys.A.resize(nf, nf);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(nf, m);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.C.resize(nf, m);
  sys.C.setFromTriplets(tc.begin(), tc.end());

  const Eigen::VectorXd au = A * u_fixed;
  const Eigen::VectorXd cu = C.transpose() * u_fixed;
  sys.ru.resize(nf);
  for (int i = 0; i < nf; ++i)
    sys.ru[i] = ru_full[free_edges_[i]] - au[free_edges_[i]];
  sys.rp = rp - cu;
  sys.pin = !has_dirichlet_;
  sys.pin_cell = 0;
  sys.pin_value = pin_pressure_;

  SaddleSolution sol = solve_saddle(sys);
  if (u_full) {
    *u_full = u_fixed;
    for (int i = 0; i < nf; ++i) (*u_full)[free_edges_[i]] = sol.u[i];
  }
  return sol;
}

Simulator::PressureSolution Simulator::pimpes_pressure_solve() const {
  const CellArrays a = cell_arrays(state_.Sw, fluids_, rock_);
  Eigen::VectorXd coef(mesh_.n_cells());
  for (int i = 0; i < mesh_.n_cells(); ++i) coef[i] = a.lt[i] * rock_.K[i];

  const SpMat A = assemble_mass(mesh_, coef);
  const SpMat B = assemble_divergence(mesh_);
  const double g = fluids_.g;
  const Eigen::VectorXd bD = dirichlet_vector(
      mesh_, [](const BoundaryData& bd, const Vec2&) { return bd.pn - bd.pw; });
  const Eigen::VectorXd gh =
      gravity_vector(mesh_, (fluids_.rho_n - fluids_.rho_w) * g, fluids_.grad_z);

  PressureSolution ps;
  ps.max_res = 0.0;

  // Step 1: capillary potential gradient, xi.n = 0 on Neumann edges
  const Eigen::VectorXd rhs1 = B * a.pc - bD - gh;
  {
    const int nf = static_cast<int>(free_edges_.size());
    std::vector<Eigen::Triplet<double>> ta;
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int r = free_index_[it.row()], c = free_index_[it.col()];
        if (r >= 0 && c >= 0) ta.emplace_back(r, c, it.value());
      }
    SpMat Aff(nf, nf);
    Aff.setFromTriplets(ta.begin(), ta.end());
    Eigen::VectorXd rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = rhs1[free_edges_[i]];
    double res = 0.0;
    const Eigen::VectorXd xf = solve_spd(Aff, rf, &res);
    ps.max_res = std::max(ps.max_res, res);
    ps.xi = Eigen::VectorXd::Zero(mesh_.n_edges());
    for (int i = 0; i < nf; ++i) ps.xi[free_edges_[i]] = xf[i];
  }

  // Step 2: total velocity and wetting pressure. The upwind directions must
  // agree with the phase velocities of the step being computed, otherwise a
  // stale donor at a sharp front can carry full-strength flux out of a cell
  // that holds (almost) none of the phase. We iterate to a fixed point of
  // the direction flags, starting from the previous step's reconstruction.
  const Eigen::VectorXd bc_vec = capillary_coupling(mesh_, ps.xi, a.fn, coef);
  const Eigen::VectorXd bwD = dirichlet_vector(
      mesh_, [](const BoundaryData& bd, const Vec2&) { return bd.pw; });
  const Eigen::VectorXd gw =
      gravity_vector(mesh_, fluids_.rho_w * g, fluids_.grad_z);
  const Eigen::VectorXd ru = bc_vec - bwD - gw;
  const Eigen::VectorXd rp = Fw_int_ + Fn_int_;

  ps.uw_dir = state_.uw_dir;
  ps.un_dir = state_.un_dir;
  constexpr int kMaxDirIters = 25;
  ps.dir_converged = false;
  std::vector<bool> flip_w(mesh_.n_edges(), false);
  std::vector<bool> flip_n(mesh_.n_edges(), false);
  const auto solve_step2 = [&]() {
    ps.fw_e = fw_edge(ps.traces, fluids_, rock_);
    ps.fn_e = fn_edge(ps.traces, fluids_, rock_);
    ps.fc_e = ps.fw_e.cwiseProduct(ps.fn_e);
    ps.Bw = upwinded_divergence(mesh_, ps.fw_e);
    ps.Bn = upwinded_divergence(mesh_, ps.fn_e);
    ps.Bc = upwinded_divergence(mesh_, ps.fc_e);
    const SpMat C = ps.Bw + ps.Bn;
    const SaddleSolution sol =
        reduced_saddle(A, B, C, ru, rp, constrained_values(), &ps.u);
    ps.max_res = std::max({ps.max_res, sol.res_u, sol.res_p});
    ps.compat_defect = sol.compat_defect;
    ps.pw = sol.p;
    ps.pn = ps.pw + a.pc;
  };
  for (int iter = 0; iter < kMaxDirIters; ++iter) {
    ps.dir_iters = iter + 1;
    ps.traces = compute_traces(mesh_, state_.Sw, ps.uw_dir, ps.un_dir);
    solve_step2();

    // Carrier velocities of each phase flux: q_w = f_w(S*_ww) w_w with
    // w_w = u_t - f_n(S*_wn) xi, and q_n = f_n(S*_wn) w_n with
    // w_n = u_t + f_w(S*_ww) xi. Using their signs as the direction flags
    // keeps the donor side consistent with the sign of the flux it feeds,
    // which is what the saturation-bounds argument needs.
    bool converged = true;
    for (int e = 0; e < mesh_.n_edges(); ++e) {
      const double uw = ps.u[e] - ps.fn_e[e] * ps.xi[e];
      const double un = ps.u[e] + ps.fw_e[e] * ps.xi[e];
      flip_w[e] = (uw >= 0.0) != (ps.uw_dir[e] >= 0.0);
      flip_n[e] = (un >= 0.0) != (ps.un_dir[e] >= 0.0);
      if (flip_w[e] || flip_n[e]) converged = false;
      ps.uw_dir[e] = uw;
      ps.un_dir[e] = un;
    }
    if (converged) {
      ps.dir_converged = true;
      break;
    }
  }
  if (!ps.dir_converged) {
    // An edge whose donor pick keeps flipping sits at a stagnation point of
    // the corresponding carrier velocity: neither donor choice is consistent
    // with the flux sign it produces. Give each phase its least mobile donor
    // on such edges (wetting: the drier side; non-wetting: the wetter side),
    // so the flux across the edge cannot exceed what either cell could shed,
    // and solve once more with these fractions.
    for (int e = 0; e < mesh_.n_edges(); ++e) {
      if (!flip_w[e] && !flip_n[e]) continue;
      const auto& ed = mesh_.edges[e];
      double s_in = state_.Sw[ed.cell_in];
      double s_out = s_in;
      if (mesh_.is_boundary(e)) {
        const BoundaryData* bd = mesh_.boundary_data(e);
        if (bd && bd->has_sw) s_out = bd->sw;
      } else {
        s_out = state_.Sw[ed.cell_out];
      }
      if (flip_w[e]) ps.traces.sww[e] = std::min(s_in, s_out);
      if (flip_n[e]) ps.traces.swn[e] = std::max(s_in, s_out);
    }
    solve_step2();
    for (int e = 0; e < mesh_.n_edges(); ++e) {
      ps.uw_dir[e] = ps.u[e] - ps.fn_e[e] * ps.xi[e];
      ps.un_dir[e] = ps.u[e] + ps.fw_e[e] * ps.xi[e];
    }
  }
  return ps;
}

void Simulator::init(const Eigen::VectorXd& Sw0) {
  if (Sw0.size() != mesh_.n_cells())
    throw std::runtime_error("initial saturation size mismatch");
  state_ = SimState{};
  state_.Sw = Sw0;
  state_.uw_dir = Eigen::VectorXd::Zero(mesh_.n_edges());
  state_.un_dir = Eigen::VectorXd::Zero(mesh_.n_edges());
  const PressureSolution ps = pimpes_pressure_solve();
  state_.ut = ps.u;
  state_.xic = ps.xi;
  state_.pw = ps.pw;
  state_.pn = ps.pn;
  state_.uw_dir = ps.uw_dir;
  state_.un_dir = ps.un_dir;
}

void Simulator::finish_step(StepData& d, const Eigen::VectorXd& Sw_new,
                            BoundsPolicy policy) {
  if (!Sw_new.allFinite())
    throw std::runtime_error("non-finite saturation after step " +
                             std::to_string(state_.step));
  d.Sw_pre = Sw_new;
  d.pre_min = Sw_new.minCoeff();
  d.pre_max = Sw_new.maxCoeff();
  d.violations = 0;
  for (int i = 0; i < Sw_new.size(); ++i)
    if (Sw_new[i] < 0.0 || Sw_new[i] > 1.0) ++d.violations;
  if (policy == BoundsPolicy::Clamp)
    state_.Sw = Sw_new.cwiseMax(0.0).cwiseMin(1.0);
  else
    state_.Sw = Sw_new;
  state_.t += d.dt;
  state_.step += 1;
}

StepData Simulator::pimpes_step(double dt) {
  StepData d;
  d.dt = dt;
  d.Sw_old = state_.Sw;
  const PressureSolution ps = pimpes_pressure_solve();

  const Eigen::VectorXd conv = ps.Bw.transpose() * ps.u;
  const Eigen::VectorXd cap = ps.Bc.transpose() * ps.xi;
  Eigen::VectorXd Sw_new(mesh_.n_cells());
  for (int j = 0; j < mesh_.n_cells(); ++j) {
    const double vol = rock_.phi[j] * mesh_.cells[j].area;
    Sw_new[j] = state_.Sw[j] - dt / vol * (conv[j] - Fw_int_[j] - cap[j]);
  }

  d.qw_e = ps.fw_e.cwiseProduct(ps.u) - ps.fc_e.cwiseProduct(ps.xi);
  d.qn_e = ps.fn_e.cwiseProduct(ps.u) + ps.fc_e.cwiseProduct(ps.xi);
  d.max_solver_res = ps.max_res;
  d.compat_defect = ps.compat_defect;
  d.dir_iters = ps.dir_iters;
  d.dir_converged = ps.dir_converged;

  // carrier velocities of the final assembly, the upwind directions of the next step
  // (and the initial guess of the next step's direction iteration)
  state_.uw_dir = ps.uw_dir;
  state_.un_dir = ps.un_dir;
  state_.ut = ps.u;
  state_.xic = ps.xi;
  state_.pw = ps.pw;
  state_.pn = ps.pn;
  finish_step(d, Sw_new, BoundsPolicy::RecordOnly);
  return d;
}

Eigen::VectorXd Simulator::pimpes_step_via_nonwetting(double dt) {
  const PressureSolution ps = pimpes_pressure_solve();
  const Eigen::VectorXd conv = ps.Bn.transpose() * ps.u;
  const Eigen::VectorXd cap = ps.Bc.transpose() * ps.xi;
  Eigen::VectorXd Sw_new(mesh_.n_cells());
  for (int j = 0; j < mesh_.n_cells(); ++j) {
    const double vol = rock_.phi[j] * mesh_.cells[j].area;
    const double Sn_old = 1.0 - state_.Sw[j];
    const double Sn_new = Sn_old - dt / vol * (conv[j] - Fn_int_[j] + cap[j]);
    Sw_new[j] = 1.0 - Sn_new;
  }
  return Sw_new;
}

StepData Simulator::hfimpes_step(double dt, BoundsPolicy policy) {
  StepData d;
  d.dt = dt;
  d.Sw_old = state_.Sw;
  const CellArrays a = cell_arrays(state_.Sw, fluids_, rock_);
  const double g = fluids_.g;
  const int m = mesh_.n_cells();

  // regularized non-wetting mobility keeps u_c well defined near S_w = 1
  const double ln_floor =
      std::pow(rock_.eps_s, rock_.beta) / fluids_.mu_n;
  Eigen::VectorXd coef_k(m), coef_t(m), ln_reg(m);
  for (int i = 0; i < m; ++i) {
    ln_reg[i] = std::max(a.ln[i], ln_floor);
    coef_k[i] = rock_.K[i];
    coef_t[i] = a.lt[i] * rock_.K[i];
  }

  const SpMat B = assemble_divergence(mesh_);
  const Eigen::VectorXd bD = dirichlet_vector(
      mesh_, [](const BoundaryData& bd, const Vec2&) { return bd.pn - bd.pw; });
  const Eigen::VectorXd gh =
      gravity_vector(mesh_, (fluids_.rho_n - fluids_.rho_w) * g, fluids_.grad_z);

  // Step 1: u_c = -lambda_n(S^n) K grad Phi_c. The mobility is a cell-wise
  // constant multiplying the Darcy flux, so we project G = -K grad Phi_c
  // into RT0 (mass matrix weighted by K^{-1}) and scale each edge DOF by
  // the average of the adjacent cell mobilities. Keeping lambda_n outside
  // the projection reproduces the reference scheme's behaviour at sharp
  // fronts, where a harmonic-type mobility weighting would spuriously
  // suppress the capillary flux through nearly saturated cells.
  const SpMat An = assemble_mass(mesh_, coef_k);
  const Eigen::VectorXd rhs1 = B * a.pc - bD - gh;
  Eigen::VectorXd uc = Eigen::VectorXd::Zero(mesh_.n_edges());
  double max_res = 0.0;
  {
    const int nf = static_cast<int>(free_edges_.size());
    std::vector<Eigen::Triplet<double>> ta;
    for (int k = 0; k < An.outerSize(); ++k)
      for (SpMat::InnerIterator it(An, k); it; ++it) {
        const int r = free_index_[it.row()], c = free_index_[it.col()];
        if (r >= 0 && c >= 0) ta.emplace_back(r, c, it.value());
      }
    SpMat Aff(nf, nf);
    Aff.setFromTriplets(ta.begin(), ta.end());
    Eigen::VectorXd rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = rhs1[free_edges_[i]];
    double res = 0.0;
    const Eigen::VectorXd xf = solve_spd(Aff, rf, &res);
    max_res = std::max(max_res, res);
    for (int i = 0; i < nf; ++i) uc[free_edges_[i]] = xf[i];
  }
  for (int e = 0; e < mesh_.n_edges(); ++e) {
    const auto& ed = mesh_.edges[e];
    double lam = ln_reg[ed.cell_in];
    if (!mesh_.is_boundary(e)) lam = 0.5 * (lam + ln_reg[ed.cell_out]);
    uc[e] *= lam;
  }

  // Step 2: mixed solve for (u_a, Phi_w)
  const SpMat At = assemble_mass(mesh_, coef_t);
  const Eigen::VectorXd bPhiD = dirichlet_vector(
      mesh_, [&](const BoundaryData& bd, const Vec2& x) {
        return bd.pw + fluids_.rho_w * g * depth(fluids_, x);
      });
  const Eigen::VectorXd ru = -bPhiD;
  const Eigen::VectorXd rp = Fw_int_ + Fn_int_ - B.transpose() * uc;
  Eigen::VectorXd ua;
  const SaddleSolution sol =
      reduced_saddle(At, B, B, ru, rp, constrained_values(), &ua);
  max_res = std::max({max_res, sol.res_u, sol.res_p});
  d.compat_defect = sol.compat_defect;

  Eigen::VectorXd pw(m), pn(m);
  for (int i = 0; i < m; ++i) {
    pw[i] = sol.p[i] -
            fluids_.rho_w * g * depth(fluids_, mesh_.cells[i].centroid);
    pn[i] = pw[i] + a.pc[i];
  }

  // Step 3: explicit upwind update of S_w only, directions from u_a itself
  const UpwindTraces tr = compute_traces(mesh_, state_.Sw, ua, ua);
  const Eigen::VectorXd fw_a = fw_edge(tr, fluids_, rock_);
  const SpMat Bw = upwinded_divergence(mesh_, fw_a);
  const Eigen::VectorXd conv = Bw.transpose() * ua;
  Eigen::VectorXd Sw_new(m);
  for (int j = 0; j < m; ++j) {
    const double vol = rock_.phi[j] * mesh_.cells[j].area;
    Sw_new[j] = state_.Sw[j] - dt / vol * (conv[j] - Fw_int_[j]);
  }

  d.qw_e = fw_a.cwiseProduct(ua);
  d.qn_e = (ua + uc) - d.qw_e;
  d.max_solver_res = max_res;

  state_.ut = ua + uc;
  state_.xic = uc;
  state_.pw = pw;
  state_.pn = pn;
  state_.uw_dir = d.qw_e;
  state_.un_dir = d.qn_e;
  finish_step(d, Sw_new, policy);
  return d;
}

StepData Simulator::std_impes_step(double dt, BoundsPolicy policy) {
  StepData d;
  d.dt = dt;
  d.Sw_old = state_.Sw;
  const CellArrays a = cell_arrays(state_.Sw, fluids_, rock_);
  const double g = fluids_.g;
  const int m = mesh_.n_cells();

  // least-squares cell gradients of S_w over face neighbors
  std::vector<Vec2> gradS(m, Vec2::Zero());
  for (int ci = 0; ci < m; ++ci) {
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    Vec2 r = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      const auto& e = mesh_.edges[mesh_.cells[ci].edge[i]];
      const int nb = e.cell_in == ci ? e.cell_out : e.cell_in;
      if (nb < 0) continue;
      const Vec2 dx = mesh_.cells[nb].centroid - mesh_.cells[ci].centroid;
      M += dx * dx.transpose();
      r += dx * (state_.Sw[nb] - state_.Sw[ci]);
    }
    const double det = M.determinant();
    if (det > 1e-12 * M.trace() * M.trace()) gradS[ci] = M.inverse() * r;
  }

  Eigen::VectorXd coef_t(m);
  for (int i = 0; i < m; ++i) coef_t[i] = a.lt[i] * rock_.K[i];
  const SpMat At = assemble_mass(mesh_, coef_t);
  const SpMat B = assemble_divergence(mesh_);

  // capillary/gravity drift on the velocity equation
  Eigen::VectorXd wvec = Eigen::VectorXd::Zero(mesh_.n_edges());
  for (int ci = 0; ci < m; ++ci) {
    const auto& c = mesh_.cells[ci];
    const double lrho = a.lw[ci] * fluids_.rho_w + a.ln[ci] * fluids_.rho_n;
    const Vec2 w = (a.ln[ci] / a.lt[ci]) * a.dpc[ci] * gradS[ci] +
                   (lrho / a.lt[ci]) * g * fluids_.grad_z;
    for (int i = 0; i < 3; ++i) {
      const Vec2 integral = c.sign[i] * mesh_.edges[c.edge[i]].length / 2.0 *
                            (c.centroid - mesh_.vertices[c.v[i]]);
      wvec[c.edge[i]] += w.dot(integral);
    }
  }

  const Eigen::VectorXd bwD = dirichlet_vector(
      mesh_, [](const BoundaryData& bd, const Vec2&) { return bd.pw; });
  const Eigen::VectorXd ru = -bwD - wvec;
  const Eigen::VectorXd rp = Fw_int_ + Fn_int_;
  Eigen::VectorXd ut;
  const SaddleSolution sol =
      reduced_saddle(At, B, B, ru, rp, constrained_values(), &ut);
  d.compat_defect = sol.compat_defect;

  // explicit saturation update: upwinded convection + averaged diffusion
  const UpwindTraces tr = compute_traces(mesh_, state_.Sw, ut, ut);
  const Eigen::VectorXd fw_t = fw_edge(tr, fluids_, rock_);
  std::vector<Vec2> dvec(m);
  for (int ci = 0; ci < m; ++ci)
    dvec[ci] = a.ln[ci] * a.fw[ci] * rock_.K[ci] *
               (a.dpc[ci] * gradS[ci] -
                (fluids_.rho_w - fluids_.rho_n) * g * fluids_.grad_z);
  Eigen::VectorXd qd = Eigen::VectorXd::Zero(mesh_.n_edges());
  for (int e = 0; e < mesh_.n_edges(); ++e) {
    const auto& ed = mesh_.edges[e];
    if (mesh_.is_boundary(e)) {
      const BoundaryData* bd = mesh_.boundary_data(e);
      if (bd && bd->kind == BcKind::Dirichlet)
        qd[e] = dvec[ed.cell_in].dot(ed.normal);
      continue; // Neumann: phase fluxes are prescribed through flux_t
    }
    qd[e] = 0.5 * (dvec[ed.cell_in] + dvec[ed.cell_out]).dot(ed.normal);
  }

  Eigen::VectorXd Sw_new(m);
  for (int ci = 0; ci < m; ++ci) {
    const auto& c = mesh_.cells[ci];
    double flux = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int e = c.edge[i];
      flux += c.sign[i] * mesh_.edges[e].length * (fw_t[e] * ut[e] + qd[e]);
    }
    const double vol = rock_.phi[ci] * c.area;
    Sw_new[ci] = state_.Sw[ci] - dt / vol * (flux - Fw_int_[ci]);
  }

  d.qw_e = fw_t.cwiseProduct(ut) + qd;
  d.qn_e = ut - d.qw_e;
  d.max_solver_res = std::max(sol.res_u, sol.res_p);

  state_.ut = ut;
  state_.xic = Eigen::VectorXd::Zero(mesh_.n_edges());
  state_.pw = sol.p;
  state_.pn = sol.p + a.pc;
  state_.uw_dir = d.qw_e;
  state_.un_dir = d.qn_e;
  finish_step(d, Sw_new, policy);
  return d;
}

StepData Simulator::step(Scheme scheme, double dt, BoundsPolicy policy) {
  switch (scheme) {
  case Scheme::PIMPES:
    return pimpes_step(dt);
  case Scheme::HFIMPES:
    return hfimpes_step(dt, policy);
  case Scheme::STDIMPES:
    return std_impes_step(dt, policy);
  }
  throw std::runtime_error("unknown scheme");
}

double Simulator::suggest_dt(const SchemeConfig& cfg) const {
  // Bound the per-cell saturation change by cfl_target:
  // dS <= dt * sum_e |F_e| v_e / (phi |K|), where v_e covers the total,
  // phase, and capillary (f_w f_n <= 1/4) edge speeds.
  double dt = cfg.dt_max;
  for (int k = 0; k < mesh_.n_cells(); ++k) {
    double outflux = 0.0;
    for (int le = 0; le < 3; ++le) {
      const int e = mesh_.cells[k].edge[le];
      const double v =
          std::max({std::abs(state_.ut[e]), std::abs(state_.uw_dir[e]),
                    std::abs(state_.un_dir[e]), 0.25 * std::abs(state_.xic[e])});
      outflux += mesh_.edges[e].length * v;
    }
    if (outflux > 0.0)
      dt = std::min(dt, cfg.cfl_target * rock_.phi[k] *
                            mesh_.cells[k].area / outflux);
  }
  return std::clamp(dt, cfg.dt_min, cfg.dt_max);
}

void Simulator::run(const SchemeConfig& cfg, const StepCallback& on_step) {
  for (int k = 0; cfg.max_steps == 0 || k < cfg.max_steps; ++k) {
    if (cfg.end_time > 0.0 && state_.t >= cfg.end_time * (1.0 - 1e-12)) break;
    double dt = cfg.adaptive ? suggest_dt(cfg) : cfg.dt;
    if (cfg.end_time > 0.0) dt = std::min(dt, cfg.end_time - state_.t);
    if (!(dt > 0.0)) throw std::runtime_error("nonpositive time step size");
    const BoundsPolicy policy =
        cfg.scheme == Scheme::PIMPES ? BoundsPolicy::RecordOnly : cfg.policy;
    const StepData d = step(cfg.scheme, dt, policy);
    if (on_step) on_step(*this, d);
    if (cfg.max_steps == 0 && cfg.end_time <= 0.0) break; // safety
  }
}

void write_state(std::ostream& out, const SimState& s) {
  out.precision(17);
  out << "TPFSTATE 1\n";
  out << s.t << " " << s.step << " " << s.Sw.size() << " " << s.ut.size()
      << "\n";
  for (int i = 0; i < s.Sw.size(); ++i)
    out << s.Sw[i] << " " << s.pw[i] << " " << s.pn[i] << "\n";
  for (int e = 0; e < s.ut.size(); ++e)
    out << s.ut[e] << " " << s.xic[e] << " " << s.uw_dir[e] << " "
        << s.un_dir[e] << "\n";
}

SimState read_state(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "TPFSTATE" || version != 1)
    throw std::runtime_error("unrecognized state file header");
  SimState s;
  int ncell = 0, nedge = 0;
  in >> s.t >> s.step >> ncell >> nedge;
  s.Sw.resize(ncell); s.pw.resize(ncell); s.pn.resize(ncell);
  for (int i = 0; i < ncell; ++i) in >> s.Sw[i] >> s.pw[i] >> s.pn[i];
  s.ut.resize(nedge); s.xic.resize(nedge);
  s.uw_dir.resize(nedge); s.un_dir.resize(nedge);
  for (int e = 0; e < nedge; ++e)
    in >> s.ut[e] >> s.xic[e] >> s.uw_dir[e] >> s.un_dir[e];
  if (!in) throw std::runtime_error("truncated state file");
  return s;
}

} // namespace tpf
