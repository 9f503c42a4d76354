#include "tpflow/diagnostics.hpp"

#include <cmath>
#include <ostream>

namespace tpf {

void EtaAccumulator::add(const Mesh& mesh, const Eigen::VectorXd& Sw_pre,
                         double dt) {
  for (int i = 0; i < mesh.n_cells(); ++i) {
    const double s = Sw_pre[i];
    const double a = mesh.cells[i].area;
    den_ += dt * a * s * s;
    if (s >= 0.0 && s <= 1.0) num_ += dt * a * s * s;
  }
}

double EtaAccumulator::value() const {
  if (den_ <= 0.0) return 0.0;
  return 1.0 - std::sqrt(num_) / std::sqrt(den_);
}

double mean_saturation(const Mesh& mesh, const RockModel& rock,
                       const Eigen::VectorXd& S) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < mesh.n_cells(); ++i) {
    const double vp = rock.phi[i] * mesh.cells[i].area;
    num += vp * S[i];
    den += vp;
  }
  return num / den;
}

StepVolumes step_volumes(const Mesh& mesh, const StepData& d,
                         const Eigen::VectorXd& Fw_int,
                         const Eigen::VectorXd& Fn_int) {
  StepVolumes v;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (!mesh.is_boundary(e)) continue;
    // boundary normals point outward, so positive flux density is outflow
    const double qw = d.qw_e[e] * mesh.edges[e].length * d.dt;
    const double qn = d.qn_e[e] * mesh.edges[e].length * d.dt;
    (qw >= 0.0 ? v.out_w : v.in_w) += std::abs(qw);
    (qn >= 0.0 ? v.out_n : v.in_n) += std::abs(qn);
  }
  for (int j = 0; j < mesh.n_cells(); ++j) {
    const double sw = Fw_int[j] * d.dt;
    const double sn = Fn_int[j] * d.dt;
    (sw >= 0.0 ? v.in_w : v.out_w) += std::abs(sw);
    (sn >= 0.0 ? v.in_n : v.out_n) += std::abs(sn);
  }
  return v;
}

MassLedger::MassLedger(const Mesh& mesh, const RockModel& rock,
                       const Eigen::VectorXd& Fw_int,
                       const Eigen::VectorXd& Fn_int)
    : mesh_(mesh), rock_(rock), Fw_int_(Fw_int), Fn_int_(Fn_int) {
  for (int i = 0; i < mesh_.n_cells(); ++i)
    pore_volume_ += rock_.phi[i] * mesh_.cells[i].area;
}

LedgerRow MassLedger::add(const Simulator& sim, const StepData& d) {
  const StepVolumes v = step_volumes(mesh_, d, Fw_int_, Fn_int_);
  const Eigen::VectorXd Sn_old = Eigen::VectorXd::Ones(d.Sw_old.size()) -
                                 d.Sw_old;
  const Eigen::VectorXd Sn_pre = Eigen::VectorXd::Ones(d.Sw_pre.size()) -
                                 d.Sw_pre;
  LedgerRow r;
  r.step = sim.state().step;
  r.t = sim.state().t;
  r.dt = d.dt;
  r.S_IO_w = mean_saturation(mesh_, rock_, d.Sw_old) + v.in_w / pore_volume_;
  r.S_ND_w = mean_saturation(mesh_, rock_, d.Sw_pre) + v.out_w / pore_volume_;
  r.S_O_n = mean_saturation(mesh_, rock_, Sn_old) + v.in_n / pore_volume_;
  r.S_RD_n = mean_saturation(mesh_, rock_, Sn_pre) + v.out_n / pore_volume_;
  max_defect_ = std::max(max_defect_, std::abs(r.S_IO_w - r.S_ND_w));
  eta_.add(mesh_, d.Sw_pre, d.dt);
  r.eta = eta_.value();
  r.cfl = cfl_number(mesh_, sim.state().ut, d.dt, sim.mesh_h());
  r.minS = d.pre_min;
  r.maxS = d.pre_max;
  rows_.push_back(r);
  return r;
}

double cfl_number(const Mesh& mesh, const Eigen::VectorXd& ut, double dt,
                  double h) {
  (void)mesh;
  const double umax = ut.size() ? ut.cwiseAbs().maxCoeff() : 0.0;
  return umax * dt / h;
}

double local_conservation_residual(const Mesh& mesh, const RockModel& rock,
                                   const StepData& d,
                                   const Eigen::VectorXd& Fw_int) {
  double worst = 0.0;
  for (int j = 0; j < mesh.n_cells(); ++j) {
    const auto& c = mesh.cells[j];
    double flux = 0.0;
    for (int i = 0; i < 3; ++i)
      flux += c.sign[i] * mesh.edges[c.edge[i]].length * d.qw_e[c.edge[i]];
    const double vol = rock.phi[j] * c.area;
    const double predicted =
        d.Sw_old[j] - d.dt / vol * (flux - Fw_int[j]);
    const double scale =
        std::max({1.0, std::abs(d.Sw_old[j]), std::abs(d.Sw_pre[j])});
    worst = std::max(worst, std::abs(d.Sw_pre[j] - predicted) / scale);
  }
  return worst;
}

double front_position(const Mesh& mesh, const Eigen::VectorXd& Sw,
                      double threshold) {
  double x = 0.0;
  for (int i = 0; i < mesh.n_cells(); ++i)
    if (Sw[i] > threshold) x = std::max(x, mesh.cells[i].centroid.x());
  return x;
}

void write_ledger_csv(std::ostream& out, const std::vector<LedgerRow>& rows) {
  out.precision(14);
  out << "step,t_days,S_IO_w,S_ND_w,S_O_n,S_RD_n,eta,cfl,minS,maxS\n";
  for (const auto& r : rows)
    out << r.step << "," << r.t / 86400.0 << "," << r.S_IO_w << ","
        << r.S_ND_w << "," << r.S_O_n << "," << r.S_RD_n << "," << r.eta
        << "," << r.cfl << "," << r.minS << "," << r.maxS << "\n";
}

} // namespace tpf
