#pragma once

#include <iosfwd>
#include <vector>

#include "tpflow/schemes.hpp"

namespace tpf {

/// Per-step bookkeeping row of the two wetting-phase mass ledgers
/// (inflow-based and discharge-based) and the non-wetting counterparts.
/// With exact local conservation the two ledgers coincide step by step.
struct LedgerRow {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double S_IO_w = 0.0; // mean old S_w plus inflow volume / pore volume
  double S_ND_w = 0.0; // mean new S_w plus outflow volume / pore volume
  double S_O_n = 0.0;  // non-wetting analogue of S_IO
  double S_RD_n = 0.0; // non-wetting analogue of S_ND
  double eta = 0.0;    // running overshoot indicator
  double cfl = 0.0;
  double minS = 0.0, maxS = 0.0; // pre-clamp bounds of the step
};

/// Time-integrated overshoot indicator
/// eta = 1 - sqrt(sum dt sum |K| (S chi)^2) / sqrt(sum dt sum |K| S^2)
/// evaluated on pre-clamp saturations; chi is the indicator of [0,1].
class EtaAccumulator {
public:
  void add(const Mesh& mesh, const Eigen::VectorXd& Sw_pre, double dt);
  double value() const;

private:
  double num_ = 0.0; // sum dt sum |K| (S chi)^2
  double den_ = 0.0; // sum dt sum |K| S^2
};

/// Pore-volume-weighted mean saturation.
double mean_saturation(const Mesh& mesh, const RockModel& rock,
                       const Eigen::VectorXd& S);

/// Signed boundary phase volumes of one step: in.first/second are the
/// wetting/non-wetting inflow volumes (m3, positive into the domain),
/// out.* the outflow volumes, from the scheme's per-edge flux densities
/// plus the cell source integrals.
struct StepVolumes {
  double in_w = 0.0, out_w = 0.0;
  double in_n = 0.0, out_n = 0.0;
};
StepVolumes step_volumes(const Mesh& mesh, const StepData& d,
                         const Eigen::VectorXd& Fw_int,
                         const Eigen::VectorXd& Fn_int);

/// Running mass ledger; feed every accepted step in order.
class MassLedger {
public:
  MassLedger(const Mesh& mesh, const RockModel& rock,
             const Eigen::VectorXd& Fw_int, const Eigen::VectorXd& Fn_int);

  LedgerRow add(const Simulator& sim, const StepData& d);
  const std::vector<LedgerRow>& rows() const { return rows_; }
  double eta() const { return eta_.value(); }
  /// max over steps of |S_IO_w - S_ND_w|
  double max_defect() const { return max_defect_; }

private:
  const Mesh& mesh_;
  const RockModel& rock_;
  Eigen::VectorXd Fw_int_, Fn_int_;
  double pore_volume_ = 0.0;
  double max_defect_ = 0.0;
  EtaAccumulator eta_;
  std::vector<LedgerRow> rows_;
};

/// CFL number of a step: max_e |u_t.n| * dt / h with h the minimum cell
/// diameter.
double cfl_number(const Mesh& mesh, const Eigen::VectorXd& ut, double dt,
                  double h);

/// Per-cell local conservation residual of a wetting-phase step, relative
/// to the cell pore volume rate: the discrete update law re-evaluated from
/// the stored fluxes. Returns the max over cells.
double local_conservation_residual(const Mesh& mesh, const RockModel& rock,
                                   const StepData& d,
                                   const Eigen::VectorXd& Fw_int);

/// Rightmost x whose cell has S_w above the threshold (front tracking on
/// left-to-right displacement), or 0 if none.
double front_position(const Mesh& mesh, const Eigen::VectorXd& Sw,
                      double threshold);

/// CSV with >= 12 significant digits:
/// step,t_days,S_IO_w,S_ND_w,S_O_n,S_RD_n,eta,cfl,minS,maxS
void write_ledger_csv(std::ostream& out, const std::vector<LedgerRow>& rows);

} // namespace tpf
