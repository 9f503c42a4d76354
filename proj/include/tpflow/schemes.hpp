#pragma once

#include <functional>
#include <iosfwd>

#include "tpflow/linsolve.hpp"
#include "tpflow/mesh.hpp"
#include "tpflow/physics.hpp"
#include "tpflow/upwind.hpp"

namespace tpf {

enum class Scheme { PIMPES, HFIMPES, STDIMPES };
enum class BoundsPolicy { RecordOnly, Clamp };

struct SchemeConfig {
  Scheme scheme = Scheme::PIMPES;
  double dt = 0.0; // fixed step size (s); ignored in adaptive mode
  bool adaptive = false;
  double cfl_target = 0.3;
  double dt_min = 1.0;
  double dt_max = 86400.0;
  int max_steps = 0;
  double end_time = 0.0; // 0: run exactly max_steps
  BoundsPolicy policy = BoundsPolicy::RecordOnly;
  double pin_pressure = 0.0; // pressure gauge for all-Neumann problems
};

/// Full simulation state. S_n is stored implicitly as 1 - S_w, so the
/// saturation-sum identity holds exactly.
struct SimState {
  double t = 0.0;
  int step = 0;
  Eigen::VectorXd Sw;           // per cell
  Eigen::VectorXd pw, pn;       // per cell (Pa)
  Eigen::VectorXd ut, xic;      // per edge normal flux densities (m/s)
  Eigen::VectorXd uw_dir, un_dir; // averaged phase normal traces ({u_a.n})
};

/// Everything a step produced that diagnostics and ledgers consume.
struct StepData {
  double dt = 0.0;
  Eigen::VectorXd Sw_old;
  Eigen::VectorXd Sw_pre; // before any clamping
  Eigen::VectorXd qw_e, qn_e; // per-edge phase normal flux densities
  int violations = 0;
  double pre_min = 0.0, pre_max = 0.0;
  double max_solver_res = 0.0;
  double compat_defect = 0.0;
  int dir_iters = 0;          // upwind-direction fixed-point iterations
  bool dir_converged = true;
};

class Simulator {
public:
  Simulator(Mesh mesh, FluidPair fluids, RockModel rock,
            Eigen::VectorXd Fw_density, Eigen::VectorXd Fn_density,
            double pin_pressure = 0.0);

  /// Sets the initial saturation and bootstraps the phase-velocity
  /// directions by one pressure solve at t = 0.
  void init(const Eigen::VectorXd& Sw0);

  StepData step(Scheme scheme, double dt,
                BoundsPolicy policy = BoundsPolicy::RecordOnly);
  StepData pimpes_step(double dt);
  StepData hfimpes_step(double dt, BoundsPolicy policy);
  StepData std_impes_step(double dt, BoundsPolicy policy);

  /// Step-size suggestion for adaptive mode: cfl_target * h / max |u_t.n|
  /// of the previous step, clamped to [dt_min, dt_max].
  double suggest_dt(const SchemeConfig& cfg) const;

  using StepCallback = std::function<void(const Simulator&, const StepData&)>;
  void run(const SchemeConfig& cfg, const StepCallback& on_step = {});

  const SimState& state() const { return state_; }
  SimState& state() { return state_; }
  const Mesh& mesh() const { return mesh_; }
  const FluidPair& fluids() const { return fluids_; }
  const RockModel& rock() const { return rock_; }
  const Eigen::VectorXd& source_w() const { return Fw_int_; } // cell integrals
  const Eigen::VectorXd& source_n() const { return Fn_int_; }
  bool has_dirichlet() const { return has_dirichlet_; }
  double mesh_h() const { return h_; }

  /// Test hook: update S_w via the non-wetting equation (alpha = n) instead
  /// of alpha = w; returns the resulting S_w for comparison.
  Eigen::VectorXd pimpes_step_via_nonwetting(double dt);

private:
  struct PressureSolution {
    Eigen::VectorXd xi, u, pw, pn;
    Eigen::VectorXd uw_dir, un_dir; // directions the final assembly used
    UpwindTraces traces;
    Eigen::VectorXd fw_e, fn_e, fc_e;
    SpMat Bw, Bn, Bc;
    double max_res = 0.0;
    double compat_defect = 0.0;
    int dir_iters = 0;      // direction fixed-point iterations used
    bool dir_converged = true;
  };
  PressureSolution pimpes_pressure_solve() const;
  Eigen::VectorXd constrained_values() const; // prescribed u_t on Neumann
  bool constrained(int edge) const;
  SaddleSolution reduced_saddle(const SpMat& A, const SpMat& B, const SpMat& C,
                                const Eigen::VectorXd& ru_full,
                                const Eigen::VectorXd& rp,
                                const Eigen::VectorXd& u_fixed,
                                Eigen::VectorXd* u_full) const;
  void finish_step(StepData& d, const Eigen::VectorXd& Sw_new,
                   BoundsPolicy policy);

  Mesh mesh_;
  FluidPair fluids_;
  RockModel rock_;
  Eigen::VectorXd Fw_int_, Fn_int_; // cell integrals of the source densities
  double pin_pressure_ = 0.0;
  bool has_dirichlet_ = false;
  double h_ = 0.0;
  std::vector<int> free_edges_;
  std::vector<int> free_index_; // edge -> position in free_edges_, or -1
  SimState state_;
};

/// Versioned text checkpoint of the full state.
void write_state(std::ostream& out, const SimState& s);
SimState read_state(std::istream& in);

} // namespace tpf
