#include "tpflow/physics.hpp"

#include <algorithm>
#include <cmath>

namespace tpf {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

} // namespace

double effective_saturation(double sw, const RockModel& rock,
                            bool clamp_for_pc) {
  const double se = (sw - rock.S_rw) / (1.0 - rock.S_rn - rock.S_rw);
  if (clamp_for_pc) return std::clamp(se, rock.eps_s, 1.0);
  return se;
}

Mobility mobilities(double sw, const FluidPair& fluids,
                    const RockModel& rock) {
  const double se =
      std::clamp(effective_saturation(sw, rock), 0.0, 1.0);
  Mobility m;
  m.lw = ipow(se, rock.beta) / fluids.mu_w;
  m.ln = ipow(1.0 - se, rock.beta) / fluids.mu_n;
  m.lt = m.lw + m.ln;
  return m;
}

double frac_w(double sw, const FluidPair& fluids, const RockModel& rock) {
  const Mobility m = mobilities(sw, fluids, rock);
  return m.lw / m.lt;
}

double capillary_pressure(double sw, const RockModel& rock, int cell) {
  if (rock.Bc == 0.0) return 0.0;
  const double coef = rock.Bc / std::sqrt(rock.K[cell]);
  const double se = effective_saturation(sw, rock);
  if (!rock.mirrored)
    return -coef * std::log(std::clamp(se, rock.eps_s, 1.0));
  return coef * std::log(std::clamp(1.0 - se, rock.eps_s, 1.0));
}

double capillary_pressure_deriv(double sw, const RockModel& rock, int cell) {
  if (rock.Bc == 0.0) return 0.0;
  const double coef = rock.Bc / std::sqrt(rock.K[cell]);
  const double denom = 1.0 - rock.S_rn - rock.S_rw;
  const double se = effective_saturation(sw, rock);
  if (!rock.mirrored) {
    if (se <= rock.eps_s || se >= 1.0) return 0.0;
    return -coef / (se * denom);
  }
  if (1.0 - se <= rock.eps_s || se <= 0.0) return 0.0;
  return -coef / ((1.0 - se) * denom);
}

} // namespace tpf
