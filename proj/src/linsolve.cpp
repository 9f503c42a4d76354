#include "tpflow/linsolve.hpp"

#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace tpf {

namespace {

double mat_norm(const SpMat& A) {
  double norm = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    double col = 0.0;
    for (SpMat::InnerIterator it(A, k); it; ++it) col += std::abs(it.value());
    norm = std::max(norm, col);
  }
  return norm;
}

[[noreturn]] void fail(const std::string& what, double residual) {
  std::ostringstream os;
  os << what << " (residual " << residual << ")";
  throw SolverError(os.str());
}

} // namespace

Eigen::VectorXd solve_spd(const SpMat& A, const Eigen::VectorXd& b,
                          double* residual) {
  Eigen::SimplicialLDLT<SpMat> solver(A);
  if (solver.info() != Eigen::Success)
    throw SolverError("SPD factorization breakdown");
  const Eigen::VectorXd x = solver.solve(b);
  const double res = (A * x - b).norm();
  const double scale = mat_norm(A) * x.norm() + b.norm();
  const double rel = scale > 0.0 ? res / scale : res;
  if (residual) *residual = rel;
  if (!(rel <= kSolveTol)) fail("SPD solve exceeded residual contract", rel);
  return x;
}

SaddleSolution solve_saddle(const SaddleSystem& sys) {
  const int n = static_cast<int>(sys.A.rows());
  const int m = static_cast<int>(sys.B.cols());
  Eigen::VectorXd rp = sys.rp;
  SaddleSolution sol;

  if (sys.pin) {
    // Incompressibility requires net source + boundary flux = 0; repair the
    // mean defect and report its relative size.
    const double defect = rp.sum();
    const double scale = rp.cwiseAbs().sum();
    sol.compat_defect = scale > 0.0 ? std::abs(defect) / scale
                                    : std::abs(defect);
    if (sol.compat_defect > kSolveTol)
      fail("all-Neumann compatibility defect too large", sol.compat_defect);
    rp.array() -= defect / m;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + 1);
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.A, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.B, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()),
                         n + static_cast<int>(it.col()), -it.value());
  for (int k = 0; k < sys.C.outerSize(); ++k)
    for (SpMat::InnerIterator it(sys.C, k); it; ++it) {
      const int cell = static_cast<int>(it.col());
      if (sys.pin && cell == sys.pin_cell) continue;
      trips.emplace_back(n + cell, static_cast<int>(it.row()), it.value());
    }
  Eigen::VectorXd rhs(n + m);
  rhs.head(n) = sys.ru;
  rhs.tail(m) = rp;
  if (sys.pin) {
    // replace the pinned cell's mass-balance row by the gauge equation;
    // the dropped row is the negated sum of the others
    trips.emplace_back(n + sys.pin_cell, n + sys.pin_cell, 1.0);
    rhs[n + sys.pin_cell] = sys.pin_value;
  }
  SpMat block(n + m, n + m);
  block.setFromTriplets(trips.begin(), trips.end());

  Eigen::SparseLU<SpMat> lu;
  lu.compute(block);
  if (lu.info() != Eigen::Success)
    throw SolverError("saddle-point factorization failed (singular system)");
  const Eigen::VectorXd x = lu.solve(rhs);
  sol.u = x.head(n);
  sol.p = x.tail(m);
  if (sys.pin) sol.p[sys.pin_cell] = sys.pin_value; // exact by construction

  const Eigen::VectorXd res_u = sys.A * sol.u - sys.B * sol.p - sys.ru;
  const double su = mat_norm(sys.A) * sol.u.norm() +
                    mat_norm(sys.B) * sol.p.norm() + sys.ru.norm();
  sol.res_u = su > 0.0 ? res_u.norm() / su : res_u.norm();

  Eigen::VectorXd res_p = sys.C.transpose() * sol.u - rp;
  if (sys.pin) res_p[sys.pin_cell] = 0.0;
  // anchor the velocity scale to the forcing as well: when the solution is
  // a pure hydrostatic constant, u is roundoff noise around zero and the
  // meaningful scale comes from the pressure block
  const double na = mat_norm(sys.A);
  const double u_scale =
      std::max(sol.u.norm(),
               na > 0.0 ? (mat_norm(sys.B) * sol.p.norm() + sys.ru.norm()) / na
                        : 0.0);
  const double sp = mat_norm(sys.C) * u_scale + rp.norm();
  sol.res_p = sp > 0.0 ? res_p.norm() / sp : res_p.norm();

  if (!(sol.res_u <= kSolveTol))
    fail("saddle solve velocity-block residual contract violated", sol.res_u);
  if (!(sol.res_p <= kSolveTol))
    fail("saddle solve mass-block residual contract violated", sol.res_p);
  return sol;
}

} // namespace tpf
