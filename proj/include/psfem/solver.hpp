#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/CholmodSupport>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include "psfem/assembly.hpp"
#include "psfem/errors.hpp"

namespace psfem {

enum class LinearSolverKind { Auto, Cholesky, LU };

struct LinearSolveInfo {
  bool used_cholesky = false;
  double relative_residual = 0.0;
};

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// rhs - K x with long double accumulation.
inline Eigen::VectorXd extended_residual(const SparseMatrix& K, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& rhs) {
  std::vector<long double> acc(rhs.data(), rhs.data() + rhs.size());
  for (int c = 0; c < K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(K, c); it; ++it)
      acc[it.row()] -= static_cast<long double>(it.value()) * x(it.col());
  Eigen::VectorXd r(rhs.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = static_cast<double>(acc[i]);
  return r;
}

}  // namespace detail

/// Sparse direct solve: supernodal Cholesky when the matrix is declared SPD
/// (falling back to LU on failure), multifrontal LU otherwise.
inline Eigen::VectorXd linear_solve(const SparseMatrix& K, const Eigen::VectorXd& rhs,
                                    LinearSolverKind kind = LinearSolverKind::LU, LinearSolveInfo* info = nullptr) {
  if (K.rows() != K.cols() || K.rows() != rhs.size())
    throw Error(ErrorKind::InvalidArgument, "linear system dimensions do not match");
  const double bn = rhs.norm();
  if (bn == 0.0) return Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd x;
  // iterative refinement, residual accumulated in extended precision
  auto refine = [&](const auto& fac) {
    double rel = detail::extended_residual(K, x, rhs).norm() / bn;
    for (int it = 0; it < 10 && rel > 1e-12; ++it) {
      const Eigen::VectorXd xn = x + fac.solve(Eigen::VectorXd(detail::extended_residual(K, x, rhs)));
      const double rn = detail::extended_residual(K, xn, rhs).norm() / bn;
      if (!(rn < rel)) break;
      x = xn;
      rel = rn;
    }
  };
  bool done = false;
  if (kind != LinearSolverKind::LU) {
    Eigen::CholmodSupernodalLLT<SparseMatrix> llt;
    llt.cholmod().print = 0;
    llt.compute(K);
    if (llt.info() == Eigen::Success) {
      x = llt.solve(rhs);
      if (llt.info() == Eigen::Success && x.allFinite()) {
        done = true;
        refine(llt);
        if (info) info->used_cholesky = true;
      }
    }
    if (!done && kind == LinearSolverKind::Cholesky)
      throw Error(ErrorKind::SingularSystem, "Cholesky factorization failed");
  }
  if (!done) {
    Eigen::UmfPackLU<SparseMatrix> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "LU factorization failed");
    x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw Error(ErrorKind::SingularSystem, "LU solve produced no finite solution");
    refine(lu);
  }
  const double rel = detail::extended_residual(K, x, rhs).norm() / bn;
  if (info) info->relative_residual = rel;
  if (!(rel <= 1e-10))
    throw Error(ErrorKind::LinearSolveFailed, "relative residual " + detail::sci(rel) + " above 1e-10");
  return x;
}

struct SolveSettings {
  int n_load_steps = 10;
  double newton_rel_tol = 1e-10;
  double newton_abs_tol = 1e-12;
  int max_newton_iters = 25;
  double roundoff_factor = 100.0;  // multiple of the round-off estimate accepted as converged
  double stagnation_rel = 1e-6;    // below this fraction of the initial residual a stalled iterate is accepted
  bool line_search = false;
  int max_line_search_halvings = 10;
};

struct StepLog {
  int step = 0;
  double load = 0.0;
  std::vector<double> residuals;  // free-dof residual norm per Newton iterate, first entry includes the
                                  // prescribed-displacement increment
  int max_inner_iters = 0;
  double max_S33_over_mu = 0.0;  // |S33| / mu over quadrature points at the accepted iterate
  int line_search_cuts = 0;
  bool stagnated = false;
  double roundoff = 0.0;  // eps | |K| |q| | over free rows at the last iterate
};

struct ConvergenceLog {
  std::vector<StepLog> steps;
};

/// Order p from the last three norms assuming r_{k+1} = c r_k^p; NaN if fewer than three.
inline double fitted_order(const std::vector<double>& r) {
  const size_t n = r.size();
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  return std::log(r[n - 1] / r[n - 2]) / std::log(r[n - 2] / r[n - 3]);
}

struct StepSnapshot {
  int step = 0;
  double load = 0.0;
  Eigen::VectorXd q;
  std::vector<double> c33;
};

struct SolutionHistory {
  std::vector<StepSnapshot> steps;
};

struct RunResult {
  SolutionHistory history;
  ConvergenceLog log;
};

namespace detail {

/// K_ff and K_fc dc from the full matrix; fmap maps dofs to free indices (-1 when constrained).
inline SparseMatrix reduce(const SparseMatrix& K, const std::vector<int>& fmap, int nfree, const Eigen::VectorXd& dc,
                           Eigen::VectorXd& Kfc_dc) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(K.nonZeros());
  Kfc_dc.setZero(nfree);
  for (int col = 0; col < K.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const int fr = fmap[it.row()];
      if (fr < 0) continue;
      const int fc = fmap[it.col()];
      if (fc >= 0)
        trip.emplace_back(fr, fc, it.value());
      else
        Kfc_dc(fr) += it.value() * dc(it.col());
    }
  SparseMatrix Kff(nfree, nfree);
  Kff.setFromTriplets(trip.begin(), trip.end());
  return Kff;
}

}  // namespace detail

/// Incremental loading with a Newton iteration per step. The step callback, if
/// given, is invoked after each converged step.
template <int dim>
RunResult run(System<dim>& sys, const SolveSettings& s,
              const std::function<void(const StepSnapshot&)>& on_step = nullptr) {
  if (s.n_load_steps < 1 || s.max_newton_iters < 1 || !(s.newton_rel_tol > 0.0) || !(s.newton_abs_tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "invalid solve settings");
  const auto& layout = sys.layout();
  const auto& free = sys.free_dofs();
  const int nfree = static_cast<int>(free.size());
  std::vector<int> fmap(layout.n_total(), -1);
  for (int i = 0; i < nfree; ++i) fmap[free[i]] = i;
  const auto kind = sys.problem().formulation == Formulation::OneField ? LinearSolverKind::Auto : LinearSolverKind::LU;

  RunResult out;
  Eigen::VectorXd q = sys.initial_state();
  Eigen::VectorXd r, Kfc_dc, rhs(nfree);
  SparseMatrix K;

  auto free_norm = [&](const Eigen::VectorXd& v) {
    double n2 = 0.0;
    for (int d : free) n2 += v(d) * v(d);
    return std::sqrt(n2);
  };

  for (int step = 1; step <= s.n_load_steps; ++step) {
    const double load = static_cast<double>(step) / s.n_load_steps;
    StepLog log;
    log.step = step;
    log.load = load;

    Eigen::VectorXd dc = Eigen::VectorXd::Zero(layout.n_total());
    for (const auto& [d, v] : sys.constraints()) dc(d) = v * load - q(d);

    double ref = 0.0;
    bool converged = false;
    for (int it = 0; it <= s.max_newton_iters; ++it) {
      sys.assemble(q, load, r, &K);
      log.max_inner_iters = std::max(log.max_inner_iters, sys.diagnostics().max_inner_iters);
      log.max_S33_over_mu = sys.diagnostics().max_S33_over_mu;
      SparseMatrix Kff = detail::reduce(K, fmap, nfree, dc, Kfc_dc);
      for (int i = 0; i < nfree; ++i) rhs(i) = -(r(free[i]) + Kfc_dc(i));
      const double norm = rhs.norm();
      log.roundoff = std::numeric_limits<double>::epsilon() * free_norm(K.cwiseAbs() * q.cwiseAbs());
      if (!std::isfinite(norm))
        throw Error(ErrorKind::NewtonDiverged, "non-finite residual in step " + std::to_string(step));
      log.residuals.push_back(norm);
      if (it == 0) ref = norm;
      const double tol = std::max({s.newton_rel_tol * ref, s.newton_abs_tol, s.roundoff_factor * log.roundoff});
      if (norm <= tol && dc.isZero(0.0)) {
        converged = true;
        break;
      }
      // stalled at the round-off level: no further contraction once far below the initial residual
      if (it >= 2 && norm <= s.stagnation_rel * ref && norm > 0.5 * log.residuals[it - 1]) {
        converged = true;
        log.stagnated = true;
        break;
      }
      if (it == s.max_newton_iters) break;

      const Eigen::VectorXd du = linear_solve(Kff, rhs, kind);
      Eigen::VectorXd step_vec = dc;
      for (int i = 0; i < nfree; ++i) step_vec(free[i]) = du(i);

      double alpha = 1.0;
      if (s.line_search) {
        Eigen::VectorXd rt;
        for (int cut = 0;; ++cut) {
          bool ok = false;
          try {
            Eigen::VectorXd qt = q + alpha * step_vec;
            sys.assemble(qt, load, rt, nullptr);
            ok = free_norm(rt) < (1.0 - 1e-4 * alpha) * norm || !dc.isZero(0.0);
          } catch (const Error&) {
            ok = false;
          }
          if (ok || cut >= s.max_line_search_halvings) break;
          alpha *= 0.5;
          ++log.line_search_cuts;
        }
        if (alpha < 1.0 && !dc.isZero(0.0)) {
          // the prescribed increment is applied in full; only the free part is damped
          step_vec = dc + alpha * (step_vec - dc);
          alpha = 1.0;
        }
      }
      q += alpha * step_vec;
      dc.setZero();
    }
    if (!converged)
      throw Error(ErrorKind::NewtonDiverged, "no convergence in step " + std::to_string(step) + " after " +
                                                 std::to_string(s.max_newton_iters) + " iterations; residual " +
                                                 detail::sci(log.residuals.back()));
    sys.commit();
    out.log.steps.push_back(log);
    StepSnapshot snap{step, load, q, sys.c33_committed()};
    if (on_step) on_step(snap);
    out.history.steps.push_back(std::move(snap));
  }
  return out;
}

}  // namespace psfem
