#pragma once

// Strong plane stress at a quadrature point. Given the in-plane right
// Cauchy-Green tensor Cbar, the out-of-plane component C33 is found from
// S33(Cbar, C33) = 0 by a scalar Newton iteration on the full 3D model, and
// the in-plane stress and tangent are condensed consistently:
//
//   CCbar = 2 [ dSbar/dCbar + dSbar/dC33 (x) dC33/dCbar ]
//         = CC_ijkl - CC_ij33 CC_33kl / CC_3333            (generic path)
//
// The closed forms for the two neo-Hookean variants are kept alongside as
// independent cross-checks of the generic path.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "psfem/errors.hpp"
#include "psfem/material.hpp"
#include "psfem/tensor.hpp"

namespace psfem {

enum class InitStrategy { PreviousConverged, Unity };

struct CondensationSettings {
  std::optional<double> abs_tol;  // on |S33|, MPa; defaults to 1e-10 mu
  int max_iters = 50;
  int max_halvings = 20;
  InitStrategy init_strategy = InitStrategy::PreviousConverged;
  bool polish = true;

  double tolerance(double mu) const { return abs_tol ? *abs_tol : 1e-10 * mu; }
};

struct C33Solution {
  double C33 = 1.0;
  int iters = 0;
  double residual = 0.0;           // S33 at the returned C33
  std::vector<double> history;     // |S33| per Newton iterate, starting at the initial guess
};

struct CondensedState {
  Tensor2<2> Cbar;
  double C33 = 1.0;
  Tensor2<2> Sbar;
  Tensor4<2> CCbar;
  int inner_iters = 0;
  double residual_S33 = 0.0;
};

namespace detail {

inline void require_3d_model(const MaterialModel& model) {
  if (model.model_dim() != 3)
    throw Error(ErrorKind::DimensionMismatch, "plane stress condensation needs a 3D material model");
}

}  // namespace detail

/// Newton iteration dC33 = -S33 / (1/2 CC_3333) with a positivity safeguard.
inline C33Solution solve_c33(const MaterialModel& model, const Tensor2<2>& Cbar, double init,
                             const CondensationSettings& settings = {}) {
  detail::require_3d_model(model);
  if (!(init > 0.0)) init = 1.0;
  const double tol = settings.tolerance(model.mu());

  C33Solution sol;
  double c = init;
  for (int it = 0;; ++it) {
    const auto st = evaluate<3>(model, embed_plane(Cbar, c));
    const double s33 = st.S(2, 2);
    if (!std::isfinite(s33)) throw Error(ErrorKind::NoConvergence, "non-finite S33 in condensation");
    sol.history.push_back(std::abs(s33));
    if (std::abs(s33) <= tol) {
      sol.C33 = c;
      sol.iters = it;
      sol.residual = s33;
      // one polishing step past the tolerance keeps the condensed stress
      // accurate well below the outer Newton tolerance
      const double cp = c - s33 / (0.5 * st.CC(2, 2, 2, 2));
      if (settings.polish && cp > 0.0 && s33 != 0.0) {
        const double sp = evaluate<3>(model, embed_plane(Cbar, cp)).S(2, 2);
        if (std::abs(sp) < std::abs(s33)) {
          sol.C33 = cp;
          sol.residual = sp;
        }
      }
      return sol;
    }
    if (it >= settings.max_iters)
      throw Error(ErrorKind::NoConvergence, "C33 iteration exhausted; |S33| = " + std::to_string(std::abs(s33)));
    const double slope = 0.5 * st.CC(2, 2, 2, 2);
    if (!(std::abs(slope) > 0.0)) throw Error(ErrorKind::SingularCondensation, "dS33/dC33 vanished");
    double step = -s33 / slope;
    // no contraction and a correction at machine precision: round-off floor
    if (it > 0 && std::abs(s33) > 0.5 * sol.history[it - 1] && std::abs(step) <= 1e-12 * c) {
      sol.C33 = c;
      sol.iters = it;
      sol.residual = s33;
      return sol;
    }
    int halvings = 0;
    while (!(c + step > 0.0)) {
      if (++halvings > settings.max_halvings)
        throw Error(ErrorKind::NonPhysicalRoot, "C33 driven non-positive");
      step *= 0.5;
    }
    c += step;
  }
}

/// In-plane block of the 3D stress at (Cbar, C33).
inline Tensor2<2> condensed_stress(const MaterialModel& model, const Tensor2<2>& Cbar, double C33) {
  detail::require_3d_model(model);
  return in_plane(evaluate<3>(model, embed_plane(Cbar, C33)).S);
}

namespace detail {

inline Tensor4<2> condense_tangent(const Tensor4<3>& CC, double mu) {
  const double c3333 = CC(2, 2, 2, 2);
  if (!(std::abs(0.5 * c3333) >= 1e-12 * mu))
    throw Error(ErrorKind::SingularCondensation, "dS33/dC33 below 1e-12 mu");
  Tensor4<2> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(i, j, k, l) = CC(i, j, k, l) - CC(i, j, 2, 2) * CC(2, 2, k, l) / c3333;
  return out;
}

}  // namespace detail

/// Consistent condensed tangent from blocks of the full 3D tangent.
inline Tensor4<2> condensed_tangent(const MaterialModel& model, const Tensor2<2>& Cbar, double C33) {
  detail::require_3d_model(model);
  const auto st = evaluate<3>(model, embed_plane(Cbar, C33));
  return detail::condense_tangent(st.CC, model.mu());
}

/// Solve for C33 and return the condensed stress and tangent in one pass.
inline CondensedState condense(const MaterialModel& model, const Tensor2<2>& Cbar, double init,
                               const CondensationSettings& settings = {}) {
  const auto sol = solve_c33(model, Cbar, init, settings);
  const auto st = evaluate<3>(model, embed_plane(Cbar, sol.C33));
  CondensedState cs;
  cs.Cbar = Cbar;
  cs.C33 = sol.C33;
  cs.Sbar = in_plane(st.S);
  cs.CCbar = detail::condense_tangent(st.CC, model.mu());
  cs.inner_iters = sol.iters;
  cs.residual_S33 = sol.residual;
  return cs;
}

// --- closed forms ------------------------------------------------------------

struct ClosedFormDecoupled {
  Tensor2<2> Sbar;
  Tensor4<2> CCbar;
  double gamma = 0.0;
  Tensor2<2> beta;          // dS33/dCbar at fixed C33
  double dS33_dC33 = 0.0;
  Tensor2<2> dC33_dCbar;
  Tensor2<2> dJ_dCbar;
  double dJ_dC33 = 0.0;
};

/// Decoupled neo-Hookean with G = (J^2 - 1 - 2 ln J)/4, at a converged C33.
/// Sbar = mu J^{-2/3} [I - C33 Cbar^{-1}] after substituting gamma = -mu C33 J^{-2/3}.
inline ClosedFormDecoupled closed_form_decoupled(const Tensor2<2>& Cbar, double C33, const MaterialParams& prm) {
  const double mu = prm.mu;
  const double kappa = prm.kappa;
  const auto I = Tensor2<2>::identity();
  const auto Ci = inverse(Cbar);
  const double Jb2 = det(Cbar);
  const double J = std::sqrt(C33 * Jb2);
  const double IC = trace(Cbar) + C33;
  const double Jm = std::pow(J, -2.0 / 3.0);
  const double J53 = std::pow(J, -5.0 / 3.0);
  const auto A = I - C33 * Ci;

  ClosedFormDecoupled out;
  out.Sbar = (mu * Jm) * A;
  out.dJ_dCbar = (0.5 / J * C33 * Jb2) * Ci;
  out.dJ_dC33 = 0.5 / J * Jb2;

  const auto dSbar_dCbar = (C33 * mu * Jm) * odot(Ci, Ci) - (2.0 / 3.0 * mu * J53) * otimes(A, out.dJ_dCbar);
  const auto dSbar_dC33 = (-mu * Jm) * Ci - (2.0 / 3.0 * mu * J53 * out.dJ_dC33) * A;

  const auto dJm_dCbar = (-2.0 / 3.0 * J53) * out.dJ_dCbar;
  const double dJm_dC33 = -2.0 / 3.0 * J53 * out.dJ_dC33;

  out.gamma = 0.5 * kappa * (J * J - 1.0) - mu / 3.0 * IC * Jm;
  const auto dgamma_dCbar = (0.5 * kappa * C33 * Jb2) * Ci - (mu / 3.0) * (Jm * I + IC * dJm_dCbar);
  const double dgamma_dC33 = 0.5 * kappa * Jb2 - mu / 3.0 * (IC * dJm_dC33 + Jm);

  out.beta = mu * dJm_dCbar + (1.0 / C33) * dgamma_dCbar;
  out.dS33_dC33 = mu * dJm_dC33 + dgamma_dC33 / C33 - out.gamma / (C33 * C33);
  out.dC33_dCbar = (-1.0 / out.dS33_dC33) * out.beta;
  out.CCbar = 2.0 * (dSbar_dCbar + otimes(dSbar_dC33, out.dC33_dCbar));
  return out;
}

struct ClosedFormAlternative {
  Tensor2<2> Sbar;
  Tensor4<2> CCbar;
  double alpha = 0.0;
  Tensor2<2> dalpha_dCbar;
  double dS33_dC33 = 0.0;
  Tensor2<2> dC33_dCbar;
};

/// Alternative neo-Hookean, Sbar = mu [I - C33 Cbar^{-1}] at a converged C33.
inline ClosedFormAlternative closed_form_alternative(const Tensor2<2>& Cbar, double C33,
                                                     const MaterialParams& prm) {
  const double mu = prm.mu;
  const double kappa = prm.kappa;
  const auto I = Tensor2<2>::identity();
  const auto Ci = inverse(Cbar);
  const double Jb2 = det(Cbar);
  const double J = std::sqrt(C33 * Jb2);

  ClosedFormAlternative out;
  out.Sbar = mu * (I - C33 * Ci);
  out.alpha = kappa * J * (J - 1.0);
  out.dalpha_dCbar = (kappa * C33 * Jb2 * (1.0 - 0.5 / J)) * Ci;
  const double dalpha_dC33 = kappa * (2.0 * J - 1.0) * 0.5 / J * Jb2;
  out.dS33_dC33 = mu / (C33 * C33) + dalpha_dC33 / C33 - out.alpha / (C33 * C33);
  out.dC33_dCbar = (-1.0 / (C33 * out.dS33_dC33)) * out.dalpha_dCbar;

  const auto dSbar_dCbar = (C33 * mu) * odot(Ci, Ci);
  const auto dSbar_dC33 = -mu * Ci;
  out.CCbar = 2.0 * (dSbar_dCbar + otimes(dSbar_dC33, out.dC33_dCbar));
  return out;
}

}  // namespace psfem
