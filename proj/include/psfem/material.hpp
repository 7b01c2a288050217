#pragma once

// Isotropic hyperelastic strain-energy models with exact stresses and
// tangents, plus the isochoric/volumetric splits of the decoupled model.
//
// Conventions: S = 2 dpsi/dC, CC = 2 dS/dC = 4 d2psi/dC dC, so that
// dS = 1/2 CC : dC. The decoupled models use C_iso = J^{-2/d} C with d the
// model dimension, hence det C_iso = 1 in both 2D and 3D.

#include <cmath>
#include <string>
#include <string_view>

#include "psfem/errors.hpp"
#include "psfem/tensor.hpp"

namespace psfem {

// --- parameters --------------------------------------------------------------

/// kappa = 2 mu (1 + nu) / (3 (1 - 2 nu)); rejects nu outside (-1, 0.5).
inline double kappa_from_nu(double mu, double nu) {
  if (!(nu < 0.5) || !(nu > -1.0)) throw Error(ErrorKind::InvalidArgument, "Poisson ratio must lie in (-1, 0.5)");
  return 2.0 * mu * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu));
}

/// nu = (3 kappa - 2 mu) / (2 (3 kappa + mu))
inline double nu_from_kappa(double mu, double kappa) {
  return (3.0 * kappa - 2.0 * mu) / (2.0 * (3.0 * kappa + mu));
}

struct MaterialParams {
  double mu = 0.0;     // MPa
  double kappa = 0.0;  // MPa
  double nu = 0.0;     // provenance only

  static MaterialParams from_mu_nu(double mu, double nu) {
    if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "shear modulus must be positive");
    return {mu, kappa_from_nu(mu, nu), nu};
  }
  static MaterialParams from_mu_kappa(double mu, double kappa) {
    if (!(mu > 0.0) || !(kappa > 0.0)) throw Error(ErrorKind::InvalidArgument, "moduli must be positive");
    return {mu, kappa, nu_from_kappa(mu, kappa)};
  }
};

// --- volumetric functions --------------------------------------------------

enum class VolumetricLaw {
  SquaredJminus1,      // 1/2 (J-1)^2
  QuarterJsqMinusLog,  // 1/4 (J^2 - 1 - 2 ln J)
  LogSquared,          // 1/2 (ln J)^2
  JLogJ,               // J ln J - J + 1
};

struct VolDerivs {
  double G = 0.0;
  double dG = 0.0;
  double d2G = 0.0;
};

inline VolDerivs vol_derivs(VolumetricLaw law, double J) {
  if (!(J > 0.0)) throw Error(ErrorKind::NonPositiveJ, "volumetric function needs J > 0");
  const double lnJ = std::log(J);
  switch (law) {
    case VolumetricLaw::SquaredJminus1:
      return {0.5 * (J - 1.0) * (J - 1.0), J - 1.0, 1.0};
    case VolumetricLaw::QuarterJsqMinusLog:
      return {0.25 * (J * J - 1.0 - 2.0 * lnJ), 0.5 * (J - 1.0 / J), 0.5 * (1.0 + 1.0 / (J * J))};
    case VolumetricLaw::LogSquared:
      return {0.5 * lnJ * lnJ, lnJ / J, (1.0 - lnJ) / (J * J)};
    case VolumetricLaw::JLogJ:
      return {J * lnJ - J + 1.0, lnJ, 1.0 / J};
  }
  return {};
}

// --- models ----------------------------------------------------------------

enum class ModelKind {
  NeoHookeanDecoupled,    // mu/2 (I_Chat - 3) + kappa G(J), 3D
  NeoHookeanAlternative,  // mu/2 (I_C - 3 - 2 ln J) + kappa/2 (J-1)^2, 3D
  FlatlandNeoHookean,     // mu/2 (I_Chat - 2) + kappa G(J), 2D
};

constexpr std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::NeoHookeanDecoupled: return "neo-hookean";
    case ModelKind::NeoHookeanAlternative: return "neo-hookean-alternative";
    case ModelKind::FlatlandNeoHookean: return "flatland-neo-hookean";
  }
  return "?";
}

constexpr std::string_view to_string(VolumetricLaw v) {
  switch (v) {
    case VolumetricLaw::SquaredJminus1: return "squared";
    case VolumetricLaw::QuarterJsqMinusLog: return "quarter-log";
    case VolumetricLaw::LogSquared: return "log-squared";
    case VolumetricLaw::JLogJ: return "jlogj";
  }
  return "?";
}

class MaterialModel {
 public:
  MaterialModel(ModelKind kind, MaterialParams params,
                VolumetricLaw law = VolumetricLaw::QuarterJsqMinusLog)
      : kind_(kind), params_(params), law_(law) {
    if (!(params_.mu > 0.0) || !(params_.kappa > 0.0))
      throw Error(ErrorKind::InvalidArgument, "material moduli must be positive");
    if (kind_ == ModelKind::NeoHookeanAlternative) law_ = VolumetricLaw::SquaredJminus1;
  }

  ModelKind kind() const { return kind_; }
  const MaterialParams& params() const { return params_; }
  VolumetricLaw vol_law() const { return law_; }
  double mu() const { return params_.mu; }
  double kappa() const { return params_.kappa; }

  /// Dimension of the deformation this model accepts.
  int model_dim() const { return kind_ == ModelKind::FlatlandNeoHookean ? 2 : 3; }

  bool is_decoupled() const { return kind_ != ModelKind::NeoHookeanAlternative; }

  /// Same parameters, kind swapped to suit a 2D (flatland) or 3D kinematic setting.
  MaterialModel for_dim(int dim) const {
    if (dim == 2 && kind_ == ModelKind::NeoHookeanDecoupled)
      return MaterialModel(ModelKind::FlatlandNeoHookean, params_, law_);
    if (dim == 3 && kind_ == ModelKind::FlatlandNeoHookean)
      return MaterialModel(ModelKind::NeoHookeanDecoupled, params_, law_);
    return *this;
  }

 private:
  ModelKind kind_;
  MaterialParams params_;
  VolumetricLaw law_;
};

template <int dim>
struct StressTangent {
  double psi = 0.0;
  Tensor2<dim> S;
  Tensor4<dim> CC;
  // Scalar coefficient of C^{-1} in S: gamma for the decoupled model,
  // alpha = kappa J (J-1) for the alternative one.
  double gamma = 0.0;
  double alpha = 0.0;
};

namespace detail {

template <int dim>
void check_model_dim(const MaterialModel& m) {
  if (m.model_dim() != dim)
    throw Error(ErrorKind::DimensionMismatch,
                std::string(to_string(m.kind())) + " evaluated with dim " + std::to_string(dim));
}

template <int dim>
void check_spd(const Tensor2<dim>& C) {
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (!std::isfinite(C(i, j))) throw Error(ErrorKind::NonSPD, "non-finite entry in C");
  if (!(C(0, 0) > 0.0) || !(det(C) > 0.0)) throw Error(ErrorKind::NonSPD, "C is not positive definite");
  if constexpr (dim == 3) {
    if (!(C(0, 0) * C(1, 1) - C(0, 1) * C(1, 0) > 0.0))
      throw Error(ErrorKind::NonSPD, "C is not positive definite");
  }
}

}  // namespace detail

/// Energy, second Piola-Kirchhoff stress and material tangent at C.
template <int dim>
StressTangent<dim> evaluate(const MaterialModel& model, const Tensor2<dim>& C) {
  detail::check_model_dim<dim>(model);
  detail::check_spd(C);

  const double mu = model.mu();
  const double kappa = model.kappa();
  const auto I = Tensor2<dim>::identity();
  const auto Ci = inverse(C);
  const double J = std::sqrt(det(C));
  const double IC = trace(C);
  const auto vd = vol_derivs(model.vol_law(), J);

  // Volumetric part, common to all kinds: S_vol = q C^{-1}, q = kappa J G'(J).
  const double q = kappa * J * vd.dG;
  const double dq = kappa * (vd.dG + J * vd.d2G);
  const auto CixCi = otimes(Ci, Ci);
  const auto CioCi = odot(Ci, Ci);

  StressTangent<dim> out;
  if (model.kind() == ModelKind::NeoHookeanAlternative) {
    out.psi = 0.5 * mu * (IC - 3.0 - 2.0 * std::log(J)) + kappa * vd.G;
    out.alpha = q;
    out.S = mu * (I - Ci) + q * Ci;
    out.CC = (2.0 * mu - 2.0 * q) * CioCi + (J * dq) * CixCi;
    return out;
  }

  const double d = dim;
  const double Jm = std::pow(J, -2.0 / d);
  out.psi = 0.5 * mu * (Jm * IC - d) + kappa * vd.G;
  out.gamma = q - mu / d * IC * Jm;
  out.S = (mu * Jm) * I + out.gamma * Ci;

  // CC_iso = (2 mu / d) J^{-2/d} [ -I(x)Ci - Ci(x)I + (I_C/d) Ci(x)Ci + I_C Ci(.)Ci ]
  const double a = 2.0 * mu / d * Jm;
  out.CC = (-a) * (otimes(I, Ci) + otimes(Ci, I)) + (a * IC / d) * CixCi + (a * IC) * CioCi;
  out.CC += (J * dq) * CixCi - (2.0 * q) * CioCi;
  return out;
}

template <int dim>
struct StressSplit {
  Tensor2<dim> S_iso;
  Tensor2<dim> S_vol;
  double p = 0.0;  // d psi_vol / dJ
  Tensor4<dim> P_proj;
};

/// S = P : [2 dpsi_iso/dC_iso] + p J C^{-1} for the decoupled models,
/// with P = J^{-2/d} [II - (1/d) C^{-1} (x) C] applied as P_ijkl X_kl.
template <int dim>
StressSplit<dim> split_stress(const MaterialModel& model, const Tensor2<dim>& C) {
  if (!model.is_decoupled()) throw Error(ErrorKind::UnsupportedModel, "split requires a decoupled model");
  detail::check_model_dim<dim>(model);
  detail::check_spd(C);
  const double d = dim;
  const auto I = Tensor2<dim>::identity();
  const auto Ci = inverse(C);
  const double J = std::sqrt(det(C));
  const double Jm = std::pow(J, -2.0 / d);

  StressSplit<dim> out;
  // P_ijkl = dC_iso_kl / dC_ij, so that S_iso_ij = P_ijkl (2 dpsi/dC_iso)_kl.
  out.P_proj = Jm * (sym_identity<dim>() - (1.0 / d) * otimes(Ci, C));
  const auto S_bar = model.mu() * I;  // 2 dpsi_iso / dC_iso for neo-Hookean
  out.S_iso = ddot(out.P_proj, S_bar);
  out.p = model.kappa() * vol_derivs(model.vol_law(), J).dG;
  out.S_vol = (out.p * J) * Ci;
  return out;
}

template <int dim>
struct EulerianSplit {
  Tensor4<dim> c_iso;
  Tensor4<dim> c_vol;
  Tensor2<dim> tau_iso;
  Tensor2<dim> tau_vol;
  double p = 0.0;
  double dp_dJ = 0.0;
  double J = 0.0;
};

/// Spatial split tau = p J I + dev(tau_hat) and c = c_iso + c_vol with
///   c_vol   = (p + J dp/dJ) I(x)I - 2 p II
///   J c_iso = (2/d) tr(tau_hat) D - (2/d) [I(x)tau_iso + tau_iso(x)I]
/// (the D:c_hat:D term vanishes for neo-Hookean).
template <int dim>
EulerianSplit<dim> eulerian_split_tangent(const MaterialModel& model, const Tensor2<dim>& F) {
  if (!model.is_decoupled()) throw Error(ErrorKind::UnsupportedModel, "split requires a decoupled model");
  detail::check_model_dim<dim>(model);
  const double J = det(F);
  if (!(J > 0.0)) throw Error(ErrorKind::InvertedElement, "det F <= 0");
  const double d = dim;
  const auto I = Tensor2<dim>::identity();
  const auto b_hat = std::pow(J, -2.0 / d) * (F * transpose(F));
  const auto tau_hat = model.mu() * b_hat;
  const auto D = deviatoric_projector<dim>();

  EulerianSplit<dim> out;
  out.J = J;
  out.tau_iso = ddot(D, tau_hat);
  const auto vd = vol_derivs(model.vol_law(), J);
  out.p = model.kappa() * vd.dG;
  out.dp_dJ = model.kappa() * vd.d2G;
  out.tau_vol = (out.p * J) * I;
  out.c_iso = (1.0 / J) * ((2.0 / d) * trace(tau_hat) * D -
                           (2.0 / d) * (otimes(I, out.tau_iso) + otimes(out.tau_iso, I)));
  out.c_vol = (out.p + J * out.dp_dJ) * otimes(I, I) - (2.0 * out.p) * sym_identity<dim>();
  return out;
}

}  // namespace psfem
