#pragma once

// Element kernels. One-field: total Lagrangian, r_Ia = int P_aA dN_I/dX_A,
// K = int dN_I/dX_A A_aAbD dN_J/dX_D with A = dP/dF. Three-field: spatial
// form with independent pressure and dilatation fields, element-local and
// discontinuous.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "psfem/errors.hpp"
#include "psfem/material.hpp"
#include "psfem/mesh.hpp"
#include "psfem/plane_stress.hpp"
#include "psfem/problem.hpp"
#include "psfem/quadrature.hpp"
#include "psfem/shape.hpp"
#include "psfem/tensor.hpp"

namespace psfem {

template <int dim>
struct QPGeometry {
  std::array<double, dim> xi{};
  std::vector<double> N;
  std::vector<std::array<double, dim>> dNdX;
  double JxW = 0.0;
};

template <int dim>
using CellGeometry = std::vector<QPGeometry<dim>>;

template <int dim>
CellGeometry<dim> cell_geometry(const Mesh<dim>& mesh, int cell, const LagrangeBasis<dim>& basis,
                                const QuadratureRule<dim>& rule) {
  CellGeometry<dim> out(rule.size());
  std::vector<double> N;
  std::vector<std::array<double, dim>> dN;
  const auto& conn = mesh.cells[cell];
  for (int q = 0; q < rule.size(); ++q) {
    basis.eval(rule.points[q], N, dN);
    Tensor2<dim> jac;
    for (int i = 0; i < basis.size(); ++i)
      for (int d = 0; d < dim; ++d)
        for (int a = 0; a < dim; ++a) jac(d, a) += mesh.nodes[conn[i]][d] * dN[i][a];
    const double dj = det(jac);
    if (!(dj > 0.0))
      throw Error(ErrorKind::InvertedElement, "cell " + std::to_string(cell) + " has a non-positive Jacobian");
    const auto ji = inverse(jac);
    auto& g = out[q];
    g.xi = rule.points[q];
    g.N = N;
    g.dNdX.assign(basis.size(), {});
    for (int i = 0; i < basis.size(); ++i)
      for (int d = 0; d < dim; ++d)
        for (int a = 0; a < dim; ++a) g.dNdX[i][d] += dN[i][a] * ji(a, d);
    g.JxW = dj * rule.weights[q];
  }
  return out;
}

/// F = I + grad u from nodal displacements stored node-major.
template <int dim>
Tensor2<dim> deformation_gradient(const QPGeometry<dim>& g, const double* ue) {
  auto F = Tensor2<dim>::identity();
  for (size_t i = 0; i < g.dNdX.size(); ++i)
    for (int a = 0; a < dim; ++a)
      for (int A = 0; A < dim; ++A) F(a, A) += ue[i * dim + a] * g.dNdX[i][A];
  return F;
}

/// 3x3 deformation gradient of a regime: F33 = 1 for plane strain, sqrt(C33) for plane stress.
inline Tensor2<3> embed_deformation(Regime regime, const Tensor2<2>& F, double C33 = 1.0) {
  if (regime == Regime::PlaneStress) return embed_plane(F, std::sqrt(C33));
  return embed_plane(F, 1.0);
}

template <int dim>
struct OneFieldPoint {
  Tensor2<dim> S;
  Tensor2<dim> P;
  Tensor4<dim> A;  // dP/dF, indices (a, A, b, B)
  double C33 = 1.0;
  int inner_iters = 0;
  double S33 = 0.0;
};

template <int dim>
OneFieldPoint<dim> onefield_point(Regime regime, const MaterialModel& model, const Tensor2<dim>& F,
                                  double c33_init, const CondensationSettings& cs) {
  if (!(det(F) > 0.0)) throw Error(ErrorKind::InvertedElement, "det F <= 0");
  const auto C = transpose(F) * F;
  OneFieldPoint<dim> out;
  Tensor4<dim> CC;
  if constexpr (dim == 3) {
    const auto st = evaluate<3>(model, C);
    out.S = st.S;
    CC = st.CC;
  } else {
    switch (regime) {
      case Regime::Flatland: {
        const auto st = evaluate<2>(model, C);
        out.S = st.S;
        CC = st.CC;
        break;
      }
      case Regime::PlaneStrain: {
        const auto st = evaluate<3>(model, embed_plane(C, 1.0));
        out.S = in_plane(st.S);
        CC = in_plane(st.CC);
        break;
      }
      case Regime::PlaneStress: {
        const auto c = condense(model, C, cs.init_strategy == InitStrategy::Unity ? 1.0 : c33_init, cs);
        out.S = c.Sbar;
        CC = c.CCbar;
        out.C33 = c.C33;
        out.inner_iters = c.inner_iters;
        out.S33 = c.residual_S33;
        break;
      }
      default: throw Error(ErrorKind::UnsupportedRegime, "3D regime on a 2D point");
    }
  }
  out.P = F * out.S;
  for (int a = 0; a < dim; ++a)
    for (int A = 0; A < dim; ++A)
      for (int b = 0; b < dim; ++b)
        for (int D = 0; D < dim; ++D) {
          double v = a == b ? out.S(A, D) : 0.0;
          for (int B = 0; B < dim; ++B)
            for (int Cc = 0; Cc < dim; ++Cc) v += F(a, B) * CC(B, A, Cc, D) * F(b, Cc);
          out.A(a, A, b, D) = v;
        }
  return out;
}

struct ElementDiagnostics {
  int max_inner_iters = 0;
  double max_S33_over_mu = 0.0;
};

/// Internal force and stiffness of a one-field element. c33 holds one value per
/// quadrature point: the warm start on entry, the converged value on exit.
template <int dim>
void element_onefield(Regime regime, const MaterialModel& model, const CellGeometry<dim>& geo, const double* ue,
                      double* c33, const CondensationSettings& cs, Eigen::VectorXd& r, Eigen::MatrixXd* K,
                      ElementDiagnostics* diag = nullptr) {
  const int nn = static_cast<int>(geo[0].N.size());
  const int nd = nn * dim;
  r.setZero(nd);
  if (K) K->setZero(nd, nd);
  std::vector<double> W(nn * dim * dim * dim);
  for (size_t q = 0; q < geo.size(); ++q) {
    const auto& g = geo[q];
    const auto F = deformation_gradient(g, ue);
    OneFieldPoint<dim> pt;
    try {
      pt = onefield_point<dim>(regime, model, F, c33 ? c33[q] : 1.0, cs);
    } catch (const Error& e) {
      throw Error(e.kind(), "qp " + std::to_string(q) + ": " + e.what());
    }
    if (c33) c33[q] = pt.C33;
    if (diag) {
      diag->max_inner_iters = std::max(diag->max_inner_iters, pt.inner_iters);
      diag->max_S33_over_mu = std::max(diag->max_S33_over_mu, std::abs(pt.S33) / model.mu());
    }
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a) {
        double s = 0.0;
        for (int A = 0; A < dim; ++A) s += pt.P(a, A) * g.dNdX[i][A];
        r(i * dim + a) += g.JxW * s;
      }
    if (!K) continue;
    // W_{i a b D} = sum_A dN_i/dX_A A_{aAbD}
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          for (int D = 0; D < dim; ++D) {
            double s = 0.0;
            for (int A = 0; A < dim; ++A) s += g.dNdX[i][A] * pt.A(a, A, b, D);
            W[((i * dim + a) * dim + b) * dim + D] = s;
          }
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a)
        for (int j = 0; j < nn; ++j)
          for (int b = 0; b < dim; ++b) {
            double s = 0.0;
            for (int D = 0; D < dim; ++D) s += W[((i * dim + a) * dim + b) * dim + D] * g.dNdX[j][D];
            (*K)(i * dim + a, j * dim + b) += g.JxW * s;
          }
  }
}

template <int dim>
struct ThreeFieldPoint {
  Tensor2<dim> tau;
  Tensor4<dim> Jc;  // J c_iso + p J (I(x)I - 2 II)
  double J = 1.0;
};

/// Kirchhoff stress with the mixed pressure and its spatial tangent at fixed pressure.
template <int dim>
ThreeFieldPoint<dim> threefield_point(Regime regime, const MaterialModel& model, const Tensor2<dim>& F,
                                      double p_mixed) {
  ThreeFieldPoint<dim> out;
  Tensor4<dim> c_iso;
  if constexpr (dim == 3) {
    const auto es = eulerian_split_tangent<3>(model, F);
    out.tau = es.tau_iso;
    c_iso = es.c_iso;
    out.J = es.J;
  } else {
    if (regime == Regime::Flatland) {
      const auto es = eulerian_split_tangent<2>(model, F);
      out.tau = es.tau_iso;
      c_iso = es.c_iso;
      out.J = es.J;
    } else if (regime == Regime::PlaneStrain) {
      const auto es = eulerian_split_tangent<3>(model, embed_plane(F, 1.0));
      out.tau = in_plane(es.tau_iso);
      c_iso = in_plane(es.c_iso);
      out.J = es.J;
    } else {
      throw Error(ErrorKind::UnsupportedRegime, "three-field formulation is not defined for plane stress");
    }
  }
  const auto I = Tensor2<dim>::identity();
  const double pJ = p_mixed * out.J;
  out.tau += pJ * I;
  out.Jc = out.J * c_iso + pJ * (otimes(I, I) - 2.0 * sym_identity<dim>());
  return out;
}

/// Stacked residual [r_u; r_p; r_J] and Jacobian of a three-field element with
/// local dofs ordered [u (node-major) | p | J].
template <int dim>
void element_threefield(Regime regime, const MaterialModel& model, const CellGeometry<dim>& geo,
                        const MonomialBasis<dim>& mono, const double* ue, const double* pe, const double* Je,
                        Eigen::VectorXd& r, Eigen::MatrixXd* K) {
  if (!model.is_decoupled()) throw Error(ErrorKind::UnsupportedModel, "three-field needs a decoupled model");
  const int nn = static_cast<int>(geo[0].N.size());
  const int nu = nn * dim;
  const int nm = mono.size();
  const int n = nu + 2 * nm;
  r.setZero(n);
  if (K) K->setZero(n, n);
  std::vector<double> Np;
  std::vector<std::array<double, dim>> gx(nn);
  std::vector<double> W(nn * dim * dim * dim);
  const double kappa = model.kappa();
  for (size_t q = 0; q < geo.size(); ++q) {
    const auto& g = geo[q];
    mono.eval(g.xi, Np);
    double pt = 0.0, Jt = 0.0;
    for (int k = 0; k < nm; ++k) {
      pt += Np[k] * pe[k];
      Jt += Np[k] * Je[k];
    }
    const auto F = deformation_gradient(g, ue);
    if (!(det(F) > 0.0)) throw Error(ErrorKind::InvertedElement, "qp " + std::to_string(q) + ": det F <= 0");
    const auto Fi = inverse(F);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < dim; ++c) {
        double s = 0.0;
        for (int A = 0; A < dim; ++A) s += g.dNdX[i][A] * Fi(A, c);
        gx[i][c] = s;
      }
    const auto pt3 = threefield_point<dim>(regime, model, F, pt);
    if (!(Jt > 0.0)) throw Error(ErrorKind::NonPositiveJ, "qp " + std::to_string(q) + ": dilatation field <= 0");
    const auto vd = vol_derivs(model.vol_law(), Jt);
    const double w = g.JxW;

    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a) {
        double s = 0.0;
        for (int c = 0; c < dim; ++c) s += pt3.tau(a, c) * gx[i][c];
        r(i * dim + a) += w * s;
      }
    for (int k = 0; k < nm; ++k) {
      r(nu + k) += w * Np[k] * (pt3.J - Jt);
      r(nu + nm + k) += w * Np[k] * (kappa * vd.dG - pt);
    }
    if (!K) continue;

    // W_{i a b d} = sum_c gx_ic (Jc_acbd + delta_ab tau_cd)
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          for (int d = 0; d < dim; ++d) {
            double s = 0.0;
            for (int c = 0; c < dim; ++c) s += gx[i][c] * (pt3.Jc(a, c, b, d) + (a == b ? pt3.tau(c, d) : 0.0));
            W[((i * dim + a) * dim + b) * dim + d] = s;
          }
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a)
        for (int j = 0; j < nn; ++j)
          for (int b = 0; b < dim; ++b) {
            double s = 0.0;
            for (int d = 0; d < dim; ++d) s += W[((i * dim + a) * dim + b) * dim + d] * gx[j][d];
            (*K)(i * dim + a, j * dim + b) += w * s;
          }
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a)
        for (int k = 0; k < nm; ++k) {
          const double v = w * pt3.J * gx[i][a] * Np[k];
          (*K)(i * dim + a, nu + k) += v;
          (*K)(nu + k, i * dim + a) += v;
        }
    for (int k = 0; k < nm; ++k)
      for (int l = 0; l < nm; ++l) {
        (*K)(nu + k, nu + nm + l) -= w * Np[k] * Np[l];
        (*K)(nu + nm + k, nu + l) -= w * Np[k] * Np[l];
        (*K)(nu + nm + k, nu + nm + l) += w * kappa * vd.d2G * Np[k] * Np[l];
      }
  }
}

/// Reference-area load vector of a constant traction on one cell face, node-major.
template <int dim>
Eigen::VectorXd facet_load(const Mesh<dim>& mesh, const Facet& f, const LagrangeBasis<dim>& basis,
                           const std::array<double, dim>& traction) {
  const int nn = basis.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nn * dim);
  const int axis = f.face / 2;
  const double side = (f.face % 2) ? 1.0 : -1.0;
  const auto rule = tensor_gauss<dim - 1>(basis.order() + 1);
  std::vector<double> N;
  std::vector<std::array<double, dim>> dN;
  const auto& conn = mesh.cells[f.cell];
  for (int q = 0; q < rule.size(); ++q) {
    std::array<double, dim> xi{};
    std::array<int, dim - 1> tang{};
    for (int d = 0, t = 0; d < dim; ++d) {
      if (d == axis) {
        xi[d] = side;
      } else {
        xi[d] = rule.points[q][t];
        tang[t++] = d;
      }
    }
    basis.eval(xi, N, dN);
    std::array<std::array<double, dim>, dim - 1> tv{};
    for (int t = 0; t < dim - 1; ++t)
      for (int i = 0; i < nn; ++i)
        for (int d = 0; d < dim; ++d) tv[t][d] += mesh.nodes[conn[i]][d] * dN[i][tang[t]];
    double ds;
    if constexpr (dim == 2) {
      ds = std::hypot(tv[0][0], tv[0][1]);
    } else {
      const double cx = tv[0][1] * tv[1][2] - tv[0][2] * tv[1][1];
      const double cy = tv[0][2] * tv[1][0] - tv[0][0] * tv[1][2];
      const double cz = tv[0][0] * tv[1][1] - tv[0][1] * tv[1][0];
      ds = std::sqrt(cx * cx + cy * cy + cz * cz);
    }
    for (int i = 0; i < nn; ++i)
      for (int a = 0; a < dim; ++a) out(i * dim + a) += rule.weights[q] * ds * N[i] * traction[a];
  }
  return out;
}

}  // namespace psfem
