#pragma once

// Small dense tensors in two or three dimensions. Storage is unpacked
// (no Voigt) so the symmetric products need no correction factors.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>

#include "psfem/errors.hpp"

namespace psfem {

template <int dim>
class Tensor2 {
  static_assert(dim == 2 || dim == 3, "Tensor2 supports dim 2 or 3");

 public:
  static constexpr int dimension = dim;
  static constexpr int size = dim * dim;

  constexpr Tensor2() = default;

  static constexpr Tensor2 identity() {
    Tensor2 t;
    for (int i = 0; i < dim; ++i) t(i, i) = 1.0;
    return t;
  }

  static constexpr Tensor2 diagonal(const std::array<double, dim>& d) {
    Tensor2 t;
    for (int i = 0; i < dim; ++i) t(i, i) = d[i];
    return t;
  }

  constexpr double& operator()(int i, int j) { return a_[i * dim + j]; }
  constexpr double operator()(int i, int j) const { return a_[i * dim + j]; }

  constexpr double* data() { return a_.data(); }
  constexpr const double* data() const { return a_.data(); }

  Tensor2& operator+=(const Tensor2& o) {
    for (int i = 0; i < size; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Tensor2& operator-=(const Tensor2& o) {
    for (int i = 0; i < size; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Tensor2& operator*=(double s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend Tensor2 operator+(Tensor2 a, const Tensor2& b) { return a += b; }
  friend Tensor2 operator-(Tensor2 a, const Tensor2& b) { return a -= b; }
  friend Tensor2 operator-(Tensor2 a) { return a *= -1.0; }
  friend Tensor2 operator*(Tensor2 a, double s) { return a *= s; }
  friend Tensor2 operator*(double s, Tensor2 a) { return a *= s; }

  /// Single contraction (matrix product).
  friend Tensor2 operator*(const Tensor2& a, const Tensor2& b) {
    Tensor2 c;
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) {
        const double aik = a(i, k);
        for (int j = 0; j < dim; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::array<double, size> a_{};
};

template <int dim>
class Tensor4 {
  static_assert(dim == 2 || dim == 3, "Tensor4 supports dim 2 or 3");

 public:
  static constexpr int dimension = dim;
  static constexpr int size = dim * dim * dim * dim;

  constexpr Tensor4() = default;

  constexpr double& operator()(int i, int j, int k, int l) {
    return a_[((i * dim + j) * dim + k) * dim + l];
  }
  constexpr double operator()(int i, int j, int k, int l) const {
    return a_[((i * dim + j) * dim + k) * dim + l];
  }

  Tensor4& operator+=(const Tensor4& o) {
    for (int i = 0; i < size; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Tensor4& operator-=(const Tensor4& o) {
    for (int i = 0; i < size; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Tensor4& operator*=(double s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
  friend Tensor4 operator*(Tensor4 a, double s) { return a *= s; }
  friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

  const std::array<double, size>& raw() const { return a_; }

 private:
  std::array<double, size> a_{};
};

// --- Tensor2 kernels -------------------------------------------------------

template <int dim>
Tensor2<dim> transpose(const Tensor2<dim>& a) {
  Tensor2<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) t(i, j) = a(j, i);
  return t;
}

template <int dim>
double trace(const Tensor2<dim>& a) {
  double t = 0.0;
  for (int i = 0; i < dim; ++i) t += a(i, i);
  return t;
}

/// A : B = A_ij B_ij
template <int dim>
double ddot(const Tensor2<dim>& a, const Tensor2<dim>& b) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += a(i, j) * b(i, j);
  return s;
}

template <int dim>
double norm(const Tensor2<dim>& a) {
  return std::sqrt(ddot(a, a));
}

template <int dim>
Tensor2<dim> sym(const Tensor2<dim>& a) {
  return 0.5 * (a + transpose(a));
}

template <int dim>
double det(const Tensor2<dim>& a) {
  if constexpr (dim == 2) {
    return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  } else {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  }
}

/// Inverse by adjugate. Throws SingularTensor when |det A| <= 1e-14 ||A||^dim.
template <int dim>
Tensor2<dim> inverse(const Tensor2<dim>& a) {
  const double d = det(a);
  const double scale = std::pow(norm(a), dim);
  if (!(std::abs(d) > 1e-14 * scale)) throw Error(ErrorKind::SingularTensor, "determinant below singularity guard");
  Tensor2<dim> inv;
  if constexpr (dim == 2) {
    inv(0, 0) = a(1, 1) / d;
    inv(0, 1) = -a(0, 1) / d;
    inv(1, 0) = -a(1, 0) / d;
    inv(1, 1) = a(0, 0) / d;
  } else {
    inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
    inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
    inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  }
  return inv;
}

struct Invariants {
  double I_C = 0.0;
  double II_C = 0.0;
  double J = 0.0;
};

/// I_C = tr C, II_C = 1/2 [(tr C)^2 + tr C^2], J = sqrt(det C).
template <int dim>
Invariants invariants(const Tensor2<dim>& C) {
  const double d = det(C);
  if (!(d > 0.0)) throw Error(ErrorKind::NonSPD, "det C <= 0");
  const double tr = trace(C);
  return {tr, 0.5 * (tr * tr + trace(C * C)), std::sqrt(d)};
}

template <int dim>
struct IsoSplit {
  double J = 0.0;
  Tensor2<dim> F_iso;
};

/// F = J^{1/dim} F_iso with det F_iso = 1.
template <int dim>
IsoSplit<dim> iso_split(const Tensor2<dim>& F) {
  const double J = det(F);
  if (!(J > 0.0)) throw Error(ErrorKind::InvertedElement, "det F <= 0");
  return {J, std::pow(J, -1.0 / dim) * F};
}

/// Block-diagonal 3x3 tensor [a 0; 0 a33].
inline Tensor2<3> embed_plane(const Tensor2<2>& a, double a33) {
  Tensor2<3> t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t(i, j) = a(i, j);
  t(2, 2) = a33;
  return t;
}

inline Tensor2<2> in_plane(const Tensor2<3>& a) {
  Tensor2<2> t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t(i, j) = a(i, j);
  return t;
}

inline Tensor4<2> in_plane(const Tensor4<3>& a) {
  Tensor4<2> t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) t(i, j, k, l) = a(i, j, k, l);
  return t;
}

// --- Tensor4 kernels -------------------------------------------------------

/// [A (x) B]_ijkl = A_ij B_kl
template <int dim>
Tensor4<dim> otimes(const Tensor2<dim>& a, const Tensor2<dim>& b) {
  Tensor4<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) t(i, j, k, l) = a(i, j) * b(k, l);
  return t;
}

/// [A (.) B]_ijkl = 1/2 [A_ik B_jl + A_il B_jk]
template <int dim>
Tensor4<dim> odot(const Tensor2<dim>& a, const Tensor2<dim>& b) {
  Tensor4<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) t(i, j, k, l) = 0.5 * (a(i, k) * b(j, l) + a(i, l) * b(j, k));
  return t;
}

/// Fourth-order symmetric identity.
template <int dim>
Tensor4<dim> sym_identity() {
  const auto I = Tensor2<dim>::identity();
  return odot(I, I);
}

/// Deviatoric projector I - (1/dim) I (x) I.
template <int dim>
Tensor4<dim> deviatoric_projector() {
  const auto I = Tensor2<dim>::identity();
  return sym_identity<dim>() - (1.0 / dim) * otimes(I, I);
}

/// (A : B)_ij = A_ijkl B_kl
template <int dim>
Tensor2<dim> ddot(const Tensor4<dim>& a, const Tensor2<dim>& b) {
  Tensor2<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) s += a(i, j, k, l) * b(k, l);
      t(i, j) = s;
    }
  return t;
}

/// (B : A)_kl = B_ij A_ijkl
template <int dim>
Tensor2<dim> ddot(const Tensor2<dim>& b, const Tensor4<dim>& a) {
  Tensor2<dim> t;
  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l) {
      double s = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += b(i, j) * a(i, j, k, l);
      t(k, l) = s;
    }
  return t;
}

/// (A : B)_ijkl = A_ijmn B_mnkl
template <int dim>
Tensor4<dim> ddot(const Tensor4<dim>& a, const Tensor4<dim>& b) {
  Tensor4<dim> t;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int m = 0; m < dim; ++m)
            for (int n = 0; n < dim; ++n) s += a(i, j, m, n) * b(m, n, k, l);
          t(i, j, k, l) = s;
        }
  return t;
}

template <int dim>
double norm(const Tensor4<dim>& a) {
  double s = 0.0;
  for (double v : a.raw()) s += v * v;
  return std::sqrt(s);
}

/// max |A_ijkl - A_klij|
template <int dim>
double major_asymmetry(const Tensor4<dim>& a) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) m = std::max(m, std::abs(a(i, j, k, l) - a(k, l, i, j)));
  return m;
}

/// max over |A_ijkl - A_jikl| and |A_ijkl - A_ijlk|
template <int dim>
double minor_asymmetry(const Tensor4<dim>& a) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          m = std::max(m, std::abs(a(i, j, k, l) - a(j, i, k, l)));
          m = std::max(m, std::abs(a(i, j, k, l) - a(i, j, l, k)));
        }
  return m;
}

/// c_ijkl = J^{-1} F_iI F_jJ F_kK F_lL C_IJKL, done as four successive
/// single-index transforms.
template <int dim>
Tensor4<dim> push_forward_tangent(const Tensor2<dim>& F, const Tensor4<dim>& CC) {
  const double J = det(F);
  if (!(J > 0.0)) throw Error(ErrorKind::InvertedElement, "det F <= 0 in push-forward");
  Tensor4<dim> t1, t2;
  // contract index l
  for (int I = 0; I < dim; ++I)
    for (int Jx = 0; Jx < dim; ++Jx)
      for (int K = 0; K < dim; ++K)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int L = 0; L < dim; ++L) s += F(l, L) * CC(I, Jx, K, L);
          t1(I, Jx, K, l) = s;
        }
  for (int I = 0; I < dim; ++I)
    for (int Jx = 0; Jx < dim; ++Jx)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int K = 0; K < dim; ++K) s += F(k, K) * t1(I, Jx, K, l);
          t2(I, Jx, k, l) = s;
        }
  for (int I = 0; I < dim; ++I)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int Jx = 0; Jx < dim; ++Jx) s += F(j, Jx) * t2(I, Jx, k, l);
          t1(I, j, k, l) = s;
        }
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int I = 0; I < dim; ++I) s += F(i, I) * t1(I, j, k, l);
          t2(i, j, k, l) = s / J;
        }
  return t2;
}

template <int dim>
std::ostream& operator<<(std::ostream& os, const Tensor2<dim>& a) {
  os << '[';
  for (int i = 0; i < dim; ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < dim; ++j) os << (j ? " " : "") << a(i, j);
  }
  return os << ']';
}

}  // namespace psfem
