#pragma once

#include <array>
#include <vector>

#include "psfem/errors.hpp"

namespace psfem {

/// Tensor-product Lagrange basis of order p on [-1, 1]^dim with equispaced
/// nodes in lexicographic order (first axis fastest).
template <int dim>
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int order) : p_(order) {
    if (order < 1 || order > 4) throw Error(ErrorKind::InvalidArgument, "element order must be 1..4");
    n1_ = p_ + 1;
    n_ = 1;
    for (int d = 0; d < dim; ++d) n_ *= n1_;
    for (int a = 0; a < n1_; ++a) x1_.push_back(-1.0 + 2.0 * a / p_);
  }

  int order() const { return p_; }
  int size() const { return n_; }
  int nodes_per_axis() const { return n1_; }

  std::array<int, dim> multi_index(int i) const {
    std::array<int, dim> m{};
    for (int d = 0; d < dim; ++d) {
      m[d] = i % n1_;
      i /= n1_;
    }
    return m;
  }

  int flat_index(const std::array<int, dim>& m) const {
    int i = 0;
    for (int d = dim - 1; d >= 0; --d) i = i * n1_ + m[d];
    return i;
  }

  std::array<double, dim> node(int i) const {
    const auto m = multi_index(i);
    std::array<double, dim> x{};
    for (int d = 0; d < dim; ++d) x[d] = x1_[m[d]];
    return x;
  }

  /// Shape values and reference gradients at xi.
  void eval(const std::array<double, dim>& xi, std::vector<double>& N,
            std::vector<std::array<double, dim>>& dN) const {
    std::array<std::vector<double>, dim> l, dl;
    for (int d = 0; d < dim; ++d) {
      l[d].resize(n1_);
      dl[d].resize(n1_);
      for (int a = 0; a < n1_; ++a) eval_1d(a, xi[d], l[d][a], dl[d][a]);
    }
    N.assign(n_, 1.0);
    dN.assign(n_, {});
    for (int i = 0; i < n_; ++i) {
      const auto m = multi_index(i);
      for (int d = 0; d < dim; ++d) {
        N[i] *= l[d][m[d]];
        double g = dl[d][m[d]];
        for (int e = 0; e < dim; ++e)
          if (e != d) g *= l[e][m[e]];
        dN[i][d] = g;
      }
    }
  }

  /// Local node numbers on face (axis, side), face id = 2 axis + side, in lexicographic order.
  std::vector<int> face_nodes(int face) const {
    const int axis = face / 2;
    const int fixed = (face % 2) ? p_ : 0;
    std::vector<int> out;
    for (int i = 0; i < n_; ++i)
      if (multi_index(i)[axis] == fixed) out.push_back(i);
    return out;
  }

 private:
  void eval_1d(int a, double x, double& v, double& dv) const {
    v = 1.0;
    dv = 0.0;
    for (int b = 0; b < n1_; ++b) {
      if (b == a) continue;
      const double den = x1_[a] - x1_[b];
      double prod = 1.0 / den;
      for (int c = 0; c < n1_; ++c)
        if (c != a && c != b) prod *= (x - x1_[c]) / (x1_[a] - x1_[c]);
      dv += prod;
      v *= (x - x1_[b]) / den;
    }
  }

  int p_;
  int n1_;
  int n_;
  std::vector<double> x1_;
};

/// Complete polynomials of total degree <= k in reference coordinates
/// (1, xi, eta[, zeta] for k = 1); used for element-local discontinuous fields.
template <int dim>
class MonomialBasis {
 public:
  explicit MonomialBasis(int degree) : k_(degree) {
    if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative monomial degree");
    std::array<int, dim> e{};
    enumerate(0, degree, e);
  }

  int degree() const { return k_; }
  int size() const { return static_cast<int>(exps_.size()); }

  void eval(const std::array<double, dim>& xi, std::vector<double>& out) const {
    out.resize(exps_.size());
    for (size_t m = 0; m < exps_.size(); ++m) {
      double v = 1.0;
      for (int d = 0; d < dim; ++d)
        for (int q = 0; q < exps_[m][d]; ++q) v *= xi[d];
      out[m] = v;
    }
  }

 private:
  void enumerate(int d, int budget, std::array<int, dim>& e) {
    if (d == dim) {
      exps_.push_back(e);
      return;
    }
    for (int q = 0; q <= budget; ++q) {
      e[d] = q;
      enumerate(d + 1, budget - q, e);
    }
    e[d] = 0;
  }

  int k_;
  std::vector<std::array<int, dim>> exps_;
};

}  // namespace psfem
