#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "psfem/errors.hpp"

namespace psfem {

struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on P_n from Chebyshev guesses).
inline Rule1D gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss rule needs at least one point");
  Rule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) dp = 1.0;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[i] = -x;
    r.points[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.points[n / 2] = 0.0;
  if (n == 1) r.weights[0] = 2.0;
  return r;
}

template <int dim>
struct QuadratureRule {
  std::vector<std::array<double, dim>> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Tensor-product Gauss rule on [-1, 1]^dim, first coordinate running fastest.
template <int dim>
QuadratureRule<dim> tensor_gauss(int n) {
  const auto r = gauss_legendre(n);
  QuadratureRule<dim> q;
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= n;
  for (int idx = 0; idx < total; ++idx) {
    std::array<double, dim> x{};
    double w = 1.0;
    int rem = idx;
    for (int d = 0; d < dim; ++d) {
      const int k = rem % n;
      rem /= n;
      x[d] = r.points[k];
      w *= r.weights[k];
    }
    q.points.push_back(x);
    q.weights.push_back(w);
  }
  return q;
}

}  // namespace psfem
