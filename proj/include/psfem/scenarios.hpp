#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "psfem/errors.hpp"
#include "psfem/material.hpp"
#include "psfem/mesh.hpp"
#include "psfem/problem.hpp"

namespace psfem {

/// Named probe; the reported displacement is the mean over its nodes.
struct Probe {
  std::string name;
  std::vector<int> nodes;
};

template <int dim>
struct Scenario {
  Problem<dim> problem;
  std::vector<Probe> probes;
  double inclusion_fraction = 0.0;  // composites only, by cell area
};

inline Formulation default_formulation(Regime r) {
  return r == Regime::PlaneStress ? Formulation::OneField : Formulation::ThreeField;
}

inline void check_mesh_size(int n, std::initializer_list<int> allowed, const char* what) {
  for (int a : allowed)
    if (n == a) return;
  throw Error(ErrorKind::InvalidArgument, std::string(what) + ": unsupported mesh size n = " + std::to_string(n));
}

namespace detail {

template <int dim>
Probe probe_line(const Mesh<dim>& mesh, const std::string& name, double x, double y) {
  Probe p{name, {}};
  const double tol = 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (std::abs(mesh.nodes[i][0] - x) <= tol && std::abs(mesh.nodes[i][1] - y) <= tol) p.nodes.push_back(i);
  if (p.nodes.empty()) throw Error(ErrorKind::InvalidArgument, "no node at probe " + name);
  return p;
}

}  // namespace detail

// --- Cook's cantilever ---------------------------------------------------------

struct CookParams {
  int n = 8;
  int order = 2;
  Regime regime = Regime::PlaneStress;
  std::optional<Formulation> formulation;
  double traction = 24.0;  // upward, per unit reference area on the right edge
  double thickness = 1.0;  // 3D only
  bool walls = false;      // 3D only: u3 = 0 on both faces
  double mu = 80.1938;
  double nu = 0.4999;
  VolumetricLaw vol_law = VolumetricLaw::QuarterJsqMinusLog;
};

/// Tapered panel with corners (0,0), (48,44), (48,60), (0,44): the unit square
/// mapped bilinearly, one cell through the thickness in 3D. Point A is the top
/// right corner; in 3D its value is the mean over the nodes along the thickness.
template <int dim>
Scenario<dim> cook(const CookParams& c) {
  check_mesh_size(c.n, {2, 4, 8, 16, 32, 64}, "cook");
  if (spatial_dim(c.regime) != dim) throw Error(ErrorKind::UnsupportedRegime, "regime does not match dimension");
  const double t = c.thickness;
  std::array<int, dim> cells{};
  cells[0] = cells[1] = c.n;
  if constexpr (dim == 3) cells[2] = 1;
  auto geo = [t](const std::array<double, dim>& u) {
    std::array<double, dim> x{};
    x[0] = 48.0 * u[0];
    const double lower = 44.0 * u[0];
    const double upper = 44.0 + 16.0 * u[0];
    x[1] = (1.0 - u[1]) * lower + u[1] * upper;
    if constexpr (dim == 3) x[2] = t * u[2];
    return x;
  };
  Scenario<dim> s;
  auto& p = s.problem;
  p.mesh = structured_mesh<dim>(cells, c.order, geo);
  p.regime = c.regime;
  p.formulation = c.formulation.value_or(default_formulation(c.regime));
  p.materials = {MaterialModel(ModelKind::NeoHookeanDecoupled, MaterialParams::from_mu_nu(c.mu, c.nu), c.vol_law)};
  for (int a = 0; a < dim; ++a) p.dirichlet.push_back({"left", a, 0.0});
  if constexpr (dim == 3) {
    if (c.walls) {
      p.dirichlet.push_back({"back", 2, 0.0});
      p.dirichlet.push_back({"front", 2, 0.0});
    }
  }
  NeumannBC<dim> load{"right", {}};
  load.traction[1] = c.traction;
  p.neumann.push_back(load);
  s.probes.push_back(detail::probe_line(p.mesh, "A", 48.0, 60.0));
  return s;
}

// --- punch -------------------------------------------------------------------

struct PunchParams {
  int n = 16;
  int order = 2;
  Regime regime = Regime::PlaneStress;
  std::optional<Formulation> formulation;
  double traction = 6000.0;     // nominal load f
  double load_to_traction = 0.1;  // applied downward traction per unit reference area = load_to_traction * f
  double mu = 80.1938;
  double nu = 0.4999;
  VolumetricLaw vol_law = VolumetricLaw::QuarterJsqMinusLog;
};

/// Symmetric half of a 20 mm block, 10 x 10 (x 10) mm. Symmetry plane x1 = 0,
/// bottom u2 = 0, top u1 = 0, in 3D u3 = 0 on back and front. The load acts on
/// the half of the top surface next to the symmetry plane. Probe "top_middle"
/// is the top node on the symmetry plane (3D: mean along x3).
template <int dim>
Scenario<dim> punch(const PunchParams& c) {
  check_mesh_size(c.n, {2, 4, 8, 16, 32}, "punch");
  if (spatial_dim(c.regime) != dim) throw Error(ErrorKind::UnsupportedRegime, "regime does not match dimension");
  std::array<int, dim> cells{};
  cells.fill(c.n);
  auto geo = [](const std::array<double, dim>& u) {
    std::array<double, dim> x{};
    for (int d = 0; d < dim; ++d) x[d] = 10.0 * u[d];
    return x;
  };
  Scenario<dim> s;
  auto& p = s.problem;
  p.mesh = structured_mesh<dim>(cells, c.order, geo);
  p.regime = c.regime;
  p.formulation = c.formulation.value_or(default_formulation(c.regime));
  p.materials = {MaterialModel(ModelKind::NeoHookeanDecoupled, MaterialParams::from_mu_nu(c.mu, c.nu), c.vol_law)};
  p.dirichlet.push_back({"left", 0, 0.0});
  p.dirichlet.push_back({"bottom", 1, 0.0});
  p.dirichlet.push_back({"top", 0, 0.0});
  if constexpr (dim == 3) {
    p.dirichlet.push_back({"back", 2, 0.0});
    p.dirichlet.push_back({"front", 2, 0.0});
  }
  auto& loaded = p.mesh.facet_sets["loaded"];
  for (const auto& f : p.mesh.facet_sets.at("top")) {
    const auto nodes = p.mesh.facet_nodes(f);
    double xc = 0.0;
    for (int n : nodes) xc += p.mesh.nodes[n][0];
    if (xc / nodes.size() < 5.0) loaded.push_back(f);
  }
  NeumannBC<dim> load{"loaded", {}};
  load.traction[1] = -c.load_to_traction * c.traction;
  p.neumann.push_back(load);
  s.probes.push_back(detail::probe_line(p.mesh, "top_middle", 0.0, 10.0));
  return s;
}

/// Compression in percent of the 10 mm height from the probe's vertical displacement.
inline double punch_compression(double u2_top_middle) { return -u2_top_middle / 10.0 * 100.0; }

// --- composites --------------------------------------------------------------

enum class InclusionKind { Particles, Fibres };

struct CompositeParams {
  InclusionKind kind = InclusionKind::Particles;
  std::uint64_t seed = 1;
  int n = 0;  // cells per edge; 0 selects 80 for particles, 100 for fibres
  int order = 1;
  int count = 0;           // 0 selects 10 particles or 25 fibres
  double fraction = 0.0;   // 0 selects 0.25 for particles, 0.03 for fibres
  double aspect = 10.0;    // fibre length / diameter
  double stretch = 1.0;    // right-edge displacement at full load, in units of the edge length
  double mu_matrix = 1.0;
  double nu_matrix = 0.3;
  double mu_inclusion = 50.0;
  double nu_inclusion = 0.3;
  int max_attempts = 200000;
};

struct Inclusion {
  double x = 0.0, y = 0.0;
  double a = 0.0;  // radius, or fibre half-length
  double b = 0.0;  // fibre half-width
  double angle = 0.0;
};

namespace detail {

inline std::array<std::array<double, 2>, 4> fibre_corners(const Inclusion& f, double pad) {
  const double c = std::cos(f.angle), s = std::sin(f.angle);
  const double a = f.a + pad, b = f.b + pad;
  std::array<std::array<double, 2>, 4> out{};
  const double sx[4] = {-1, 1, 1, -1}, sy[4] = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) out[k] = {f.x + sx[k] * a * c - sy[k] * b * s, f.y + sx[k] * a * s + sy[k] * b * c};
  return out;
}

/// Separating-axis test for two rectangles, each padded by pad.
inline bool fibres_overlap(const Inclusion& f, const Inclusion& g, double pad) {
  const auto A = fibre_corners(f, pad), B = fibre_corners(g, pad);
  for (const Inclusion* r : {&f, &g}) {
    for (int k = 0; k < 2; ++k) {
      const double ang = r->angle + k * M_PI / 2.0;
      const double ax = std::cos(ang), ay = std::sin(ang);
      double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
      for (const auto& p : A) {
        const double v = p[0] * ax + p[1] * ay;
        amin = std::min(amin, v);
        amax = std::max(amax, v);
      }
      for (const auto& p : B) {
        const double v = p[0] * ax + p[1] * ay;
        bmin = std::min(bmin, v);
        bmax = std::max(bmax, v);
      }
      if (amax < bmin || bmax < amin) return false;
    }
  }
  return true;
}

inline bool inside_inclusion(const Inclusion& f, InclusionKind kind, double x, double y) {
  const double dx = x - f.x, dy = y - f.y;
  if (kind == InclusionKind::Particles) return dx * dx + dy * dy <= f.a * f.a;
  const double c = std::cos(f.angle), s = std::sin(f.angle);
  return std::abs(dx * c + dy * s) <= f.a && std::abs(-dx * s + dy * c) <= f.b;
}

}  // namespace detail

/// Random non-overlapping inclusions in the unit square, kept one cell size
/// apart from each other and from the boundary. Deterministic for a given seed.
inline std::vector<Inclusion> place_inclusions(const CompositeParams& c, int count, double fraction, double h) {
  std::mt19937_64 gen(c.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Inclusion> out;
  const double area = fraction / count;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > c.max_attempts)
      throw Error(ErrorKind::PlacementFailed, "placed " + std::to_string(out.size()) + " of " +
                                                  std::to_string(count) + " inclusions");
    Inclusion f;
    f.x = U(gen);
    f.y = U(gen);
    bool ok = true;
    if (c.kind == InclusionKind::Particles) {
      f.a = std::sqrt(area / M_PI);
      const double m = f.a + h;
      ok = f.x >= m && f.x <= 1.0 - m && f.y >= m && f.y <= 1.0 - m;
      for (const auto& g : out)
        if (ok && std::hypot(f.x - g.x, f.y - g.y) < f.a + g.a + h) ok = false;
    } else {
      const double d = std::sqrt(area / c.aspect);
      f.a = 0.5 * c.aspect * d;
      f.b = 0.5 * d;
      f.angle = M_PI * U(gen);
      for (const auto& p : detail::fibre_corners(f, h))
        if (p[0] < 0.0 || p[0] > 1.0 || p[1] < 0.0 || p[1] > 1.0) ok = false;
      for (const auto& g : out)
        if (ok && detail::fibres_overlap(f, g, 0.5 * h)) ok = false;
    }
    if (ok) out.push_back(f);
  }
  return out;
}

/// Plane-stress unit square with stiff inclusions; left edge fixed, right edge
/// pulled to u1 = stretch with u2 = 0 there.
inline Scenario<2> composite(const CompositeParams& c) {
  const bool particles = c.kind == InclusionKind::Particles;
  const int n = c.n > 0 ? c.n : (particles ? 80 : 100);
  const int count = c.count > 0 ? c.count : (particles ? 10 : 25);
  const double fraction = c.fraction > 0.0 ? c.fraction : (particles ? 0.25 : 0.03);
  const double h = 1.0 / n;
  const auto inc = place_inclusions(c, count, fraction, h);

  Scenario<2> s;
  auto& p = s.problem;
  p.mesh = structured_mesh<2>({n, n}, c.order, [](const std::array<double, 2>& u) { return u; });
  p.regime = Regime::PlaneStress;
  p.formulation = Formulation::OneField;
  p.materials = {MaterialModel(ModelKind::NeoHookeanDecoupled, MaterialParams::from_mu_nu(c.mu_matrix, c.nu_matrix)),
                 MaterialModel(ModelKind::NeoHookeanDecoupled,
                               MaterialParams::from_mu_nu(c.mu_inclusion, c.nu_inclusion))};
  int stiff = 0;
  for (int e = 0; e < p.mesh.n_cells(); ++e) {
    const auto& conn = p.mesh.cells[e];
    double xc = 0.0, yc = 0.0;
    for (int k : conn) {
      xc += p.mesh.nodes[k][0];
      yc += p.mesh.nodes[k][1];
    }
    xc /= conn.size();
    yc /= conn.size();
    for (const auto& f : inc)
      if (detail::inside_inclusion(f, c.kind, xc, yc)) {
        p.mesh.material_id[e] = 1;
        ++stiff;
        break;
      }
  }
  s.inclusion_fraction = static_cast<double>(stiff) / p.mesh.n_cells();
  p.dirichlet = {{"left", 0, 0.0}, {"left", 1, 0.0}, {"right", 0, c.stretch}, {"right", 1, 0.0}};
  s.probes.push_back(detail::probe_line(p.mesh, "mid_bottom", 0.5, 0.0));
  s.probes.push_back(detail::probe_line(p.mesh, "mid_top", 0.5, 1.0));
  return s;
}

}  // namespace psfem
