#pragma once

// Derived fields and file output: Cauchy stress, von Mises stress, element
// averages, legacy VTK grids and CSV tables.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "psfem/assembly.hpp"
#include "psfem/scenarios.hpp"
#include "psfem/solver.hpp"

namespace psfem {

/// sigma = J^{-1} F S F^T.
template <int dim>
Tensor2<dim> cauchy_from_state(const Tensor2<dim>& F, const Tensor2<dim>& S) {
  const double J = det(F);
  if (!(J > 0.0)) throw Error(ErrorKind::InvertedElement, "det F <= 0 in stress recovery");
  return (1.0 / J) * (F * S * transpose(F));
}

/// sqrt(3/2 dev(s):dev(s)) with dev(s) = s - tr(s)/d I.
template <int n>
double von_mises(const Tensor2<n>& s, int d) {
  const auto dev = s - (trace(s) / d) * Tensor2<n>::identity();
  return std::sqrt(1.5 * ddot(dev, dev));
}

/// Weighted mean of quadrature-point stresses.
inline Tensor2<3> element_average(const std::vector<Tensor2<3>>& stresses, const std::vector<double>& weights) {
  if (stresses.size() != weights.size() || stresses.empty())
    throw Error(ErrorKind::DimensionMismatch, "stress and weight counts differ");
  Tensor2<3> sum;
  double w = 0.0;
  for (size_t q = 0; q < stresses.size(); ++q) {
    if (!(weights[q] > 0.0)) throw Error(ErrorKind::InvalidArgument, "quadrature weight must be positive");
    sum += weights[q] * stresses[q];
    w += weights[q];
  }
  return (1.0 / w) * sum;
}

/// Effective-stress dimension: 2 in flatland, 3 otherwise.
constexpr int stress_dim(Regime r) { return r == Regime::Flatland ? 2 : 3; }

inline double effective_stress(Regime r, const Tensor2<3>& s) {
  return r == Regime::Flatland ? von_mises(in_plane(s), 2) : von_mises(s, 3);
}

/// Cauchy stress at one quadrature point as a 3x3 tensor (zero out-of-plane
/// block in flatland). c33 is the converged plane-stress value at that point.
template <int dim>
Tensor2<3> qp_cauchy(const System<dim>& sys, int cell, int qp, const Eigen::VectorXd& q, double c33) {
  const auto& mesh = sys.mesh();
  const auto& layout = sys.layout();
  const auto& g = sys.geometry(cell)[qp];
  const auto& conn = mesh.cells[cell];
  std::vector<double> ue(conn.size() * dim);
  for (size_t i = 0; i < conn.size(); ++i)
    for (int a = 0; a < dim; ++a) ue[i * dim + a] = q(layout.u(conn[i], a));
  const auto F = deformation_gradient(g, ue.data());
  const auto& model = sys.material(cell);
  const Regime regime = sys.problem().regime;

  if (sys.problem().formulation == Formulation::ThreeField) {
    std::vector<double> Np;
    sys.mixed_basis().eval(g.xi, Np);
    double p = 0.0;
    for (int k = 0; k < layout.n_mixed; ++k) p += Np[k] * q(layout.p(cell, k));
    if constexpr (dim == 3) {
      const auto pt = threefield_point<3>(regime, model, F, p);
      return (1.0 / pt.J) * pt.tau;
    } else {
      if (regime == Regime::Flatland) {
        const auto pt = threefield_point<2>(regime, model, F, p);
        return embed_plane((1.0 / pt.J) * pt.tau, 0.0);
      }
      const auto es = eulerian_split_tangent<3>(model, embed_plane(F, 1.0));
      return (1.0 / es.J) * es.tau_iso + p * Tensor2<3>::identity();
    }
  }

  const auto C = transpose(F) * F;
  if constexpr (dim == 3) {
    return cauchy_from_state(F, evaluate<3>(model, C).S);
  } else {
    switch (regime) {
      case Regime::Flatland: return embed_plane(cauchy_from_state(F, evaluate<2>(model, C).S), 0.0);
      case Regime::PlaneStrain:
        return cauchy_from_state(embed_plane(F, 1.0), evaluate<3>(model, embed_plane(C, 1.0)).S);
      case Regime::PlaneStress:
        return cauchy_from_state(embed_plane(F, std::sqrt(c33)), evaluate<3>(model, embed_plane(C, c33)).S);
      default: throw Error(ErrorKind::UnsupportedRegime, "3D regime on a 2D mesh");
    }
  }
}

template <int dim>
struct FieldSnapshot {
  int step = 0;
  double load = 0.0;
  Regime regime = Regime::PlaneStress;
  std::vector<std::array<double, dim>> u;  // nodal displacement, mm
  std::vector<double> pressure;            // element mean of the mixed pressure; empty for one-field
  std::vector<double> dilatation;          // element mean of the mixed dilatation; empty for one-field
  std::vector<Tensor2<3>> stress;          // element-averaged Cauchy stress, MPa
  std::vector<double> effective;           // von Mises of the averaged stress, MPa
};

template <int dim>
FieldSnapshot<dim> make_snapshot(const System<dim>& sys, const StepSnapshot& st) {
  const auto& mesh = sys.mesh();
  const auto& layout = sys.layout();
  FieldSnapshot<dim> out;
  out.step = st.step;
  out.load = st.load;
  out.regime = sys.problem().regime;
  out.u.resize(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n)
    for (int a = 0; a < dim; ++a) out.u[n][a] = st.q(layout.u(n, a));

  const int nq = sys.n_qp();
  const bool mixed = layout.n_mixed > 0;
  std::vector<Tensor2<3>> sig(nq);
  std::vector<double> w(nq), Np;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& geo = sys.geometry(c);
    double pm = 0.0, Jm = 0.0, vol = 0.0;
    for (int k = 0; k < nq; ++k) {
      const double c33 = st.c33.empty() ? 1.0 : st.c33[static_cast<size_t>(c) * nq + k];
      sig[k] = qp_cauchy(sys, c, k, st.q, c33);
      w[k] = geo[k].JxW;
      if (mixed) {
        sys.mixed_basis().eval(geo[k].xi, Np);
        for (int m = 0; m < layout.n_mixed; ++m) {
          pm += w[k] * Np[m] * st.q(layout.p(c, m));
          Jm += w[k] * Np[m] * st.q(layout.J(c, m));
        }
      }
      vol += w[k];
    }
    out.stress.push_back(element_average(sig, w));
    out.effective.push_back(effective_stress(out.regime, out.stress.back()));
    if (mixed) {
      out.pressure.push_back(pm / vol);
      out.dilatation.push_back(Jm / vol);
    }
  }
  return out;
}

/// max_e |sigma33_e| / max_e sigma_eff_e over element averages.
template <int dim>
double out_of_plane_stress_ratio(const FieldSnapshot<dim>& s) {
  double num = 0.0, den = 0.0;
  for (size_t e = 0; e < s.stress.size(); ++e) {
    num = std::max(num, std::abs(s.stress[e](2, 2)));
    den = std::max(den, s.effective[e]);
  }
  return den > 0.0 ? num / den : 0.0;
}

// --- VTK -------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

/// Lexicographic local index of each VTK cell node, for order 1 or 2.
template <int dim>
std::vector<int> vtk_node_order(int order) {
  using Idx = std::array<int, 3>;
  std::vector<Idx> pts;
  const int e = order;
  if constexpr (dim == 2) {
    pts = {{0, 0, 0}, {e, 0, 0}, {e, e, 0}, {0, e, 0}};
    if (order == 2) pts.insert(pts.end(), {{1, 0, 0}, {2, 1, 0}, {1, 2, 0}, {0, 1, 0}, {1, 1, 0}});
  } else {
    pts = {{0, 0, 0}, {e, 0, 0}, {e, e, 0}, {0, e, 0}, {0, 0, e}, {e, 0, e}, {e, e, e}, {0, e, e}};
    if (order == 2)
      pts.insert(pts.end(), {{1, 0, 0}, {2, 1, 0}, {1, 2, 0}, {0, 1, 0}, {1, 0, 2}, {2, 1, 2}, {1, 2, 2},
                             {0, 1, 2}, {0, 0, 1}, {2, 0, 1}, {2, 2, 1}, {0, 2, 1}, {0, 1, 1}, {2, 1, 1},
                             {1, 0, 1}, {1, 2, 1}, {1, 1, 0}, {1, 1, 2}, {1, 1, 1}});
  }
  const int n1 = order + 1;
  std::vector<int> out;
  for (const auto& p : pts) out.push_back(p[0] + n1 * p[1] + n1 * n1 * p[2]);
  return out;
}

inline int vtk_cell_type(int dim, int order) {
  if (order == 1) return dim == 2 ? 9 : 12;
  if (order == 2) return dim == 2 ? 28 : 29;
  throw Error(ErrorKind::InvalidArgument, "VTK output supports orders 1 and 2");
}

}  // namespace detail

/// Legacy ASCII unstructured grid with nodal displacement and cell stress data.
template <int dim>
void write_vtk(std::ostream& os, const Mesh<dim>& mesh, const FieldSnapshot<dim>& s) {
  using detail::fmt;
  if (static_cast<int>(s.u.size()) != mesh.n_nodes() || static_cast<int>(s.stress.size()) != mesh.n_cells())
    throw Error(ErrorKind::DimensionMismatch, "snapshot does not match mesh");
  const auto order = detail::vtk_node_order<dim>(mesh.order);
  const int type = detail::vtk_cell_type(dim, mesh.order);
  os << "# vtk DataFile Version 2.0\n";
  os << "psfem step " << s.step << " load " << fmt(s.load) << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& x : mesh.nodes) {
    for (int d = 0; d < 3; ++d) os << (d ? " " : "") << (d < dim ? fmt(x[d]) : "0");
    os << "\n";
  }
  const int npc = static_cast<int>(order.size());
  os << "CELLS " << mesh.n_cells() << " " << mesh.n_cells() * (npc + 1) << "\n";
  for (const auto& conn : mesh.cells) {
    os << npc;
    for (int l : order) os << " " << conn[l];
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int c = 0; c < mesh.n_cells(); ++c) os << type << "\n";

  os << "POINT_DATA " << mesh.n_nodes() << "\nVECTORS displacement double\n";
  for (const auto& u : s.u) {
    for (int d = 0; d < 3; ++d) os << (d ? " " : "") << (d < dim ? fmt(u[d]) : "0");
    os << "\n";
  }

  os << "CELL_DATA " << mesh.n_cells() << "\nTENSORS stress double\n";
  for (const auto& t : s.stress)
    for (int i = 0; i < 3; ++i) os << fmt(t(i, 0)) << " " << fmt(t(i, 1)) << " " << fmt(t(i, 2)) << "\n";
  auto scalars = [&](const char* name, const std::vector<double>& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) os << fmt(x) << "\n";
  };
  scalars("von_mises", s.effective);
  os << "SCALARS material_id int 1\nLOOKUP_TABLE default\n";
  for (int id : mesh.material_id) os << id << "\n";
  if (!s.pressure.empty()) scalars("pressure", s.pressure);
  if (!s.dilatation.empty()) scalars("dilatation", s.dilatation);
}

/// Points, connectivity and cell types of a legacy VTK unstructured grid.
struct VtkGrid {
  std::vector<std::array<double, 3>> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> types;
};

inline VtkGrid read_vtk_grid(std::istream& is) {
  VtkGrid g;
  std::string tok;
  auto fail = [](const std::string& m) { return Error(ErrorKind::IoError, "VTK parse: " + m); };
  while (is >> tok) {
    if (tok == "POINTS") {
      int n;
      std::string type;
      if (!(is >> n >> type)) throw fail("POINTS header");
      g.points.resize(n);
      for (auto& p : g.points)
        if (!(is >> p[0] >> p[1] >> p[2])) throw fail("point coordinates");
    } else if (tok == "CELLS") {
      int n, size;
      if (!(is >> n >> size)) throw fail("CELLS header");
      g.cells.resize(n);
      for (auto& c : g.cells) {
        int k;
        if (!(is >> k) || k < 0) throw fail("cell size");
        c.resize(k);
        for (int& v : c)
          if (!(is >> v)) throw fail("cell connectivity");
      }
    } else if (tok == "CELL_TYPES") {
      int n;
      if (!(is >> n)) throw fail("CELL_TYPES header");
      g.types.resize(n);
      for (int& t : g.types)
        if (!(is >> t)) throw fail("cell type");
    } else if (tok == "POINT_DATA") {
      break;
    }
  }
  if (g.points.empty() || g.cells.size() != g.types.size()) throw fail("incomplete grid");
  return g;
}

// --- CSV ---------------------------------------------------------------------

struct ProbeRow {
  int step = 0;
  double load = 0.0;
  std::string probe;
  std::vector<double> u;
};

/// Mean displacement over each probe's nodes.
template <int dim>
std::vector<ProbeRow> probe_rows(const DofLayout& layout, const std::vector<Probe>& probes, const StepSnapshot& st) {
  std::vector<ProbeRow> out;
  for (const auto& p : probes) {
    ProbeRow r{st.step, st.load, p.name, std::vector<double>(dim, 0.0)};
    for (int n : p.nodes)
      for (int a = 0; a < dim; ++a) r.u[a] += st.q(layout.u(n, a));
    for (double& v : r.u) v /= static_cast<double>(p.nodes.size());
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows, int dim) {
  os << "step,load,probe,u1,u2" << (dim == 3 ? ",u3" : "") << "\n";
  for (const auto& r : rows) {
    if (static_cast<int>(r.u.size()) != dim) throw Error(ErrorKind::DimensionMismatch, "probe row width");
    os << r.step << "," << detail::fmt(r.load) << "," << r.probe;
    for (double v : r.u) os << "," << detail::fmt(v);
    os << "\n";
  }
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceLog& log) {
  os << "step,iter,residual_norm\n";
  for (const auto& st : log.steps)
    for (size_t k = 0; k < st.residuals.size(); ++k) os << st.step << "," << k << "," << detail::fmt(st.residuals[k]) << "\n";
}

// --- run directory -------------------------------------------------------------

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  return f;
}

/// Writes <dir>/<step>.vtk per step, probes.csv and convergence.csv.
template <int dim>
void emit_run(const std::filesystem::path& dir, const System<dim>& sys, const std::vector<Probe>& probes,
              const RunResult& res, bool vtk = true) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<ProbeRow> rows;
  for (const auto& st : res.history.steps) {
    if (vtk) {
      auto f = open_output(dir / (std::to_string(st.step) + ".vtk"));
      write_vtk(f, sys.mesh(), make_snapshot(sys, st));
    }
    for (auto& r : probe_rows<dim>(sys.layout(), probes, st)) rows.push_back(std::move(r));
  }
  auto pf = open_output(dir / "probes.csv");
  write_probe_csv(pf, rows, dim);
  auto cf = open_output(dir / "convergence.csv");
  write_convergence_csv(cf, res.log);
  if (!pf || !cf) throw Error(ErrorKind::IoError, "write failed in " + dir.string());
}

}  // namespace psfem
