#pragma once

// Config-driven runs: scenario construction, solve, file output and the
// summary quantities reported per run, plus the table and study sweeps.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psfem/benchmarks.hpp"
#include "psfem/config.hpp"
#include "psfem/postprocess.hpp"
#include "psfem/scenarios.hpp"
#include "psfem/solver.hpp"

namespace psfem {

/// Root for run directories: $PSFEM_OUTPUT_ROOT, else ./runs.
inline std::filesystem::path output_root() {
  const char* env = std::getenv("PSFEM_OUTPUT_ROOT");
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("runs");
}

struct Quantity {
  std::string name;
  double value = 0.0;
};

struct RunSummary {
  std::vector<ProbeRow> probes;       // final step
  std::vector<Quantity> quantities;  // probe components, scenario metric and diagnostics
  ConvergenceLog log;
  std::filesystem::path dir;

  std::optional<double> get(const std::string& name) const {
    for (const auto& q : quantities)
      if (q.name == name) return q.value;
    return std::nullopt;
  }
};

namespace detail {

inline MaterialModel make_material(const MaterialSpec& m) {
  return MaterialModel(m.model, MaterialParams::from_mu_nu(m.mu, m.nu), m.volumetric);
}

template <int dim>
Scenario<dim> build_scenario(const RunConfig& c) {
  const auto form = c.effective_formulation();
  Scenario<dim> s;
  if (c.scenario == "cook") {
    CookParams p;
    p.n = c.n ? c.n : 8;
    p.order = c.order ? c.order : 2;
    p.regime = c.regime;
    p.formulation = form;
    p.traction = c.load.value_or(24.0);
    p.thickness = c.thickness;
    p.walls = c.walls;
    s = cook<dim>(p);
  } else if (c.scenario == "punch") {
    PunchParams p;
    p.n = c.n ? c.n : 16;
    p.order = c.order ? c.order : 2;
    p.regime = c.regime;
    p.formulation = form;
    p.traction = c.load.value_or(6000.0);
    s = punch<dim>(p);
  } else if (c.scenario == "composite-particles" || c.scenario == "composite-fibres") {
    if constexpr (dim == 2) {
      CompositeParams p;
      p.kind = c.scenario == "composite-particles" ? InclusionKind::Particles : InclusionKind::Fibres;
      p.seed = c.seed;
      p.n = c.n;
      p.order = c.order ? c.order : 1;
      p.count = c.composite.count;
      p.fraction = c.composite.fraction;
      p.aspect = c.composite.aspect;
      p.stretch = c.load.value_or(1.0);
      if (c.materials.size() == 2) {
        p.mu_matrix = c.materials[0].mu;
        p.nu_matrix = c.materials[0].nu;
        p.mu_inclusion = c.materials[1].mu;
        p.nu_inclusion = c.materials[1].nu;
      }
      s = composite(p);
    } else {
      config_fail("regime", "composites are plane stress only");
    }
  } else if (c.scenario == "mesh") {
    auto& p = s.problem;
    try {
      p.mesh = load_mesh<dim>(c.mesh.file);
    } catch (const Error& e) {
      config_fail("mesh.file", e.what());
    }
    if (c.order && c.order != p.mesh.order) config_fail("order", "does not match the mesh file");
    p.regime = c.regime;
    p.formulation = form;
    for (const auto& d : c.mesh.dirichlet) p.dirichlet.push_back({d.set, d.component, d.value});
    for (const auto& nb : c.mesh.neumann) {
      NeumannBC<dim> bc{nb.set, {}};
      for (int a = 0; a < dim; ++a) bc.traction[a] = nb.traction[a];
      p.neumann.push_back(bc);
    }
    for (size_t i = 0; i < c.mesh.probes.size(); ++i) {
      typename Mesh<dim>::Point x{};
      for (int a = 0; a < dim; ++a) x[a] = c.mesh.probes[i].point[a];
      try {
        s.probes.push_back({c.mesh.probes[i].name, {p.mesh.node_at(x)}});
      } catch (const Error& e) {
        config_fail("mesh.probes[" + std::to_string(i) + "].point", e.what());
      }
    }
  }
  if (!c.materials.empty()) {
    s.problem.materials.clear();
    for (const auto& m : c.materials) s.problem.materials.push_back(make_material(m));
  }
  try {
    validate(s.problem);
  } catch (const Error& e) {
    config_fail("<problem>", e.what());
  }
  return s;
}

template <int dim>
double probe_component(const std::vector<ProbeRow>& rows, const std::string& probe, int comp) {
  for (const auto& r : rows)
    if (r.probe == probe) return r.u[comp];
  throw Error(ErrorKind::InvalidArgument, "no probe " + probe);
}

template <int dim>
RunSummary execute_dim(const RunConfig& c, const std::filesystem::path& dir, bool write_files) {
  const auto sc = build_scenario<dim>(c);
  System<dim> sys(sc.problem);
  const auto res = run(sys, c.solver.settings());
  RunSummary out;
  out.dir = dir;
  out.log = res.log;
  out.probes = probe_rows<dim>(sys.layout(), sc.probes, res.history.steps.back());
  static const char* comp[] = {"u1", "u2", "u3"};
  for (const auto& r : out.probes)
    for (int a = 0; a < dim; ++a) out.quantities.push_back({r.probe + "." + comp[a], r.u[a]});
  if (c.scenario == "punch")
    out.quantities.push_back({"compression_percent", punch_compression(probe_component<dim>(out.probes, "top_middle", 1))});
  if (c.scenario.rfind("composite", 0) == 0) {
    out.quantities.push_back({"inclusion_fraction", sc.inclusion_fraction});
    out.quantities.push_back({"mid_width", 1.0 + probe_component<dim>(out.probes, "mid_top", 1) -
                                               probe_component<dim>(out.probes, "mid_bottom", 1)});
  }
  if (c.regime == Regime::PlaneStress) {
    const auto snap = make_snapshot(sys, res.history.steps.back());
    out.quantities.push_back({"sigma33_over_sigma_eff", out_of_plane_stress_ratio(snap)});
    double s33 = 0.0;
    for (const auto& st : res.log.steps) s33 = std::max(s33, st.max_S33_over_mu);
    out.quantities.push_back({"S33_over_mu", s33});
  }
  if (write_files) {
    emit_run(dir, sys, sc.probes, res, c.vtk);
    auto f = open_output(dir / "config.json");
    f << to_json(c).dump(2) << "\n";
  }
  return out;
}

inline std::string fmt_num(double v) { return detail::fmt(v); }

}  // namespace detail

/// Default run directory name derived from the config.
inline std::string run_name(const RunConfig& c) {
  if (!c.output.empty()) return c.output;
  std::string s = c.scenario + "_" + std::string(to_string(c.regime));
  if (c.order) s += "_p" + std::to_string(c.order);
  if (c.n) s += "_n" + std::to_string(c.n);
  if (c.load) s += "_f" + detail::fmt_num(*c.load);
  return s;
}

inline void write_summary_csv(std::ostream& os, const RunConfig& c, const RunSummary& s) {
  os << "scenario,regime,formulation,order,n,load,quantity,value\n";
  for (const auto& q : s.quantities)
    os << c.scenario << "," << to_string(c.regime) << "," << to_string(c.effective_formulation()) << "," << c.order
       << "," << c.n << "," << (c.load ? detail::fmt_num(*c.load) : "") << "," << q.name << ","
       << detail::fmt_num(q.value) << "\n";
}

/// Validates, solves and, if requested, writes the run directory below root.
inline RunSummary execute(const RunConfig& c, const std::filesystem::path& root, bool write_files = true) {
  validate(c);
  const auto dir = root / run_name(c);
  auto s = c.dim() == 3 ? detail::execute_dim<3>(c, dir, write_files) : detail::execute_dim<2>(c, dir, write_files);
  if (write_files) {
    auto f = open_output(dir / "summary.csv");
    write_summary_csv(f, c, s);
  }
  return s;
}

// --- Cook deflection table ----------------------------------------------------

struct TableCell {
  Regime regime = Regime::PlaneStress;
  int order = 2;
  int n = 8;
  double load = 24.0;
  double u2 = 0.0;
  std::optional<double> reference;

  std::optional<double> rel_error() const {
    if (!reference) return std::nullopt;
    return std::abs(u2 - *reference) / std::abs(*reference);
  }
};

inline RunConfig table_cell_config(Regime r, int order, int n, double load) {
  RunConfig c;
  c.scenario = "cook";
  c.regime = r;
  c.order = order;
  c.n = n;
  c.load = load;
  c.vtk = false;
  return c;
}

inline TableCell run_table_cell(Regime r, int order, int n, double load) {
  const auto s = execute(table_cell_config(r, order, n, load), {}, false);
  return {r, order, n, load, *s.get("A.u2"), cook_reference_u2(r, order, n, load)};
}

inline void write_table_csv(std::ostream& os, const std::vector<TableCell>& cells) {
  os << "load,n,regime,order,u2,reference,rel_error\n";
  for (const auto& t : cells) {
    os << detail::fmt_num(t.load) << "," << t.n << "," << to_string(t.regime) << "," << t.order << ","
       << detail::fmt_num(t.u2) << "," << (t.reference ? detail::fmt_num(*t.reference) : "") << ","
       << (t.rel_error() ? detail::fmt_num(*t.rel_error()) : "") << "\n";
  }
}

/// Markdown grid: one row per (load, n), one column per (regime, order).
inline void write_table_markdown(std::ostream& os, const std::vector<TableCell>& cells) {
  std::vector<std::pair<Regime, int>> cols;
  std::vector<std::pair<double, int>> rows;
  for (const auto& t : cells) {
    if (std::find(cols.begin(), cols.end(), std::pair{t.regime, t.order}) == cols.end()) cols.push_back({t.regime, t.order});
    if (std::find(rows.begin(), rows.end(), std::pair{t.load, t.n}) == rows.end()) rows.push_back({t.load, t.n});
  }
  os << "| f | mesh |";
  for (const auto& [r, p] : cols) os << " " << to_string(r) << " p" << p << " |";
  os << "\n|---|---|";
  for (size_t k = 0; k < cols.size(); ++k) os << "---|";
  os << "\n";
  char buf[64];
  for (const auto& [f, n] : rows) {
    os << "| " << detail::fmt_num(f) << " | " << n << "x" << n << " |";
    for (const auto& [r, p] : cols) {
      const TableCell* hit = nullptr;
      for (const auto& t : cells)
        if (t.load == f && t.n == n && t.regime == r && t.order == p) hit = &t;
      if (!hit) {
        os << " |";
      } else if (hit->reference) {
        std::snprintf(buf, sizeof buf, " %.2f (%.2f) |", hit->u2, *hit->reference);
        os << buf;
      } else {
        std::snprintf(buf, sizeof buf, " %.2f |", hit->u2);
        os << buf;
      }
    }
    os << "\n";
  }
}

// --- convergence studies -------------------------------------------------------

struct StudyConfig {
  std::string name = "study";
  RunConfig base;
  std::vector<Regime> regimes;
  std::vector<int> orders;
  std::vector<int> meshes;
  std::vector<double> thicknesses;  // cook 3D thickness sweep; empty: base thickness
  std::vector<double> loads;        // empty: base load
};

inline StudyConfig parse_study(const Json& j) {
  using namespace detail;
  check_keys(j, "", {"name", "base", "regimes", "orders", "n", "thickness", "loads"});
  StudyConfig s;
  read(j, "", "name", s.name);
  if (!j.contains("base")) config_fail("base", "required");
  s.base = parse_config(j.at("base"));
  s.regimes = read_array<Regime>(j, "", "regimes", [](const Json& v, const std::string& p) {
    return parse_enum(v, p, kRegimes);
  });
  s.orders = read_array<int>(j, "", "orders", [](const Json& v, const std::string& p) {
    if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != 2)) config_fail(p, "must be 1 or 2");
    return v.get<int>();
  });
  s.meshes = read_array<int>(j, "", "n", [](const Json& v, const std::string& p) {
    if (!v.is_number_integer() || v.get<int>() < 1) config_fail(p, "expected a positive integer");
    return v.get<int>();
  });
  auto positive = [](const Json& v, const std::string& p) {
    if (!v.is_number() || !(v.get<double>() > 0.0)) config_fail(p, "expected a positive number");
    return v.get<double>();
  };
  s.thicknesses = read_array<double>(j, "", "thickness", positive);
  s.loads = read_array<double>(j, "", "loads", positive);
  if (s.regimes.empty()) s.regimes = {s.base.regime};
  if (s.orders.empty()) s.orders = {s.base.order ? s.base.order : 2};
  if (s.meshes.empty()) s.meshes = {s.base.n};
  // every combination must form a valid run
  for (Regime r : s.regimes)
    for (int p : s.orders)
      for (int n : s.meshes) {
        auto c = s.base;
        c.regime = r;
        c.order = p;
        c.n = n;
        if (c.formulation && r == Regime::PlaneStress) c.formulation.reset();
        validate(c);
      }
  return s;
}

/// Name of the scalar a study tracks for a scenario.
inline std::string study_metric(const RunConfig& c) {
  if (c.scenario == "cook") return "A.u2";
  if (c.scenario == "punch") return "compression_percent";
  if (c.scenario.rfind("composite", 0) == 0) return "mid_width";
  throw Error(ErrorKind::ConfigError, "scenario: studies need a built-in scenario");
}

struct StudyPoint {
  Regime regime;
  int order;
  int n;
  double thickness;
  double load;
  double metric;
};

inline std::vector<StudyPoint> run_study(const StudyConfig& s,
                                         const std::function<void(const StudyPoint&)>& on_point = nullptr) {
  const auto metric = study_metric(s.base);
  const auto thick = s.thicknesses.empty() ? std::vector<double>{s.base.thickness} : s.thicknesses;
  const auto loads = s.loads.empty() ? std::vector<std::optional<double>>{s.base.load}
                                     : std::vector<std::optional<double>>(s.loads.begin(), s.loads.end());
  std::vector<StudyPoint> out;
  for (Regime r : s.regimes)
    for (int p : s.orders)
      for (int n : s.meshes)
        for (double t : thick)
          for (const auto& f : loads) {
            if (r != Regime::ThreeD && t != thick.front()) continue;
            auto c = s.base;
            c.regime = r;
            c.order = p;
            c.n = n;
            c.load = f;
            c.thickness = r == Regime::ThreeD ? t : 1.0;
            if (c.formulation && r == Regime::PlaneStress) c.formulation.reset();
            c.vtk = false;
            const auto sum = execute(c, {}, false);
            out.push_back({r, p, n, c.thickness, f.value_or(0.0), *sum.get(metric)});
            if (on_point) on_point(out.back());
          }
  return out;
}

inline void write_study_csv(std::ostream& os, const StudyConfig& s, const std::vector<StudyPoint>& pts) {
  os << "regime,order,n,thickness,load,metric,value\n";
  const auto metric = study_metric(s.base);
  for (const auto& p : pts)
    os << to_string(p.regime) << "," << p.order << "," << p.n << "," << detail::fmt_num(p.thickness) << ","
       << detail::fmt_num(p.load) << "," << metric << "," << detail::fmt_num(p.metric) << "\n";
}

}  // namespace psfem
