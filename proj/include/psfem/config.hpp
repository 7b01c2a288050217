#pragma once

// Run configuration as JSON. Parsing is strict: unknown keys, wrong types and
// inconsistent combinations raise ConfigError naming the offending field.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "psfem/errors.hpp"
#include "psfem/material.hpp"
#include "psfem/problem.hpp"
#include "psfem/solver.hpp"

namespace psfem {

using Json = nlohmann::ordered_json;

struct MaterialSpec {
  ModelKind model = ModelKind::NeoHookeanDecoupled;
  double mu = 80.1938;
  double nu = 0.4999;
  VolumetricLaw volumetric = VolumetricLaw::QuarterJsqMinusLog;
  bool operator==(const MaterialSpec&) const = default;
};

struct DirichletSpec {
  std::string set;
  int component = 0;
  double value = 0.0;
  bool operator==(const DirichletSpec&) const = default;
};

struct NeumannSpec {
  std::string set;
  std::vector<double> traction;
  bool operator==(const NeumannSpec&) const = default;
};

struct ProbeSpec {
  std::string name;
  std::vector<double> point;
  bool operator==(const ProbeSpec&) const = default;
};

/// Imported-mesh problem definition.
struct MeshSpec {
  std::string file;
  std::vector<DirichletSpec> dirichlet;
  std::vector<NeumannSpec> neumann;
  std::vector<ProbeSpec> probes;
  bool operator==(const MeshSpec&) const = default;
};

struct CompositeSpec {
  int count = 0;          // 0: scenario default
  double fraction = 0.0;  // 0: scenario default
  double aspect = 10.0;
  bool operator==(const CompositeSpec&) const = default;
};

struct SolverSpec {
  int load_steps = 10;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iters = 25;
  bool line_search = false;
  bool operator==(const SolverSpec&) const = default;

  SolveSettings settings() const {
    SolveSettings s;
    s.n_load_steps = load_steps;
    s.newton_rel_tol = rel_tol;
    s.newton_abs_tol = abs_tol;
    s.max_newton_iters = max_iters;
    s.line_search = line_search;
    return s;
  }
};

struct RunConfig {
  std::string scenario = "cook";  // cook | punch | composite-particles | composite-fibres | mesh
  Regime regime = Regime::PlaneStress;
  std::optional<Formulation> formulation;
  int order = 0;  // 0: scenario default (2 for cook and punch, 1 for composites, the file's order for mesh)
  int n = 0;      // 0: scenario default (8 cook, 16 punch, 80 particles, 100 fibres)
  std::optional<double> load;  // cook traction, punch nominal load, composite stretch
  double thickness = 1.0;
  bool walls = false;
  std::vector<MaterialSpec> materials;  // empty: scenario defaults; composites take [matrix, inclusion]
  CompositeSpec composite;
  MeshSpec mesh;
  SolverSpec solver;
  std::string output;  // run directory below the output root; empty: derived name
  bool vtk = true;
  std::uint64_t seed = 1;
  bool operator==(const RunConfig&) const = default;

  Formulation effective_formulation() const {
    return formulation.value_or(regime == Regime::PlaneStress ? Formulation::OneField : Formulation::ThreeField);
  }
  int dim() const { return spatial_dim(regime); }
};

inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {"cook", "punch", "composite-particles", "composite-fibres", "mesh"};
  return ids;
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::ConfigError, path + ": " + msg);
}

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) config_fail(path.empty() ? k : path + "." + k, "unknown key");
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
void read(const Json& j, const std::string& path, const char* key, T& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  const auto p = join(path, key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_fail(p, "expected true or false");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) config_fail(p, "expected an integer");
    if (std::is_unsigned_v<T> && v.get<long long>() < 0) config_fail(p, "expected a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) config_fail(p, "expected a number");
  } else {
    if (!v.is_string()) config_fail(p, "expected a string");
  }
  out = v.get<T>();
}

template <class E, size_t N>
E parse_enum(const Json& v, const std::string& path, const std::array<E, N>& values) {
  if (!v.is_string()) config_fail(path, "expected a string");
  const auto s = v.get<std::string>();
  std::string names;
  for (E e : values) {
    if (to_string(e) == s) return e;
    names += (names.empty() ? "" : ", ") + std::string(to_string(e));
  }
  config_fail(path, "unknown value '" + s + "' (expected one of " + names + ")");
}

constexpr std::array<Regime, 4> kRegimes = {Regime::Flatland, Regime::PlaneStrain, Regime::PlaneStress,
                                            Regime::ThreeD};
constexpr std::array<Formulation, 2> kFormulations = {Formulation::OneField, Formulation::ThreeField};
constexpr std::array<ModelKind, 2> kModels = {ModelKind::NeoHookeanDecoupled, ModelKind::NeoHookeanAlternative};
constexpr std::array<VolumetricLaw, 4> kVolLaws = {VolumetricLaw::SquaredJminus1, VolumetricLaw::QuarterJsqMinusLog,
                                                   VolumetricLaw::LogSquared, VolumetricLaw::JLogJ};

template <class T, class F>
std::vector<T> read_array(const Json& j, const std::string& path, const char* key, F&& item) {
  std::vector<T> out;
  if (!j.contains(key)) return out;
  const auto p = join(path, key);
  if (!j.at(key).is_array()) config_fail(p, "expected an array");
  for (size_t i = 0; i < j.at(key).size(); ++i) out.push_back(item(j.at(key)[i], p + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> read_numbers(const Json& v, const std::string& path) {
  if (!v.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) config_fail(path, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline MaterialSpec parse_material(const Json& j, const std::string& path) {
  check_keys(j, path, {"model", "mu", "nu", "volumetric"});
  MaterialSpec m;
  if (j.contains("model")) m.model = parse_enum(j.at("model"), join(path, "model"), kModels);
  if (j.contains("volumetric")) m.volumetric = parse_enum(j.at("volumetric"), join(path, "volumetric"), kVolLaws);
  read(j, path, "mu", m.mu);
  read(j, path, "nu", m.nu);
  if (!(m.mu > 0.0)) config_fail(join(path, "mu"), "must be positive");
  if (!(m.nu > -1.0 && m.nu < 0.5)) config_fail(join(path, "nu"), "must lie in (-1, 0.5)");
  return m;
}

inline Json material_json(const MaterialSpec& m) {
  return Json{{"model", to_string(m.model)}, {"mu", m.mu}, {"nu", m.nu}, {"volumetric", to_string(m.volumetric)}};
}

}  // namespace detail

/// Cross-field rules; throws ConfigError naming the field that breaks them.
inline void validate(const RunConfig& c) {
  using detail::config_fail;
  bool known = false;
  for (const auto& s : scenario_ids()) known = known || s == c.scenario;
  if (!known) config_fail("scenario", "unknown scenario '" + c.scenario + "'");
  const auto f = c.effective_formulation();
  if (c.regime == Regime::PlaneStress && f == Formulation::ThreeField)
    config_fail("formulation", "plane stress requires the one-field formulation");
  if (c.order < 0 || c.order > 2) config_fail("order", "must be 1 or 2 (0 for the scenario default)");
  const bool composite = c.scenario.rfind("composite", 0) == 0;
  if (c.scenario == "cook" || c.scenario == "punch") {
    const std::set<int> ok = c.scenario == "cook" ? std::set<int>{2, 4, 8, 16, 32, 64} : std::set<int>{2, 4, 8, 16, 32};
    if (c.n != 0 && !ok.count(c.n)) config_fail("n", "unsupported mesh size " + std::to_string(c.n) + " for " + c.scenario);
    if (c.materials.size() > 1) config_fail("materials", c.scenario + " takes a single material");
  }
  if (composite) {
    if (c.regime != Regime::PlaneStress) config_fail("regime", "composites are plane stress only");
    if (c.n < 0) config_fail("n", "must be non-negative");
    if (c.materials.size() != 0 && c.materials.size() != 2)
      config_fail("materials", "composites take [matrix, inclusion]");
  }
  if (c.scenario == "mesh") {
    if (c.mesh.file.empty()) config_fail("mesh.file", "required for the mesh scenario");
    if (c.materials.empty()) config_fail("materials", "required for the mesh scenario");
    for (size_t i = 0; i < c.mesh.dirichlet.size(); ++i)
      if (c.mesh.dirichlet[i].component < 0 || c.mesh.dirichlet[i].component >= c.dim())
        config_fail("mesh.dirichlet[" + std::to_string(i) + "].component", "out of range");
    for (size_t i = 0; i < c.mesh.neumann.size(); ++i)
      if (static_cast<int>(c.mesh.neumann[i].traction.size()) != c.dim())
        config_fail("mesh.neumann[" + std::to_string(i) + "].traction", "needs one entry per dimension");
    for (size_t i = 0; i < c.mesh.probes.size(); ++i)
      if (static_cast<int>(c.mesh.probes[i].point.size()) != c.dim())
        config_fail("mesh.probes[" + std::to_string(i) + "].point", "needs one entry per dimension");
  }
  if ((c.thickness != 1.0 || c.walls) && !(c.scenario == "cook" && c.regime == Regime::ThreeD))
    config_fail(c.walls ? "walls" : "thickness", "applies to the 3D cook scenario only");
  if (!(c.thickness > 0.0)) config_fail("thickness", "must be positive");
  if (f == Formulation::ThreeField)
    for (size_t i = 0; i < c.materials.size(); ++i)
      if (c.materials[i].model == ModelKind::NeoHookeanAlternative)
        config_fail("materials[" + std::to_string(i) + "].model", "three-field formulation needs a decoupled model");
  if (c.regime == Regime::Flatland)
    for (size_t i = 0; i < c.materials.size(); ++i)
      if (c.materials[i].model == ModelKind::NeoHookeanAlternative)
        config_fail("materials[" + std::to_string(i) + "].model", "flatland supports the decoupled model only");
  if (c.solver.load_steps < 1) config_fail("solver.load_steps", "must be at least 1");
  if (c.solver.max_iters < 1) config_fail("solver.max_iters", "must be at least 1");
  if (!(c.solver.rel_tol > 0.0)) config_fail("solver.rel_tol", "must be positive");
  if (!(c.solver.abs_tol > 0.0)) config_fail("solver.abs_tol", "must be positive");
  if (c.composite.count < 0) config_fail("composite.count", "must be non-negative");
  if (!(c.composite.fraction >= 0.0 && c.composite.fraction < 1.0)) config_fail("composite.fraction", "must lie in [0, 1)");
  if (!(c.composite.aspect >= 1.0)) config_fail("composite.aspect", "must be at least 1");
}

inline RunConfig parse_config(const Json& j) {
  using namespace detail;
  check_keys(j, "", {"scenario", "regime", "formulation", "order", "n", "load", "thickness", "walls", "materials",
                     "composite", "mesh", "solver", "output", "vtk", "seed"});
  RunConfig c;
  read(j, "", "scenario", c.scenario);
  if (j.contains("regime")) c.regime = parse_enum(j.at("regime"), "regime", kRegimes);
  if (j.contains("formulation")) c.formulation = parse_enum(j.at("formulation"), "formulation", kFormulations);
  read(j, "", "order", c.order);
  read(j, "", "n", c.n);
  if (j.contains("load")) {
    double v = 0.0;
    read(j, "", "load", v);
    c.load = v;
  }
  read(j, "", "thickness", c.thickness);
  read(j, "", "walls", c.walls);
  c.materials = read_array<MaterialSpec>(j, "", "materials", parse_material);
  if (j.contains("composite")) {
    const auto& k = j.at("composite");
    check_keys(k, "composite", {"count", "fraction", "aspect"});
    read(k, "composite", "count", c.composite.count);
    read(k, "composite", "fraction", c.composite.fraction);
    read(k, "composite", "aspect", c.composite.aspect);
  }
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    check_keys(m, "mesh", {"file", "dirichlet", "neumann", "probes"});
    read(m, "mesh", "file", c.mesh.file);
    c.mesh.dirichlet = read_array<DirichletSpec>(m, "mesh", "dirichlet", [](const Json& v, const std::string& p) {
      check_keys(v, p, {"set", "component", "value"});
      DirichletSpec d;
      read(v, p, "set", d.set);
      read(v, p, "component", d.component);
      read(v, p, "value", d.value);
      if (d.set.empty()) config_fail(join(p, "set"), "required");
      return d;
    });
    c.mesh.neumann = read_array<NeumannSpec>(m, "mesh", "neumann", [](const Json& v, const std::string& p) {
      check_keys(v, p, {"set", "traction"});
      NeumannSpec d;
      read(v, p, "set", d.set);
      if (d.set.empty()) config_fail(join(p, "set"), "required");
      if (!v.contains("traction")) config_fail(join(p, "traction"), "required");
      d.traction = read_numbers(v.at("traction"), join(p, "traction"));
      return d;
    });
    c.mesh.probes = read_array<ProbeSpec>(m, "mesh", "probes", [](const Json& v, const std::string& p) {
      check_keys(v, p, {"name", "point"});
      ProbeSpec d;
      read(v, p, "name", d.name);
      if (d.name.empty()) config_fail(join(p, "name"), "required");
      if (!v.contains("point")) config_fail(join(p, "point"), "required");
      d.point = read_numbers(v.at("point"), join(p, "point"));
      return d;
    });
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, "solver", {"load_steps", "rel_tol", "abs_tol", "max_iters", "line_search"});
    read(s, "solver", "load_steps", c.solver.load_steps);
    read(s, "solver", "rel_tol", c.solver.rel_tol);
    read(s, "solver", "abs_tol", c.solver.abs_tol);
    read(s, "solver", "max_iters", c.solver.max_iters);
    read(s, "solver", "line_search", c.solver.line_search);
  }
  read(j, "", "output", c.output);
  read(j, "", "vtk", c.vtk);
  read(j, "", "seed", c.seed);
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("<syntax>: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig parse_config(const char* text) { return parse_config(std::string(text)); }

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Canonical form with every field written out.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["scenario"] = c.scenario;
  j["regime"] = to_string(c.regime);
  if (c.formulation) j["formulation"] = to_string(*c.formulation);
  j["order"] = c.order;
  j["n"] = c.n;
  if (c.load) j["load"] = *c.load;
  j["thickness"] = c.thickness;
  j["walls"] = c.walls;
  j["materials"] = Json::array();
  for (const auto& m : c.materials) j["materials"].push_back(detail::material_json(m));
  j["composite"] = Json{{"count", c.composite.count}, {"fraction", c.composite.fraction}, {"aspect", c.composite.aspect}};
  Json mesh{{"file", c.mesh.file}, {"dirichlet", Json::array()}, {"neumann", Json::array()}, {"probes", Json::array()}};
  for (const auto& d : c.mesh.dirichlet)
    mesh["dirichlet"].push_back(Json{{"set", d.set}, {"component", d.component}, {"value", d.value}});
  for (const auto& d : c.mesh.neumann) mesh["neumann"].push_back(Json{{"set", d.set}, {"traction", d.traction}});
  for (const auto& d : c.mesh.probes) mesh["probes"].push_back(Json{{"name", d.name}, {"point", d.point}});
  j["mesh"] = mesh;
  j["solver"] = Json{{"load_steps", c.solver.load_steps},
                     {"rel_tol", c.solver.rel_tol},
                     {"abs_tol", c.solver.abs_tol},
                     {"max_iters", c.solver.max_iters},
                     {"line_search", c.solver.line_search}};
  j["output"] = c.output;
  j["vtk"] = c.vtk;
  j["seed"] = c.seed;
  return j;
}

}  // namespace psfem
