// psfem: run configs, reproduce the Cook deflection table, run mesh/degree studies.
// Exit codes: 0 success, 1 solver failure, 2 configuration or usage error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "psfem/driver.hpp"

using namespace psfem;

namespace {

constexpr int kOk = 0;
constexpr int kSolverFail = 1;
constexpr int kConfigFail = 2;

int report(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return e.kind() == ErrorKind::ConfigError ? kConfigFail : kSolverFail;
}

int cmd_run(const std::string& path, const std::string& root_arg, bool no_vtk) {
  auto cfg = load_config(path);
  if (no_vtk) cfg.vtk = false;
  const auto root = root_arg.empty() ? output_root() : std::filesystem::path(root_arg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = execute(cfg, root);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "run " << run_name(cfg) << " -> " << s.dir.string() << "\n";
  for (const auto& q : s.quantities) std::cout << "  " << q.name << " = " << detail::fmt_num(q.value) << "\n";
  int iters = 0;
  for (const auto& st : s.log.steps) iters += static_cast<int>(st.residuals.size()) - 1;
  std::printf("  %zu load steps, %d Newton iterations, %.2f s\n", s.log.steps.size(), iters, dt);
  return kOk;
}

std::vector<Regime> parse_regimes(const std::vector<std::string>& names) {
  std::vector<Regime> out;
  for (size_t i = 0; i < names.size(); ++i)
    out.push_back(detail::parse_enum(Json(names[i]), "--regime", detail::kRegimes));
  return out;
}

int cmd_table1(const std::vector<std::string>& regimes, std::vector<int> orders, std::vector<int> meshes,
               std::vector<double> loads, const std::string& root_arg) {
  auto rs = parse_regimes(regimes);
  if (rs.empty()) rs = {Regime::Flatland, Regime::PlaneStrain, Regime::PlaneStress, Regime::ThreeD};
  if (orders.empty()) orders = {1, 2};
  if (meshes.empty()) meshes = {2, 4, 8, 16};
  if (loads.empty()) loads = {24.0, 40.0};
  for (int p : orders)
    if (p != 1 && p != 2) throw Error(ErrorKind::ConfigError, "--order: must be 1 or 2");
  for (int n : meshes)
    if (!cook_reference_u2(Regime::Flatland, 1, n, 24.0))
      throw Error(ErrorKind::ConfigError, "--n: " + std::to_string(n) + " is not a table mesh size");
  for (double f : loads)
    if (f != 24.0 && f != 40.0) throw Error(ErrorKind::ConfigError, "--load: must be 24 or 40");

  std::vector<TableCell> cells;
  for (double f : loads)
    for (int n : meshes)
      for (Regime r : rs)
        for (int p : orders) {
          const auto t0 = std::chrono::steady_clock::now();
          cells.push_back(run_table_cell(r, p, n, f));
          const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          const auto& c = cells.back();
          std::fprintf(stderr, "f=%g n=%d %s p%d: u2=%.4f ref=%.2f (%.2f%%) %.1fs\n", f, n,
                       std::string(to_string(r)).c_str(), p, c.u2, *c.reference, 100.0 * *c.rel_error(), dt);
        }
  const auto dir = (root_arg.empty() ? output_root() : std::filesystem::path(root_arg)) / "table1";
  std::filesystem::create_directories(dir);
  auto csv = open_output(dir / "table1.csv");
  write_table_csv(csv, cells);
  std::ostringstream md;
  write_table_markdown(md, cells);
  auto mdf = open_output(dir / "table1.md");
  mdf << md.str();
  std::cout << md.str() << "values in parentheses: reference; written to " << dir.string() << "\n";
  return kOk;
}

int cmd_convergence(const std::string& path, const std::string& root_arg) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("<syntax>: ") + e.what());
  }
  const auto study = parse_study(j);
  const auto metric = study_metric(study.base);
  const auto pts = run_study(study, [&](const StudyPoint& p) {
    std::fprintf(stderr, "%s p%d n=%d t=%g f=%g: %s = %.6g\n", std::string(to_string(p.regime)).c_str(), p.order,
                 p.n, p.thickness, p.load, metric.c_str(), p.metric);
  });
  const auto dir = (root_arg.empty() ? output_root() : std::filesystem::path(root_arg)) / study.name;
  std::filesystem::create_directories(dir);
  auto out = open_output(dir / "study.csv");
  write_study_csv(out, study, pts);
  write_study_csv(std::cout, study, pts);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-strain hyperelasticity with strongly enforced plane stress"};
  app.require_subcommand(1);
  std::string root;
  app.add_option("--output-root", root, "Directory for run output (default: $PSFEM_OUTPUT_ROOT or ./runs)");

  auto* run = app.add_subcommand("run", "Solve one configuration file");
  std::string config;
  bool no_vtk = false;
  run->add_option("config", config, "JSON run configuration")->required();
  run->add_flag("--no-vtk", no_vtk, "Skip VTK snapshots");

  auto* table = app.add_subcommand("table1", "Cook tip deflection table against the reference values");
  std::vector<std::string> regimes;
  std::vector<int> orders, meshes;
  std::vector<double> loads;
  table->add_option("--regime", regimes, "flatland, plane-strain, plane-stress, 3d (repeatable)");
  table->add_option("--order", orders, "1 or 2 (repeatable)");
  table->add_option("--n", meshes, "mesh size (repeatable; default 2 4 8 16)");
  table->add_option("--load", loads, "24 or 40 (repeatable)");

  auto* conv = app.add_subcommand("convergence", "Run a mesh/degree/thickness study");
  std::string study;
  conv->add_option("study", study, "JSON study configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigFail;
  }

  try {
    if (*run) return cmd_run(config, root, no_vtk);
    if (*table) return cmd_table1(regimes, orders, meshes, loads, root);
    if (*conv) return cmd_convergence(study, root);
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFail;
  }
  return kConfigFail;
}
