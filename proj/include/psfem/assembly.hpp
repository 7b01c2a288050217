#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "psfem/element.hpp"
#include "psfem/errors.hpp"
#include "psfem/problem.hpp"

namespace psfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global numbering: displacements node-major first, then per cell the
/// pressure coefficients followed by the dilatation coefficients.
struct DofLayout {
  int dim = 2;
  int n_nodes = 0;
  int n_cells = 0;
  int n_mixed = 0;  // coefficients per mixed field and cell; 0 for one-field
  int n_u() const { return n_nodes * dim; }
  int n_total() const { return n_u() + 2 * n_mixed * n_cells; }
  int u(int node, int comp) const { return node * dim + comp; }
  int p(int cell, int k) const { return n_u() + 2 * n_mixed * cell + k; }
  int J(int cell, int k) const { return n_u() + 2 * n_mixed * cell + n_mixed + k; }
};

struct AssemblyDiagnostics {
  int max_inner_iters = 0;
  double max_S33_over_mu = 0.0;
};

template <int dim>
class System {
 public:
  explicit System(Problem<dim> problem)
      : prob_(std::move(problem)), basis_(prob_.mesh.order), rule_(tensor_gauss<dim>(prob_.mesh.order + 1)),
        mono_(prob_.mesh.order - 1) {
    validate(prob_);
    if (prob_.regime == Regime::Flatland)
      for (auto& m : prob_.materials) m = m.for_dim(2);
    else
      for (auto& m : prob_.materials) m = m.for_dim(3);

    const auto& mesh = prob_.mesh;
    layout_.dim = dim;
    layout_.n_nodes = mesh.n_nodes();
    layout_.n_cells = mesh.n_cells();
    layout_.n_mixed = prob_.formulation == Formulation::ThreeField ? mono_.size() : 0;

    geo_.reserve(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) geo_.push_back(cell_geometry(mesh, c, basis_, rule_));

    std::map<int, double> fixed;
    for (const auto& bc : prob_.dirichlet)
      for (int n : mesh.set_nodes(bc.set)) {
        const int dof = layout_.u(n, bc.component);
        auto [it, inserted] = fixed.emplace(dof, bc.value);
        if (!inserted && it->second != bc.value)
          throw Error(ErrorKind::ConstraintConflict, "node " + std::to_string(n) + " component " +
                                                         std::to_string(bc.component) + " prescribed twice");
      }
    constrained_.assign(fixed.begin(), fixed.end());
    is_constrained_.assign(layout_.n_total(), false);
    for (const auto& [d, v] : constrained_) is_constrained_[d] = true;
    for (int d = 0; d < layout_.n_total(); ++d)
      if (!is_constrained_[d]) free_.push_back(d);

    f_ext_ = Eigen::VectorXd::Zero(layout_.n_total());
    for (const auto& bc : prob_.neumann)
      for (const auto& f : mesh.facet_sets.at(bc.set)) {
        const auto fe = facet_load<dim>(mesh, f, basis_, bc.traction);
        const auto& conn = mesh.cells[f.cell];
        for (int i = 0; i < basis_.size(); ++i)
          for (int a = 0; a < dim; ++a) f_ext_(layout_.u(conn[i], a)) += fe(i * dim + a);
      }

    c33_committed_.assign(static_cast<size_t>(mesh.n_cells()) * rule_.size(), 1.0);
    c33_trial_ = c33_committed_;
  }

  const Problem<dim>& problem() const { return prob_; }
  const Mesh<dim>& mesh() const { return prob_.mesh; }
  const DofLayout& layout() const { return layout_; }
  const LagrangeBasis<dim>& basis() const { return basis_; }
  const QuadratureRule<dim>& rule() const { return rule_; }
  const MonomialBasis<dim>& mixed_basis() const { return mono_; }
  const CellGeometry<dim>& geometry(int cell) const { return geo_[cell]; }
  const MaterialModel& material(int cell) const { return prob_.materials[prob_.mesh.material_id[cell]]; }
  int n_qp() const { return rule_.size(); }

  /// (dof, value at full load), sorted by dof.
  const std::vector<std::pair<int, double>>& constraints() const { return constrained_; }
  const std::vector<int>& free_dofs() const { return free_; }
  bool is_constrained(int dof) const { return is_constrained_[dof]; }
  const Eigen::VectorXd& external_load() const { return f_ext_; }

  /// Zero displacement and pressure, unit dilatation.
  Eigen::VectorXd initial_state() const {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(layout_.n_total());
    if (layout_.n_mixed > 0)
      for (int c = 0; c < layout_.n_cells; ++c) q(layout_.J(c, 0)) = 1.0;
    return q;
  }

  std::vector<double>& c33_committed() { return c33_committed_; }
  const std::vector<double>& c33_committed() const { return c33_committed_; }
  const std::vector<double>& c33_trial() const { return c33_trial_; }
  void commit() { c33_committed_ = c33_trial_; }
  void set_c33(const std::vector<double>& v) { c33_committed_ = c33_trial_ = v; }

  const AssemblyDiagnostics& diagnostics() const { return diag_; }

  /// r = f_int(q) - load f_ext over all dofs and, if K is given, K = dr/dq.
  void assemble(const Eigen::VectorXd& q, double load, Eigen::VectorXd& r, SparseMatrix* K) {
    const auto& mesh = prob_.mesh;
    const int nn = basis_.size();
    const int nm = layout_.n_mixed;
    const bool mixed = nm > 0;
    r = -load * f_ext_;
    std::vector<Eigen::Triplet<double>> trip;
    if (K) trip.reserve(static_cast<size_t>(mesh.n_cells()) * (nn * dim + 2 * nm) * (nn * dim + 2 * nm));
    diag_ = {};
    std::vector<double> ue(nn * dim), pe(nm), Je(nm);
    std::vector<int> dofs(nn * dim + 2 * nm);
    Eigen::VectorXd re;
    Eigen::MatrixXd Ke;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto& conn = mesh.cells[c];
      for (int i = 0; i < nn; ++i)
        for (int a = 0; a < dim; ++a) {
          dofs[i * dim + a] = layout_.u(conn[i], a);
          ue[i * dim + a] = q(dofs[i * dim + a]);
        }
      for (int k = 0; k < nm; ++k) {
        dofs[nn * dim + k] = layout_.p(c, k);
        dofs[nn * dim + nm + k] = layout_.J(c, k);
        pe[k] = q(layout_.p(c, k));
        Je[k] = q(layout_.J(c, k));
      }
      try {
        if (mixed) {
          element_threefield<dim>(prob_.regime, material(c), geo_[c], mono_, ue.data(), pe.data(), Je.data(), re,
                                  K ? &Ke : nullptr);
        } else {
          double* c33 = c33_trial_.data() + static_cast<size_t>(c) * rule_.size();
          std::copy_n(c33_committed_.data() + static_cast<size_t>(c) * rule_.size(), rule_.size(), c33);
          ElementDiagnostics ed;
          element_onefield<dim>(prob_.regime, material(c), geo_[c], ue.data(), c33, prob_.condensation, re,
                                K ? &Ke : nullptr, &ed);
          diag_.max_inner_iters = std::max(diag_.max_inner_iters, ed.max_inner_iters);
          diag_.max_S33_over_mu = std::max(diag_.max_S33_over_mu, ed.max_S33_over_mu);
        }
      } catch (const Error& e) {
        throw Error(e.kind(), "cell " + std::to_string(c) + ": " + e.what());
      }
      const int n = static_cast<int>(re.size());
      for (int i = 0; i < n; ++i) r(dofs[i]) += re(i);
      if (K)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (Ke(i, j) != 0.0) trip.emplace_back(dofs[i], dofs[j], Ke(i, j));
    }
    if (K) {
      K->resize(layout_.n_total(), layout_.n_total());
      K->setFromTriplets(trip.begin(), trip.end());
    }
  }

 private:
  Problem<dim> prob_;
  LagrangeBasis<dim> basis_;
  QuadratureRule<dim> rule_;
  MonomialBasis<dim> mono_;
  DofLayout layout_;
  std::vector<CellGeometry<dim>> geo_;
  std::vector<std::pair<int, double>> constrained_;
  std::vector<bool> is_constrained_;
  std::vector<int> free_;
  Eigen::VectorXd f_ext_;
  std::vector<double> c33_committed_, c33_trial_;
  AssemblyDiagnostics diag_;
};

}  // namespace psfem
