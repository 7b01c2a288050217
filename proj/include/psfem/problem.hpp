#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "psfem/errors.hpp"
#include "psfem/material.hpp"
#include "psfem/mesh.hpp"
#include "psfem/plane_stress.hpp"

namespace psfem {

enum class Regime { Flatland, PlaneStrain, PlaneStress, ThreeD };
enum class Formulation { OneField, ThreeField };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Flatland: return "flatland";
    case Regime::PlaneStrain: return "plane-strain";
    case Regime::PlaneStress: return "plane-stress";
    case Regime::ThreeD: return "3d";
  }
  return "?";
}

constexpr std::string_view to_string(Formulation f) {
  return f == Formulation::OneField ? "one-field" : "three-field";
}

constexpr int spatial_dim(Regime r) { return r == Regime::ThreeD ? 3 : 2; }

/// Prescribed displacement component on a boundary set; value is reached at full load.
struct DirichletBC {
  std::string set;
  int component = 0;
  double value = 0.0;
};

/// Dead traction per unit reference area on a facet set, at full load.
template <int dim>
struct NeumannBC {
  std::string set;
  std::array<double, dim> traction{};
};

template <int dim>
struct Problem {
  Mesh<dim> mesh;
  Regime regime = dim == 3 ? Regime::ThreeD : Regime::PlaneStress;
  Formulation formulation = Formulation::OneField;
  std::vector<MaterialModel> materials;  // indexed by mesh material id
  std::vector<DirichletBC> dirichlet;
  std::vector<NeumannBC<dim>> neumann;
  CondensationSettings condensation;
};

/// Throws on inconsistent regime / formulation / material combinations.
template <int dim>
void validate(const Problem<dim>& p) {
  if (spatial_dim(p.regime) != dim)
    throw Error(ErrorKind::UnsupportedRegime,
                std::string(to_string(p.regime)) + " needs a " + std::to_string(spatial_dim(p.regime)) + "D mesh");
  if (p.formulation == Formulation::ThreeField && p.regime == Regime::PlaneStress)
    throw Error(ErrorKind::UnsupportedRegime, "plane stress requires the one-field formulation");
  if (p.materials.empty()) throw Error(ErrorKind::InvalidArgument, "no materials given");
  for (int id : p.mesh.material_id)
    if (id < 0 || id >= static_cast<int>(p.materials.size()))
      throw Error(ErrorKind::InvalidArgument, "material id " + std::to_string(id) + " has no material");
  for (const auto& m : p.materials) {
    if (p.formulation == Formulation::ThreeField && !m.is_decoupled())
      throw Error(ErrorKind::UnsupportedModel, "three-field formulation requires a decoupled model");
    if (p.regime == Regime::Flatland && !m.is_decoupled())
      throw Error(ErrorKind::UnsupportedModel, "flatland supports the decoupled neo-Hookean model only");
  }
  for (const auto& bc : p.dirichlet) {
    if (bc.component < 0 || bc.component >= dim)
      throw Error(ErrorKind::InvalidArgument, "Dirichlet component out of range");
    if (!p.mesh.has_set(bc.set)) throw Error(ErrorKind::InvalidArgument, "unknown boundary set '" + bc.set + "'");
  }
  for (const auto& bc : p.neumann)
    if (!p.mesh.facet_sets.count(bc.set))
      throw Error(ErrorKind::InvalidArgument, "unknown facet set '" + bc.set + "'");
}

}  // namespace psfem
