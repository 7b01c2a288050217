#pragma once

// Reference values for the Cook cantilever tip deflection u2 (mm)
// at point A, indexed by regime, element order, mesh size and traction.

#include <array>
#include <optional>

#include "psfem/problem.hpp"

namespace psfem {

namespace detail {

// [load 24|40][n 2..64][flatland p1, p2, plane strain p1, p2, plane stress p1, p2, 3D p1, p2]
inline constexpr double kCookTable[2][6][8] = {
    {{13.91, 18.45, 13.77, 18.29, 14.42, 19.26, 15.47, 19.85},
     {16.69, 18.20, 16.65, 18.17, 17.85, 19.75, 18.40, 19.89},
     {17.70, 18.20, 17.68, 18.18, 19.24, 19.88, 19.47, 19.93},
     {18.00, 18.20, 17.99, 18.19, 19.71, 19.93, 19.79, 19.95},
     {18.11, 18.21, 18.10, 18.20, 19.87, 19.95, 19.89, 19.96},
     {18.15, 18.22, 18.15, 18.21, 19.93, 19.97, 19.93, 19.96}},
    {{19.56, 24.27, 19.67, 24.16, 21.23, 25.17, 21.73, 25.78},
     {22.40, 24.20, 22.46, 24.17, 24.18, 25.78, 24.42, 26.01},
     {23.54, 24.23, 23.55, 24.22, 25.29, 25.98, 25.50, 26.10},
     {23.93, 24.25, 23.93, 24.25, 25.75, 26.07, 25.88, 26.15},
     {24.08, 24.28, 24.10, 24.27, 25.96, 26.13, 26.02, 26.17},
     {24.16, 24.31, 24.16, 24.30, 26.06, 26.16, 26.09, 26.18}},
};

}  // namespace detail

inline constexpr std::array<int, 6> kCookTableMeshes = {2, 4, 8, 16, 32, 64};
inline constexpr std::array<double, 2> kCookTableLoads = {24.0, 40.0};

/// Reference u2 at point A, or nothing for a cell outside the table.
inline std::optional<double> cook_reference_u2(Regime regime, int order, int n, double load) {
  int li = load == 24.0 ? 0 : load == 40.0 ? 1 : -1;
  int ni = -1;
  for (int k = 0; k < 6; ++k)
    if (kCookTableMeshes[k] == n) ni = k;
  if (li < 0 || ni < 0 || (order != 1 && order != 2)) return std::nullopt;
  int col = 0;
  switch (regime) {
    case Regime::Flatland: col = 0; break;
    case Regime::PlaneStrain: col = 2; break;
    case Regime::PlaneStress: col = 4; break;
    case Regime::ThreeD: col = 6; break;
  }
  return detail::kCookTable[li][ni][col + order - 1];
}

/// Relative tolerance the table comparison uses for a regime.
inline double cook_table_tolerance(Regime r) {
  return (r == Regime::Flatland || r == Regime::PlaneStrain) ? 0.005 : 0.01;
}

// Fine-mesh plane stress tip values at f = 40 and the walled 3D value at f = 24.
inline constexpr double kCookFineU1 = -28.04;
inline constexpr double kCookFineU2 = 26.16;
inline constexpr double kCookWallsU2 = 18.21;
// Punch: plane stress compression (percent) at f = 12000.
inline constexpr double kPunchCompression = 86.7;

}  // namespace psfem
