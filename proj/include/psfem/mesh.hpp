#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "psfem/errors.hpp"
#include "psfem/shape.hpp"

namespace psfem {

/// Boundary face of a cell; face id = 2 axis + side.
struct Facet {
  int cell = 0;
  int face = 0;
  bool operator==(const Facet&) const = default;
};

template <int dim>
struct Mesh {
  using Point = std::array<double, dim>;

  int order = 1;
  std::vector<Point> nodes;
  std::vector<std::vector<int>> cells;  // lexicographic local numbering
  std::vector<int> material_id;
  std::map<std::string, std::vector<Facet>> facet_sets;
  std::map<std::string, std::vector<int>> node_sets;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int nodes_per_cell() const {
    int n = 1;
    for (int d = 0; d < dim; ++d) n *= order + 1;
    return n;
  }

  std::vector<int> facet_nodes(const Facet& f) const {
    const LagrangeBasis<dim> basis(order);
    std::vector<int> out;
    for (int l : basis.face_nodes(f.face)) out.push_back(cells[f.cell][l]);
    return out;
  }

  bool has_set(const std::string& name) const { return facet_sets.count(name) || node_sets.count(name); }

  /// Sorted unique node ids of a facet set or node set.
  std::vector<int> set_nodes(const std::string& name) const {
    std::set<int> ids;
    if (auto it = facet_sets.find(name); it != facet_sets.end()) {
      for (const auto& f : it->second)
        for (int n : facet_nodes(f)) ids.insert(n);
    } else if (auto jt = node_sets.find(name); jt != node_sets.end()) {
      ids.insert(jt->second.begin(), jt->second.end());
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown boundary set '" + name + "'");
    }
    return {ids.begin(), ids.end()};
  }

  int nearest_node(const Point& p) const {
    int best = -1;
    double bd = 1e300;
    for (int i = 0; i < n_nodes(); ++i) {
      double d = 0.0;
      for (int k = 0; k < dim; ++k) d += (nodes[i][k] - p[k]) * (nodes[i][k] - p[k]);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  /// Node exactly at p (relative tolerance on the mesh size); throws otherwise.
  int node_at(const Point& p, double tol = 1e-9) const {
    const int i = nearest_node(p);
    double d = 0.0, s = 0.0;
    for (int k = 0; k < dim; ++k) {
      d += (nodes[i][k] - p[k]) * (nodes[i][k] - p[k]);
      s = std::max(s, std::abs(p[k]));
    }
    if (i < 0 || std::sqrt(d) > tol * std::max(1.0, s))
      throw Error(ErrorKind::InvalidArgument, "no mesh node at the requested probe point");
    return i;
  }
};

/// Structured (p n_0 + 1) x ... lattice on the unit cube, mapped through geo.
/// Facet sets: left/right (axis 0), bottom/top (axis 1), back/front (axis 2).
template <int dim>
Mesh<dim> structured_mesh(const std::array<int, dim>& n, int order,
                          const std::function<std::array<double, dim>(const std::array<double, dim>&)>& geo) {
  for (int d = 0; d < dim; ++d)
    if (n[d] < 1) throw Error(ErrorKind::InvalidArgument, "mesh subdivisions must be positive");
  Mesh<dim> m;
  m.order = order;
  std::array<int, dim> nn{};
  int total = 1;
  for (int d = 0; d < dim; ++d) {
    nn[d] = order * n[d] + 1;
    total *= nn[d];
  }
  auto node_id = [&](const std::array<int, dim>& g) {
    int i = 0;
    for (int d = dim - 1; d >= 0; --d) i = i * nn[d] + g[d];
    return i;
  };
  m.nodes.resize(total);
  for (int i = 0; i < total; ++i) {
    std::array<double, dim> u{};
    int rem = i;
    for (int d = 0; d < dim; ++d) {
      u[d] = static_cast<double>(rem % nn[d]) / (nn[d] - 1);
      rem /= nn[d];
    }
    m.nodes[i] = geo(u);
  }
  const LagrangeBasis<dim> basis(order);
  int ncell = 1;
  for (int d = 0; d < dim; ++d) ncell *= n[d];
  static const char* names[6] = {"left", "right", "bottom", "top", "back", "front"};
  for (int d = 0; d < dim; ++d) {
    m.facet_sets[names[2 * d]];
    m.facet_sets[names[2 * d + 1]];
  }
  for (int c = 0; c < ncell; ++c) {
    std::array<int, dim> ci{};
    int rem = c;
    for (int d = 0; d < dim; ++d) {
      ci[d] = rem % n[d];
      rem /= n[d];
    }
    std::vector<int> conn(basis.size());
    for (int l = 0; l < basis.size(); ++l) {
      const auto ml = basis.multi_index(l);
      std::array<int, dim> g{};
      for (int d = 0; d < dim; ++d) g[d] = ci[d] * order + ml[d];
      conn[l] = node_id(g);
    }
    m.cells.push_back(conn);
    m.material_id.push_back(0);
    for (int d = 0; d < dim; ++d) {
      if (ci[d] == 0) m.facet_sets[names[2 * d]].push_back({c, 2 * d});
      if (ci[d] == n[d] - 1) m.facet_sets[names[2 * d + 1]].push_back({c, 2 * d + 1});
    }
  }
  return m;
}

// --- plain-text exchange format ---------------------------------------------
//
//   psfem-mesh 1
//   dim <d> order <p>
//   nodes <N>            then N lines of d coordinates
//   cells <M>            then M lines: material_id followed by (p+1)^d node ids
//   facet_sets <K>       then per set: "<name> <count>" and count lines "cell face"
//   node_sets <L>        then per set: "<name> <count>" and one line of ids

template <int dim>
void write_mesh(std::ostream& os, const Mesh<dim>& m) {
  os.precision(17);
  os << "psfem-mesh 1\n";
  os << "dim " << dim << " order " << m.order << "\n";
  os << "nodes " << m.n_nodes() << "\n";
  for (const auto& p : m.nodes) {
    for (int d = 0; d < dim; ++d) os << (d ? " " : "") << p[d];
    os << "\n";
  }
  os << "cells " << m.n_cells() << "\n";
  for (int c = 0; c < m.n_cells(); ++c) {
    os << m.material_id[c];
    for (int n : m.cells[c]) os << " " << n;
    os << "\n";
  }
  os << "facet_sets " << m.facet_sets.size() << "\n";
  for (const auto& [name, fs] : m.facet_sets) {
    os << name << " " << fs.size() << "\n";
    for (const auto& f : fs) os << f.cell << " " << f.face << "\n";
  }
  os << "node_sets " << m.node_sets.size() << "\n";
  for (const auto& [name, ns] : m.node_sets) {
    os << name << " " << ns.size() << "\n";
    for (size_t i = 0; i < ns.size(); ++i) os << (i ? " " : "") << ns[i];
    os << "\n";
  }
}

template <int dim>
Mesh<dim> read_mesh(std::istream& is) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::IoError, "mesh file: " + what); };
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(is >> k) || k != key) fail("expected '" + key + "'");
  };
  Mesh<dim> m;
  int version = 0, d = 0;
  expect("psfem-mesh");
  is >> version;
  expect("dim");
  is >> d;
  if (d != dim) fail("dimension " + std::to_string(d) + " does not match " + std::to_string(dim));
  expect("order");
  is >> m.order;
  if (!is || m.order < 1) fail("bad order");
  int nn = 0;
  expect("nodes");
  is >> nn;
  m.nodes.resize(nn);
  for (auto& p : m.nodes)
    for (int k = 0; k < dim; ++k) is >> p[k];
  int nc = 0;
  expect("cells");
  is >> nc;
  const int npc = m.nodes_per_cell();
  m.cells.assign(nc, std::vector<int>(npc));
  m.material_id.assign(nc, 0);
  for (int c = 0; c < nc; ++c) {
    is >> m.material_id[c];
    for (int& n : m.cells[c]) {
      is >> n;
      if (n < 0 || n >= nn) fail("node id out of range");
    }
  }
  int nf = 0;
  expect("facet_sets");
  is >> nf;
  for (int s = 0; s < nf; ++s) {
    std::string name;
    int cnt = 0;
    is >> name >> cnt;
    auto& fs = m.facet_sets[name];
    fs.resize(cnt);
    for (auto& f : fs) is >> f.cell >> f.face;
  }
  int ns = 0;
  expect("node_sets");
  is >> ns;
  for (int s = 0; s < ns; ++s) {
    std::string name;
    int cnt = 0;
    is >> name >> cnt;
    auto& ids = m.node_sets[name];
    ids.resize(cnt);
    for (int& i : ids) is >> i;
  }
  if (!is) fail("truncated input");
  return m;
}

template <int dim>
void save_mesh(const std::string& path, const Mesh<dim>& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_mesh(os, m);
}

template <int dim>
Mesh<dim> load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot read " + path);
  return read_mesh<dim>(is);
}

}  // namespace psfem
