#include "elastfem/mesh.hpp"

#include "elastfem/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <string>

namespace elastfem {

void Partition1D::validate() const {
  if (nodes.size() < 2) throw Error("Partition1D: need at least two nodes");
  if (nodes.front() != 0.0 || nodes.back() != 1.0) throw Error("Partition1D: nodes must span [0,1]");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i + 1] > nodes[i])) throw Error("Partition1D: nodes must increase strictly");
}

Partition1D build_partition(int n) {
  if (n < 1) throw Error("build_partition: need n >= 1");
  Partition1D p;
  p.nodes.resize(n + 1);
  for (int i = 0; i <= n; ++i) p.nodes[i] = static_cast<double>(i) / n;
  p.nodes.back() = 1.0;
  return p;
}

// ---------------------------------------------------------------- triangles

Eigen::Vector2d TriMesh2D::edge_tangent(std::size_t e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).normalized();
}

Eigen::Vector2d TriMesh2D::edge_normal(std::size_t e) const {
  const Eigen::Vector2d t = edge_tangent(e);
  return {-t.y(), t.x()};
}

double TriMesh2D::edge_length(std::size_t e) const {
  return (vertices[edges[e][1]] - vertices[edges[e][0]]).norm();
}

double TriMesh2D::area(std::size_t t) const {
  const auto& v = triangles[t];
  const Eigen::Vector2d a = vertices[v[1]] - vertices[v[0]];
  const Eigen::Vector2d b = vertices[v[2]] - vertices[v[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double TriMesh2D::max_diameter() const {
  double h = 0.0;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) h = std::max(h, (vertices[t[i]] - vertices[t[j]]).norm());
  return h;
}

TriMesh2D build_tri_mesh(int n) {
  if (n < 1) throw Error("build_tri_mesh: need n >= 1");
  TriMesh2D m;
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  }
  orient_entities(m);
  return m;
}

void orient_entities(TriMesh2D& m) {
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const double a = m.area(t);
    if (std::abs(a) < 1e-14) throw Error("orient_entities: degenerate triangle " + std::to_string(t));
    if (a < 0) std::swap(m.triangles[t][1], m.triangles[t][2]);
  }

  std::map<std::array<int, 2>, int> index;
  m.edges.clear();
  m.edge_cells.clear();
  m.tri_edges.assign(m.triangles.size(), {});
  m.tri_edge_sign.assign(m.triangles.size(), {});
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& v = m.triangles[t];
    for (int loc = 0; loc < 3; ++loc) {
      std::array<int, 2> key{v[(loc + 1) % 3], v[(loc + 2) % 3]};
      if (key[0] > key[1]) std::swap(key[0], key[1]);
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(m.edges.size()));
      if (inserted) {
        m.edges.push_back(key);
        m.edge_cells.emplace_back();
      }
      const int e = it->second;
      m.edge_cells[e].push_back(static_cast<int>(t));
      if (m.edge_cells[e].size() > 2)
        throw Error("orient_entities: edge (" + std::to_string(key[0]) + "," + std::to_string(key[1]) +
                    ") shared by more than two triangles");
      m.tri_edges[t][loc] = e;
    }
  }

  m.edge_frames.assign(m.edges.size(), Eigen::Matrix2d::Zero());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& v = m.triangles[t];
    for (int loc = 0; loc < 3; ++loc) {
      const int e = m.tri_edges[t][loc];
      // outward normal points away from the opposite vertex
      const Eigen::Vector2d mid = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
      const double s = m.edge_normal(e).dot(mid - m.vertices[v[loc]]);
      m.tri_edge_sign[t][loc] = s > 0 ? 1 : -1;
      if (m.edge_cells[e].front() == static_cast<int>(t)) {
        Eigen::Matrix2d tangents;
        tangents.col(0) = m.vertices[m.edges[e][0]] - m.vertices[v[loc]];
        tangents.col(1) = m.vertices[m.edges[e][1]] - m.vertices[v[loc]];
        m.edge_frames[e] = tangents.transpose().inverse();
      }
    }
  }
}

// ---------------------------------------------------------------- prisms

double PrismMesh::max_diameter() const {
  double h = 0.0;
  for (std::size_t t = 0; t < base.num_cells(); ++t) {
    const auto& v = base.triangles[t];
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) d2 = std::max(d2, (base.vertices[v[i]] - base.vertices[v[j]]).squaredNorm());
    for (std::size_t c = 0; c < axis.num_cells(); ++c)
      h = std::max(h, std::sqrt(d2 + axis.length(c) * axis.length(c)));
  }
  return h;
}

PrismMesh build_prism_mesh(int n) {
  if (n < 1) throw Error("build_prism_mesh: need n >= 1");
  PrismMesh m;
  m.base = build_tri_mesh(n);
  m.axis = build_partition(n);
  return m;
}

// ---------------------------------------------------------------- tetrahedra

double TetMesh::volume(std::size_t t) const {
  const auto& v = tets[t];
  Eigen::Matrix3d d;
  for (int i = 0; i < 3; ++i) d.col(i) = vertices[v[i + 1]] - vertices[v[0]];
  return d.determinant() / 6.0;
}

double TetMesh::max_diameter() const {
  double h = 0.0;
  for (const auto& t : tets)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) h = std::max(h, (vertices[t[i]] - vertices[t[j]]).norm());
  return h;
}

TetMesh build_tet_mesh(int n) {
  if (n < 1) throw Error("build_tet_mesh: need n >= 1");
  TetMesh m;
  auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        m.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n, static_cast<double>(k) / n);

  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[p[s]] += 1;
            tet[s + 1] = vid(c[0], c[1], c[2]);
          }
          m.tets.push_back(tet);
        }
      }
    }
  }
  orient_entities(m);
  return m;
}

void orient_entities(TetMesh& m) {
  for (std::size_t t = 0; t < m.tets.size(); ++t) {
    const double vol = m.volume(t);
    if (std::abs(vol) < 1e-15) throw Error("orient_entities: degenerate tetrahedron " + std::to_string(t));
    if (vol < 0) std::swap(m.tets[t][2], m.tets[t][3]);
  }

  std::map<std::array<int, 3>, int> index;
  m.faces.clear();
  m.tet_faces.assign(m.tets.size(), {});
  for (std::size_t t = 0; t < m.tets.size(); ++t) {
    const auto& v = m.tets[t];
    for (int loc = 0; loc < 4; ++loc) {
      std::array<int, 3> key{};
      for (int s = 0, k = 0; s < 4; ++s)
        if (s != loc) key[k++] = v[s];
      std::sort(key.begin(), key.end());
      auto [it, inserted] = index.try_emplace(key, static_cast<int>(m.faces.size()));
      if (inserted) {
        TetFace f;
        f.vertices = key;
        m.faces.push_back(f);
      }
      TetFace& f = m.faces[it->second];
      if (f.cells[0] < 0) {
        f.cells[0] = static_cast<int>(t);
        f.local[0] = loc;
      } else if (f.cells[1] < 0) {
        f.cells[1] = static_cast<int>(t);
        f.local[1] = loc;
      } else {
        throw Error("orient_entities: face shared by more than two tetrahedra");
      }
      m.tet_faces[t][loc] = it->second;
    }
  }

  // cells are visited in ascending order, so cells[0] is the owner
  for (auto& f : m.faces) {
    const auto& owner = m.tets[f.cells[0]];
    const Eigen::Vector3d apex = m.vertices[owner[f.local[0]]];
    const Eigen::Vector3d a = m.vertices[f.vertices[0]];
    Eigen::Vector3d nrm = (m.vertices[f.vertices[1]] - a).cross(m.vertices[f.vertices[2]] - a).normalized();
    if (nrm.dot(a - apex) < 0) nrm = -nrm;
    f.normal = nrm;
    Eigen::Matrix3d tangents;
    for (int b = 0; b < 3; ++b) tangents.col(b) = m.vertices[f.vertices[b]] - apex;
    f.frame = tangents.transpose().inverse();
  }
}

// ---------------------------------------------------------------- json

nlohmann::json to_json(const TriMesh2D& m) {
  nlohmann::json j;
  j["kind"] = "tri";
  for (const auto& v : m.vertices) j["vertices"].push_back({v.x(), v.y()});
  j["cells"] = m.triangles;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto t = m.edge_tangent(e);
    const auto nv = m.edge_normal(e);
    edges.push_back({{"vertices", m.edges[e]},
                     {"cells", m.edge_cells[e]},
                     {"tangent", {t.x(), t.y()}},
                     {"normal", {nv.x(), nv.y()}}});
  }
  j["edges"] = edges;
  j["cell_edges"] = m.tri_edges;
  j["cell_edge_signs"] = m.tri_edge_sign;
  return j;
}

nlohmann::json to_json(const PrismMesh& m) {
  nlohmann::json j;
  j["kind"] = "prism";
  j["base"] = to_json(m.base);
  j["axis"] = m.axis.nodes;
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t c = 0; c < m.num_cells(); ++c) cells.push_back({m.cell_triangle(c), m.cell_layer(c)});
  j["cells"] = cells;
  return j;
}

nlohmann::json to_json(const TetMesh& m) {
  nlohmann::json j;
  j["kind"] = "tet";
  for (const auto& v : m.vertices) j["vertices"].push_back({v.x(), v.y(), v.z()});
  j["cells"] = m.tets;
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : m.faces) {
    faces.push_back({{"vertices", f.vertices},
                     {"cells", f.cells},
                     {"normal", {f.normal.x(), f.normal.y(), f.normal.z()}}});
  }
  j["faces"] = faces;
  j["cell_faces"] = m.tet_faces;
  return j;
}

}  // namespace elastfem
