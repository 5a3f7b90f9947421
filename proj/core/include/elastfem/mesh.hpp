#pragma once

// Structured meshes of the unit square / unit cube with globally oriented
// entities. Orientation rules:
//   edge tangent  lower -> higher vertex index, edge normal = tangent rotated +90 deg
//   face normal   outward normal of the owner cell (lowest adjacent cell index)
//   dual frames   dual basis of the owner's tangents x_{g_b} - x_{opposite}, where
//                 g_1 < g_2 (< g_3) are the entity's vertices in global order

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstddef>
#include <vector>

namespace elastfem {

struct Partition1D {
  std::vector<double> nodes;

  std::size_t num_cells() const { return nodes.size() - 1; }
  double length(std::size_t c) const { return nodes[c + 1] - nodes[c]; }
  /// Throws unless nodes increase strictly from 0 to 1.
  void validate() const;
};

Partition1D build_partition(int n);

struct TriMesh2D {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise

  // filled by orient_entities
  std::vector<std::array<int, 2>> edges;          // (lo, hi)
  std::vector<std::vector<int>> edge_cells;       // ascending triangle indices, size 1 or 2
  std::vector<std::array<int, 3>> tri_edges;      // local edge m (opposite vertex m) -> edge
  std::vector<std::array<int, 3>> tri_edge_sign;  // outward normal . global normal
  std::vector<Eigen::Matrix2d> edge_frames;       // columns n_1, n_2

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }

  Eigen::Vector2d edge_tangent(std::size_t e) const;  // unit
  Eigen::Vector2d edge_normal(std::size_t e) const;   // unit
  double edge_length(std::size_t e) const;
  double area(std::size_t t) const;  // signed
  double max_diameter() const;
};

struct PrismMesh {
  TriMesh2D base;
  Partition1D axis;

  std::size_t num_cells() const { return base.num_cells() * axis.num_cells(); }
  std::size_t num_vertices() const { return base.num_vertices() * axis.nodes.size(); }
  /// Cells are layer-major: cell = layer * #triangles + triangle.
  std::size_t cell_index(std::size_t tri, std::size_t layer) const { return layer * base.num_cells() + tri; }
  std::size_t cell_triangle(std::size_t cell) const { return cell % base.num_cells(); }
  std::size_t cell_layer(std::size_t cell) const { return cell / base.num_cells(); }
  std::size_t num_side_faces() const { return base.num_edges() * axis.num_cells(); }
  std::size_t num_horizontal_faces() const { return base.num_cells() * axis.nodes.size(); }
  double max_diameter() const;
};

struct TetFace {
  std::array<int, 3> vertices{};  // ascending
  std::array<int, 2> cells{-1, -1};  // owner first; -1 when on the boundary
  std::array<int, 2> local{-1, -1};  // face index (= opposite local vertex) in each cell
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // unit, outward from the owner
  Eigen::Matrix3d frame = Eigen::Matrix3d::Zero();   // columns n_1, n_2, n_3
  bool boundary() const { return cells[1] < 0; }
};

struct TetMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 4>> tets;

  // filled by orient_entities
  std::vector<TetFace> faces;
  std::vector<std::array<int, 4>> tet_faces;  // local face i (opposite vertex i) -> face

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_cells() const { return tets.size(); }
  std::size_t num_faces() const { return faces.size(); }
  double volume(std::size_t t) const;  // signed
  double max_diameter() const;
};

/// n x n squares, each cut along the (0,0)-(1,1) diagonal.
TriMesh2D build_tri_mesh(int n);
/// build_tri_mesh(n) crossed with n equal intervals in z.
PrismMesh build_prism_mesh(int n);
/// n^3 cubes, each cut into the 6 tetrahedra around its main diagonal.
TetMesh build_tet_mesh(int n);

/// Derives edges, incidence, signs and frames. Flips negatively oriented
/// triangles; rejects degenerate cells and non-manifold edges.
void orient_entities(TriMesh2D& mesh);
/// Derives faces, owners, normals and frames. Flips negatively oriented
/// tetrahedra; rejects degenerate cells and faces shared by more than two cells.
void orient_entities(TetMesh& mesh);

nlohmann::json to_json(const TriMesh2D& mesh);
nlohmann::json to_json(const PrismMesh& mesh);
nlohmann::json to_json(const TetMesh& mesh);

}  // namespace elastfem
