#include "elastfem/dofmap.hpp"

#include "elastfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace elastfem {

namespace {

void check_edge_orientation(const TriMesh2D& m) {
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto& cells = m.edge_cells[e];
    if (cells.size() != 2) continue;
    int s[2];
    for (int k = 0; k < 2; ++k) {
      const auto& te = m.tri_edges[cells[k]];
      const int loc = static_cast<int>(std::find(te.begin(), te.end(), static_cast<int>(e)) - te.begin());
      s[k] = m.tri_edge_sign[cells[k]][loc];
    }
    if (s[0] + s[1] != 0)
      throw Error("build_dof_map: edge " + std::to_string(e) + " has inconsistent orientation signs");
  }
}

}  // namespace

DofMap build_dof_map_prism(const PrismMesh& mesh) {
  const TriMesh2D& b = mesh.base;
  check_edge_orientation(b);
  const int V = static_cast<int>(b.num_vertices()), E = static_cast<int>(b.num_edges()),
            T = static_cast<int>(b.num_cells()), Z = static_cast<int>(mesh.axis.num_cells());
  const int n_hz = 3 * V + 4 * E + 9 * T, n_bdm = 3 * E + 3 * T;
  const int n1 = 2 * Z, n2 = 2 * Z + 1, n3 = 3 * Z + 1;
  const int off2 = n_hz * n1, off3 = off2 + n_bdm * n2;

  DofMap d;
  d.kind = ElementKind::Prism;
  d.local_sigma = kPrismStress;
  d.local_u = kPrismDisp;
  d.num_cells = mesh.num_cells();
  d.n_sigma = off3 + 3 * T * n3;
  d.n_u = static_cast<int>(d.num_cells) * kPrismDisp;
  d.sigma_index.resize(d.num_cells * kPrismStress);
  d.sigma_weight.resize(d.num_cells * kPrismStress);

  for (std::size_t cell = 0; cell < d.num_cells; ++cell) {
    const int t = static_cast<int>(mesh.cell_triangle(cell));
    const int c = static_cast<int>(mesh.cell_layer(cell));
    const auto& tv = b.triangles[t];
    const auto& te = b.tri_edges[t];
    int* idx = &d.sigma_index[cell * kPrismStress];
    double* w = &d.sigma_weight[cell * kPrismStress];
    int j = 0;
    for (int i = 0; i < 30; ++i) {
      int g;
      if (i < 9)
        g = 3 * tv[i / 3] + i % 3;
      else if (i < 21)
        g = 3 * V + 4 * te[(i - 9) / 4] + (i - 9) % 4;
      else
        g = 3 * V + 4 * E + 9 * t + (i - 21);
      for (int k = 0; k < 2; ++k, ++j) {
        idx[j] = g * n1 + 2 * c + k;
        w[j] = 1.0;
      }
    }
    for (int i = 0; i < 12; ++i) {
      int g;
      double s = 1.0;
      if (i < 9) {
        g = 3 * te[i / 3] + i % 3;
        s = b.tri_edge_sign[t][i / 3];
      } else {
        g = 3 * E + 3 * t + (i - 9);
      }
      const int z[3] = {c + 1, c, Z + 1 + c};
      for (int k = 0; k < 3; ++k, ++j) {
        idx[j] = off2 + g * n2 + z[k];
        w[j] = s;
      }
    }
    for (int i = 0; i < 3; ++i) {
      const int g = 3 * t + i;
      const int z[4] = {c + 1, c, Z + 1 + 2 * c, Z + 2 + 2 * c};
      for (int k = 0; k < 4; ++k, ++j) {
        idx[j] = off3 + g * n3 + z[k];
        w[j] = 1.0;
      }
    }
  }
  return d;
}

DofMap build_dof_map_tet_nc(const TetMesh& mesh) {
  DofMap d;
  d.kind = ElementKind::TetNC;
  d.local_sigma = kTetStress;
  d.local_u = kTetDisp;
  d.num_cells = mesh.num_cells();
  const int F = static_cast<int>(mesh.num_faces());
  d.n_sigma = 9 * F + 6 * static_cast<int>(d.num_cells);
  d.n_u = static_cast<int>(d.num_cells) * kTetDisp;
  d.sigma_index.resize(d.num_cells * kTetStress);
  d.sigma_weight.assign(d.num_cells * kTetStress, 1.0);
  for (std::size_t cell = 0; cell < d.num_cells; ++cell) {
    int* idx = &d.sigma_index[cell * kTetStress];
    for (int i = 0; i < 4; ++i) {
      const int f = mesh.tet_faces[cell][i];
      const TetFace& face = mesh.faces[f];
      // the frame must be the dual basis of the owner's tangents
      const auto& owner = mesh.tets[face.cells[0]];
      const Eigen::Vector3d apex = mesh.vertices[owner[face.local[0]]];
      Eigen::Matrix3d T;
      for (int b = 0; b < 3; ++b) T.col(b) = mesh.vertices[face.vertices[b]] - apex;
      if ((T.transpose() * face.frame - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10)
        throw Error("build_dof_map_tet_nc: face " + std::to_string(f) + " frame does not match its owner");
      for (int m = 0; m < 9; ++m) idx[9 * i + m] = 9 * f + m;
    }
    for (int k = 0; k < 6; ++k) idx[36 + k] = 9 * F + 6 * static_cast<int>(cell) + k;
  }
  return d;
}

DofMap build_dof_map_tri_nc(const TriMesh2D& mesh) {
  check_edge_orientation(mesh);
  DofMap d;
  d.kind = ElementKind::TriNC;
  d.local_sigma = kTriStress;
  d.local_u = kTriDisp;
  d.num_cells = mesh.num_cells();
  const int E = static_cast<int>(mesh.num_edges());
  d.n_sigma = 4 * E + 3 * static_cast<int>(d.num_cells);
  d.n_u = static_cast<int>(d.num_cells) * kTriDisp;
  d.sigma_index.resize(d.num_cells * kTriStress);
  d.sigma_weight.assign(d.num_cells * kTriStress, 1.0);
  for (std::size_t cell = 0; cell < d.num_cells; ++cell) {
    int* idx = &d.sigma_index[cell * kTriStress];
    for (int m = 0; m < 3; ++m)
      for (int k = 0; k < 4; ++k) idx[4 * m + k] = 4 * mesh.tri_edges[cell][m] + k;
    for (int k = 0; k < 3; ++k) idx[12 + k] = 4 * E + 3 * static_cast<int>(cell) + k;
  }
  return d;
}

void validate(const DofMap& d) {
  std::vector<char> used(d.n_sigma, 0);
  for (std::size_t c = 0; c < d.num_cells; ++c) {
    std::vector<int> seen;
    for (int j = 0; j < d.local_sigma; ++j) {
      const int g = d.index(c, j);
      if (g < 0 || g >= d.n_sigma) throw Error("DofMap: global index out of range");
      if (std::abs(std::abs(d.weight(c, j)) - 1.0) != 0.0) throw Error("DofMap: weight is not +-1");
      used[g] = 1;
      seen.push_back(g);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw Error("DofMap: cell " + std::to_string(c) + " references a global index twice");
  }
  for (int g = 0; g < d.n_sigma; ++g)
    if (!used[g]) throw Error("DofMap: global index " + std::to_string(g) + " unused");
}

int prism_sigma_count(int n) {
  const int V = (n + 1) * (n + 1), E = 3 * n * n + 2 * n, T = 2 * n * n, Z = n;
  return (3 * V + 4 * E + 9 * T) * 2 * Z + (3 * E + 3 * T) * (2 * Z + 1) + 3 * T * (3 * Z + 1);
}

int tet_sigma_count(int n) {
  // faces: 12 per cube interior-shared pattern, counted as (4 * cells + boundary) / 2
  const int cells = 6 * n * n * n;
  const int boundary = 6 * 2 * n * n;
  const int faces = (4 * cells + boundary) / 2;
  return 9 * faces + 6 * cells;
}

int tri_sigma_count(int n) {
  const int E = 3 * n * n + 2 * n, T = 2 * n * n;
  return 4 * E + 3 * T;
}

}  // namespace elastfem
