#pragma once

// Global numbering of local shape fields. Stress fields carry a sign so that
// shared normal traces coincide; displacement fields are numbered cell by cell.
//
// Prism stress numbering is a tensor product of a 2D and a 1D index per block:
//   tau_1  P3 stress element (3V + 4E + 9T)  x  discontinuous P1 in z (2 per interval)
//   tau_2  BDM2 (3E + 3T)                    x  continuous P2 in z (nodes, then interiors)
//   tau_3  discontinuous P1 (3T)             x  continuous P3 in z (nodes, then 2 per interval)

#include "elastfem/elements.hpp"
#include "elastfem/mesh.hpp"

#include <cstddef>
#include <vector>

namespace elastfem {

struct DofMap {
  ElementKind kind = ElementKind::Prism;
  int n_sigma = 0;
  int n_u = 0;
  int local_sigma = 0;
  int local_u = 0;
  std::size_t num_cells = 0;
  std::vector<int> sigma_index;      // cell * local_sigma + j
  std::vector<double> sigma_weight;  // +1 or -1

  int index(std::size_t cell, int j) const { return sigma_index[cell * local_sigma + j]; }
  double weight(std::size_t cell, int j) const { return sigma_weight[cell * local_sigma + j]; }
  int u_offset(std::size_t cell) const { return static_cast<int>(cell) * local_u; }
};

DofMap build_dof_map_prism(const PrismMesh& mesh);
DofMap build_dof_map_tet_nc(const TetMesh& mesh);
DofMap build_dof_map_tri_nc(const TriMesh2D& mesh);

/// Throws unless weights are +-1, every global index is used and no cell
/// references a global index twice.
void validate(const DofMap& map);

/// Closed-form counts.
int prism_sigma_count(int n);
int tet_sigma_count(int n);
int tri_sigma_count(int n);

}  // namespace elastfem
