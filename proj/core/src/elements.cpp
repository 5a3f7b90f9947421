#include "elastfem/elements.hpp"

#include "elastfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace elastfem {

ElementKind parse_element_kind(const std::string& name) {
  if (name == "prism") return ElementKind::Prism;
  if (name == "tet") return ElementKind::TetNC;
  if (name == "tri") return ElementKind::TriNC;
  throw Error("unknown element kind '" + name + "' (expected prism, tet or tri)");
}

std::string to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Prism: return "prism";
    case ElementKind::TetNC: return "tet";
    case ElementKind::TriNC: return "tri";
  }
  return "?";
}

namespace {

Polynomial lam(int i) { return Polynomial::variable(i); }

Eigen::Matrix3d outer2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.topLeftCorner<2, 2>() = a * b.transpose();
  return m;
}

Eigen::Matrix3d sym_outer(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return 0.5 * (a * b.transpose() + b * a.transpose());
}

Eigen::Vector3d lift(const Eigen::Vector2d& v) { return {v.x(), v.y(), 0.0}; }

// Coefficients s with s . tau_storage = sum_rc M_rc tau_rc for symmetric tau.
Eigen::VectorXd storage_coeffs(const Eigen::Matrix3d& M, int dim) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim == 2 ? 3 : 6);
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) s[sym_index(r, c, dim)] = r == c ? M(r, r) : M(r, c) + M(c, r);
  return s;
}

Eigen::Matrix2d frame_from_tangents(const Eigen::Vector2d& t1, const Eigen::Vector2d& t2) {
  Eigen::Matrix2d T;
  T.col(0) = t1;
  T.col(1) = t2;
  return T.transpose().inverse();
}

Eigen::Matrix3d frame_from_tangents(const Eigen::Vector3d& t1, const Eigen::Vector3d& t2, const Eigen::Vector3d& t3) {
  Eigen::Matrix3d T;
  T.col(0) = t1;
  T.col(1) = t2;
  T.col(2) = t3;
  return T.transpose().inverse();
}

QuadRule cell_rule(CellKind kind, int degree) { return quad_rule(kind, degree); }

PolyField with_vars(const PolyField& f, ValueShape shape, int num_vars, const std::vector<int>& slot_map) {
  // slot_map[c] = destination component of source component c
  PolyField r(shape, num_vars);
  for (int c = 0; c < f.size(); ++c) r[slot_map[c]] = f[c];
  return r;
}

}  // namespace

// ---------------------------------------------------------------- cells

TriangleCell triangle_cell(const TriMesh2D& mesh, std::size_t t) {
  TriangleCell c;
  const auto& v = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) c.x[i] = mesh.vertices[v[i]];
  for (int m = 0; m < 3; ++m) {
    const int e = mesh.tri_edges[t][m];
    for (int b = 0; b < 2; ++b) {
      const auto it = std::find(v.begin(), v.end(), mesh.edges[e][b]);
      if (it == v.end()) throw Error("triangle_cell: edge does not belong to the triangle");
      c.edge_ends[m][b] = static_cast<int>(it - v.begin());
    }
    c.edge_t[m] = mesh.edge_tangent(e);
    c.edge_nu[m] = mesh.edge_normal(e);
    c.edge_sign[m] = mesh.tri_edge_sign[t][m];
    c.edge_frame[m] = mesh.edge_frames[e];
  }
  return c;
}

TriangleCell triangle_cell(const std::array<Eigen::Vector2d, 3>& x) {
  triangle_geometry(x);
  TriangleCell c;
  c.x = x;
  for (int m = 0; m < 3; ++m) {
    int a = (m + 1) % 3, b = (m + 2) % 3;
    if (a > b) std::swap(a, b);
    c.edge_ends[m] = {a, b};
    c.edge_t[m] = (x[b] - x[a]).normalized();
    c.edge_nu[m] = {-c.edge_t[m].y(), c.edge_t[m].x()};
    c.edge_sign[m] = c.edge_nu[m].dot(0.5 * (x[a] + x[b]) - x[m]) > 0 ? 1 : -1;
    c.edge_frame[m] = frame_from_tangents(x[a] - x[m], x[b] - x[m]);
  }
  return c;
}

TetCell tet_cell(const TetMesh& mesh, std::size_t t) {
  TetCell c;
  const auto& v = mesh.tets[t];
  for (int i = 0; i < 4; ++i) c.x[i] = mesh.vertices[v[i]];
  for (int i = 0; i < 4; ++i) {
    const TetFace& f = mesh.faces[mesh.tet_faces[t][i]];
    for (int r = 0; r < 3; ++r) {
      const auto it = std::find(v.begin(), v.end(), f.vertices[r]);
      if (it == v.end()) throw Error("tet_cell: face does not belong to the tetrahedron");
      c.face_verts[i][r] = static_cast<int>(it - v.begin());
    }
    c.face_nu[i] = f.normal;
    c.face_frame[i] = f.frame;
  }
  return c;
}

TetCell tet_cell(const std::array<Eigen::Vector3d, 4>& x) {
  tetrahedron_geometry(x);
  TetCell c;
  c.x = x;
  for (int i = 0; i < 4; ++i) {
    for (int s = 0, k = 0; s < 4; ++s)
      if (s != i) c.face_verts[i][k++] = s;
    const auto& fv = c.face_verts[i];
    Eigen::Vector3d n = (x[fv[1]] - x[fv[0]]).cross(x[fv[2]] - x[fv[0]]).normalized();
    if (n.dot(x[fv[0]] - x[i]) < 0) n = -n;
    c.face_nu[i] = n;
    c.face_frame[i] = frame_from_tangents(x[fv[0]] - x[i], x[fv[1]] - x[i], x[fv[2]] - x[i]);
  }
  return c;
}

PrismCell prism_cell(const PrismMesh& mesh, std::size_t cell) {
  PrismCell c;
  c.base = triangle_cell(mesh.base, mesh.cell_triangle(cell));
  const std::size_t layer = mesh.cell_layer(cell);
  c.z0 = mesh.axis.nodes[layer];
  c.hz = mesh.axis.length(layer);
  return c;
}

PrismCell prism_cell(const std::array<Eigen::Vector2d, 3>& x, double z0, double hz) {
  PrismCell c;
  c.base = triangle_cell(x);
  c.z0 = z0;
  c.hz = hz;
  return c;
}

CellGeometry geometry(const TriangleCell& c) { return triangle_geometry(c.x); }
CellGeometry geometry(const TetCell& c) { return tetrahedron_geometry(c.x); }
CellGeometry geometry(const PrismCell& c) { return prism_geometry(c.base.x, c.z0, c.hz); }

// ---------------------------------------------------------------- 2D blocks

std::vector<PolyField> hz2d_basis(const TriangleCell& cell, int nv, std::vector<ShapeTag>* tags) {
  triangle_geometry(cell.x);  // rejects degenerate input
  std::vector<PolyField> out;
  out.reserve(30);
  std::vector<ShapeTag> tg;
  const Eigen::Matrix3d T[3] = {outer2({1, 0}, {1, 0}), outer2({1, 0}, {0, 1}) + outer2({0, 1}, {1, 0}),
                                outer2({0, 1}, {0, 1})};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.push_back(PolyField::sym_matrix(lam(i), T[j], 2, nv));
      tg.push_back({EntityKind::Vertex, i, j});
    }
  }
  for (int m = 0; m < 3; ++m) {
    const int lo = cell.edge_ends[m][0], hi = cell.edge_ends[m][1];
    const Eigen::Vector3d t = lift(cell.edge_t[m]), nu = lift(cell.edge_nu[m]);
    const Polynomial p[2] = {lam(lo) * lam(lo) * lam(hi), lam(lo) * lam(hi) * lam(hi)};
    const Eigen::Matrix3d M[2] = {nu * nu.transpose(), sym_outer(t, nu)};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        out.push_back(PolyField::sym_matrix(p[b], M[a], 2, nv));
        tg.push_back({EntityKind::Edge, m, 2 * a + b});
      }
    }
  }
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Vector3d t = lift(cell.x[j] - cell.x[i]);
    for (int m = 0; m < 3; ++m) {
      out.push_back(PolyField::sym_matrix(lam(i) * lam(j) * lam(m), t * t.transpose(), 2, nv));
      tg.push_back({EntityKind::Interior, 0, 3 * k + m});
    }
  }
  if (tags) *tags = std::move(tg);
  return out;
}

std::vector<PolyField> bdm2_basis(const TriangleCell& cell, int nv, std::vector<ShapeTag>* tags) {
  const CellGeometry g = triangle_geometry(cell.x);
  std::vector<PolyField> out;
  out.reserve(12);
  std::vector<ShapeTag> tg;
  for (int m = 0; m < 3; ++m) {
    const int lo = cell.edge_ends[m][0], hi = cell.edge_ends[m][1];
    const double hm = 2.0 * g.measure / (cell.x[hi] - cell.x[lo]).norm();
    const Eigen::Vector2d tlo = cell.x[lo] - cell.x[m], thi = cell.x[hi] - cell.x[m];
    out.push_back(PolyField::vector(lam(lo), tlo / hm, nv));
    out.push_back(PolyField::vector(lam(hi), thi / hm, nv));
    out.push_back(PolyField::vector(lam(lo) * lam(hi), (tlo + thi) / (2.0 * hm), nv));
    for (int k = 0; k < 3; ++k) tg.push_back({EntityKind::Edge, m, k});
  }
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    out.push_back(PolyField::vector(lam(i) * lam(j), cell.x[j] - cell.x[i], nv));
    tg.push_back({EntityKind::Interior, 0, k});
  }
  if (tags) *tags = std::move(tg);
  return out;
}

// ---------------------------------------------------------------- prism

std::array<Polynomial, 2> prism_tau1_axial() {
  const Polynomial xi = Polynomial::variable(3);
  return {xi, Polynomial::affine(3, -1.0, 1.0)};
}

std::array<Polynomial, 3> prism_tau2_axial() {
  const Polynomial xi = Polynomial::variable(3);
  const Polynomial om = Polynomial::affine(3, -1.0, 1.0);
  return {xi * Polynomial::affine(3, 2.0, -1.0), om * Polynomial::affine(3, -2.0, 1.0), xi * om};
}

std::array<Polynomial, 4> prism_tau3_axial() {
  const Polynomial xi = Polynomial::variable(3);
  const Polynomial om = Polynomial::affine(3, -1.0, 1.0);
  const Polynomial a = Polynomial::affine(3, 3.0, -1.0);  // 3 xi - 1
  const Polynomial b = Polynomial::affine(3, 3.0, -2.0);  // 3 xi - 2
  return {0.5 * (xi * a * b), 0.5 * (om * a * b), xi * om * Polynomial::affine(3, -3.0, 2.0), xi * om * a};
}

std::vector<PolyField> prism_stress_basis(const PrismCell& cell, std::vector<ShapeTag>* tags) {
  std::vector<ShapeTag> t1, t2;
  const auto hz = hz2d_basis(cell.base, 4, &t1);
  const auto bdm = bdm2_basis(cell.base, 4, &t2);
  const auto a1 = prism_tau1_axial();
  const auto a2 = prism_tau2_axial();
  const auto a3 = prism_tau3_axial();
  std::vector<PolyField> out;
  out.reserve(kPrismStress);
  std::vector<ShapeTag> tg;
  for (std::size_t i = 0; i < hz.size(); ++i) {
    const PolyField f = with_vars(hz[i], ValueShape::Sym3, 4, {0, 1, 3});
    for (int k = 0; k < 2; ++k) {
      out.push_back(f * a1[k]);
      tg.push_back({t1[i].entity, t1[i].entity_id, 1});
    }
  }
  for (std::size_t i = 0; i < bdm.size(); ++i) {
    const PolyField f = with_vars(bdm[i], ValueShape::Sym3, 4, {4, 5});
    for (int k = 0; k < 3; ++k) {
      out.push_back(f * a2[k]);
      tg.push_back({t2[i].entity, t2[i].entity_id, 2});
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k) {
      PolyField f(ValueShape::Sym3, 4);
      f[2] = lam(i) * a3[k];
      out.push_back(f);
      tg.push_back({EntityKind::Vertex, i, 3});
    }
  }
  if (tags) *tags = std::move(tg);
  return out;
}

std::vector<PolyField> prism_disp_basis() {
  std::vector<PolyField> out;
  out.reserve(kPrismDisp);
  const Polynomial xi = Polynomial::variable(3);
  const Polynomial om = Polynomial::affine(3, -1.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        for (const Polynomial& z : {om, xi}) {
          PolyField f(ValueShape::Vector3, 4);
          f[c] = lam(a) * lam(b) * z;
          out.push_back(f);
        }
      }
    }
  }
  const Polynomial bern[3] = {om * om, 2.0 * (xi * om), xi * xi};
  for (int a = 0; a < 3; ++a) {
    for (const Polynomial& z : bern) {
      PolyField f(ValueShape::Vector3, 4);
      f[2] = lam(a) * z;
      out.push_back(f);
    }
  }
  return out;
}

ElementBasis prism_element(const PrismCell& cell) {
  ElementBasis b;
  b.kind = ElementKind::Prism;
  b.geometry = geometry(cell);
  b.stress = prism_stress_basis(cell, &b.stress_tags);
  b.disp = prism_disp_basis();
  return b;
}

// ---------------------------------------------------------------- nonconforming

Polynomial tet_phi(int i, int j, int a) {
  int face[3], k = 0;
  for (int s = 0; s < 4; ++s)
    if (s != i) face[k++] = s;
  if (j == i || a == i || std::find(face, face + 3, j) == face + 3 || std::find(face, face + 3, a) == face + 3)
    throw Error("tet_phi: j and a must be vertices of the face opposite i");
  const Polynomial d = lam(i) - lam(j);
  if (a == j) {
    Polynomial pq;
    for (int s : face)
      if (s != j) pq += lam(s);
    return 27.0 * lam(j) - 9.0 * lam(i) - 3.0 * pq + 30.0 * (d * pq);
  }
  int b = -1;
  for (int s : face)
    if (s != j && s != a) b = s;
  return -15.0 * lam(j) + 9.0 * lam(i) + 9.0 * lam(a) - 3.0 * lam(b) - 60.0 * (d * lam(a));
}

Polynomial tri_phi(int i, int j, int a) {
  if (i == j || i == a || i < 0 || j < 0 || a < 0 || i > 2 || j > 2 || a > 2)
    throw Error("tri_phi: j and a must be vertices of the edge opposite i");
  const Polynomial d = lam(i) - lam(j);
  if (a == j) {
    const int b = 3 - i - j;
    return 5.0 * lam(j) - lam(i) - lam(b) + 6.0 * (d * lam(b));
  }
  return -4.0 * lam(j) + 2.0 * lam(i) + 2.0 * lam(a) - 12.0 * (d * lam(a));
}

std::vector<PolyField> tet_face_phi_fields(const TetCell& cell, int i) {
  std::vector<PolyField> out;
  for (int jj = 0; jj < 3; ++jj) {
    const int j = cell.face_verts[i][jj];
    const Eigen::Vector3d t = cell.x[j] - cell.x[i];
    for (int aa = 0; aa < 3; ++aa)
      out.push_back(PolyField::sym_matrix(tet_phi(i, j, cell.face_verts[i][aa]), t * t.transpose(), 3, 4));
  }
  return out;
}

std::vector<PolyField> tri_face_phi_fields(const TriangleCell& cell, int i) {
  std::vector<PolyField> out;
  for (int jj = 0; jj < 2; ++jj) {
    const int j = cell.edge_ends[i][jj];
    const Eigen::Vector3d t = lift(cell.x[j] - cell.x[i]);
    for (int aa = 0; aa < 2; ++aa)
      out.push_back(PolyField::sym_matrix(tri_phi(i, j, cell.edge_ends[i][aa]), t * t.transpose(), 2, 3));
  }
  return out;
}

Eigen::MatrixXd tet_face_moment_matrix(const TetCell& cell, int i, const std::vector<PolyField>& fields) {
  const CellGeometry g = geometry(cell);
  const QuadRule q = facet_rule(CellKind::Tetrahedron, i, 4);
  const double area = facet_measure(g, i);
  const Eigen::MatrixXd V = tabulate(fields, q.points);
  const Eigen::Vector3d nu = cell.face_nu[i];
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(9, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      const Eigen::Vector3d n = cell.face_frame[i].col(c);
      const Eigen::VectorXd s = storage_coeffs(n * nu.transpose(), 3);
      for (int r = 0; r < 3; ++r) {
        const double w = q.weights[k] * area * q.points[k][cell.face_verts[i][r]];
        H.row(3 * c + r) += w * (s.transpose() * V.middleRows(6 * k, 6));
      }
    }
  }
  return H;
}

Eigen::MatrixXd tri_edge_moment_matrix(const TriangleCell& cell, int i, const std::vector<PolyField>& fields) {
  const CellGeometry g = geometry(cell);
  const QuadRule q = facet_rule(CellKind::Triangle, i, 4);
  const double len = facet_measure(g, i);
  const Eigen::MatrixXd V = tabulate(fields, q.points);
  const Eigen::Vector3d nu = lift(cell.edge_nu[i]);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(4, static_cast<Eigen::Index>(fields.size()));
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (int c = 0; c < 2; ++c) {
      const Eigen::Vector3d n = lift(cell.edge_frame[i].col(c));
      const Eigen::VectorXd s = storage_coeffs(n * nu.transpose(), 2);
      for (int r = 0; r < 2; ++r) {
        const double w = q.weights[k] * len * q.points[k][cell.edge_ends[i][r]];
        H.row(2 * c + r) += w * (s.transpose() * V.middleRows(3 * k, 3));
      }
    }
  }
  return H;
}

namespace {

std::vector<PolyField> combine(const std::vector<PolyField>& phi, const Eigen::MatrixXd& Hinv) {
  std::vector<PolyField> out;
  for (Eigen::Index m = 0; m < Hinv.cols(); ++m) {
    PolyField f = phi[0] * Hinv(0, m);
    for (Eigen::Index l = 1; l < Hinv.rows(); ++l)
      if (Hinv(l, m) != 0.0) f += phi[l] * Hinv(l, m);
    out.push_back(f);
  }
  return out;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& H, const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
  if (!lu.isInvertible()) throw Error(std::string(what) + ": singular frame matrix");
  return lu.inverse();
}

}  // namespace

std::vector<PolyField> tet_nc_basis(const TetCell& cell, std::vector<ShapeTag>* tags) {
  tetrahedron_geometry(cell.x);
  std::vector<PolyField> out;
  out.reserve(kTetStress);
  std::vector<ShapeTag> tg;
  for (int i = 0; i < 4; ++i) {
    const auto phi = tet_face_phi_fields(cell, i);
    const Eigen::MatrixXd H = tet_face_moment_matrix(cell, i, phi);
    const auto psi = combine(phi, checked_inverse(H, "tet_nc_basis"));
    for (int m = 0; m < 9; ++m) {
      out.push_back(psi[m]);
      tg.push_back({EntityKind::Face, i, m});
    }
  }
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Eigen::Vector3d t = cell.x[j] - cell.x[i];
      out.push_back(PolyField::sym_matrix(lam(i) * lam(j), t * t.transpose(), 3, 4));
      tg.push_back({EntityKind::Interior, 0, k++});
    }
  }
  if (tags) *tags = std::move(tg);
  return out;
}

std::vector<PolyField> tri_nc_basis(const TriangleCell& cell, std::vector<ShapeTag>* tags) {
  triangle_geometry(cell.x);
  std::vector<PolyField> out;
  out.reserve(kTriStress);
  std::vector<ShapeTag> tg;
  for (int i = 0; i < 3; ++i) {
    const auto phi = tri_face_phi_fields(cell, i);
    const Eigen::MatrixXd H = tri_edge_moment_matrix(cell, i, phi);
    const auto psi = combine(phi, checked_inverse(H, "tri_nc_basis"));
    for (int m = 0; m < 4; ++m) {
      out.push_back(psi[m]);
      tg.push_back({EntityKind::Edge, i, m});
    }
  }
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Vector3d t = lift(cell.x[j] - cell.x[i]);
    out.push_back(PolyField::sym_matrix(lam(i) * lam(j), t * t.transpose(), 2, 3));
    tg.push_back({EntityKind::Interior, 0, k});
  }
  if (tags) *tags = std::move(tg);
  return out;
}

std::vector<PolyField> p1_disp_basis(int dim) {
  if (dim != 2 && dim != 3) throw Error("p1_disp_basis: dimension must be 2 or 3");
  std::vector<PolyField> out;
  for (int a = 0; a <= dim; ++a) {
    for (int c = 0; c < dim; ++c) {
      PolyField f(dim == 2 ? ValueShape::Vector2 : ValueShape::Vector3, dim + 1);
      f[c] = lam(a);
      out.push_back(f);
    }
  }
  return out;
}

ElementBasis tet_nc_element(const TetCell& cell) {
  ElementBasis b;
  b.kind = ElementKind::TetNC;
  b.geometry = geometry(cell);
  b.stress = tet_nc_basis(cell, &b.stress_tags);
  b.disp = p1_disp_basis(3);
  return b;
}

ElementBasis tri_nc_element(const TriangleCell& cell) {
  ElementBasis b;
  b.kind = ElementKind::TriNC;
  b.geometry = geometry(cell);
  b.stress = tri_nc_basis(cell, &b.stress_tags);
  b.disp = p1_disp_basis(2);
  return b;
}

std::array<Polynomial, 3> coordinate_polys(const CellGeometry& g) {
  std::array<Polynomial, 3> X;
  const int nv = g.kind == CellKind::Tetrahedron ? 4 : 3;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < nv; ++i) X[c] += lam(i) * g.vertices[i][c];
  if (g.kind == CellKind::Prism) X[2] = Polynomial::affine(3, g.hz, g.z0);
  return X;
}

std::vector<PolyField> rigid_motions(const CellGeometry& g) {
  const auto X = coordinate_polys(g);
  const int nv = g.num_vars();
  std::vector<PolyField> out;
  if (g.dim == 2) {
    for (int c = 0; c < 2; ++c) {
      PolyField f(ValueShape::Vector2, nv);
      f[c] = Polynomial::constant(1.0);
      out.push_back(f);
    }
    PolyField r(ValueShape::Vector2, nv);
    r[0] = -X[1];
    r[1] = X[0];
    out.push_back(r);
    return out;
  }
  for (int c = 0; c < 3; ++c) {
    PolyField f(ValueShape::Vector3, nv);
    f[c] = Polynomial::constant(1.0);
    out.push_back(f);
  }
  static constexpr int rot[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& p : rot) {
    PolyField r(ValueShape::Vector3, nv);
    r[p[0]] = -X[p[1]];
    r[p[1]] = X[p[0]];
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- degrees of freedom

namespace {

class DofBuilder {
 public:
  explicit DofBuilder(int dim) : dim_(dim) {}

  // Adds sum_k w_k M_k : tau(p_k) where M_k = test(p_k).
  template <class Test>
  void add(int item, EntityKind entity, int id, int index, const std::vector<RefPoint>& pts,
           const std::vector<double>& w, Test test) {
    DofFunctional f;
    f.item = item;
    f.entity = entity;
    f.entity_id = id;
    f.index = index;
    f.points = pts;
    f.coeffs.resize(dim_ == 2 ? 3 : 6, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) f.coeffs.col(k) = w[k] * storage_coeffs(test(pts[k]), dim_);
    out.push_back(std::move(f));
  }

  std::vector<DofFunctional> out;

 private:
  int dim_;
};

std::vector<double> scaled(const QuadRule& q, double s) {
  std::vector<double> w(q.weights);
  for (double& x : w) x *= s;
  return w;
}

QuadRule horizontal_edge_rule(int m, double xi, int degree) {
  QuadRule q = facet_rule(CellKind::Triangle, m, degree);
  for (auto& p : q.points) p[3] = xi;
  return q;
}

}  // namespace

std::vector<DofFunctional> prism_dof_functionals(const PrismCell& cell) {
  const CellGeometry g = geometry(cell);
  const TriangleCell& tc = cell.base;
  DofBuilder B(3);
  const auto e3 = Eigen::Vector3d::UnitZ();

  // (1) tau_1 at the ends of the vertical edges
  for (int top = 0; top < 2; ++top) {
    for (int i = 0; i < 3; ++i) {
      RefPoint p{};
      p[i] = 1.0;
      p[3] = top;
      for (int c = 0; c < 3; ++c) {
        const int r = c == 2 ? 0 : c, s = c == 2 ? 1 : c;
        B.add(1, EntityKind::Vertex, 3 * top + i, c, {p}, {1.0}, [&](const RefPoint&) {
          Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
          M(r, s) = 1.0;
          return M;
        });
      }
    }
  }
  // (2) int_F tau_1 nu . p on vertical faces, p in Q11(F; R2)
  const auto a1 = prism_tau1_axial();
  for (int m = 0; m < 3; ++m) {
    const QuadRule q = facet_rule(CellKind::Prism, m, 6);
    const auto w = scaled(q, facet_measure(g, m));
    const Eigen::Vector3d nu = facet_normal(g, m);
    int idx = 0;
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        for (int c = 0; c < 2; ++c) {
          const int v = tc.edge_ends[m][b];
          B.add(2, EntityKind::Face, m, idx++, q.points, w, [&](const RefPoint& p) {
            Eigen::Vector3d pv = Eigen::Vector3d::Zero();
            pv[c] = p[v] * a1[k](p);
            return Eigen::Matrix3d(pv * nu.transpose());
          });
        }
      }
    }
  }
  const QuadRule qk = prism_rule(8, 6);
  const auto wk = scaled(qk, g.weight_scale());
  // (3) int_K tau_1 : p, p in H_b x P1(z)
  {
    const auto hb = hz2d_basis(tc, 4);
    int idx = 0;
    for (int f = 21; f < 30; ++f) {
      for (int k = 0; k < 2; ++k) {
        B.add(3, EntityKind::Interior, 0, idx++, qk.points, wk, [&](const RefPoint& p) {
          const Eigen::VectorXd v = hb[f](p);
          return Eigen::Matrix3d(vec_to_sym(v, 2) * a1[k](p));
        });
      }
    }
  }
  // (4) int_e tau_2 . nu p on horizontal edges, p in P2(e)
  for (int top = 0; top < 2; ++top) {
    for (int m = 0; m < 3; ++m) {
      const QuadRule q = horizontal_edge_rule(m, top, 6);
      const double len = (tc.x[tc.edge_ends[m][1]] - tc.x[tc.edge_ends[m][0]]).norm();
      const auto w = scaled(q, len);
      const Eigen::Vector3d nu = facet_normal(g, m);
      const int lo = tc.edge_ends[m][0], hi = tc.edge_ends[m][1];
      for (int k = 0; k < 3; ++k) {
        B.add(4, EntityKind::Edge, 3 * top + m, k, q.points, w, [&](const RefPoint& p) {
          const double pk = k == 0 ? p[lo] * p[lo] : k == 1 ? p[lo] * p[hi] : p[hi] * p[hi];
          return Eigen::Matrix3d(pk * (e3 * nu.transpose()));
        });
      }
    }
  }
  // (5) int_F tau_2 . nu p on vertical faces, p in P2(e) x P0(z)
  for (int m = 0; m < 3; ++m) {
    const QuadRule q = facet_rule(CellKind::Prism, m, 6);
    const auto w = scaled(q, facet_measure(g, m));
    const Eigen::Vector3d nu = facet_normal(g, m);
    const int lo = tc.edge_ends[m][0], hi = tc.edge_ends[m][1];
    for (int k = 0; k < 3; ++k) {
      B.add(5, EntityKind::Face, m, k, q.points, w, [&](const RefPoint& p) {
        const double pk = k == 0 ? p[lo] * p[lo] : k == 1 ? p[lo] * p[hi] : p[hi] * p[hi];
        return Eigen::Matrix3d(pk * (e3 * nu.transpose()));
      });
    }
  }
  const PolyField curlb = curl2d(lam(0) * lam(1) * lam(2), g.J, 4);
  // (6), (7), (10) on the horizontal faces
  for (int top = 0; top < 2; ++top) {
    const int facet = 3 + top;
    const QuadRule q = facet_rule(CellKind::Prism, facet, 6);
    const auto w = scaled(q, facet_measure(g, facet));
    for (int c = 0; c < 2; ++c) {
      B.add(6, EntityKind::Face, facet, c, q.points, w, [&](const RefPoint&) {
        Eigen::Vector3d pv = Eigen::Vector3d::Zero();
        pv[c] = 1.0;
        return Eigen::Matrix3d(e3 * pv.transpose());
      });
    }
    B.add(7, EntityKind::Face, facet, 0, q.points, w, [&](const RefPoint& p) {
      const Eigen::VectorXd cb = curlb(p);
      return Eigen::Matrix3d(e3 * Eigen::Vector3d(cb[0], cb[1], 0.0).transpose());
    });
    for (int i = 0; i < 3; ++i) {
      B.add(10, EntityKind::Face, facet, i, q.points, w, [&](const RefPoint& p) {
        Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
        M(2, 2) = p[i];
        return M;
      });
    }
  }
  // (8), (9) cell moments of tau_2
  for (int c = 0; c < 2; ++c) {
    B.add(8, EntityKind::Interior, 0, c, qk.points, wk, [&](const RefPoint&) {
      Eigen::Vector3d pv = Eigen::Vector3d::Zero();
      pv[c] = 1.0;
      return Eigen::Matrix3d(e3 * pv.transpose());
    });
  }
  B.add(9, EntityKind::Interior, 0, 0, qk.points, wk, [&](const RefPoint& p) {
    const Eigen::VectorXd cb = curlb(p);
    return Eigen::Matrix3d(e3 * Eigen::Vector3d(cb[0], cb[1], 0.0).transpose());
  });
  // (11) int_K tau_3 p, p in P1(x, y) x P1(z)
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      B.add(11, EntityKind::Interior, 0, 2 * i + k, qk.points, wk, [&](const RefPoint& p) {
        Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
        M(2, 2) = p[i] * a1[k](p);
        return M;
      });
    }
  }
  return std::move(B.out);
}

std::vector<DofFunctional> tet_nc_dof_functionals(const TetCell& cell) {
  const CellGeometry g = geometry(cell);
  DofBuilder B(3);
  for (int i = 0; i < 4; ++i) {
    const QuadRule q = facet_rule(CellKind::Tetrahedron, i, 5);
    const auto w = scaled(q, facet_measure(g, i));
    const Eigen::Vector3d nu = facet_normal(g, i);
    for (int c = 0; c < 3; ++c) {
      for (int r = 0; r < 3; ++r) {
        const int v = cell.face_verts[i][r];
        B.add(1, EntityKind::Face, i, 3 * c + r, q.points, w, [&](const RefPoint& p) {
          Eigen::Vector3d pv = Eigen::Vector3d::Zero();
          pv[c] = p[v];
          return Eigen::Matrix3d(pv * nu.transpose());
        });
      }
    }
  }
  const QuadRule qk = quad_rule(CellKind::Tetrahedron, 6);
  const auto wk = scaled(qk, g.weight_scale());
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Eigen::Vector3d t = cell.x[j] - cell.x[i];
      B.add(2, EntityKind::Interior, 0, k++, qk.points, wk,
            [&](const RefPoint& p) { return Eigen::Matrix3d(p[i] * p[j] * (t * t.transpose())); });
    }
  }
  return std::move(B.out);
}

std::vector<DofFunctional> tri_nc_dof_functionals(const TriangleCell& cell) {
  const CellGeometry g = geometry(cell);
  DofBuilder B(2);
  for (int i = 0; i < 3; ++i) {
    const QuadRule q = facet_rule(CellKind::Triangle, i, 5);
    const auto w = scaled(q, facet_measure(g, i));
    const Eigen::Vector3d nu = facet_normal(g, i);
    for (int c = 0; c < 2; ++c) {
      for (int r = 0; r < 2; ++r) {
        const int v = cell.edge_ends[i][r];
        B.add(1, EntityKind::Edge, i, 2 * c + r, q.points, w, [&](const RefPoint& p) {
          Eigen::Vector3d pv = Eigen::Vector3d::Zero();
          pv[c] = p[v];
          return Eigen::Matrix3d(pv * nu.transpose());
        });
      }
    }
  }
  const QuadRule qk = quad_rule(CellKind::Triangle, 6);
  const auto wk = scaled(qk, g.weight_scale());
  static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0], j = pairs[k][1];
    const Eigen::Vector3d t = lift(cell.x[j] - cell.x[i]);
    B.add(2, EntityKind::Interior, 0, k, qk.points, wk,
          [&](const RefPoint& p) { return Eigen::Matrix3d(p[i] * p[j] * (t * t.transpose())); });
  }
  return std::move(B.out);
}

Eigen::MatrixXd dof_matrix(const std::vector<DofFunctional>& dofs, const std::vector<PolyField>& fields) {
  Eigen::MatrixXd D(static_cast<Eigen::Index>(dofs.size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const auto& f = dofs[i];
    const Eigen::MatrixXd V = tabulate(fields, f.points);
    const Eigen::Index nc = f.coeffs.rows();
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(D.cols());
    for (std::size_t k = 0; k < f.points.size(); ++k)
      row += f.coeffs.col(static_cast<Eigen::Index>(k)).transpose() *
             V.middleRows(static_cast<Eigen::Index>(k) * nc, nc);
    D.row(static_cast<Eigen::Index>(i)) = row;
  }
  return D;
}

// ---------------------------------------------------------------- certificates

TriangleCell reference_triangle_cell() {
  return triangle_cell({Eigen::Vector2d(0.1, 0.05), Eigen::Vector2d(1.1, 0.25), Eigen::Vector2d(0.35, 0.95)});
}

TetCell reference_tet_cell() {
  return tet_cell({Eigen::Vector3d(0.05, 0.0, 0.1), Eigen::Vector3d(1.0, 0.1, 0.0), Eigen::Vector3d(0.2, 1.05, 0.15),
                   Eigen::Vector3d(0.1, 0.2, 0.9)});
}

PrismCell reference_prism_cell() {
  return prism_cell({Eigen::Vector2d(0.1, 0.05), Eigen::Vector2d(1.1, 0.25), Eigen::Vector2d(0.35, 0.95)}, 0.2, 0.8);
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

UnisolvenceReport unisolvence(const Eigen::MatrixXd& D) {
  Eigen::MatrixXd S = D;
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double n = S.row(i).norm();
    if (n > 0) S.row(i) /= n;
  }
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    const double n = S.col(j).norm();
    if (n > 0) S.col(j) /= n;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto& s = svd.singularValues();
  UnisolvenceReport r;
  r.rows = static_cast<int>(D.rows());
  r.cols = static_cast<int>(D.cols());
  r.sigma_max = s.size() ? s[0] : 0.0;
  r.sigma_min = (D.rows() == D.cols() && s.size()) ? s[s.size() - 1] : 0.0;
  r.condition = r.sigma_min > 0 ? r.sigma_max / r.sigma_min : INFINITY;
  return r;
}

UnisolvenceReport unisolvence(ElementKind kind) {
  switch (kind) {
    case ElementKind::Prism: {
      const PrismCell c = reference_prism_cell();
      return unisolvence(dof_matrix(prism_dof_functionals(c), prism_stress_basis(c)));
    }
    case ElementKind::TetNC: {
      const TetCell c = reference_tet_cell();
      return unisolvence(dof_matrix(tet_nc_dof_functionals(c), tet_nc_basis(c)));
    }
    case ElementKind::TriNC: {
      const TriangleCell c = reference_triangle_cell();
      return unisolvence(dof_matrix(tri_nc_dof_functionals(c), tri_nc_basis(c)));
    }
  }
  throw Error("unisolvence: unknown element kind");
}

namespace {

struct Expansion {
  Eigen::MatrixXd coeffs;
  double max_residual = 0.0;
};

// L2 projection of vector fields into the span of `basis` on the cell, with the
// relative residual of each projection.
Expansion expand(const std::vector<PolyField>& targets, const std::vector<PolyField>& basis, const CellGeometry& g,
                 int degree) {
  const QuadRule q = cell_rule(g.kind, degree);
  const Eigen::MatrixXd Vt = tabulate(targets, q.points);
  const Eigen::MatrixXd Vb = tabulate(basis, q.points);
  const Eigen::Index nc = basis.front().size();
  Eigen::VectorXd w(Vb.rows());
  for (std::size_t k = 0; k < q.size(); ++k) w.segment(static_cast<Eigen::Index>(k) * nc, nc).setConstant(q.weights[k]);
  const Eigen::MatrixXd M = Vb.transpose() * w.asDiagonal() * Vb;
  const Eigen::MatrixXd R = Vb.transpose() * w.asDiagonal() * Vt;
  Expansion e;
  e.coeffs = M.ldlt().solve(R);
  const Eigen::MatrixXd res = Vt - Vb * e.coeffs;
  for (Eigen::Index j = 0; j < Vt.cols(); ++j) {
    const double nt = std::sqrt(Vt.col(j).dot(w.asDiagonal() * Vt.col(j)));
    const double nr = std::sqrt(res.col(j).dot(w.asDiagonal() * res.col(j)));
    e.max_residual = std::max(e.max_residual, nt > 1e-300 ? nr / nt : nr);
  }
  return e;
}

std::vector<PolyField> divergences(const std::vector<PolyField>& fs, const VarJacobian& J) {
  std::vector<PolyField> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(divergence(f, J));
  return out;
}

std::vector<PolyField> p2_vector_basis(int nv) {
  std::vector<PolyField> out;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      for (int c = 0; c < 2; ++c) {
        PolyField f(ValueShape::Vector2, nv);
        f[c] = lam(a) * lam(b);
        out.push_back(f);
      }
  return out;
}

double rm_content(const std::vector<PolyField>& divs, const CellGeometry& g) {
  const auto rm = rigid_motions(g);
  const QuadRule q = cell_rule(g.kind, 8);
  const Eigen::MatrixXd Vd = tabulate(divs, q.points);
  const Eigen::MatrixXd Vr = tabulate(rm, q.points);
  const Eigen::Index nc = divs.front().size();
  Eigen::VectorXd w(Vd.rows());
  for (std::size_t k = 0; k < q.size(); ++k) w.segment(static_cast<Eigen::Index>(k) * nc, nc).setConstant(q.weights[k]);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < Vd.cols(); ++i) {
    const double nd = std::sqrt(Vd.col(i).dot(w.asDiagonal() * Vd.col(i)));
    if (nd < 1e-300) continue;
    for (Eigen::Index j = 0; j < Vr.cols(); ++j) {
      const double nr = std::sqrt(Vr.col(j).dot(w.asDiagonal() * Vr.col(j)));
      worst = std::max(worst, std::abs(Vd.col(i).dot(w.asDiagonal() * Vr.col(j))) / (nd * nr));
    }
  }
  return worst;
}

}  // namespace

RankReport bubble_divergence_rank(BubbleSpace space) {
  RankReport r;
  switch (space) {
    case BubbleSpace::Prism: {
      const PrismCell c = reference_prism_cell();
      const ElementBasis b = prism_element(c);
      const auto dofs = prism_dof_functionals(c);
      const Eigen::MatrixXd D = dof_matrix(dofs, b.stress);
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < dofs.size(); ++i) {
        const int it = dofs[i].item;
        if (it == 1 || it == 2 || it == 4 || it == 5 || it == 6 || it == 7 || it == 10)
          rows.push_back(static_cast<Eigen::Index>(i));
      }
      Eigen::MatrixXd Bnd(rows.size(), D.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) Bnd.row(static_cast<Eigen::Index>(i)) = D.row(rows[i]);
      // orthonormal null space of the boundary functionals
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bnd, Eigen::ComputeFullV);
      const int rank = numerical_rank(Bnd);
      const Eigen::MatrixXd N = svd.matrixV().rightCols(D.cols() - rank);
      std::vector<PolyField> bubbles;
      for (Eigen::Index k = 0; k < N.cols(); ++k) {
        PolyField f = b.stress[0] * N(0, k);
        for (Eigen::Index j = 1; j < N.rows(); ++j) f += b.stress[j] * N(j, k);
        bubbles.push_back(f);
      }
      const auto divs = divergences(bubbles, b.geometry.J);
      const Expansion e = expand(divs, b.disp, b.geometry, 8);
      r.num_bubbles = static_cast<int>(bubbles.size());
      r.rank = numerical_rank(e.coeffs);
      r.target = kPrismDisp - 6;
      r.rm_projection = rm_content(divs, b.geometry);
      r.expansion_residual = e.max_residual;
      return r;
    }
    case BubbleSpace::Triangle2D: {
      const TriangleCell c = reference_triangle_cell();
      const CellGeometry g = geometry(c);
      const auto hz = hz2d_basis(c, 3);
      const std::vector<PolyField> bubbles(hz.begin() + 21, hz.end());
      const auto divs = divergences(bubbles, g.J);
      const Expansion e = expand(divs, p2_vector_basis(3), g, 8);
      r.num_bubbles = 9;
      r.rank = numerical_rank(e.coeffs);
      r.target = 12 - 3;
      r.rm_projection = rm_content(divs, g);
      r.expansion_residual = e.max_residual;
      return r;
    }
    case BubbleSpace::TetNC: {
      const TetCell c = reference_tet_cell();
      const ElementBasis b = tet_nc_element(c);
      const std::vector<PolyField> bubbles(b.stress.begin() + 36, b.stress.end());
      const auto divs = divergences(bubbles, b.geometry.J);
      const Expansion e = expand(divs, b.disp, b.geometry, 6);
      r.num_bubbles = 6;
      r.rank = numerical_rank(e.coeffs);
      r.target = kTetDisp - 6;
      r.rm_projection = rm_content(divs, b.geometry);
      r.expansion_residual = e.max_residual;
      return r;
    }
    case BubbleSpace::TriNC: {
      const TriangleCell c = reference_triangle_cell();
      const ElementBasis b = tri_nc_element(c);
      const std::vector<PolyField> bubbles(b.stress.begin() + 12, b.stress.end());
      const auto divs = divergences(bubbles, b.geometry.J);
      const Expansion e = expand(divs, b.disp, b.geometry, 6);
      r.num_bubbles = 3;
      r.rank = numerical_rank(e.coeffs);
      r.target = kTriDisp - 3;
      r.rm_projection = rm_content(divs, b.geometry);
      r.expansion_residual = e.max_residual;
      return r;
    }
  }
  throw Error("bubble_divergence_rank: unknown bubble space");
}

double divergence_inclusion_residual(const ElementBasis& basis) {
  const auto divs = divergences(basis.stress, basis.geometry.J);
  return expand(divs, basis.disp, basis.geometry, 8).max_residual;
}

std::vector<int> pair_space_ranks(int dim) {
  if (dim != 2 && dim != 3) throw Error("pair_space_ranks: dimension must be 2 or 3");
  const int nv = dim + 1;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<RefPoint> pts;
  for (int k = 0; k < 40; ++k) {
    RefPoint p{};
    double s = 0.0;
    for (int v = 0; v < nv; ++v) s += (p[v] = -std::log(U(rng) + 1e-300));
    for (int v = 0; v < nv; ++v) p[v] /= s;
    pts.push_back(p);
  }
  std::vector<int> ranks;
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      std::vector<Polynomial> ps;
      for (int a = 0; a < nv; ++a) ps.push_back(lam(a));
      for (int l = 0; l < nv; ++l)
        if (l != i && l != j) ps.push_back((lam(i) - lam(j)) * lam(l));
      ps.push_back(lam(i) * lam(j));
      Eigen::MatrixXd V(pts.size(), ps.size());
      for (std::size_t k = 0; k < pts.size(); ++k)
        for (std::size_t m = 0; m < ps.size(); ++m) V(k, m) = ps[m](pts[k]);
      ranks.push_back(numerical_rank(V));
    }
  }
  return ranks;
}

}  // namespace elastfem
