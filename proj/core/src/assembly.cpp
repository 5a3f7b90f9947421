#include "elastfem/assembly.hpp"

#include "elastfem/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace elastfem {

Eigen::MatrixXd compliance_matrix(const Material& m, int dim) {
  if (!(m.mu > 0.0) || !(m.lambda >= 0.0)) throw Error("compliance_matrix: need mu > 0 and lambda >= 0");
  const int n = dim == 3 ? 6 : 3;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  const double k = m.kappa(dim);
  for (int a = 0; a < n; ++a) {
    C(a, a) = frobenius_weight(a, dim);
    for (int b = 0; b < dim; ++b)
      if (a < dim) C(a, b) -= k;
  }
  return C / (2.0 * m.mu);
}

Discretization Discretization::make(ElementKind kind, int n) {
  if (n < 1) throw Error("Discretization: n must be positive");
  switch (kind) {
    case ElementKind::Prism: return from_mesh(build_prism_mesh(n), n);
    case ElementKind::TetNC: return from_mesh(build_tet_mesh(n), n);
    case ElementKind::TriNC: return from_mesh(build_tri_mesh(n), n);
  }
  throw Error("Discretization: unknown element");
}

Discretization Discretization::from_mesh(PrismMesh mesh, int n) {
  Discretization d;
  d.kind_ = ElementKind::Prism;
  d.n_ = n;
  d.h_ = mesh.max_diameter();
  d.dofs_ = build_dof_map_prism(mesh);
  d.mesh_ = std::move(mesh);
  return d;
}

Discretization Discretization::from_mesh(TetMesh mesh, int n) {
  Discretization d;
  d.kind_ = ElementKind::TetNC;
  d.n_ = n;
  d.h_ = mesh.max_diameter();
  d.dofs_ = build_dof_map_tet_nc(mesh);
  d.mesh_ = std::move(mesh);
  return d;
}

Discretization Discretization::from_mesh(TriMesh2D mesh, int n) {
  Discretization d;
  d.kind_ = ElementKind::TriNC;
  d.n_ = n;
  d.h_ = mesh.max_diameter();
  d.dofs_ = build_dof_map_tri_nc(mesh);
  d.mesh_ = std::move(mesh);
  return d;
}

ElementBasis Discretization::element(std::size_t cell) const {
  switch (kind_) {
    case ElementKind::Prism: return prism_element(prism_cell(prism_mesh(), cell));
    case ElementKind::TetNC: return tet_nc_element(tet_cell(tet_mesh(), cell));
    case ElementKind::TriNC: return tri_nc_element(triangle_cell(tri_mesh(), cell));
  }
  throw Error("Discretization: unknown element");
}

Eigen::VectorXd Discretization::local_sigma(std::size_t cell, const Eigen::VectorXd& sigma) const {
  if (sigma.size() != dofs_.n_sigma) throw Error("local_sigma: coefficient vector has the wrong size");
  Eigen::VectorXd x(dofs_.local_sigma);
  for (int j = 0; j < dofs_.local_sigma; ++j) x[j] = dofs_.weight(cell, j) * sigma[dofs_.index(cell, j)];
  return x;
}

QuadRule matrix_rule(ElementKind kind, int degree) {
  switch (kind) {
    case ElementKind::Prism: return degree < 0 ? prism_rule(6, 6) : prism_rule(degree, degree);
    case ElementKind::TetNC: return quad_rule(CellKind::Tetrahedron, degree < 0 ? 4 : degree);
    case ElementKind::TriNC: return quad_rule(CellKind::Triangle, degree < 0 ? 4 : degree);
  }
  throw Error("matrix_rule: unknown element");
}

QuadRule accurate_rule(ElementKind kind, int degree) {
  degree = std::min(degree, kMaxSimplexDegree);
  switch (kind) {
    case ElementKind::Prism: return prism_rule(degree, degree);
    case ElementKind::TetNC: return quad_rule(CellKind::Tetrahedron, degree);
    case ElementKind::TriNC: return quad_rule(CellKind::Triangle, degree);
  }
  throw Error("accurate_rule: unknown element");
}

LocalMatrices local_matrices(const ElementBasis& basis, const Material& material, const VectorFunction* f,
                             const AssemblyOptions& options) {
  const CellGeometry& g = basis.geometry;
  const int dim = g.dim, ncs = dim == 3 ? 6 : 3;
  const int ns = basis.n_stress(), nu = basis.n_disp();
  const QuadRule rule = matrix_rule(basis.kind, options.matrix_degree);
  const int nq = static_cast<int>(rule.size());
  const double scale = g.weight_scale();

  std::vector<PolyField> divs;
  divs.reserve(ns);
  for (const auto& s : basis.stress) divs.push_back(divergence(s, g.J));
  const Eigen::MatrixXd V = tabulate(basis.stress, rule.points);
  const Eigen::MatrixXd Vd = tabulate(divs, rule.points);
  const Eigen::MatrixXd U = tabulate(basis.disp, rule.points);

  const Eigen::MatrixXd C = compliance_matrix(material, dim);
  const Eigen::MatrixXd Lt = Eigen::LLT<Eigen::MatrixXd>(C).matrixU();

  Eigen::MatrixXd W(nq * ncs, ns), Uw(nq * dim, nu);
  for (int q = 0; q < nq; ++q) {
    const double w = rule.weights[q] * scale;
    W.middleRows(q * ncs, ncs) = std::sqrt(w) * Lt * V.middleRows(q * ncs, ncs);
    Uw.middleRows(q * dim, dim) = w * U.middleRows(q * dim, dim);
  }

  LocalMatrices out;
  out.A = W.transpose() * W;
  out.B = Uw.transpose() * Vd;
  out.M = Uw.transpose() * U;
  const Eigen::LLT<Eigen::MatrixXd> Mf(out.M);
  if (Mf.info() != Eigen::Success) throw Error("local_matrices: displacement mass is not positive definite");
  const Eigen::MatrixXd X = Mf.matrixL().solve(out.B);
  out.D = X.transpose() * X;

  if (options.frobenius_mass) {
    Eigen::MatrixXd Vf = V;
    for (int q = 0; q < nq; ++q)
      for (int c = 0; c < ncs; ++c) Vf.row(q * ncs + c) *= rule.weights[q] * scale * frobenius_weight(c, dim);
    out.G = Vf.transpose() * V;
  }

  out.load = Eigen::VectorXd::Zero(nu);
  if (f != nullptr) {
    const QuadRule lr = accurate_rule(basis.kind, options.load_degree);
    const Eigen::MatrixXd U2 = tabulate(basis.disp, lr.points);
    for (std::size_t q = 0; q < lr.size(); ++q) {
      const Eigen::VectorXd fv = (*f)(g.map(lr.points[q]));
      if (fv.size() != dim) throw Error("local_matrices: load has the wrong dimension");
      out.load += lr.weights[q] * scale * U2.middleRows(q * dim, dim).transpose() * fv;
    }
  }
  return out;
}

SaddleSystem assemble(const Discretization& disc, const Material& material, const VectorFunction& f,
                      const AssemblyOptions& options) {
  const DofMap& dm = disc.dofs();
  SaddleSystem s;
  s.kind = disc.kind();
  s.dim = disc.dim();
  s.n_sigma = dm.n_sigma;
  s.n_u = dm.n_u;
  s.load = Eigen::VectorXd::Zero(dm.n_u);

  using Triplet = Eigen::Triplet<double, int>;
  const std::size_t ls = dm.local_sigma, lu = dm.local_u, nc = disc.num_cells();
  std::vector<Triplet> ta, td, tg, tb, tm;
  ta.reserve(nc * ls * ls);
  td.reserve(nc * ls * ls);
  if (options.frobenius_mass) tg.reserve(nc * ls * ls);
  tb.reserve(nc * lu * ls);
  tm.reserve(nc * lu * lu);

  for (std::size_t cell = 0; cell < nc; ++cell) {
    const ElementBasis basis = disc.element(cell);
    const LocalMatrices L = local_matrices(basis, material, f ? &f : nullptr, options);
    const int uo = dm.u_offset(cell);
    for (std::size_t j = 0; j < ls; ++j) {
      const int gj = dm.index(cell, j);
      const double wj = dm.weight(cell, j);
      for (std::size_t i = 0; i < ls; ++i) {
        const int gi = dm.index(cell, i);
        const double wij = wj * dm.weight(cell, i);
        ta.emplace_back(gi, gj, wij * L.A(i, j));
        td.emplace_back(gi, gj, wij * L.D(i, j));
        if (options.frobenius_mass) tg.emplace_back(gi, gj, wij * L.G(i, j));
      }
      for (std::size_t a = 0; a < lu; ++a) tb.emplace_back(uo + a, gj, wj * L.B(a, j));
    }
    for (std::size_t b = 0; b < lu; ++b)
      for (std::size_t a = 0; a < lu; ++a) tm.emplace_back(uo + a, uo + b, L.M(a, b));
    s.load.segment(uo, lu) += L.load;
  }

  auto build = [](SparseMatrix& m, int rows, int cols, std::vector<Triplet>& t) {
    m.resize(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    std::vector<Triplet>().swap(t);
  };
  build(s.A, dm.n_sigma, dm.n_sigma, ta);
  build(s.D, dm.n_sigma, dm.n_sigma, td);
  if (options.frobenius_mass) build(s.G, dm.n_sigma, dm.n_sigma, tg);
  build(s.B, dm.n_u, dm.n_sigma, tb);
  build(s.M, dm.n_u, dm.n_u, tm);
  return s;
}

void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw Error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

void dump_system(const SaddleSystem& s, const std::string& prefix) {
  write_matrix_market(prefix + "_A.mtx", s.A);
  write_matrix_market(prefix + "_B.mtx", s.B);
  write_matrix_market(prefix + "_M.mtx", s.M);
  write_matrix_market(prefix + "_g.mtx", s.load);
}

namespace {

struct FacetSide {
  std::size_t cell = 0;
  std::vector<RefPoint> points;
};

class JumpAccumulator {
 public:
  JumpAccumulator(const Discretization& disc, const Eigen::VectorXd& sigma) : disc_(disc) {
    const std::size_t nc = disc.num_cells();
    bases_.reserve(nc);
    local_.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      bases_.push_back(disc.element(c));
      local_.push_back(disc.local_sigma(c, sigma));
    }
  }

  // weights are physical; tests(q, r) are scalar test functions on the facet
  void add(const FacetSide& a, const FacetSide& b, const Eigen::Vector3d& nu, const std::vector<double>& weights,
           const Eigen::MatrixXd& tests, double measure) {
    const Eigen::MatrixXd ta = traces(a, nu), tb = traces(b, nu);
    const int dim = disc_.dim();
    Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(tests.cols(), dim);
    for (Eigen::Index q = 0; q < ta.cols(); ++q) {
      const Eigen::VectorXd j = ta.col(q) - tb.col(q);
      max_trace_ = std::max({max_trace_, ta.col(q).norm(), tb.col(q).norm()});
      max_jump_ = std::max(max_jump_, j.norm());
      for (Eigen::Index r = 0; r < tests.cols(); ++r) moments.row(r) += weights[q] * tests(q, r) * j.transpose();
    }
    max_moment_ = std::max(max_moment_, moments.cwiseAbs().maxCoeff() / measure);
    ++interfaces_;
  }

  JumpReport report() const {
    JumpReport r;
    r.interfaces = interfaces_;
    if (max_trace_ > 0.0) {
      r.max_pointwise = max_jump_ / max_trace_;
      r.max_moment = max_moment_ / max_trace_;
    }
    return r;
  }

 private:
  Eigen::MatrixXd traces(const FacetSide& s, const Eigen::Vector3d& nu) const {
    const int dim = disc_.dim(), ncs = dim == 3 ? 6 : 3;
    const Eigen::VectorXd vals = tabulate(bases_[s.cell].stress, s.points) * local_[s.cell];
    Eigen::MatrixXd t(dim, s.points.size());
    for (std::size_t q = 0; q < s.points.size(); ++q) {
      const Eigen::Matrix3d m = vec_to_sym(vals.segment(q * ncs, ncs), dim);
      t.col(q) = (m * nu).head(dim);
    }
    return t;
  }

  const Discretization& disc_;
  std::vector<ElementBasis> bases_;
  std::vector<Eigen::VectorXd> local_;
  double max_trace_ = 0.0, max_jump_ = 0.0, max_moment_ = 0.0;
  int interfaces_ = 0;
};

int slot_of(const int* verts, int count, int v) {
  for (int k = 0; k < count; ++k)
    if (verts[k] == v) return k;
  throw Error("interface_jumps: vertex not found in cell");
}

constexpr int kJumpDegree = 8;

}  // namespace

JumpReport interface_jumps(const Discretization& disc, const Eigen::VectorXd& sigma) {
  JumpAccumulator acc(disc, sigma);
  const QuadRule line = quad_rule(CellKind::Interval, kJumpDegree);
  const QuadRule tri = quad_rule(CellKind::Triangle, kJumpDegree);

  auto edge_side = [&](const TriMesh2D& m, std::size_t e, int t, std::size_t cell, double xi, const QuadRule& z) {
    FacetSide s;
    s.cell = cell;
    const int lo = slot_of(m.triangles[t].data(), 3, m.edges[e][0]);
    const int hi = slot_of(m.triangles[t].data(), 3, m.edges[e][1]);
    for (std::size_t k = 0; k < z.size(); ++k)
      for (std::size_t q = 0; q < line.size(); ++q) {
        RefPoint p{};
        p[lo] = 1.0 - line.points[q][0];
        p[hi] = line.points[q][0];
        p[3] = z.size() > 1 ? z.points[k][0] : xi;
        s.points.push_back(p);
      }
    return s;
  };

  switch (disc.kind()) {
    case ElementKind::TriNC: {
      const TriMesh2D& m = disc.tri_mesh();
      const QuadRule one = gauss_legendre(1);
      for (std::size_t e = 0; e < m.num_edges(); ++e) {
        if (m.edge_cells[e].size() != 2) continue;
        const int t0 = m.edge_cells[e][0], t1 = m.edge_cells[e][1];
        const FacetSide a = edge_side(m, e, t0, t0, 0.0, one), b = edge_side(m, e, t1, t1, 0.0, one);
        const double len = m.edge_length(e);
        std::vector<double> w;
        Eigen::MatrixXd tests(line.size(), 2);
        for (std::size_t q = 0; q < line.size(); ++q) {
          w.push_back(line.weights[q] * len);
          tests(q, 0) = 1.0 - line.points[q][0];
          tests(q, 1) = line.points[q][0];
        }
        const Eigen::Vector2d n = m.edge_normal(e);
        acc.add(a, b, Eigen::Vector3d(n.x(), n.y(), 0.0), w, tests, len);
      }
      break;
    }
    case ElementKind::Prism: {
      const PrismMesh& pm = disc.prism_mesh();
      const TriMesh2D& m = pm.base;
      const std::size_t Z = pm.axis.num_cells();
      for (std::size_t c = 0; c < Z; ++c) {
        const double hz = pm.axis.length(c);
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
          if (m.edge_cells[e].size() != 2) continue;
          const int t0 = m.edge_cells[e][0], t1 = m.edge_cells[e][1];
          const FacetSide a = edge_side(m, e, t0, pm.cell_index(t0, c), 0.0, line);
          const FacetSide b = edge_side(m, e, t1, pm.cell_index(t1, c), 0.0, line);
          const double len = m.edge_length(e);
          std::vector<double> w;
          Eigen::MatrixXd tests(line.size() * line.size(), 4);
          int q = 0;
          for (std::size_t k = 0; k < line.size(); ++k)
            for (std::size_t i = 0; i < line.size(); ++i, ++q) {
              const double s = line.points[i][0], xi = line.points[k][0];
              w.push_back(line.weights[i] * line.weights[k] * len * hz);
              tests(q, 0) = (1 - s) * (1 - xi);
              tests(q, 1) = s * (1 - xi);
              tests(q, 2) = (1 - s) * xi;
              tests(q, 3) = s * xi;
            }
          const Eigen::Vector2d n = m.edge_normal(e);
          acc.add(a, b, Eigen::Vector3d(n.x(), n.y(), 0.0), w, tests, len * hz);
        }
      }
      for (std::size_t c = 0; c + 1 < Z; ++c)
        for (std::size_t t = 0; t < m.num_cells(); ++t) {
          FacetSide a, b;
          a.cell = pm.cell_index(t, c);
          b.cell = pm.cell_index(t, c + 1);
          const double area = m.area(t);
          std::vector<double> w;
          Eigen::MatrixXd tests(tri.size(), 3);
          for (std::size_t q = 0; q < tri.size(); ++q) {
            RefPoint p = tri.points[q];
            p[3] = 1.0;
            a.points.push_back(p);
            p[3] = 0.0;
            b.points.push_back(p);
            w.push_back(tri.weights[q] / reference_measure(CellKind::Triangle) * area);
            for (int r = 0; r < 3; ++r) tests(q, r) = tri.points[q][r];
          }
          acc.add(a, b, Eigen::Vector3d::UnitZ(), w, tests, area);
        }
      break;
    }
    case ElementKind::TetNC: {
      const TetMesh& m = disc.tet_mesh();
      for (std::size_t f = 0; f < m.num_faces(); ++f) {
        const TetFace& face = m.faces[f];
        if (face.boundary()) continue;
        FacetSide side[2];
        for (int k = 0; k < 2; ++k) {
          side[k].cell = face.cells[k];
          int slots[3];
          for (int r = 0; r < 3; ++r) slots[r] = slot_of(m.tets[face.cells[k]].data(), 4, face.vertices[r]);
          for (std::size_t q = 0; q < tri.size(); ++q) {
            RefPoint p{};
            for (int r = 0; r < 3; ++r) p[slots[r]] = tri.points[q][r];
            side[k].points.push_back(p);
          }
        }
        const Eigen::Vector3d& x0 = m.vertices[face.vertices[0]];
        const double area =
            0.5 * (m.vertices[face.vertices[1]] - x0).cross(m.vertices[face.vertices[2]] - x0).norm();
        std::vector<double> w;
        Eigen::MatrixXd tests(tri.size(), 3);
        for (std::size_t q = 0; q < tri.size(); ++q) {
          w.push_back(tri.weights[q] / reference_measure(CellKind::Triangle) * area);
          for (int r = 0; r < 3; ++r) tests(q, r) = tri.points[q][r];
        }
        acc.add(side[0], side[1], face.normal, w, tests, area);
      }
      break;
    }
  }
  return acc.report();
}

}  // namespace elastfem
