#include "elastfem/elements.hpp"
#include "elastfem/error.hpp"
#include "elastfem/geometry.hpp"
#include "elastfem/harness.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace elastfem;

namespace {

Eigen::MatrixXd sample_matrix(const std::vector<PolyField>& fields, CellKind kind, int points, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<RefPoint> p;
  for (int k = 0; k < points; ++k) p.push_back(testutil::random_point(kind, rng, 0.0));
  return tabulate(fields, p);
}

// Normal trace of a symmetric (or vector) field at a point, against a physical normal.
Eigen::Vector3d normal_trace(const PolyField& f, const RefPoint& p, const Eigen::Vector3d& nu, int dim) {
  const Eigen::VectorXd v = f(p);
  if (is_vector(f.shape())) return Eigen::Vector3d(v.head(dim).dot(nu.head(dim)), 0, 0);
  return vec_to_sym(v, dim) * nu;
}

double max_coef(const PolyField& f) {
  double m = 0.0;
  for (int c = 0; c < f.size(); ++c) m = std::max(m, f[c].max_abs_coef());
  return m;
}

}  // namespace

TEST(Elements, KindNames) {
  EXPECT_EQ(parse_element_kind("prism"), ElementKind::Prism);
  EXPECT_EQ(parse_element_kind("tet"), ElementKind::TetNC);
  EXPECT_EQ(parse_element_kind("tri"), ElementKind::TriNC);
  EXPECT_EQ(to_string(ElementKind::TetNC), "tet");
  EXPECT_THROW(parse_element_kind("hex"), Error);
}

TEST(Elements, Counts) {
  EXPECT_EQ(prism_element(reference_prism_cell()).n_stress(), 108);
  EXPECT_EQ(prism_element(reference_prism_cell()).n_disp(), 33);
  EXPECT_EQ(tet_nc_element(reference_tet_cell()).n_stress(), 42);
  EXPECT_EQ(tet_nc_element(reference_tet_cell()).n_disp(), 12);
  EXPECT_EQ(tri_nc_element(reference_triangle_cell()).n_stress(), 15);
  EXPECT_EQ(tri_nc_element(reference_triangle_cell()).n_disp(), 6);
  EXPECT_EQ(hz2d_basis(reference_triangle_cell()).size(), 30u);
  EXPECT_EQ(bdm2_basis(reference_triangle_cell()).size(), 12u);
  EXPECT_EQ(prism_disp_basis().size(), 33u);
}

TEST(Elements, DegenerateTriangleRejected) {
  EXPECT_THROW(triangle_cell({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)}), Error);
  EXPECT_THROW(tet_cell({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                         Eigen::Vector3d(1, 1, 0)}),
               Error);
}

TEST(Hz2d, BubblesHaveZeroNormalTrace) {
  const TriangleCell cell = reference_triangle_cell();
  const CellGeometry g = geometry(cell);
  std::vector<ShapeTag> tags;
  const auto fields = hz2d_basis(cell, 3, &tags);
  int bubbles = 0;
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (tags[j].entity != EntityKind::Interior) continue;
    ++bubbles;
    double worst = 0.0;
    for (int m = 0; m < 3; ++m) {
      const Eigen::Vector3d nu = facet_normal(g, m);
      for (int k = 0; k <= 6; ++k) {
        RefPoint p{0, 0, 0, 0};
        p[(m + 1) % 3] = k / 6.0;
        p[(m + 2) % 3] = 1.0 - k / 6.0;
        worst = std::max(worst, normal_trace(fields[j], p, nu, 2).norm());
      }
    }
    EXPECT_LE(worst, 1e-13) << "field " << j;
  }
  EXPECT_EQ(bubbles, 9);
}

TEST(Hz2d, SpansCubicSymmetricMatrices) {
  const auto fields = hz2d_basis(reference_triangle_cell());
  EXPECT_EQ(numerical_rank(sample_matrix(fields, CellKind::Triangle, 40, 1)), 30);
}

TEST(Bdm2, FluxesAndSpan) {
  const TriangleCell cell = reference_triangle_cell();
  const CellGeometry g = geometry(cell);
  std::vector<ShapeTag> tags;
  const auto fields = bdm2_basis(cell, 3, &tags);
  EXPECT_EQ(numerical_rank(sample_matrix(fields, CellKind::Triangle, 30, 2)), 12);
  for (std::size_t j = 0; j < fields.size(); ++j) {
    for (int m = 0; m < 3; ++m) {
      if (tags[j].entity == EntityKind::Edge && tags[j].entity_id == m) continue;
      const Eigen::Vector3d nu = facet_normal(g, m);
      double worst = 0.0;
      for (int k = 0; k <= 6; ++k) {
        RefPoint p{0, 0, 0, 0};
        p[(m + 1) % 3] = k / 6.0;
        p[(m + 2) % 3] = 1.0 - k / 6.0;
        worst = std::max(worst, std::abs(normal_trace(fields[j], p, nu, 2)[0]));
      }
      EXPECT_LE(worst, 1e-13) << "field " << j << " edge " << m;
    }
  }
}

TEST(Bdm2, EdgeFluxIsBarycentric) {
  // the flux of an edge field across its own edge is one of the edge's barycentric
  // coordinates (times the sign relating outward and global normals)
  const TriangleCell cell = reference_triangle_cell();
  const CellGeometry g = geometry(cell);
  std::vector<ShapeTag> tags;
  const auto fields = bdm2_basis(cell, 3, &tags);
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (tags[j].entity != EntityKind::Edge) continue;
    const int m = tags[j].entity_id;
    const Eigen::Vector3d nu = facet_normal(g, m);
    const int a = (m + 1) % 3, b = (m + 2) % 3;
    std::vector<double> flux;
    std::vector<RefPoint> pts;
    for (int k = 0; k <= 4; ++k) {
      RefPoint p{0, 0, 0, 0};
      p[a] = k / 4.0;
      p[b] = 1.0 - k / 4.0;
      pts.push_back(p);
      flux.push_back(normal_trace(fields[j], p, nu, 2)[0]);
    }
    // affine along the edge, and vanishing at exactly one endpoint or at neither
    double best = 1e9;
    for (int v : {a, b})
      for (double s : {1.0, -1.0}) {
        double dev = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) dev = std::max(dev, std::abs(flux[k] - s * pts[k][v]));
        best = std::min(best, dev);
      }
    double quad = 0.0;  // or a quadratic edge mode
    for (std::size_t k = 0; k < pts.size(); ++k)
      quad = std::max(quad, std::abs(flux[k] - flux[2] * 4.0 * pts[k][a] * pts[k][b]));
    EXPECT_LE(std::min(best, quad), 1e-13) << "field " << j;
  }
}

TEST(Prism, DegreePattern) {
  const auto fields = prism_stress_basis(reference_prism_cell());
  ASSERT_EQ(fields.size(), 108u);
  // storage (11, 22, 33, 12, 13, 23)
  for (int j = 0; j < 108; ++j) {
    const PolyField& f = fields[j];
    for (int c = 0; c < 6; ++c) {
      const int block = (c == 0 || c == 1 || c == 3) ? 0 : (c == 4 || c == 5) ? 1 : 2;
      const int owner = j < kPrismTau1 ? 0 : j < kPrismTau1 + kPrismTau2 ? 1 : 2;
      if (block != owner) {
        EXPECT_TRUE(f[c].empty() || f[c].max_abs_coef() < 1e-15) << j << " " << c;
        continue;
      }
      const int dxy = f[c].degree(0, 3), dz = f[c].degree(3, 1);
      const std::array<int, 3> mxy{3, 2, 1}, mz{1, 2, 3};
      EXPECT_LE(dxy, mxy[block]) << j;
      EXPECT_LE(dz, mz[block]) << j;
    }
  }
  EXPECT_EQ(numerical_rank(sample_matrix(fields, CellKind::Prism, 60, 3)), 108);
}

TEST(Prism, AxialFactors) {
  const auto t1 = prism_tau1_axial();
  EXPECT_NEAR(t1[0]({0, 0, 0, 0.3}), 0.3, 1e-15);
  EXPECT_NEAR(t1[1]({0, 0, 0, 0.3}), 0.7, 1e-15);
  const auto t3 = prism_tau3_axial();
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = t3[i]({0, 0, 0, k / 3.0 + 0.1});
  EXPECT_EQ(numerical_rank(m), 4);
  const auto t2 = prism_tau2_axial();
  for (const auto& t : {t2[0], t2[1], t2[2]}) EXPECT_LE(t.degree(), 2);
  // nodal factors are one at their own end and vanish at the other
  EXPECT_NEAR(t2[0]({0, 0, 0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(t2[0]({0, 0, 0, 0}), 0.0, 1e-15);
  EXPECT_NEAR(t3[1]({0, 0, 0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(t3[1]({0, 0, 0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(t2[2]({0, 0, 0, 0}), 0.0, 1e-15);
  EXPECT_NEAR(t2[2]({0, 0, 0, 1}), 0.0, 1e-15);
}

TEST(Prism, DisplacementContainsRigidMotions) {
  const PrismCell cell = reference_prism_cell();
  const CellGeometry g = geometry(cell);
  const auto disp = prism_disp_basis();
  const Eigen::MatrixXd V = sample_matrix(disp, CellKind::Prism, 40, 4);
  EXPECT_EQ(numerical_rank(V), 33);
  std::mt19937 rng(4);
  std::vector<RefPoint> pts;
  for (int k = 0; k < 40; ++k) pts.push_back(testutil::random_point(CellKind::Prism, rng, 0.0));
  const auto rm = rigid_motions(g);
  ASSERT_EQ(rm.size(), 6u);
  const Eigen::MatrixXd R = tabulate(rm, pts);
  const Eigen::MatrixXd coef = V.colPivHouseholderQr().solve(R);
  EXPECT_LE((V * coef - R).norm() / R.norm(), 1e-12);
}

TEST(Unisolvence, AllElements) {
  for (ElementKind k : {ElementKind::Prism, ElementKind::TetNC, ElementKind::TriNC}) {
    const UnisolvenceReport r = unisolvence(k);
    EXPECT_EQ(r.rows, r.cols);
    EXPECT_GT(r.sigma_min, 1e-8) << to_string(k);
    EXPECT_TRUE(std::isfinite(r.condition));
  }
  EXPECT_EQ(unisolvence(ElementKind::Prism).rows, 108);
  EXPECT_EQ(unisolvence(ElementKind::TetNC).rows, 42);
  EXPECT_EQ(unisolvence(ElementKind::TriNC).rows, 15);
  EXPECT_EQ(prism_dof_functionals(reference_prism_cell()).size(), 108u);
}

TEST(Unisolvence, RandomDofValuesDetermineUniqueField) {
  const PrismCell cell = reference_prism_cell();
  const Eigen::MatrixXd D = dof_matrix(prism_dof_functionals(cell), prism_stress_basis(cell));
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd rhs(108);
  for (int i = 0; i < 108; ++i) rhs[i] = U(rng);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  EXPECT_EQ(lu.rank(), 108);
  EXPECT_LE((D * lu.solve(rhs) - rhs).norm(), 1e-10 * rhs.norm());
}

TEST(BubbleDivergence, Ranks) {
  const RankReport p = bubble_divergence_rank(BubbleSpace::Prism);
  EXPECT_EQ(p.rank, 27);
  EXPECT_EQ(p.target, 27);
  EXPECT_LE(p.rm_projection, 1e-12);
  const RankReport t2 = bubble_divergence_rank(BubbleSpace::Triangle2D);
  EXPECT_EQ(t2.rank, 9);
  EXPECT_LE(t2.rm_projection, 1e-12);
  const RankReport tet = bubble_divergence_rank(BubbleSpace::TetNC);
  EXPECT_EQ(tet.rank, tet.target);
  EXPECT_EQ(tet.num_bubbles, 6);
  EXPECT_LE(tet.rm_projection, 1e-12);
  const RankReport tri = bubble_divergence_rank(BubbleSpace::TriNC);
  EXPECT_EQ(tri.rank, tri.target);
  EXPECT_LE(tri.rm_projection, 1e-12);
}

TEST(BubbleDivergence, PairSpaceRanks) {
  for (int r : pair_space_ranks(3)) EXPECT_EQ(r, 7);
  for (int r : pair_space_ranks(2)) EXPECT_EQ(r, 5);
  EXPECT_EQ(pair_space_ranks(3).size(), 6u);
  EXPECT_EQ(pair_space_ranks(2).size(), 3u);
}

TEST(DivergenceInclusion, AllElements) {
  EXPECT_LE(divergence_inclusion_residual(prism_element(reference_prism_cell())), 1e-12);
  EXPECT_LE(divergence_inclusion_residual(tet_nc_element(reference_tet_cell())), 1e-12);
  EXPECT_LE(divergence_inclusion_residual(tri_nc_element(reference_triangle_cell())), 1e-12);
}

TEST(Nonconforming, TriPhiEdgeMoments) {
  const QuadRule gl = gauss_legendre(6);
  for (int i = 0; i < 3; ++i) {
    const int e0 = (i + 1) % 3, e1 = (i + 2) % 3;
    for (int j : {e0, e1})
      for (int a : {e0, e1}) {
        const Polynomial phi = tri_phi(i, j, a);
        for (int b : {e0, e1}) {
          double s = 0.0;  // normalized edge integral of phi lambda_b on edge i
          for (std::size_t q = 0; q < gl.size(); ++q) {
            RefPoint p{0, 0, 0, 0};
            p[e0] = 1.0 - gl.points[q][0];
            p[e1] = gl.points[q][0];
            s += gl.weights[q] * phi(p) * p[b];
          }
          EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-13);
        }
        const int o0 = (j + 1) % 3, o1 = (j + 2) % 3;
        for (int w : {o0, o1}) {
          double s = 0.0;  // vanishing moments on edge j
          for (std::size_t q = 0; q < gl.size(); ++q) {
            RefPoint p{0, 0, 0, 0};
            p[o0] = 1.0 - gl.points[q][0];
            p[o1] = gl.points[q][0];
            s += gl.weights[q] * phi(p) * p[w];
          }
          EXPECT_NEAR(s, 0.0, 1e-13);
        }
      }
  }
}

TEST(Nonconforming, TetPhiFaceMoments) {
  const QuadRule tr = quad_rule(CellKind::Triangle, 8);
  auto face_mean = [&](const Polynomial& p, const std::array<int, 3>& f, int w) {
    double s = 0.0;
    for (std::size_t q = 0; q < tr.size(); ++q) {
      RefPoint x{0, 0, 0, 0};
      for (int c = 0; c < 3; ++c) x[f[c]] = tr.points[q][c];
      s += 2.0 * tr.weights[q] * p(x) * x[w];
    }
    return s;
  };
  for (int i = 0; i < 4; ++i) {
    std::array<int, 3> f;
    for (int v = 0, k = 0; v < 4; ++v)
      if (v != i) f[k++] = v;
    for (int j : f)
      for (int a : f) {
        const Polynomial phi = tet_phi(i, j, a);
        // (1 / (2|F|)) int_F phi lambda_b = delta_ab
        for (int b : f) EXPECT_NEAR(0.5 * face_mean(phi, f, b), a == b ? 1.0 : 0.0, 1e-13);
        std::array<int, 3> o;
        for (int v = 0, k = 0; v < 4; ++v)
          if (v != j) o[k++] = v;
        for (int w : o) EXPECT_NEAR(face_mean(phi, o, w), 0.0, 1e-13);
      }
  }
}

TEST(Nonconforming, TetFaceFieldsBiorthogonal) {
  const TetCell cell = reference_tet_cell();
  const CellGeometry g = geometry(cell);
  const auto fields = tet_nc_basis(cell);
  for (int face = 0; face < 4; ++face) {
    const QuadRule r = facet_rule(CellKind::Tetrahedron, face, 6);
    const double area = facet_measure(g, face);
    for (int m = 0; m < 42; ++m) {
      for (int c = 0; c < 3; ++c)
        for (int s = 0; s < 3; ++s) {
          // q = lambda_{g_s} n_c on the own face, lambda_{g_s} e_c on others
          const bool own = m < 36 && m / 9 == face;
          const Eigen::Vector3d dir = own ? Eigen::Vector3d(cell.face_frame[face].col(c)) : Eigen::Vector3d::Unit(c);
          double mom = 0.0;
          for (std::size_t q = 0; q < r.size(); ++q) {
            const Eigen::Vector3d tn = vec_to_sym(fields[m](r.points[q]), 3) * cell.face_nu[face];
            mom += r.weights[q] * area * r.points[q][cell.face_verts[face][s]] * dir.dot(tn);
          }
          const double expected = own && (m % 9) == 3 * c + s ? 1.0 : 0.0;
          EXPECT_NEAR(mom, expected, 1e-12) << "field " << m << " face " << face;
        }
    }
  }
}

TEST(Nonconforming, OwnerFrameGivesScaledRawFields) {
  const TetCell cell = tet_cell({Eigen::Vector3d(0.1, 0, 0), Eigen::Vector3d(1, 0.2, 0.1),
                                 Eigen::Vector3d(0.2, 1.1, 0), Eigen::Vector3d(0.1, 0.3, 0.9)});
  const double vol = geometry(cell).measure;
  const auto psi = tet_nc_basis(cell);
  for (int face = 0; face < 4; ++face) {
    const auto phi = tet_face_phi_fields(cell, face);
    for (int m = 0; m < 9; ++m) EXPECT_LE(max_coef(psi[9 * face + m] - phi[m] * (1.0 / (6.0 * vol))), 1e-12);
  }
}

TEST(Nonconforming, TriEdgeFieldsBiorthogonal) {
  const TriangleCell cell = reference_triangle_cell();
  const CellGeometry g = geometry(cell);
  const auto fields = tri_nc_basis(cell);
  for (int e = 0; e < 3; ++e) {
    const QuadRule r = facet_rule(CellKind::Triangle, e, 6);
    const double len = facet_measure(g, e);
    const Eigen::Vector3d nu(cell.edge_nu[e].x(), cell.edge_nu[e].y(), 0.0);
    for (int m = 0; m < 15; ++m)
      for (int c = 0; c < 2; ++c)
        for (int s = 0; s < 2; ++s) {
          const bool own = m < 12 && m / 4 == e;
          const Eigen::Vector2d dir = own ? Eigen::Vector2d(cell.edge_frame[e].col(c)) : Eigen::Vector2d::Unit(c);
          double mom = 0.0;
          for (std::size_t q = 0; q < r.size(); ++q) {
            const Eigen::Vector3d tn = vec_to_sym(fields[m](r.points[q]), 2) * nu;
            mom += r.weights[q] * len * r.points[q][cell.edge_ends[e][s]] * dir.dot(tn.head<2>());
          }
          const double expected = own && (m % 4) == 2 * c + s ? 1.0 : 0.0;
          EXPECT_NEAR(mom, expected, 1e-12) << "field " << m << " edge " << e;
        }
  }
}

TEST(Identities, CurlBubbleMomentOnRandomTriangles) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  int done = 0;
  while (done < 10) {
    std::array<Eigen::Vector2d, 3> x;
    for (auto& v : x) v = {U(rng), U(rng)};
    const double det = (x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[1] - x[0]).y() * (x[2] - x[0]).x();
    if (std::abs(det) < 0.1) continue;
    if (det < 0) std::swap(x[1], x[2]);
    const double area = 0.5 * std::abs(det);
    EXPECT_NEAR(curl_bubble_moment(x) / (-area / 30.0), 1.0, 1e-12);

    // independent quadrature of curl(b) . (y - ybar, -(x - xbar)) with b's gradient by hand
    const CellGeometry g = triangle_geometry(x);
    const Eigen::Vector2d bar = (x[0] + x[1] + x[2]) / 3.0;
    const QuadRule r = quad_rule(CellKind::Triangle, 4);
    double s = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) {
      const RefPoint& p = r.points[q];
      Eigen::Vector2d grad = Eigen::Vector2d::Zero();
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector2d gl = g.J.row(i).head<2>().transpose();
        grad += gl * (p[(i + 1) % 3] * p[(i + 2) % 3]);
      }
      const Eigen::Vector3d X = g.map(p);
      const Eigen::Vector2d curl(grad.y(), -grad.x());
      s += r.weights[q] * g.weight_scale() * curl.dot(Eigen::Vector2d(X.y() - bar.y(), -(X.x() - bar.x())));
    }
    EXPECT_NEAR(s / (-area / 30.0), 1.0, 1e-12);
    ++done;
  }
}

TEST(Certificates, AllElementsPass) {
  for (ElementKind k : {ElementKind::Prism, ElementKind::TetNC, ElementKind::TriNC}) {
    const Certificate c = verify_element(k);
    EXPECT_TRUE(c.pass()) << c.to_text();
  }
}
