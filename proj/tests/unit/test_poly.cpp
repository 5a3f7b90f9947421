#include "elastfem/error.hpp"
#include "elastfem/geometry.hpp"
#include "elastfem/polynomial.hpp"
#include "elastfem/quadrature.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace elastfem;

namespace {

Polynomial var(int v) { return Polynomial::variable(v); }

double factorial(int n) { return std::tgamma(n + 1.0); }

// Integral of a monomial over the reference simplex by its own closed form,
// computed independently of the library oracle.
double reference_monomial(const Exponents& e, int dim) {
  double num = 1.0;
  int s = 0;
  for (int i = 0; i <= dim; ++i) {
    num *= factorial(e[i]);
    s += e[i];
  }
  return num / factorial(s + dim);  // dim! * (1/dim!) * prod / (s + dim)!
}

double integrate(const QuadRule& r, const Polynomial& p) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * p(r.points[q]);
  return s;
}

Polynomial random_poly(std::mt19937& rng, int nvars, int degree) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> D(0, degree);
  Polynomial p;
  for (int t = 0; t < 8; ++t) {
    Exponents e{};
    int left = D(rng);
    for (int v = 0; v < nvars && left > 0; ++v) {
      std::uniform_int_distribution<int> k(0, left);
      e[v] = static_cast<std::uint8_t>(v == nvars - 1 ? left : k(rng));
      left -= e[v];
    }
    p += Polynomial::monomial(e, U(rng));
  }
  return p;
}

}  // namespace

TEST(Polynomial, EvaluationExamples) {
  const RefPoint c{1.0 / 3, 1.0 / 3, 1.0 / 3, 0};
  EXPECT_NEAR(var(1)(c), 1.0 / 3, 1e-15);
  EXPECT_NEAR((var(0) * var(1) * var(2))(c), 1.0 / 27, 1e-15);
  const Polynomial xi = var(0);
  EXPECT_NEAR((xi * (Polynomial::constant(1.0) - xi))({0.5, 0, 0, 0}), 0.25, 1e-15);
}

TEST(Polynomial, ArithmeticAndDerivatives) {
  const Polynomial p = (var(0) + var(1) * 2.0).pow(3);
  const RefPoint x{0.3, -0.7, 0.0, 0.0};
  EXPECT_NEAR(p(x), std::pow(0.3 - 1.4, 3), 1e-14);
  EXPECT_NEAR(p.derivative(1)(x), 6.0 * std::pow(0.3 - 1.4, 2), 1e-13);
  EXPECT_EQ(p.degree(), 3);
  EXPECT_TRUE((p - p).empty());
  EXPECT_EQ(Polynomial::affine(2, 3.0, 1.0)({0, 0, 2.0, 0}), 7.0);
}

TEST(Polynomial, SymmetricStorage) {
  EXPECT_EQ(sym_index(0, 0, 3), 0);
  EXPECT_EQ(sym_index(2, 2, 3), 2);
  EXPECT_EQ(sym_index(0, 1, 3), 3);
  EXPECT_EQ(sym_index(2, 0, 3), 4);
  EXPECT_EQ(sym_index(1, 2, 3), 5);
  EXPECT_EQ(sym_index(1, 0, 2), 2);
  std::mt19937 rng(5);
  const Eigen::Matrix3d m = testutil::random_sym(rng, 3);
  EXPECT_LT((vec_to_sym(sym_to_vec(m, 3), 3) - m).norm(), 1e-15);
  const Eigen::VectorXd v = sym_to_vec(m, 3);
  double fro = 0.0;
  for (int c = 0; c < 6; ++c) fro += frobenius_weight(c, 3) * v[c] * v[c];
  EXPECT_NEAR(fro, m.squaredNorm(), 1e-14);
}

TEST(Polynomial, EvalRejectsWrongVariableSet) {
  const PolyField f = PolyField::scalar(var(3), 4);
  EXPECT_THROW(eval(f, 3, {0.2, 0.3, 0.5, 0.1}), Error);
  EXPECT_NO_THROW(eval(f, 4, {0.2, 0.3, 0.5, 0.1}));
}

TEST(Polynomial, DivergenceMatchesFiniteDifferences) {
  std::mt19937 rng(11);
  const std::array<Eigen::Vector2d, 3> tri{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(1.3, 0.1),
                                           Eigen::Vector2d(0.4, 0.9)};
  const CellGeometry g = triangle_geometry(tri);
  // lambda_1 lambda_2 t t^T with t the edge vector from vertex 1 to vertex 2
  const Eigen::Vector3d t = g.vertices[1] - g.vertices[0];
  const PolyField f = PolyField::sym_matrix(var(0) * var(1), t * t.transpose(), 2, 3);
  const PolyField d = divergence(f, g.J);
  const double h = 1e-5;
  for (int k = 0; k < 10; ++k) {
    const RefPoint p = testutil::random_point(CellKind::Triangle, rng);
    const Eigen::Vector3d x = g.map(p);
    Eigen::Vector2d fd = Eigen::Vector2d::Zero();
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector3d dx = Eigen::Vector3d::Zero();
      dx[c] = h;
      const Eigen::Matrix3d up = vec_to_sym(f(testutil::to_reference(g, x + dx)), 2);
      const Eigen::Matrix3d dn = vec_to_sym(f(testutil::to_reference(g, x - dx)), 2);
      fd += ((up - dn).col(c) / (2 * h)).head<2>();
    }
    const Eigen::VectorXd exact = d(p);
    EXPECT_LT((exact - fd).norm(), 1e-6 * std::max(1.0, fd.norm()));
  }
}

TEST(Polynomial, RandomFieldsDerivativesMatchFiniteDifferences) {
  std::mt19937 rng(17);
  const std::array<Eigen::Vector3d, 4> tet{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1.1, 0.1, 0),
                                           Eigen::Vector3d(0.2, 0.9, 0.1), Eigen::Vector3d(0.1, 0.3, 1.2)};
  const CellGeometry g = tetrahedron_geometry(tet);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Polynomial> comps;
    for (int c = 0; c < 6; ++c) comps.push_back(random_poly(rng, 4, 4));
    const PolyField f(ValueShape::Sym3, 4, comps);
    const PolyField d = divergence(f, g.J);
    const PolyField gr = gradient(comps[0], g.J, 3, 4);
    const RefPoint p = testutil::random_point(CellKind::Tetrahedron, rng);
    const Eigen::Vector3d x = g.map(p);
    Eigen::Vector3d fd_div = Eigen::Vector3d::Zero(), fd_grad;
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d dx = Eigen::Vector3d::Zero();
      dx[c] = h;
      const RefPoint pu = testutil::to_reference(g, x + dx), pd = testutil::to_reference(g, x - dx);
      fd_div += (vec_to_sym(f(pu), 3) - vec_to_sym(f(pd), 3)).col(c) / (2 * h);
      fd_grad[c] = (comps[0](pu) - comps[0](pd)) / (2 * h);
    }
    EXPECT_LT((d(p) - fd_div).norm(), 1e-6 * std::max(1.0, fd_div.norm())) << "trial " << trial;
    EXPECT_LT((gr(p) - fd_grad).norm(), 1e-6 * std::max(1.0, fd_grad.norm())) << "trial " << trial;
  }
}

TEST(Polynomial, SymGradientOfRigidMotionsVanishes) {
  const CellGeometry g = tetrahedron_geometry({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0.2, 0),
                                               Eigen::Vector3d(0.1, 1, 0.3), Eigen::Vector3d(0, 0.2, 1)});
  for (const PolyField& r : rigid_motions(g)) {
    const PolyField e = sym_gradient(r, g.J);
    for (int c = 0; c < e.size(); ++c) EXPECT_LT(e[c].max_abs_coef(), 1e-13);
  }
}

TEST(Polynomial, DivCurlOfBubbleVanishes) {
  const CellGeometry g = triangle_geometry({Eigen::Vector2d(0, 0), Eigen::Vector2d(1.2, 0.3), Eigen::Vector2d(0.2, 0.8)});
  const PolyField c = curl2d(var(0) * var(1) * var(2), g.J, 3);
  const PolyField d = divergence(c, g.J);
  EXPECT_LT(d[0].max_abs_coef(), 1e-13);
}

TEST(ExactIntegral, Examples) {
  EXPECT_NEAR(exact_simplex_integral(Exponents{1, 0, 0, 0}, 2, 0.5), 1.0 / 6, 1e-15);
  EXPECT_NEAR(exact_simplex_integral(Exponents{1, 1, 0, 0}, 2, 0.5), 0.5 / 12, 1e-15);
  EXPECT_NEAR(exact_simplex_integral(Exponents{2, 0, 0, 0}, 3, 1.0), 1.0 / 10, 1e-15);
  EXPECT_NEAR(exact_simplex_integral(Exponents{3, 0, 0, 0}, 1, 2.0), 0.5, 1e-15);
}

TEST(Quadrature, WeightSums) {
  EXPECT_NEAR(gauss_legendre(5).weight_sum(), 1.0, 1e-14);
  for (int d = 1; d <= kMaxSimplexDegree; ++d) {
    EXPECT_NEAR(quad_rule(CellKind::Triangle, d).weight_sum(), 0.5, 1e-14) << d;
    EXPECT_NEAR(quad_rule(CellKind::Tetrahedron, d).weight_sum(), 1.0 / 6, 1e-14) << d;
  }
  EXPECT_NEAR(quad_rule(CellKind::Prism, 6).weight_sum(), 0.5, 1e-14);
}

TEST(Quadrature, GaussPointCounts) {
  EXPECT_EQ(quad_rule(CellKind::Interval, 13).size(), 7u);
  const QuadRule g = gauss_legendre(7);
  for (int k = 0; k <= 13; ++k) EXPECT_NEAR(integrate(g, var(0).pow(k)), 1.0 / (k + 1), 1e-14) << k;
}

TEST(Quadrature, TriangleDegree12) {
  const QuadRule r = quad_rule(CellKind::Triangle, 12);
  const Exponents e{4, 4, 4, 0};
  const double exact = exact_simplex_integral(e, 2, 0.5);
  EXPECT_NEAR(integrate(r, Polynomial::monomial(e)) / exact, 1.0, 1e-12);
}

TEST(Quadrature, TetDegree8RandomMonomials) {
  const QuadRule r = quad_rule(CellKind::Tetrahedron, 8);
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> D(0, 8);
  for (int k = 0; k < 50; ++k) {
    Exponents e{};
    int left = D(rng);
    for (int v = 0; v < 4; ++v) {
      std::uniform_int_distribution<int> pick(0, left);
      e[v] = static_cast<std::uint8_t>(v == 3 ? left : pick(rng));
      left -= e[v];
    }
    const double exact = reference_monomial(e, 3);
    EXPECT_NEAR(integrate(r, Polynomial::monomial(e)) / exact, 1.0, 1e-12);
  }
}

TEST(Quadrature, AllRulesExactAgainstFactorialFormula) {
  for (int d = 1; d <= kMaxSimplexDegree; ++d) {
    const QuadRule tri = quad_rule(CellKind::Triangle, d), tet = quad_rule(CellKind::Tetrahedron, d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b)
        for (int c = 0; a + b + c <= d; ++c) {
          const Exponents e2{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
                             static_cast<std::uint8_t>(c), 0};
          EXPECT_NEAR(integrate(tri, Polynomial::monomial(e2)) / reference_monomial(e2, 2), 1.0, 1e-12)
              << "triangle degree " << d;
          const Exponents e3{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), 0,
                             static_cast<std::uint8_t>(c)};
          EXPECT_NEAR(integrate(tet, Polynomial::monomial(e3)) / reference_monomial(e3, 3), 1.0, 1e-12)
              << "tet degree " << d;
        }
  }
}

TEST(Quadrature, LibraryOracleAgreesUpToDegree10) {
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; a + b <= 10; ++b)
      for (int c = 0; a + b + c <= 10; ++c) {
        const Exponents e{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(c), 0};
        EXPECT_NEAR(exact_simplex_integral(e, 2, 0.5) / reference_monomial(e, 2), 1.0, 1e-13);
        EXPECT_NEAR(exact_simplex_integral(e, 3, 1.0 / 6) / reference_monomial(e, 3), 1.0, 1e-13);
      }
}

TEST(Quadrature, PrismTensorRule) {
  const QuadRule r = prism_rule(5, 4);
  const Polynomial p = var(0).pow(2) * var(2).pow(3) * var(3).pow(4);
  EXPECT_NEAR(integrate(r, p), reference_monomial({2, 0, 3, 0}, 2) * 0.2, 1e-14);
}

TEST(Quadrature, RejectsUnsupportedDegree) {
  EXPECT_THROW(quad_rule(CellKind::Triangle, kMaxSimplexDegree + 1), Error);
  EXPECT_THROW(quad_rule(CellKind::Tetrahedron, -1), Error);
}
