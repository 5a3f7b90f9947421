#pragma once

// Polynomials in up to four reference variables and matrix/vector valued
// fields built from them.
//
// The variables are interpreted by the cell that owns the field:
//   triangle     (l1, l2, l3)        barycentric
//   tetrahedron  (l1, l2, l3, l4)    barycentric
//   prism        (l1, l2, l3, xi)    barycentric of the base, xi in [0,1]
//   interval     (xi)
//   cartesian    (x, y, z)
// Derivatives with respect to physical coordinates are taken through a
// constant variable-gradient matrix (see VarJacobian).

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace elastfem {

inline constexpr int kMaxVars = 4;

using Exponents = std::array<std::uint8_t, kMaxVars>;
using RefPoint = std::array<double, kMaxVars>;

/// d(var_v)/d(x_c): row v holds the physical gradient of reference variable v.
using VarJacobian = Eigen::Matrix<double, kMaxVars, 3>;

/// Jacobian for fields written directly in cartesian coordinates.
VarJacobian cartesian_jacobian(int dim);

class Polynomial {
 public:
  struct Term {
    Exponents exp{};
    double coef = 0.0;
  };

  Polynomial() = default;

  static Polynomial constant(double c);
  static Polynomial variable(int v, double scale = 1.0);
  static Polynomial monomial(const Exponents& e, double c = 1.0);
  /// (offset + slope * var_v)
  static Polynomial affine(int v, double slope, double offset);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);
  Polynomial& operator*=(const Polynomial& other);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial operator-() const { return *this * -1.0; }

  Polynomial pow(int n) const;
  Polynomial derivative(int v) const;
  double operator()(const RefPoint& p) const;

  /// Largest sum of exponents over variables [first, first+count).
  int degree(int first = 0, int count = kMaxVars) const;
  /// Highest number of the variable index in use plus one.
  int num_vars_used() const;

  double max_abs_coef() const;

 private:
  void normalize();
  std::vector<Term> terms_;
};

enum class ValueShape { Scalar, Vector2, Vector3, Sym2, Sym3 };

int num_components(ValueShape s);
int spatial_dim(ValueShape s);
bool is_symmetric(ValueShape s);
bool is_vector(ValueShape s);

/// Storage order of symmetric matrices: 2D (11, 22, 12), 3D (11, 22, 33, 12, 13, 23).
int sym_index(int r, int c, int dim);
/// Multiplicity of a stored symmetric component in a Frobenius product.
double frobenius_weight(int comp, int dim);
Eigen::VectorXd sym_to_vec(const Eigen::Matrix3d& m, int dim);
Eigen::Matrix3d vec_to_sym(const Eigen::VectorXd& v, int dim);

class PolyField {
 public:
  PolyField() = default;
  PolyField(ValueShape shape, int num_vars);
  PolyField(ValueShape shape, int num_vars, std::vector<Polynomial> components);

  static PolyField scalar(const Polynomial& p, int num_vars);
  /// p * v, v of length dim.
  static PolyField vector(const Polynomial& p, const Eigen::VectorXd& v, int num_vars);
  /// p * m, m symmetric dim x dim (upper-left block of a 3x3).
  static PolyField sym_matrix(const Polynomial& p, const Eigen::Matrix3d& m, int dim, int num_vars);

  ValueShape shape() const { return shape_; }
  int num_vars() const { return num_vars_; }
  int size() const { return static_cast<int>(comps_.size()); }
  const Polynomial& operator[](int c) const { return comps_[c]; }
  Polynomial& operator[](int c) { return comps_[c]; }
  const std::vector<Polynomial>& components() const { return comps_; }

  Eigen::VectorXd operator()(const RefPoint& p) const;

  PolyField& operator+=(const PolyField& o);
  PolyField& operator-=(const PolyField& o);
  PolyField& operator*=(double s);
  PolyField& operator*=(const Polynomial& p);
  friend PolyField operator+(PolyField a, const PolyField& b) { return a += b; }
  friend PolyField operator-(PolyField a, const PolyField& b) { return a -= b; }
  friend PolyField operator*(PolyField a, double s) { return a *= s; }
  friend PolyField operator*(double s, PolyField a) { return a *= s; }
  friend PolyField operator*(PolyField a, const Polynomial& p) { return a *= p; }
  friend PolyField operator*(const Polynomial& p, PolyField a) { return a *= p; }

  int degree(int first = 0, int count = kMaxVars) const;

 private:
  ValueShape shape_ = ValueShape::Scalar;
  int num_vars_ = 0;
  std::vector<Polynomial> comps_;
};

/// Evaluates f at a reference point of a cell with `cell_vars` variables.
/// Throws when the field was built for a different variable set.
Eigen::VectorXd eval(const PolyField& f, int cell_vars, const RefPoint& p);

/// Physical gradient of a scalar polynomial (vector field of length dim).
PolyField gradient(const Polynomial& p, const VarJacobian& J, int dim, int num_vars);
/// Row-wise divergence of a symmetric matrix field, or the divergence of a vector field.
PolyField divergence(const PolyField& f, const VarJacobian& J);
/// Symmetric gradient of a vector field.
PolyField sym_gradient(const PolyField& v, const VarJacobian& J);
/// 2D curl of a scalar: (d/dy, -d/dx).
PolyField curl2d(const Polynomial& p, const VarJacobian& J, int num_vars);

/// Values of same-shaped fields at points; row q * components + c, one column per field.
Eigen::MatrixXd tabulate(const std::vector<PolyField>& fields, const std::vector<RefPoint>& points);

}  // namespace elastfem
