#pragma once

// Q-tensor algebra for the homogeneous shear problem: the tensor type, the
// Landau-de Gennes bulk potential and its gradient on the traceless symmetric
// space, the fixed shear matrices, and a Jacobi eigensolver for 3x3 symmetric
// input.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qshear/errors.hpp"

namespace qshear {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Landau-de Gennes coefficients and the tumbling parameter xi.
/// Requires b > 0, c > 0 and b^2 - 24ac > 0; xi is unrestricted.
class MaterialParams {
 public:
  MaterialParams(double a, double b, double c, double xi = 0.0) : a_(a), b_(b), c_(c), xi_(xi) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(xi)) {
      throw ConfigError("material parameters must be finite");
    }
    if (!(b > 0.0)) throw ConfigError("material parameter b must be positive");
    if (!(c > 0.0)) throw ConfigError("material parameter c must be positive");
    if (!(b * b - 24.0 * a * c > 0.0)) {
      std::ostringstream os;
      os << "material parameters violate b^2 - 24ac > 0 (a=" << a << ", b=" << b << ", c=" << c << ")";
      throw ConfigError(os.str());
    }
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double xi() const { return xi_; }
  double discriminant() const { return b_ * b_ - 24.0 * a_ * c_; }

  MaterialParams with_xi(double xi) const { return {a_, b_, c_, xi}; }

  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;

 private:
  double a_, b_, c_, xi_;
};

/// Symmetric traceless 3x3 tensor stored as its five free entries
///   [[x, z, v], [z, y, w], [v, w, -x-y]].
/// Tracelessness is structural: the (3,3) entry is always -x-y.
struct QTensor {
  double x = 0.0, y = 0.0, z = 0.0, v = 0.0, w = 0.0;

  static constexpr int kDim = 5;

  static QTensor zero() { return {}; }

  /// Reads the upper triangle of a (presumed) symmetric traceless matrix.
  static QTensor from_matrix(const Mat3& m) { return {m(0, 0), m(1, 1), m(0, 1), m(0, 2), m(1, 2)}; }

  static QTensor from_array(const std::array<double, 5>& c) { return {c[0], c[1], c[2], c[3], c[4]}; }

  Mat3 matrix() const {
    Mat3 m;
    m << x, z, v, z, y, w, v, w, -x - y;
    return m;
  }

  std::array<double, 5> components() const { return {x, y, z, v, w}; }

  QTensor& operator+=(const QTensor& o) {
    x += o.x, y += o.y, z += o.z, v += o.v, w += o.w;
    return *this;
  }
  QTensor& operator-=(const QTensor& o) {
    x -= o.x, y -= o.y, z -= o.z, v -= o.v, w -= o.w;
    return *this;
  }
  QTensor& operator*=(double s) {
    x *= s, y *= s, z *= s, v *= s, w *= s;
    return *this;
  }
  friend QTensor operator+(QTensor a, const QTensor& b) { return a += b; }
  friend QTensor operator-(QTensor a, const QTensor& b) { return a -= b; }
  friend QTensor operator-(QTensor a) { return a *= -1.0; }
  friend QTensor operator*(double s, QTensor a) { return a *= s; }
  friend QTensor operator*(QTensor a, double s) { return a *= s; }
  friend QTensor operator/(QTensor a, double s) { return a *= 1.0 / s; }
  friend bool operator==(const QTensor&, const QTensor&) = default;
};

struct ShearMatrices {
  Mat3 W;  // vorticity (antisymmetric part of grad u)
  Mat3 D;  // strain rate (symmetric part)
};

/// Velocity gradient split for u = (2y, 0, 0).
inline const ShearMatrices& shear_matrices() {
  static const ShearMatrices m = [] {
    ShearMatrices s;
    s.W << 0, 1, 0, -1, 0, 0, 0, 0, 0;
    s.D << 0, 1, 0, 1, 0, 0, 0, 0, 0;
    return s;
  }();
  return m;
}

/// A : B = tr(B^T A).
inline double inner(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

inline double inner(const QTensor& a, const QTensor& b) {
  return a.x * b.x + a.y * b.y + (a.x + a.y) * (b.x + b.y) + 2.0 * (a.z * b.z + a.v * b.v + a.w * b.w);
}

inline double frobenius(const Mat3& m) { return std::sqrt(inner(m, m)); }
inline double frobenius(const QTensor& q) { return std::sqrt(inner(q, q)); }

/// [A, Q] = AQ - QA. For antisymmetric A the result is symmetric traceless.
inline QTensor commutator(const Mat3& a, const QTensor& q) {
  const Mat3 m = q.matrix();
  return QTensor::from_matrix(a * m - m * a);
}

/// F(Q) = a/2 tr(Q^2) - b/3 tr(Q^3) + c/4 tr^2(Q^2).
inline double bulk_energy(const QTensor& q, const MaterialParams& p) {
  const Mat3 m = q.matrix();
  const Mat3 m2 = m * m;
  const double tr2 = m2.trace();
  const double tr3 = (m2 * m).trace();
  return 0.5 * p.a() * tr2 - p.b() / 3.0 * tr3 + 0.25 * p.c() * tr2 * tr2;
}

/// dF/dQ = aQ - b(Q^2 - |Q|^2 Id/3) + c|Q|^2 Q, the gradient of F restricted to
/// traceless symmetric tensors.
inline QTensor bulk_gradient(const QTensor& q, const MaterialParams& p) {
  const Mat3 m = q.matrix();
  const double n2 = inner(q, q);
  const Mat3 g = p.a() * m - p.b() * (m * m - n2 / 3.0 * Mat3::Identity()) + p.c() * n2 * m;
  return QTensor::from_matrix(g);
}

/// s (n⊗n - Id/3) for a unit director n.
inline QTensor uniaxial(double s, const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10) throw std::invalid_argument("uniaxial: director must be a unit vector");
  return QTensor::from_matrix(s * (n * n.transpose() - Mat3::Identity() / 3.0));
}

/// Scalar order parameters of the uniaxial critical points of F:
/// {0, s+, s-} with s± = (b ± sqrt(b^2 - 24ac)) / (4c).
struct CriticalValues {
  double zero = 0.0;
  double s_plus;
  double s_minus;

  std::array<double, 3> all() const { return {zero, s_plus, s_minus}; }
};

inline CriticalValues critical_s(const MaterialParams& p) {
  const double root = std::sqrt(p.discriminant());
  return {0.0, (p.b() + root) / (4.0 * p.c()), (p.b() - root) / (4.0 * p.c())};
}

/// Eigenvalues in descending order with a right-handed orthonormal frame;
/// frame.col(i) belongs to eigenvalues[i].
struct EigenFrame {
  Vec3 eigenvalues;
  Mat3 frame;

  Mat3 reconstruct() const { return frame * eigenvalues.asDiagonal() * frame.transpose(); }
};

namespace detail {

// Flip so the first component that is not negligible is positive.
inline void canonical_sign(Vec3& u) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(u(i)) > 1e-12) {
      if (u(i) < 0.0) u = -u;
      return;
    }
  }
}

// Orthonormal basis of the complement of the unit columns already in `basis`
// (first `have` columns), taken from e1, e2, e3 in that order.
inline void complete_from_standard_basis(Mat3& basis, int have) {
  for (int k = 0; k < 3 && have < 3; ++k) {
    Vec3 u = Vec3::Unit(k);
    for (int j = 0; j < have; ++j) u -= basis.col(j).dot(u) * basis.col(j);
    for (int j = 0; j < have; ++j) u -= basis.col(j).dot(u) * basis.col(j);
    const double norm = u.norm();
    if (norm < 1e-6) continue;
    basis.col(have++) = u / norm;
  }
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix. Repeated
/// eigenvalues (relative gap below `degeneracy_tol`) get a frame built by
/// orthogonalizing e1, e2, e3 in order against the non-degenerate vectors.
inline EigenFrame eigen_decomposition(const Mat3& input, double degeneracy_tol = 1e-10) {
  Mat3 a = 0.5 * (input + input.transpose());
  Mat3 v = Mat3::Identity();
  const double scale = std::max(1.0, frobenius(a));

  auto off_norm = [&] {
    return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
  };

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-14 * scale; ++sweep) {
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d rot = Mat3::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        a(p, q) = a(q, p) = 0.0;
        v = v * rot;
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  EigenFrame out;
  for (int k = 0; k < 3; ++k) out.eigenvalues(k) = a(order[k], order[k]);

  const double tol = degeneracy_tol * scale;
  const bool same01 = std::abs(out.eigenvalues(0) - out.eigenvalues(1)) <= tol;
  const bool same12 = std::abs(out.eigenvalues(1) - out.eigenvalues(2)) <= tol;

  Mat3 frame = Mat3::Zero();
  if (same01 && same12) {
    frame = Mat3::Identity();
  } else if (same01 || same12) {
    const int lone = same01 ? 2 : 0;
    Vec3 u = v.col(order[lone]);
    detail::canonical_sign(u);
    Mat3 basis = Mat3::Zero();
    basis.col(0) = u;
    detail::complete_from_standard_basis(basis, 1);
    if (lone == 0) {
      frame = basis;
    } else {
      frame.col(0) = basis.col(1);
      frame.col(1) = basis.col(2);
      frame.col(2) = basis.col(0);
    }
  } else {
    for (int k = 0; k < 3; ++k) {
      Vec3 u = v.col(order[k]);
      detail::canonical_sign(u);
      frame.col(k) = u;
    }
  }
  if (frame.determinant() < 0.0) frame.col(2) = -frame.col(2);
  out.frame = frame;
  return out;
}

inline EigenFrame eigen_decomposition(const QTensor& q, double degeneracy_tol = 1e-10) {
  return eigen_decomposition(q.matrix(), degeneracy_tol);
}

}  // namespace qshear
