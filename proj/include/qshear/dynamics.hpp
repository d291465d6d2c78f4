#pragma once

// Vector fields of the homogeneous shear-flow Q-tensor model and its
// reductions: full dynamics, co-rotational and gradient flows, eigenvalue
// dynamics, the v=w=0 slice, the rescaled flow Q(t/xi), the short-time
// (flow-only) limit in matrix and coordinate form, its restriction to the
// level planes of H1, the physical-variable chart, and the legacy comparison
// model.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "qshear/errors.hpp"
#include "qshear/states.hpp"
#include "qshear/tensor.hpp"

namespace qshear {

struct SystemKind {
  enum class Tag {
    Full,
    Corotational,
    GradientFlow,
    EigenPair,
    Reduced3D,
    Rescaled,
    ShortTimeMatrix,
    ShortTime3D,
    PlaneH,
    Phys,
    Legacy,
  };

  Tag tag = Tag::Full;
  double h = 0.0;      // PlaneH: level of H1
  double delta = 0.0;  // Legacy
  double gamma = 0.0;  // Legacy

  static SystemKind full() { return {Tag::Full}; }
  static SystemKind corotational() { return {Tag::Corotational}; }
  static SystemKind gradient_flow() { return {Tag::GradientFlow}; }
  static SystemKind eigen_pair() { return {Tag::EigenPair}; }
  static SystemKind reduced3d() { return {Tag::Reduced3D}; }
  static SystemKind rescaled() { return {Tag::Rescaled}; }
  static SystemKind shorttime_matrix() { return {Tag::ShortTimeMatrix}; }
  static SystemKind shorttime3d() { return {Tag::ShortTime3D}; }
  static SystemKind plane_h(double h) { return {Tag::PlaneH, h}; }
  static SystemKind phys() { return {Tag::Phys}; }
  static SystemKind legacy(double delta, double gamma) { return {Tag::Legacy, 0.0, delta, gamma}; }

  int dimension() const {
    switch (tag) {
      case Tag::EigenPair:
      case Tag::PlaneH:
        return 2;
      case Tag::Reduced3D:
      case Tag::ShortTime3D:
      case Tag::Phys:
        return 3;
      default:
        return 5;
    }
  }

  bool is_matrix_system() const { return dimension() == 5; }
};

inline std::string_view system_name(SystemKind::Tag tag) {
  using T = SystemKind::Tag;
  switch (tag) {
    case T::Full: return "full";
    case T::Corotational: return "corotational";
    case T::GradientFlow: return "gradient";
    case T::EigenPair: return "eigen";
    case T::Reduced3D: return "reduced";
    case T::Rescaled: return "rescaled";
    case T::ShortTimeMatrix: return "shorttime-matrix";
    case T::ShortTime3D: return "shorttime";
    case T::PlaneH: return "plane-h";
    case T::Phys: return "phys";
    case T::Legacy: return "legacy";
  }
  return "unknown";
}

inline SystemKind::Tag parse_system_name(std::string_view name) {
  using T = SystemKind::Tag;
  for (T t : {T::Full, T::Corotational, T::GradientFlow, T::EigenPair, T::Reduced3D, T::Rescaled,
              T::ShortTimeMatrix, T::ShortTime3D, T::PlaneH, T::Phys, T::Legacy}) {
    if (system_name(t) == name) return t;
  }
  throw ConfigError("unknown system kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Matrix-valued right-hand sides

/// (xi D + W)(Q + Id/3) + (Q + Id/3)(xi D - W) - 2 xi (Q + Id/3) tr(QD) - dF/dQ.
inline QTensor rhs_full(const QTensor& q, const MaterialParams& p) {
  const auto& [W, D] = shear_matrices();
  const Mat3 m = q.matrix();
  const double xi = p.xi();
  const double trQD = inner(m, D);
  const Mat3 flow = W * m - m * W + xi * (D * m + m * D) + (2.0 * xi / 3.0) * D -
                    2.0 * xi * (m + Mat3::Identity() / 3.0) * trQD;
  return QTensor::from_matrix(flow) - bulk_gradient(q, p);
}

inline QTensor rhs_corotational(const QTensor& q, const MaterialParams& p) {
  return commutator(shear_matrices().W, q) - bulk_gradient(q, p);
}

inline QTensor rhs_gradient(const QTensor& u, const MaterialParams& p) { return -bulk_gradient(u, p); }

/// Residual of the long-time limit equation [W,Q] = dF/dQ.
inline QTensor stationary_residual(const QTensor& q, const MaterialParams& p) {
  return rhs_corotational(q, p);
}

/// Flow-only short-time system: DR + RD + (2/3)D - 2(R + Id/3) tr(RD).
inline QTensor rhs_shorttime_matrix(const QTensor& r) {
  const Mat3& D = shear_matrices().D;
  const Mat3 m = r.matrix();
  const Mat3 out = D * m + m * D + (2.0 / 3.0) * D - 2.0 * (m + Mat3::Identity() / 3.0) * inner(m, D);
  return QTensor::from_matrix(out);
}

/// Right-hand side for Q_xi(t) = Q(t/xi). Equals rhs_full / xi.
inline QTensor rhs_rescaled(const QTensor& q, const MaterialParams& p) {
  if (p.xi() == 0.0) throw ConfigError("rescaled system requires xi != 0");
  return rhs_shorttime_matrix(q) + (1.0 / p.xi()) * rhs_corotational(q, p);
}

/// delta([W,Q] + gamma D) - dF/dQ.
inline QTensor rhs_legacy(const QTensor& q, double delta, double gamma, const MaterialParams& p) {
  const auto& [W, D] = shear_matrices();
  const Mat3 m = q.matrix();
  const Mat3 flow = delta * (W * m - m * W + gamma * D);
  return QTensor::from_matrix(flow) - bulk_gradient(q, p);
}

// ---------------------------------------------------------------------------
// Coordinate systems

/// Eigenvalue dynamics of the gradient flow for U = diag(lambda, mu, -lambda-mu).
inline EigenState rhs_eigen(const EigenState& s, const MaterialParams& p) {
  const double l = s.lambda, m = s.mu;
  const double common = 2.0 * p.c() * (l * l + m * m + l * m) + p.a();
  return {-l * common + p.b() * (l * l / 3.0 - 2.0 / 3.0 * m * m - 2.0 / 3.0 * l * m),
          -m * common + p.b() * (m * m / 3.0 - 2.0 / 3.0 * l * l - 2.0 / 3.0 * l * m)};
}

/// Full dynamics on the invariant slice v = w = 0.
inline ReducedState rhs_reduced(const ReducedState& s, const MaterialParams& p) {
  const double x = s.x, y = s.y, z = s.z;
  const double a = p.a(), b = p.b(), c = p.c(), xi = p.xi();
  const double n = x * x + y * y + z * z + x * y;
  return {2.0 / 3.0 * (1.0 - 6.0 * x) * z * xi + 2.0 * z - a * x +
              b / 3.0 * (x * x - 2.0 * x * y - 2.0 * y * y + z * z) - 2.0 * c * x * n,
          2.0 / 3.0 * (1.0 - 6.0 * y) * z * xi - 2.0 * z - a * y +
              b / 3.0 * (-2.0 * x * x - 2.0 * x * y + y * y + z * z) - 2.0 * c * y * n,
          (2.0 / 3.0 + x + y - 4.0 * z * z) * xi - x + y - a * z + b * (x * z + y * z) - 2.0 * c * z * n};
}

inline ReducedState rhs_shorttime_coords(const ReducedState& s) {
  return {2.0 / 3.0 * (1.0 - 6.0 * s.x) * s.z, 2.0 / 3.0 * (1.0 - 6.0 * s.y) * s.z,
          2.0 / 3.0 + s.x + s.y - 4.0 * s.z * s.z};
}

/// Short-time system restricted to the H1 level plane y = 1/6 - h(1 - 6x).
inline Eigen::Vector2d rhs_plane_h(double x, double z, double h) {
  return {2.0 / 3.0 * (1.0 - 6.0 * x) * z, 5.0 / 6.0 + x - 4.0 * z * z - h * (1.0 - 6.0 * x)};
}

/// Short-time system in (S1, S2, theta). Undefined on S1 = S2.
inline PhysState rhs_phys(const PhysState& s) {
  const double d = s.S1 - s.S2;
  if (d == 0.0 || !std::isfinite(d)) throw DomainError("phys chart is singular at S1 = S2");
  const double s2t = std::sin(2.0 * s.theta), c2t = std::cos(2.0 * s.theta);
  return {(1.0 + 3.0 * s.S1) * (3.0 * s.S2 - 3.0 * s.S1 + 2.0) * s2t / 3.0,
          (27.0 * s.S2 * s.S2 - 27.0 * s.S1 * s.S2 - 9.0 * s.S2 + 3.0 * s.S1 - 2.0) * s2t / 9.0,
          (4.0 + 3.0 * s.S1 + 9.0 * s.S2) * c2t / (9.0 * d)};
}

// ---------------------------------------------------------------------------
// Generic dispatch

using VectorField = std::function<StateVec(const StateVec&)>;

/// Autonomous vector field of `kind` acting on StateVec of kind.dimension().
inline VectorField vector_field(const SystemKind& kind, const MaterialParams& p) {
  using T = SystemKind::Tag;
  switch (kind.tag) {
    case T::Full:
      return [p](const StateVec& s) { return to_vec(rhs_full(tensor_from(s), p)); };
    case T::Corotational:
      return [p](const StateVec& s) { return to_vec(rhs_corotational(tensor_from(s), p)); };
    case T::GradientFlow:
      return [p](const StateVec& s) { return to_vec(rhs_gradient(tensor_from(s), p)); };
    case T::EigenPair:
      return [p](const StateVec& s) { return to_vec(rhs_eigen(eigen_from(s), p)); };
    case T::Reduced3D:
      return [p](const StateVec& s) { return to_vec(rhs_reduced(reduced_from(s), p)); };
    case T::Rescaled:
      if (p.xi() == 0.0) throw ConfigError("rescaled system requires xi != 0");
      return [p](const StateVec& s) { return to_vec(rhs_rescaled(tensor_from(s), p)); };
    case T::ShortTimeMatrix:
      return [](const StateVec& s) { return to_vec(rhs_shorttime_matrix(tensor_from(s))); };
    case T::ShortTime3D:
      return [](const StateVec& s) { return to_vec(rhs_shorttime_coords(reduced_from(s))); };
    case T::PlaneH: {
      const double h = kind.h;
      return [h](const StateVec& s) {
        const Eigen::Vector2d r = rhs_plane_h(s(0), s(1), h);
        StateVec out(2);
        out << r(0), r(1);
        return out;
      };
    }
    case T::Phys:
      return [](const StateVec& s) { return to_vec(rhs_phys(phys_from(s))); };
    case T::Legacy: {
      const double delta = kind.delta, gamma = kind.gamma;
      return [p, delta, gamma](const StateVec& s) { return to_vec(rhs_legacy(tensor_from(s), delta, gamma, p)); };
    }
  }
  throw ConfigError("unhandled system kind");
}

/// Central-difference Jacobian with per-coordinate step `rel_step * max(1, |state|)`.
inline Eigen::MatrixXd numeric_jacobian(const VectorField& f, const StateVec& s, double rel_step = 1e-6) {
  const int n = static_cast<int>(s.size());
  const double step = rel_step * std::max(1.0, s.norm());
  Eigen::MatrixXd jac(n, n);
  for (int j = 0; j < n; ++j) {
    StateVec plus = s, minus = s;
    plus(j) += step;
    minus(j) -= step;
    jac.col(j) = (f(plus) - f(minus)) / (2.0 * step);
  }
  return jac;
}

/// Jacobian of the short-time coordinate system.
inline Eigen::Matrix3d jacobian_shorttime(const ReducedState& s) {
  Eigen::Matrix3d j;
  j << -4.0 * s.z, 0.0, 2.0 / 3.0 * (1.0 - 6.0 * s.x),  //
      0.0, -4.0 * s.z, 2.0 / 3.0 * (1.0 - 6.0 * s.y),  //
      1.0, 1.0, -8.0 * s.z;
  return j;
}

inline Eigen::Matrix2d jacobian_plane_h(double x, double z, double h) {
  Eigen::Matrix2d j;
  j << -4.0 * z, 2.0 / 3.0 * (1.0 - 6.0 * x),  //
      1.0 + 6.0 * h, -8.0 * z;
  return j;
}

/// Linearization of `kind` at `state`: analytic for ShortTime3D and PlaneH,
/// central differences otherwise.
inline Eigen::MatrixXd jacobian(const SystemKind& kind, const StateVec& state, const MaterialParams& p,
                                double rel_step = 1e-6) {
  using T = SystemKind::Tag;
  if (state.size() != kind.dimension()) throw ConfigError("jacobian: state dimension does not match system");
  if (kind.tag == T::ShortTime3D) return jacobian_shorttime(reduced_from(state));
  if (kind.tag == T::PlaneH) return jacobian_plane_h(state(0), state(1), kind.h);
  if (kind.tag == T::Phys) {
    const double gap = std::abs(state(0) - state(1));
    if (gap <= 2.0 * rel_step * std::max(1.0, state.norm())) {
      throw DomainError("jacobian: phys state too close to the singular plane S1 = S2");
    }
  }
  return numeric_jacobian(vector_field(kind, p), state, rel_step);
}

}  // namespace qshear
