#pragma once

#include <Eigen/Dense>

#include "qshear/tensor.hpp"

namespace qshear {

/// Generic ODE state. Dynamic size with a fixed upper bound keeps it on the stack.
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

/// The v = w = 0 slice of a QTensor.
struct ReducedState {
  double x = 0.0, y = 0.0, z = 0.0;

  QTensor tensor() const { return {x, y, z, 0.0, 0.0}; }
  friend bool operator==(const ReducedState&, const ReducedState&) = default;
};

/// Two eigenvalues of a diagonal tensor diag(lambda, mu, -lambda-mu).
struct EigenState {
  double lambda = 0.0, mu = 0.0;

  QTensor tensor() const { return {lambda, mu, 0.0, 0.0, 0.0}; }
  friend bool operator==(const EigenState&, const EigenState&) = default;
};

/// Physical chart: scalar order parameters S1 (along the director), S2
/// (transverse) and the in-plane director angle theta.
///
/// The value is stored as given. The Phys vector field lives on the closed
/// slab |theta| <= pi/4, so normalization into [-pi/4, pi/4) is an explicit
/// operation (see coords.hpp) rather than a construction-time side effect.
struct PhysState {
  double S1 = 0.0, S2 = 0.0, theta = 0.0;

  friend bool operator==(const PhysState&, const PhysState&) = default;
};

inline StateVec to_vec(const QTensor& q) {
  StateVec s(5);
  s << q.x, q.y, q.z, q.v, q.w;
  return s;
}
inline StateVec to_vec(const ReducedState& r) {
  StateVec s(3);
  s << r.x, r.y, r.z;
  return s;
}
inline StateVec to_vec(const EigenState& e) {
  StateVec s(2);
  s << e.lambda, e.mu;
  return s;
}
inline StateVec to_vec(const PhysState& p) {
  StateVec s(3);
  s << p.S1, p.S2, p.theta;
  return s;
}

inline QTensor tensor_from(const StateVec& s) { return {s(0), s(1), s(2), s(3), s(4)}; }
inline ReducedState reduced_from(const StateVec& s) { return {s(0), s(1), s(2)}; }
inline EigenState eigen_from(const StateVec& s) { return {s(0), s(1)}; }
inline PhysState phys_from(const StateVec& s) { return {s(0), s(1), s(2)}; }

}  // namespace qshear
