#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qshear/coords.hpp"
#include "qshear/dynamics.hpp"
#include "qshear/integrator.hpp"

namespace qshear {

struct FirstIntegrals {
  double first = 0.0;
  double second = 0.0;
};

/// H1 = (1-6y) / (6(1-6x)), H2 = (1+6x+6y-12z^2) / (36(1-6x)^2); conserved by
/// the short-time system away from x = 1/6.
inline FirstIntegrals first_integral_H(const ReducedState& s) {
  const double u = 1.0 - 6.0 * s.x;
  if (u == 0.0) throw DomainError("first_integral_H: undefined on the plane x = 1/6");
  return {(1.0 - 6.0 * s.y) / (6.0 * u), (1.0 + 6.0 * s.x + 6.0 * s.y - 12.0 * s.z * s.z) / (36.0 * u * u)};
}

/// Lie derivatives (grad H1 · f, grad H2 · f) along the short-time field.
inline FirstIntegrals lie_derivative_H(const ReducedState& s) {
  const double u = 1.0 - 6.0 * s.x;
  if (u == 0.0) throw DomainError("lie_derivative_H: undefined on the plane x = 1/6");
  const ReducedState f = rhs_shorttime_coords(s);
  const double n = 1.0 + 6.0 * s.x + 6.0 * s.y - 12.0 * s.z * s.z;
  const double dh1_dx = (1.0 - 6.0 * s.y) / (u * u);
  const double dh1_dy = -1.0 / u;
  const double dh2_dx = (6.0 * u + 12.0 * n) / (36.0 * u * u * u);
  const double dh2_dy = 6.0 / (36.0 * u * u);
  const double dh2_dz = -24.0 * s.z / (36.0 * u * u);
  return {dh1_dx * f.x + dh1_dy * f.y, dh2_dx * f.x + dh2_dy * f.y + dh2_dz * f.z};
}

/// First integrals of the physical-chart system.
///   V1 = A / (3A + 27 (S1 - S2) cos 2θ),  A = -2 + 3 S1 + 9 S2   (= (1 + 6 H1)/6)
///   V2 = [8 - 27 S1^2 + 9(8 - 3 S2) S2 + 6 S1 (4 + 9 S2) + 27 (S1 - S2)^2 cos 4θ]
///        / [288 (1 + 3 S1 - 9 S1 cos^2 θ - 9 S2 sin^2 θ)^2]
inline FirstIntegrals first_integral_V(const PhysState& s) {
  const double a = -2.0 + 3.0 * s.S1 + 9.0 * s.S2;
  const double d1 = 3.0 * a + 27.0 * (s.S1 - s.S2) * std::cos(2.0 * s.theta);
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  const double base = 1.0 + 3.0 * s.S1 - 9.0 * s.S1 * c * c - 9.0 * s.S2 * sn * sn;
  if (d1 == 0.0 || base == 0.0) throw DomainError("first_integral_V: vanishing denominator");
  const double num2 = 8.0 - 27.0 * s.S1 * s.S1 + 9.0 * (8.0 - 3.0 * s.S2) * s.S2 + 6.0 * s.S1 * (4.0 + 9.0 * s.S2) +
                      27.0 * (s.S1 - s.S2) * (s.S1 - s.S2) * std::cos(4.0 * s.theta);
  return {a / d1, num2 / (288.0 * base * base)};
}

struct ConservationReport {
  std::string name;
  double initial = 0.0;
  double max_abs_drift = 0.0;
  double max_rel_drift = 0.0;
};

/// Drift of a scalar observable along the samples of a trajectory.
template <class Observable>
ConservationReport conservation(const std::string& name, const Trajectory& traj, Observable&& g) {
  ConservationReport r;
  r.name = name;
  r.initial = g(traj.states.front());
  for (const auto& s : traj.states) r.max_abs_drift = std::max(r.max_abs_drift, std::abs(g(s) - r.initial));
  r.max_rel_drift = r.max_abs_drift / std::max(std::abs(r.initial), 1e-300);
  return r;
}

enum class Surface { PlusPlane, MinusPlane, XSixth, XYDiag, Pi1, Pi2, ThetaPlus, ThetaMinus };

inline const char* to_string(Surface s) {
  switch (s) {
    case Surface::PlusPlane: return "x+y-2z=-2/3";
    case Surface::MinusPlane: return "x+y+2z=-2/3";
    case Surface::XSixth: return "x=1/6";
    case Surface::XYDiag: return "x=y";
    case Surface::Pi1: return "Pi1";
    case Surface::Pi2: return "Pi2";
    case Surface::ThetaPlus: return "theta=pi/4";
    case Surface::ThetaMinus: return "theta=-pi/4";
  }
  return "?";
}

inline bool is_phys_surface(Surface s) {
  return s == Surface::Pi1 || s == Surface::Pi2 || s == Surface::ThetaPlus || s == Surface::ThetaMinus;
}

/// Defining function of an invariant surface; (x,y,z) for the short-time
/// surfaces and (S1,S2,theta) for the physical-chart ones.
inline double surface_function(Surface surface, const StateVec& s) {
  constexpr double quarter = std::numbers::pi / 4.0;
  switch (surface) {
    case Surface::PlusPlane: return s(0) + s(1) - 2.0 * s(2) + 2.0 / 3.0;
    case Surface::MinusPlane: return s(0) + s(1) + 2.0 * s(2) + 2.0 / 3.0;
    case Surface::XSixth: return s(0) - 1.0 / 6.0;
    case Surface::XYDiag: return s(0) - s(1);
    case Surface::Pi1: return s(0) + 3.0 * s(1) + 3.0 * (s(0) - s(1)) * std::sin(2.0 * s(2)) + 4.0 / 3.0;
    case Surface::Pi2: return s(0) + 3.0 * s(1) - 3.0 * (s(0) - s(1)) * std::sin(2.0 * s(2)) + 4.0 / 3.0;
    case Surface::ThetaPlus: return s(2) - quarter;
    case Surface::ThetaMinus: return s(2) + quarter;
  }
  return 0.0;
}

/// Max |defining function| over the samples; the start must lie on the surface.
inline double invariant_surface_residual(const Trajectory& traj, Surface surface, double start_tol = 1e-10) {
  if (std::abs(surface_function(surface, traj.states.front())) > start_tol) {
    throw std::invalid_argument(std::string("trajectory does not start on surface ") + to_string(surface));
  }
  double worst = 0.0;
  for (const auto& s : traj.states) worst = std::max(worst, std::abs(surface_function(surface, s)));
  return worst;
}

}  // namespace qshear
