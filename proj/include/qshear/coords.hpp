#pragma once

// The physical chart (S1, S2, theta) of the v = w = 0 slice:
//   Q = 3/2 S1 (n⊗n - Id/3) + 3/2 S2 (m⊗m - e3⊗e3),
//   n = (cos θ, sin θ, 0), m = (-sin θ, cos θ, 0).

#include <cmath>
#include <numbers>

#include "qshear/errors.hpp"
#include "qshear/states.hpp"

namespace qshear {

enum class ChartDomain { VPlus, VMinus, Boundary };

inline const char* to_string(ChartDomain d) {
  switch (d) {
    case ChartDomain::VPlus: return "VPlus";
    case ChartDomain::VMinus: return "VMinus";
    case ChartDomain::Boundary: return "Boundary";
  }
  return "?";
}

inline ChartDomain chart_domain(const ReducedState& s, double tol = 1e-12) {
  const double d = s.x - s.y;
  if (std::abs(d) <= tol) return ChartDomain::Boundary;
  return d > 0.0 ? ChartDomain::VPlus : ChartDomain::VMinus;
}

inline ReducedState phys_to_xyz(const PhysState& s) {
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  return {1.5 * s.S1 * (c * c - 1.0 / 3.0) + 1.5 * s.S2 * sn * sn,
          1.5 * s.S1 * (sn * sn - 1.0 / 3.0) + 1.5 * s.S2 * c * c,
          0.75 * (s.S1 - s.S2) * std::sin(2.0 * s.theta)};
}

/// Inverse chart on {x != y}. theta lands in (-pi/4, pi/4).
inline PhysState xyz_to_phys(const ReducedState& s) {
  const double d = s.x - s.y;
  if (d == 0.0) throw DomainError("xyz_to_phys: x = y, director angle is not determined");
  const double sgn = d > 0.0 ? 1.0 : -1.0;
  const double radius = std::sqrt(d * d + 4.0 * s.z * s.z);
  const double mean = 0.5 * (s.x + s.y);
  return {mean + sgn * radius / 2.0, mean - sgn * radius / 6.0, 0.5 * std::atan(2.0 * s.z / d)};
}

/// Representative of the same tensor with theta in [-pi/4, pi/4).
///
/// Shifting theta by pi leaves n⊗n and m⊗m unchanged. Shifting by ±pi/2 swaps
/// n⊗n and m⊗m, which the order parameters absorb via the involution
/// (S1, S2) -> ((3 S2 - S1)/2, (S1 + S2)/2).
inline PhysState normalized(PhysState s) {
  constexpr double pi = std::numbers::pi;
  constexpr double quarter = pi / 4.0;
  auto swap_roles = [](const PhysState& p, double shift) {
    return PhysState{(3.0 * p.S2 - p.S1) / 2.0, (p.S1 + p.S2) / 2.0, p.theta + shift};
  };
  s.theta = std::remainder(s.theta, pi);  // [-pi/2, pi/2]
  if (s.theta >= quarter) {
    s = swap_roles(s, -pi / 2.0);
  } else if (s.theta < -quarter) {
    s = swap_roles(s, pi / 2.0);
  }
  return s;
}

}  // namespace qshear
