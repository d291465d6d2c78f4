#pragma once

// Seeded random draws used by the invariant suites and property tests.

#include <random>

#include "qshear/tensor.hpp"

namespace qshear {

/// Isotropic direction in the 5D tensor space, scaled to Frobenius norm
/// uniform in (0, max_norm].
template <class Rng>
QTensor random_tensor(Rng& rng, double max_norm = 1.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QTensor q{g(rng), g(rng), g(rng), g(rng), g(rng)};
  while (frobenius(q) == 0.0) q = {g(rng), g(rng), g(rng), g(rng), g(rng)};
  const double r = max_norm * (1.0 - u(rng));
  return (r / frobenius(q)) * q;
}

template <class Rng>
Vec3 random_unit_vector(Rng& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-12) v = Vec3(g(rng), g(rng), g(rng));
  return v.normalized();
}

}  // namespace qshear
