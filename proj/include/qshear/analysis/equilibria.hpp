#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "qshear/dynamics.hpp"
#include "qshear/errors.hpp"

namespace qshear {

enum class Stability { AttractingNode, RepellingNode, Saddle, NonHyperbolic, FocusIn, FocusOut };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::AttractingNode: return "attracting node";
    case Stability::RepellingNode: return "repelling node";
    case Stability::Saddle: return "saddle";
    case Stability::NonHyperbolic: return "non-hyperbolic";
    case Stability::FocusIn: return "focus-in";
    case Stability::FocusOut: return "focus-out";
  }
  return "?";
}

struct EquilibriumReport {
  StateVec location;
  double rhs_norm = 0.0;
  Eigen::VectorXcd jacobian_eigenvalues;
  Stability classification = Stability::NonHyperbolic;
};

/// Isolated equilibria plus samples of equilibrium continua (points whose
/// linearization has a zero eigenvalue, e.g. the line r of the short-time system).
struct EquilibriumAtlas {
  std::vector<EquilibriumReport> isolated;
  std::vector<EquilibriumReport> continuum;
  int seeds = 0;
  int converged = 0;
  int dropped = 0;
};

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
  double dedup_distance = 1e-6;
  double zero_real_part = 1e-8;
  double fd_step = 1e-6;
  double divergence_bound = 1e6;
};

inline Stability classify_spectrum(const Eigen::VectorXcd& ev, double zero_tol = 1e-8) {
  bool any_zero = false, any_pos = false, any_neg = false, any_complex = false;
  for (const auto& l : ev) {
    if (std::abs(l.real()) <= zero_tol) any_zero = true;
    else if (l.real() > 0.0) any_pos = true;
    else any_neg = true;
    if (std::abs(l.imag()) > zero_tol) any_complex = true;
  }
  if (any_zero) return Stability::NonHyperbolic;
  if (any_pos && any_neg) return Stability::Saddle;
  if (any_neg) return any_complex ? Stability::FocusIn : Stability::AttractingNode;
  return any_complex ? Stability::FocusOut : Stability::RepellingNode;
}

inline EquilibriumReport describe_equilibrium(const SystemKind& kind, const StateVec& x, const MaterialParams& p,
                                              const NewtonOptions& opt = {}) {
  EquilibriumReport r;
  r.location = x;
  r.rhs_norm = vector_field(kind, p)(x).norm();
  const Eigen::MatrixXd j = jacobian(kind, x, p, opt.fd_step);
  r.jacobian_eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(j, false).eigenvalues();
  r.classification = classify_spectrum(r.jacobian_eigenvalues, opt.zero_real_part);
  return r;
}

/// Newton iteration from one seed; least-squares steps keep it well defined
/// on equilibrium continua where the Jacobian is singular.
inline std::optional<StateVec> newton_solve(const SystemKind& kind, const StateVec& seed, const MaterialParams& p,
                                            const NewtonOptions& opt = {}) {
  const VectorField f = vector_field(kind, p);
  StateVec x = seed;
  try {
    for (int it = 0; it <= opt.max_iterations; ++it) {
      const StateVec fx = f(x);
      if (!fx.allFinite()) return std::nullopt;
      if (fx.norm() < opt.tolerance) return x;
      if (it == opt.max_iterations) break;
      const Eigen::MatrixXd j = numeric_jacobian(f, x, opt.fd_step);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(j);
      cod.setThreshold(1e-8);
      const Eigen::VectorXd dx = cod.solve(-Eigen::VectorXd(fx));
      if (!dx.allFinite()) return std::nullopt;
      x += StateVec(dx);
      if (x.norm() > opt.divergence_bound) return std::nullopt;
    }
  } catch (const DomainError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

inline std::vector<StateVec> grid_seeds(int dim, double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid spec requires step > 0 and hi >= lo");
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<StateVec> out;
  std::vector<int> idx(dim, 0);
  while (true) {
    StateVec s(dim);
    for (int d = 0; d < dim; ++d) s(d) = lo + step * idx[d];
    out.push_back(s);
    int d = dim - 1;
    while (d >= 0 && ++idx[d] == n) idx[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

/// Folds representation redundancy: theta in the phys chart is only defined mod pi.
inline StateVec canonical_location(const SystemKind& kind, StateVec x) {
  if (kind.tag == SystemKind::Tag::Phys) x(2) = std::remainder(x(2), std::numbers::pi);
  return x;
}

inline EquilibriumAtlas find_equilibria(const SystemKind& kind, const MaterialParams& p,
                                        const std::vector<StateVec>& seeds, const NewtonOptions& opt = {}) {
  EquilibriumAtlas atlas;
  auto known = [&](const std::vector<EquilibriumReport>& list, const StateVec& x) {
    return std::any_of(list.begin(), list.end(),
                       [&](const EquilibriumReport& r) { return (r.location - x).norm() < opt.dedup_distance; });
  };
  for (const StateVec& seed : seeds) {
    ++atlas.seeds;
    auto root = newton_solve(kind, seed, p, opt);
    if (!root) {
      ++atlas.dropped;
      continue;
    }
    root = canonical_location(kind, *root);
    ++atlas.converged;
    EquilibriumReport rep;
    try {
      rep = describe_equilibrium(kind, *root, p, opt);
    } catch (const DomainError&) {
      ++atlas.dropped;
      continue;
    }
    const bool has_zero_mode = std::any_of(rep.jacobian_eigenvalues.begin(), rep.jacobian_eigenvalues.end(),
                                           [&](const std::complex<double>& l) { return std::abs(l) <= opt.zero_real_part; });
    auto& bucket = has_zero_mode ? atlas.continuum : atlas.isolated;
    if (!known(bucket, *root)) bucket.push_back(std::move(rep));
  }
  auto by_location = [](const EquilibriumReport& a, const EquilibriumReport& b) {
    return std::lexicographical_compare(a.location.begin(), a.location.end(), b.location.begin(), b.location.end());
  };
  std::sort(atlas.isolated.begin(), atlas.isolated.end(), by_location);
  std::sort(atlas.continuum.begin(), atlas.continuum.end(), by_location);
  return atlas;
}

}  // namespace qshear
