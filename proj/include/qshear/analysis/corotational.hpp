#pragma once

// Checks tied to the co-rotational case xi = 0: rotating-frame conjugacy with
// the gradient flow, eigenframe transport, the |U|^2 evolution identity,
// energy monotonicity, periodic-orbit detection and omega-limit classification.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "qshear/dynamics.hpp"
#include "qshear/integrator.hpp"
#include "qshear/tensor.hpp"

namespace qshear {

/// B(t) = exp(W t), the solution of B' = W B, B(0) = Id.
inline Mat3 rotation_frame(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Mat3 b;
  b << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
  return b;
}

/// B(t)^T Q B(t).
inline QTensor corotate(const QTensor& q, double t) {
  const Mat3 b = rotation_frame(t);
  return QTensor::from_matrix(b.transpose() * q.matrix() * b);
}

/// Sup over the sampling grid of |corotate(Q(t), t) - U(t)| where Q follows
/// the co-rotational flow and U the gradient flow, both from q0.
inline double conjugacy_check(const QTensor& q0, const MaterialParams& p, double t_end,
                              const IntegratorConfig& cfg = {}) {
  const MaterialParams p0 = p.with_xi(0.0);
  const Trajectory q = integrate(SystemKind::corotational(), to_vec(q0), p0, 0.0, t_end, cfg);
  const Trajectory u = integrate(SystemKind::gradient_flow(), to_vec(q0), p0, 0.0, t_end, cfg);
  if (!q.ok() || !u.ok()) throw std::runtime_error("conjugacy_check: integration failed: " + q.message + u.message);
  double worst = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const QTensor rotated = corotate(tensor_from(q.states[k]), q.times[k]);
    worst = std::max(worst, frobenius(rotated - tensor_from(u.states[k])));
  }
  return worst;
}

struct EigenframeTransportReport {
  /// sup over samples and frame vectors of |Q(t) B(t) n_i - lambda_i(t) B(t) n_i|
  double max_deviation = 0.0;
  /// sup over samples of the off-diagonal size of B^T Q B expressed in the initial eigenframe
  double max_off_diagonal = 0.0;
  /// |sorted eigenvalues of Q(T) - eigenvalue-pair flow at T|
  double final_eigenvalue_mismatch = 0.0;
  /// initial spectrum has a repeated eigenvalue, so the frame is not unique
  bool degenerate = false;
};

/// Verifies that B(t) maps eigenvectors of Q0 to eigenvectors of Q(t) under the
/// co-rotational flow, with eigenvalues following the eigenvalue-pair system.
inline EigenframeTransportReport eigenframe_transport_check(const QTensor& q0, const MaterialParams& p,
                                                            double t_end, const IntegratorConfig& cfg = {}) {
  const MaterialParams p0 = p.with_xi(0.0);
  const EigenFrame frame0 = eigen_decomposition(q0);
  EigenframeTransportReport report;
  const double gap = std::min(frame0.eigenvalues(0) - frame0.eigenvalues(1),
                              frame0.eigenvalues(1) - frame0.eigenvalues(2));
  report.degenerate = gap < 1e-8 * std::max(1.0, frobenius(q0));

  const Trajectory q = integrate(SystemKind::corotational(), to_vec(q0), p0, 0.0, t_end, cfg);
  const EigenState e0{frame0.eigenvalues(0), frame0.eigenvalues(1)};
  const Trajectory e = integrate(SystemKind::eigen_pair(), to_vec(e0), p0, 0.0, t_end, cfg);
  if (!q.ok() || !e.ok()) throw std::runtime_error("eigenframe_transport_check: integration failed");

  for (std::size_t k = 0; k < q.size(); ++k) {
    const Mat3 b = rotation_frame(q.times[k]);
    const Mat3 m = tensor_from(q.states[k]).matrix();
    const double l = e.states[k](0), mu = e.states[k](1);
    const std::array<double, 3> lambdas{l, mu, -l - mu};
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = b * frame0.frame.col(i);
      report.max_deviation = std::max(report.max_deviation, (m * v - lambdas[i] * v).norm());
    }
    const Mat3 in_frame = frame0.frame.transpose() * b.transpose() * m * b * frame0.frame;
    const Mat3 off = in_frame - Mat3(in_frame.diagonal().asDiagonal());
    report.max_off_diagonal = std::max(report.max_off_diagonal, frobenius(off));
  }

  const EigenFrame final_frame = eigen_decomposition(tensor_from(q.final_state()));
  const double l = e.final_state()(0), mu = e.final_state()(1);
  std::array<double, 3> expected{l, mu, -l - mu};
  std::sort(expected.begin(), expected.end(), std::greater<>());
  for (int i = 0; i < 3; ++i) {
    report.final_eigenvalue_mismatch =
        std::max(report.final_eigenvalue_mismatch, std::abs(final_frame.eigenvalues(i) - expected[i]));
  }
  return report;
}

/// Along the gradient flow, compares a central difference of alpha = |U|^2 on
/// the dense output with -2a alpha + 2b tr(U^3) - 2c alpha^2. Returns the sup
/// deviation over interior sample times. (Tracing 2U against
/// U' = -aU + b(U^2 - |U|^2 Id/3) - c|U|^2 U gives +2b tr(U^3); the
/// commonly printed -2b is a sign slip, harmless in the |tr U^3| estimate.)
inline double norm_ode_check(const QTensor& u0, const MaterialParams& p, double t_end,
                             const IntegratorConfig& cfg = {}, double fd_step = 1e-4) {
  const Trajectory u = integrate(SystemKind::gradient_flow(), to_vec(u0), p, 0.0, t_end, cfg);
  if (!u.ok()) throw std::runtime_error("norm_ode_check: integration failed: " + u.message);
  auto alpha = [&](double t) {
    const QTensor q = tensor_from(u.at(t));
    return inner(q, q);
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double t = u.times[k];
    if (t - fd_step < u.t_begin() || t + fd_step > u.t_end()) continue;
    const double numeric = (alpha(t + fd_step) - alpha(t - fd_step)) / (2.0 * fd_step);
    const Mat3 m = tensor_from(u.states[k]).matrix();
    const double a2 = (m * m).trace();
    const double tr3 = (m * m * m).trace();
    const double formula = -2.0 * p.a() * a2 + 2.0 * p.b() * tr3 - 2.0 * p.c() * a2 * a2;
    worst = std::max(worst, std::abs(numeric - formula));
  }
  return worst;
}

struct MonotonicityReport {
  bool monotone = true;
  double worst_increase = 0.0;  // largest F(t_{k+1}) - F(t_k), 0 if never increasing
  double initial_energy = 0.0;
  double final_energy = 0.0;
};

/// F(U(t)) must be non-increasing on the samples up to `slack`.
inline MonotonicityReport energy_monotonicity(const Trajectory& traj, const MaterialParams& p,
                                              double slack = 1e-10) {
  MonotonicityReport r;
  double prev = bulk_energy(tensor_from(traj.states.front()), p);
  r.initial_energy = prev;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = bulk_energy(tensor_from(traj.states[k]), p);
    r.worst_increase = std::max(r.worst_increase, cur - prev);
    prev = cur;
  }
  r.final_energy = prev;
  r.monotone = r.worst_increase <= slack;
  return r;
}

/// |state(t0 + P') - state(t0)| minimized over P' near P using dense output.
/// Matrix systems use the Frobenius norm of the tensor, others the Euclidean norm.
inline double detect_period(const Trajectory& traj, double candidate_period, double t0 = -1.0,
                            double window = 1e-2) {
  if (t0 < 0.0) t0 = traj.t_begin();
  if (traj.t_end() - t0 < candidate_period - 1e-12) {
    throw std::invalid_argument("detect_period: trajectory shorter than candidate period");
  }
  const StateVec start = traj.at(t0);
  auto dist = [&](double period) {
    const StateVec d = traj.at(std::min(t0 + period, traj.t_end())) - start;
    return d.size() == 5 ? frobenius(tensor_from(d)) : d.norm();
  };
  const double hi = std::min(candidate_period + window, traj.t_end() - t0);
  double lo = std::max(candidate_period - window, 0.0);
  double best = dist(candidate_period);
  // Coarse scan followed by golden-section refinement.
  constexpr int kScan = 40;
  double best_p = candidate_period;
  for (int i = 0; i <= kScan; ++i) {
    const double pp = lo + (hi - lo) * i / kScan;
    const double d = dist(pp);
    if (d < best) best = d, best_p = pp;
  }
  double a = std::max(lo, best_p - (hi - lo) / kScan), b = std::min(hi, best_p + (hi - lo) / kScan);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int it = 0; it < 80; ++it) {
    if (dist(c) < dist(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return std::min(best, dist(0.5 * (a + b)));
}

enum class OmegaBranch { Zero, SPlus, SMinus, None };

inline const char* to_string(OmegaBranch b) {
  switch (b) {
    case OmegaBranch::Zero: return "zero";
    case OmegaBranch::SPlus: return "s+";
    case OmegaBranch::SMinus: return "s-";
    case OmegaBranch::None: return "none";
  }
  return "?";
}

struct OmegaLimit {
  OmegaBranch branch = OmegaBranch::None;
  double distance = 0.0;  // sorted-eigenvalue distance to the nearest branch
  Vec3 axis = Vec3::UnitZ();
};

/// Distance from q to {0} ∪ {uniaxial(s±, n)} measured on sorted eigenvalues
/// (a lower bound on the Frobenius distance, exact on the critical set).
/// Branch is None when the nearest branch is farther than `tolerance`.
inline OmegaLimit omega_limit_classify(const QTensor& q, const MaterialParams& p, double tolerance = 1e-3) {
  const EigenFrame ef = eigen_decomposition(q);
  const CriticalValues cv = critical_s(p);
  const std::array<std::pair<OmegaBranch, double>, 3> branches{
      {{OmegaBranch::Zero, cv.zero}, {OmegaBranch::SPlus, cv.s_plus}, {OmegaBranch::SMinus, cv.s_minus}}};
  OmegaLimit out;
  out.distance = std::numeric_limits<double>::infinity();
  OmegaBranch nearest = OmegaBranch::None;
  double nearest_s = 0.0;
  for (const auto& [branch, s] : branches) {
    std::array<double, 3> target{2.0 * s / 3.0, -s / 3.0, -s / 3.0};
    std::sort(target.begin(), target.end(), std::greater<>());
    const double d = (ef.eigenvalues - Vec3(target[0], target[1], target[2])).norm();
    if (d < out.distance) out.distance = d, nearest = branch, nearest_s = s;
  }
  out.branch = out.distance <= tolerance ? nearest : OmegaBranch::None;
  // The director is the eigenvector of the non-repeated eigenvalue 2s/3.
  out.axis = nearest_s < 0.0 ? Vec3(ef.frame.col(2)) : Vec3(ef.frame.col(0));
  return out;
}

inline OmegaLimit omega_limit_classify(const Trajectory& traj, const MaterialParams& p, double tolerance = 1e-3) {
  return omega_limit_classify(tensor_from(traj.final_state()), p, tolerance);
}

/// First sample time after which |f(state)| stays below `tol` for a contiguous
/// window of length `window` (the long-time convergence rule).
inline std::optional<double> settled_time(const Trajectory& traj, const VectorField& f, double tol = 1e-8,
                                          double window = 1.0) {
  std::optional<double> start;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (f(traj.states[k]).norm() < tol) {
      if (!start) start = traj.times[k];
      if (traj.times[k] - *start >= window) return start;
    } else {
      start.reset();
    }
  }
  return std::nullopt;
}

}  // namespace qshear
