#pragma once

// Dormand-Prince 5(4) integrator with PI step-size control and the method's
// continuous extension for dense output (Hairer, Norsett & Wanner, "Solving
// ODEs I", DOPRI5). All systems here are smooth polynomial fields; the only
// stiffness is the 1/xi factor of the rescaled flow, which is absorbed by
// small steps within the step budget.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qshear/dynamics.hpp"
#include "qshear/errors.hpp"
#include "qshear/states.hpp"

namespace qshear {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  long max_steps = 10'000'000;
  double sample_dt = 0.01;
  /// |state| beyond this is reported as divergence (finite-time blow-up).
  double divergence_bound = 1e8;
  /// Keep the dense-output polynomial of every accepted step.
  bool keep_dense = true;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
    if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
    if (max_steps <= 0) throw ConfigError("max_steps must be positive");
    if (!(sample_dt > 0.0)) throw ConfigError("sample_dt must be positive");
  }
};

enum class IntegrationStatus { Ok, MaxStepsExceeded, StepSizeUnderflow, DomainError, Diverged };

inline const char* to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::Ok: return "ok";
    case IntegrationStatus::MaxStepsExceeded: return "max-steps-exceeded";
    case IntegrationStatus::StepSizeUnderflow: return "step-size-underflow";
    case IntegrationStatus::DomainError: return "domain-error";
    case IntegrationStatus::Diverged: return "diverged";
  }
  return "?";
}

/// Quartic continuous extension of one accepted step on [t0, t0 + h].
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<StateVec, 5> coeff;

  StateVec operator()(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return coeff[0] + s * (coeff[1] + s1 * (coeff[2] + s * (coeff[3] + s1 * coeff[4])));
  }
};

struct TrajectoryDiagnostics {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
  double final_rhs_norm = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  std::vector<DenseSegment> dense;
  TrajectoryDiagnostics diagnostics;
  IntegrationStatus status = IntegrationStatus::Ok;
  std::string message;

  bool ok() const { return status == IntegrationStatus::Ok; }
  std::size_t size() const { return times.size(); }
  const StateVec& final_state() const { return states.back(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  /// Dense-output value; requires keep_dense and t inside the integrated span.
  StateVec at(double t) const {
    if (dense.empty()) throw std::logic_error("trajectory has no dense output");
    const double lo = dense.front().t0;
    const double hi = dense.back().t0 + dense.back().h;
    const double eps = 1e-12 * std::max(1.0, std::abs(hi));
    if (t < lo - eps || t > hi + eps) throw std::out_of_range("dense output queried outside integrated span");
    auto it = std::upper_bound(dense.begin(), dense.end(), t,
                               [](double tv, const DenseSegment& seg) { return tv < seg.t0; });
    if (it != dense.begin()) --it;
    return (*it)(t);
  }
};

namespace detail {

struct DormandPrince {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                          a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                          e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline double error_norm(const StateVec& err, const StateVec& y0, const StateVec& y1, double rtol, double atol) {
  double sum = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    sum += (err(i) / sk) * (err(i) / sk);
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

class StepFailure : public std::runtime_error {
 public:
  StepFailure(IntegrationStatus s, const std::string& what) : std::runtime_error(what), status(s) {}
  IntegrationStatus status;
};

}  // namespace detail

/// Predicate for event location; a sign change marks the event.
using EventFunction = std::function<double(const StateVec&, double)>;

namespace detail {

struct EventHit {
  double time;
  StateVec state;
};

// Core loop shared by integrate and integrate_until.
template <class Field>
Trajectory run_dopri(Field&& f_autonomous, const StateVec& y0, double t0, double t1, const IntegratorConfig& cfg,
                     const EventFunction* event, std::optional<EventHit>* hit) {
  cfg.validate();
  if (!(t1 > t0)) throw ConfigError("integration span must satisfy t1 > t0");

  using DP = DormandPrince;
  Trajectory traj;
  auto& diag = traj.diagnostics;

  auto f = [&](const StateVec& y) {
    ++diag.rhs_evaluations;
    StateVec out = f_autonomous(y);
    if (!out.allFinite()) throw StepFailure(IntegrationStatus::Diverged, "vector field returned a non-finite value");
    return out;
  };

  const double span = t1 - t0;
  const long n_samples = static_cast<long>(std::floor(span / cfg.sample_dt + 1e-9));
  long next_sample = 1;
  auto sample_time = [&](long k) { return t0 + static_cast<double>(k) * cfg.sample_dt; };

  traj.times.push_back(t0);
  traj.states.push_back(y0);

  StateVec y = y0;
  double t = t0;
  double event_prev = event ? (*event)(y0, t0) : 0.0;

  try {
    StateVec k1 = f(y);

    // Initial step guess (Hairer's hinit).
    double h;
    {
      const int n = static_cast<int>(y.size());
      double dnf = 0.0, dny = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
        dnf += (k1(i) / sk) * (k1(i) / sk);
        dny += (y(i) / sk) * (y(i) / sk);
      }
      h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
      h = std::min(h, cfg.max_step);
      const StateVec y1 = y + h * k1;
      const StateVec f1 = f(y1);
      double der2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
        der2 += ((f1(i) - k1(i)) / sk) * ((f1(i) - k1(i)) / sk);
      }
      der2 = std::sqrt(der2) / h;
      const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
      const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
      h = std::min({100.0 * std::abs(h), h1, cfg.max_step, span});
    }

    constexpr double safe = 0.9, fac1 = 0.2, fac2 = 10.0, beta = 0.04;
    const double expo1 = 0.2 - beta * 0.75;
    double facold = 1e-4;
    bool last_rejected = false;

    while (t < t1) {
      if (diag.accepted_steps + diag.rejected_steps >= cfg.max_steps) {
        throw StepFailure(IntegrationStatus::MaxStepsExceeded, "step budget exhausted");
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw StepFailure(IntegrationStatus::StepSizeUnderflow, "step size underflow");
      }
      if (t + 1.01 * h >= t1) h = t1 - t;

      const StateVec k2 = f(y + h * DP::a21 * k1);
      const StateVec k3 = f(y + h * (DP::a31 * k1 + DP::a32 * k2));
      const StateVec k4 = f(y + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3));
      const StateVec k5 = f(y + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4));
      const StateVec k6 = f(y + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5));
      const StateVec y_new = y + h * (DP::a71 * k1 + DP::a73 * k3 + DP::a74 * k4 + DP::a75 * k5 + DP::a76 * k6);
      const StateVec k7 = f(y_new);
      const StateVec err = h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);

      const double e = error_norm(err, y, y_new, cfg.rel_tol, cfg.abs_tol);
      const double fac11 = std::pow(e, expo1);

      if (e <= 1.0) {
        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        const StateVec ydiff = y_new - y;
        const StateVec bspl = h * k1 - ydiff;
        seg.coeff[0] = y;
        seg.coeff[1] = ydiff;
        seg.coeff[2] = bspl;
        seg.coeff[3] = ydiff - h * k7 - bspl;
        seg.coeff[4] = h * (DP::d1 * k1 + DP::d3 * k3 + DP::d4 * k4 + DP::d5 * k5 + DP::d6 * k6 + DP::d7 * k7);

        const double t_new = (h == t1 - t) ? t1 : t + h;

        // Event location by bisection on the dense polynomial.
        if (event) {
          const double ev_new = (*event)(y_new, t_new);
          if ((event_prev < 0.0) != (ev_new < 0.0) || ev_new == 0.0) {
            double lo = t, hi = t_new, flo = event_prev;
            while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
              const double mid = 0.5 * (lo + hi);
              const double fm = (*event)(seg(mid), mid);
              if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
                lo = mid;
                flo = fm;
              } else {
                hi = mid;
              }
            }
            const double tc = hi;
            const StateVec yc = seg(tc);
            while (next_sample <= n_samples && sample_time(next_sample) < tc) {
              traj.times.push_back(sample_time(next_sample));
              traj.states.push_back(seg(sample_time(next_sample)));
              ++next_sample;
            }
            if (tc > traj.times.back()) {
              traj.times.push_back(tc);
              traj.states.push_back(yc);
            }
            seg.h = tc - t;
            if (cfg.keep_dense && seg.h > 0.0) traj.dense.push_back(seg);
            ++diag.accepted_steps;
            diag.final_rhs_norm = f(yc).norm();
            *hit = EventHit{tc, yc};
            return traj;
          }
          event_prev = ev_new;
        }

        while (next_sample <= n_samples && sample_time(next_sample) < t_new - 1e-12 * std::max(1.0, std::abs(t_new))) {
          traj.times.push_back(sample_time(next_sample));
          traj.states.push_back(seg(sample_time(next_sample)));
          ++next_sample;
        }
        if (cfg.keep_dense) traj.dense.push_back(std::move(seg));

        facold = std::max(e, 1e-4);
        y = y_new;
        k1 = k7;
        t = t_new;
        ++diag.accepted_steps;

        if (y.norm() > cfg.divergence_bound) {
          throw StepFailure(IntegrationStatus::Diverged, "state norm exceeded divergence bound");
        }

        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
        double h_new = std::min(h / fac, cfg.max_step);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        h = h_new;
      } else {
        ++diag.rejected_steps;
        h /= std::min(1.0 / fac1, fac11 / safe);
        last_rejected = true;
      }
    }

    if (traj.times.back() < t1) {
      traj.times.push_back(t1);
      traj.states.push_back(y);
    } else {
      traj.states.back() = y;
    }
    diag.final_rhs_norm = f(y).norm();
  } catch (const StepFailure& failure) {
    traj.status = failure.status;
    traj.message = std::string(failure.what()) + " at t=" + std::to_string(t);
    if (traj.times.back() < t) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
  } catch (const qshear::DomainError& failure) {
    traj.status = IntegrationStatus::DomainError;
    traj.message = std::string(failure.what()) + " at t=" + std::to_string(t);
    if (traj.times.back() < t) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
  }
  return traj;
}

}  // namespace detail

/// Integrates an autonomous field y' = f(y) over [t0, t1]. States are sampled
/// on t0 + k*sample_dt plus both endpoints. Failures are reported in the
/// returned status together with the last valid state.
template <class Field>
Trajectory integrate(Field&& f, const StateVec& y0, double t0, double t1, const IntegratorConfig& cfg = {}) {
  return detail::run_dopri(std::forward<Field>(f), y0, t0, t1, cfg, nullptr, nullptr);
}

inline Trajectory integrate(const SystemKind& kind, const StateVec& state0, const MaterialParams& p, double t0,
                            double t1, const IntegratorConfig& cfg = {}) {
  if (state0.size() != kind.dimension()) throw ConfigError("initial state dimension does not match system kind");
  return integrate(vector_field(kind, p), state0, t0, t1, cfg);
}

struct UntilResult {
  Trajectory trajectory;
  std::optional<double> crossing;  // empty when no sign change occurred before t_max
};

/// Integrates until `predicate` changes sign (located to ~1e-10 in time) or t_max.
template <class Field>
UntilResult integrate_until(Field&& f, const StateVec& y0, const EventFunction& predicate, double t0, double t_max,
                            const IntegratorConfig& cfg = {}) {
  std::optional<detail::EventHit> hit;
  UntilResult out;
  out.trajectory = detail::run_dopri(std::forward<Field>(f), y0, t0, t_max, cfg, &predicate, &hit);
  if (hit) out.crossing = hit->time;
  return out;
}

inline UntilResult integrate_until(const SystemKind& kind, const StateVec& state0, const MaterialParams& p,
                                   const EventFunction& predicate, double t0, double t_max,
                                   const IntegratorConfig& cfg = {}) {
  if (state0.size() != kind.dimension()) throw ConfigError("initial state dimension does not match system kind");
  return integrate_until(vector_field(kind, p), state0, predicate, t0, t_max, cfg);
}

}  // namespace qshear
