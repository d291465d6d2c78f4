#pragma once

// Asymptotic-regime experiments on the rescaled flow Q_xi(t) = Q(t/xi).
//
// short: as xi grows, Q_xi approaches the flow-only system on a fixed window;
//        metric = sup_t |Q_xi - R|.
// long:  as xi shrinks, Q_xi is expected to collapse onto [W,Q] = dF/dQ;
//        metric = int_0^T |[W,Q_xi] - dF/dQ(Q_xi)|^2 dt.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "qshear/dynamics.hpp"
#include "qshear/integrator.hpp"
#include "qshear/tensor.hpp"

namespace qshear {

enum class RegimeMode { Short, Long };

inline const char* to_string(RegimeMode m) { return m == RegimeMode::Short ? "short" : "long"; }

struct RegimeReport {
  RegimeMode mode = RegimeMode::Short;
  double horizon = 0.0;
  double initial_norm = 0.0;
  std::vector<double> xis;
  std::vector<double> metrics;
  /// long mode: int_0^T |dF/dQ(Q_xi)|^2 dt, the part of the residual that the
  /// energy identity controls
  std::vector<double> gradient_metrics;
  /// long mode: sup_t |Q_xi(t)|
  std::vector<double> max_norms;
  std::vector<std::string> statuses;
  std::vector<long> steps;
  /// least-squares slope of log(metric) against log(xi), with RMS residual
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  double gradient_exponent = std::numeric_limits<double>::quiet_NaN();
  /// metric strictly decreasing along the xi list
  bool monotone = false;

  bool all_ok() const {
    return std::all_of(statuses.begin(), statuses.end(), [](const std::string& s) { return s == "ok"; });
  }
};

struct RegimeOptions {
  IntegratorConfig integrator{};
  /// Output samples per unit horizon (short mode sup is taken on these).
  int samples = 2000;
  /// Dense-output points per accepted step for the long-mode quadrature.
  int quadrature_points = 8;
  int jobs = 1;
  /// The short-time system can blow up in finite time; |Q0| >= 1 needs this.
  bool allow_large_initial = false;
};

struct LogLogFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

inline LogLogFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  LogLogFit fit;
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) return fit;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) return fit;
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (my + fit.slope * (lx[i] - mx));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / static_cast<double>(n));
  return fit;
}

namespace detail {

inline void check_xis(const std::vector<double>& xis, bool ascending) {
  if (xis.empty()) throw ConfigError("regime experiment needs at least one xi");
  for (double x : xis) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("regime experiment xi values must be positive");
  }
  for (std::size_t i = 1; i < xis.size(); ++i) {
    if (ascending ? !(xis[i] > xis[i - 1]) : !(xis[i] < xis[i - 1])) {
      throw ConfigError(ascending ? "short regime xi list must be strictly ascending"
                                  : "long regime xi list must be strictly descending");
    }
  }
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return !v.empty();
}

// Runs fn(i) for i in [0, n) with at most `jobs` in flight; results land by index.
template <class Fn>
void fan_out(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(n, start + static_cast<std::size_t>(jobs)); ++i) {
      batch.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
    }
    for (auto& f : batch) f.get();
  }
}

}  // namespace detail

inline RegimeReport short_regime_experiment(const QTensor& q0, const MaterialParams& base,
                                            const std::vector<double>& xis, double horizon = 0.5,
                                            const RegimeOptions& opt = {}) {
  detail::check_xis(xis, true);
  if (!(horizon > 0.0)) throw ConfigError("regime horizon must be positive");
  if (frobenius(q0) >= 1.0 && !opt.allow_large_initial) {
    throw ConfigError("short regime refuses |Q0| >= 1 (finite-time blow-up risk) without an explicit override");
  }
  IntegratorConfig cfg = opt.integrator;
  cfg.sample_dt = horizon / opt.samples;

  RegimeReport rep;
  rep.mode = RegimeMode::Short;
  rep.horizon = horizon;
  rep.initial_norm = frobenius(q0);
  rep.xis = xis;
  rep.metrics.assign(xis.size(), std::numeric_limits<double>::quiet_NaN());
  rep.statuses.assign(xis.size(), "ok");
  rep.steps.assign(xis.size(), 0);

  const Trajectory reference = integrate(SystemKind::shorttime_matrix(), to_vec(q0), base, 0.0, horizon, cfg);
  if (!reference.ok()) throw std::runtime_error("short regime: reference flow failed: " + reference.message);

  detail::fan_out(xis.size(), opt.jobs, [&](std::size_t i) {
    const Trajectory q = integrate(SystemKind::rescaled(), to_vec(q0), base.with_xi(xis[i]), 0.0, horizon, cfg);
    rep.steps[i] = q.diagnostics.accepted_steps;
    if (!q.ok()) {
      rep.statuses[i] = std::string(to_string(q.status)) + ": " + q.message;
      return;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      worst = std::max(worst, frobenius(tensor_from(q.states[k]) - tensor_from(reference.at(q.times[k]))));
    }
    rep.metrics[i] = worst;
  });

  const LogLogFit fit = fit_loglog(rep.xis, rep.metrics);
  rep.exponent = fit.slope;
  rep.fit_residual = fit.residual;
  rep.monotone = rep.all_ok() && detail::strictly_decreasing(rep.metrics);
  return rep;
}

inline RegimeReport long_regime_experiment(const QTensor& q0, const MaterialParams& base,
                                           const std::vector<double>& xis, double horizon = 1.0,
                                           const RegimeOptions& opt = {}) {
  detail::check_xis(xis, false);
  if (!(horizon > 0.0)) throw ConfigError("regime horizon must be positive");
  IntegratorConfig cfg = opt.integrator;
  cfg.sample_dt = horizon / opt.samples;
  cfg.keep_dense = true;

  RegimeReport rep;
  rep.mode = RegimeMode::Long;
  rep.horizon = horizon;
  rep.initial_norm = frobenius(q0);
  rep.xis = xis;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.metrics.assign(xis.size(), nan);
  rep.gradient_metrics.assign(xis.size(), nan);
  rep.max_norms.assign(xis.size(), nan);
  rep.statuses.assign(xis.size(), "ok");
  rep.steps.assign(xis.size(), 0);

  detail::fan_out(xis.size(), opt.jobs, [&](std::size_t i) {
    const MaterialParams p = base.with_xi(xis[i]);
    const Trajectory q = integrate(SystemKind::rescaled(), to_vec(q0), p, 0.0, horizon, cfg);
    rep.steps[i] = q.diagnostics.accepted_steps;
    if (!q.ok()) {
      rep.statuses[i] = std::string(to_string(q.status)) + ": " + q.message;
      return;
    }
    // Composite trapezoid over `quadrature_points` dense points per step.
    double residual_integral = 0.0, gradient_integral = 0.0, max_norm = 0.0;
    const int m = std::max(1, opt.quadrature_points);
    auto integrands = [&](const StateVec& s, double& res, double& grad) {
      const QTensor qt = tensor_from(s);
      const QTensor g = bulk_gradient(qt, p);
      res = inner(stationary_residual(qt, p), stationary_residual(qt, p));
      grad = inner(g, g);
      max_norm = std::max(max_norm, frobenius(qt));
    };
    for (const DenseSegment& seg : q.dense) {
      double r_prev, g_prev;
      integrands(seg(seg.t0), r_prev, g_prev);
      const double dt = seg.h / m;
      for (int j = 1; j <= m; ++j) {
        double r_cur, g_cur;
        integrands(seg(seg.t0 + j * dt), r_cur, g_cur);
        residual_integral += 0.5 * dt * (r_prev + r_cur);
        gradient_integral += 0.5 * dt * (g_prev + g_cur);
        r_prev = r_cur;
        g_prev = g_cur;
      }
    }
    rep.metrics[i] = residual_integral;
    rep.gradient_metrics[i] = gradient_integral;
    rep.max_norms[i] = max_norm;
  });

  const LogLogFit fit = fit_loglog(rep.xis, rep.metrics);
  rep.exponent = fit.slope;
  rep.fit_residual = fit.residual;
  rep.gradient_exponent = fit_loglog(rep.xis, rep.gradient_metrics).slope;
  rep.monotone = rep.all_ok() && detail::strictly_decreasing(rep.metrics);
  return rep;
}

}  // namespace qshear
