#pragma once

#include <chrono>
#include <ctime>
#include <map>
#include <ostream>
#include <string>

#include "json.hpp"

#include "qshear/analysis/equilibria.hpp"
#include "qshear/analysis/regimes.hpp"
#include "qshear/cli/config.hpp"
#include "qshear/integrator.hpp"

namespace qshear::cli {

using nlohmann::json;

inline constexpr const char* kSchema = "qshear-report/1";
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string csv_header(const SystemKind& kind) {
  using T = SystemKind::Tag;
  if (kind.dimension() == 5) return "t,x,y,z,v,w";
  if (kind.tag == T::Phys) return "t,S1,S2,theta";
  if (kind.tag == T::EigenPair) return "t,lambda,mu";
  if (kind.tag == T::PlaneH) return "t,x,z";
  return "t,x,y,z";
}

inline std::vector<std::string> csv_columns(const SystemKind& kind) {
  std::vector<std::string> cols;
  std::stringstream ss(csv_header(kind));
  std::string c;
  while (std::getline(ss, c, ',')) cols.push_back(c);
  return cols;
}

/// One row per sample, %.17g, LF line endings.
inline void write_csv(std::ostream& os, const Trajectory& traj, const SystemKind& kind) {
  os << csv_header(kind) << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_real(traj.times[k]);
    for (int i = 0; i < traj.states[k].size(); ++i) os << ',' << format_real(traj.states[k](i));
    os << '\n';
  }
}

inline json to_json(const StateVec& s) {
  json a = json::array();
  for (int i = 0; i < s.size(); ++i) a.push_back(s(i));
  return a;
}

inline json to_json(const EquilibriumReport& r) {
  json ev = json::array();
  for (const auto& l : r.jacobian_eigenvalues) ev.push_back({{"re", l.real()}, {"im", l.imag()}});
  return {{"location", to_json(r.location)},
          {"rhs_norm", r.rhs_norm},
          {"eigenvalues", ev},
          {"classification", to_string(r.classification)}};
}

inline json to_json(const EquilibriumAtlas& atlas) {
  json iso = json::array(), cont = json::array();
  for (const auto& r : atlas.isolated) iso.push_back(to_json(r));
  for (const auto& r : atlas.continuum) cont.push_back(to_json(r));
  return {{"isolated", iso},
          {"continuum", cont},
          {"seeds", atlas.seeds},
          {"converged", atlas.converged},
          {"dropped", atlas.dropped}};
}

inline json to_json(const RegimeReport& r) {
  json per = json::array();
  for (std::size_t i = 0; i < r.xis.size(); ++i) {
    json e{{"xi", r.xis[i]}, {"metric", r.metrics[i]}, {"status", r.statuses[i]}, {"steps", r.steps[i]}};
    if (!r.max_norms.empty()) e["max_norm"] = r.max_norms[i];
    if (!r.gradient_metrics.empty()) e["gradient_metric"] = r.gradient_metrics[i];
    per.push_back(e);
  }
  json out{{"mode", to_string(r.mode)},
           {"horizon", r.horizon},
           {"initial_norm", r.initial_norm},
           {"per_xi", per},
           {"exponent", r.exponent},
           {"fit_residual", r.fit_residual},
           {"monotone", r.monotone},
           {"metric",
            r.mode == RegimeMode::Short ? "sup_t |Q_xi - R|" : "int_0^T |[W,Q_xi] - dF/dQ(Q_xi)|^2 dt"},
           {"note", "exponents are least-squares log-log slopes; rates are derived expectations, not stated limits"}};
  if (r.mode == RegimeMode::Long) out["gradient_exponent"] = r.gradient_exponent;
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Self-describing report wrapper; nlohmann's default object keeps keys sorted.
inline json envelope(const std::string& command, const RunConfig& cfg, json results) {
  json echo = json::object();
  for (const auto& [k, v] : cfg.echo()) echo[k] = v;
  return {{"schema", kSchema},
          {"tool_version", kToolVersion},
          {"command", command},
          {"config", echo},
          {"generated_at", utc_timestamp()},
          {"results", std::move(results)}};
}

inline json error_object(const std::string& kind, const std::string& message, int exit_code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
}

}  // namespace qshear::cli
