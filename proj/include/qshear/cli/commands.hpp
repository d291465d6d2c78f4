#pragma once

// Subcommand bodies. Each takes a resolved RunConfig and writes to the given
// streams (or to cfg.out); the return value is the process exit code.
// ConfigError escapes to run_command, which maps it to exit code 1.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "qshear/analysis/equilibria.hpp"
#include "qshear/analysis/first_integrals.hpp"
#include "qshear/analysis/regimes.hpp"
#include "qshear/cli/config.hpp"
#include "qshear/cli/invariants.hpp"
#include "qshear/cli/report.hpp"

namespace qshear::cli {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

// Writes to cfg.out when set, otherwise to the standard stream.
template <class Writer>
void emit(const RunConfig& cfg, std::ostream& fallback, Writer&& write) {
  if (cfg.out.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + cfg.out + "'");
  write(f);
}

inline void report_error(const RunConfig* cfg, std::ostream& err, const std::string& kind, const std::string& msg,
                         int code, json extra = json::object()) {
  if (cfg && cfg->format == OutputFormat::Json) {
    json e = error_object(kind, msg, code);
    for (auto& [k, v] : extra.items()) e["error"][k] = v;
    err << e.dump() << '\n';
  } else {
    err << "qshear: " << kind << " error: " << msg << '\n';
    if (extra.contains("t")) err << "  last t = " << format_real(extra["t"].get<double>()) << '\n';
    if (extra.contains("last_state")) err << "  last state = " << extra["last_state"].dump() << '\n';
  }
}

inline std::vector<double> default_grid(const SystemKind& kind) {
  using T = SystemKind::Tag;
  if (kind.dimension() == 5) return {-1.0, 1.0, 0.5};
  if (kind.tag == T::EigenPair || kind.tag == T::PlaneH) return {-1.0, 1.0, 0.1};
  return {-1.0, 1.0, 0.25};
}

}  // namespace detail

inline int cmd_simulate(const RunConfig& cfg, Streams io) {
  const SystemKind kind = cfg.kind();
  const MaterialParams p = cfg.material();
  const double t1 = cfg.tmax.value_or(50.0);
  IntegratorConfig icfg = cfg.integrator;
  icfg.keep_dense = false;
  const Trajectory tr = integrate(kind, cfg.initial_state(), p, cfg.t0, t1, icfg);

  detail::emit(cfg, io.out, [&](std::ostream& os) {
    if (cfg.format == OutputFormat::Csv) {
      write_csv(os, tr, kind);
      return;
    }
    json rows = json::array();
    for (std::size_t k = 0; k < tr.size(); ++k) {
      json row = to_json(tr.states[k]);
      row.insert(row.begin(), tr.times[k]);
      rows.push_back(row);
    }
    json results{{"system", system_name(kind.tag)},
                 {"columns", csv_columns(kind)},
                 {"rows", rows},
                 {"status", to_string(tr.status)},
                 {"message", tr.message},
                 {"diagnostics",
                  {{"accepted_steps", tr.diagnostics.accepted_steps},
                   {"rejected_steps", tr.diagnostics.rejected_steps},
                   {"rhs_evaluations", tr.diagnostics.rhs_evaluations},
                   {"final_rhs_norm", tr.diagnostics.final_rhs_norm}}}};
    os << envelope("simulate", cfg, results).dump(2) << '\n';
  });

  if (!tr.ok()) {
    detail::report_error(&cfg, io.err, "numerical", std::string(to_string(tr.status)) + ": " + tr.message,
                         kExitNumerical, {{"t", tr.t_end()}, {"last_state", to_json(tr.final_state())}});
    return kExitNumerical;
  }
  return kExitOk;
}

inline int cmd_equilibria(const RunConfig& cfg, Streams io) {
  const SystemKind kind = cfg.kind();
  const MaterialParams p = cfg.material();
  const std::vector<double> g = cfg.grid.empty() ? detail::default_grid(kind) : cfg.grid;
  const EquilibriumAtlas atlas = find_equilibria(kind, p, grid_seeds(kind.dimension(), g[0], g[1], g[2]));
  json results = to_json(atlas);
  results["system"] = system_name(kind.tag);
  results["grid"] = g;
  if (kind.tag == SystemKind::Tag::Phys) {
    for (auto* list : {&results["isolated"], &results["continuum"]}) {
      for (auto& r : *list) r["region"] = r["location"][0].get<double>() > r["location"][1].get<double>() ? "S1>S2" : "S1<S2";
    }
  }
  detail::emit(cfg, io.out, [&](std::ostream& os) { os << envelope("equilibria", cfg, results).dump(2) << '\n'; });
  return kExitOk;
}

namespace detail {

/// Seeds for a portrait: a grid in the system's own coordinates, or for the
/// short-time system optionally a 2D grid lifted onto one invariant plane.
inline std::vector<StateVec> portrait_seeds(const RunConfig& cfg, const SystemKind& kind, const std::vector<double>& g) {
  if (cfg.plane == "none") return grid_seeds(kind.dimension(), g[0], g[1], g[2]);
  if (kind.tag != SystemKind::Tag::ShortTime3D) throw ConfigError("'plane' seeding needs system 'shorttime'");
  std::vector<StateVec> out;
  for (const StateVec& ab : grid_seeds(2, g[0], g[1], g[2])) {
    const double a = ab(0), b = ab(1);
    ReducedState s;
    if (cfg.plane == "plus") s = {a, b, (a + b + 2.0 / 3.0) / 2.0};
    else if (cfg.plane == "minus") s = {a, b, -(a + b + 2.0 / 3.0) / 2.0};
    else if (cfg.plane == "x-sixth") s = {1.0 / 6.0, a, b};
    else s = {a, a, b};  // xy-diag
    out.push_back(to_vec(s));
  }
  return out;
}

/// Invariant surfaces within `tol` of a seed (the separatrix candidates).
inline std::vector<std::string> adjacent_surfaces(const SystemKind& kind, const StateVec& seed, double tol = 1e-3) {
  using T = SystemKind::Tag;
  std::vector<std::string> out;
  auto test = [&](std::initializer_list<Surface> surfaces, const StateVec& s) {
    for (Surface f : surfaces) {
      if (std::abs(surface_function(f, s)) <= tol) out.push_back(to_string(f));
    }
  };
  const auto planes = {Surface::PlusPlane, Surface::MinusPlane, Surface::XSixth, Surface::XYDiag};
  if (kind.tag == T::ShortTime3D) {
    test(planes, seed);
  } else if (kind.tag == T::PlaneH) {
    // lift (x, z) back onto the level plane y = 1/6 - h(1 - 6x)
    test(planes, to_vec(ReducedState{seed(0), 1.0 / 6.0 - kind.h * (1.0 - 6.0 * seed(0)), seed(1)}));
  } else if (kind.tag == T::Phys) {
    test({Surface::Pi1, Surface::Pi2, Surface::ThetaPlus, Surface::ThetaMinus}, seed);
  }
  return out;
}

}  // namespace detail

inline int cmd_portrait(const RunConfig& cfg, Streams io) {
  if (cfg.out.empty()) throw ConfigError("portrait needs --out DIR for the trajectory bundle");
  const SystemKind kind = cfg.kind();
  const MaterialParams p = cfg.material();
  const std::vector<double> g = cfg.grid.empty() ? std::vector<double>{-1.0, 1.0, 0.5} : cfg.grid;
  const std::vector<StateVec> seeds = detail::portrait_seeds(cfg, kind, g);
  const double t1 = cfg.tmax.value_or(10.0);
  IntegratorConfig icfg = cfg.integrator;
  icfg.keep_dense = false;

  std::filesystem::create_directories(cfg.out);
  std::vector<Trajectory> runs(seeds.size());
  qshear::detail::fan_out(seeds.size(), cfg.jobs,
                          [&](std::size_t i) { runs[i] = integrate(kind, seeds[i], p, cfg.t0, t1, icfg); });

  json entries = json::array();
  int failures = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seed_%04zu.csv", i);
    std::ofstream f(std::filesystem::path(cfg.out) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write into '" + cfg.out + "'");
    write_csv(f, runs[i], kind);
    failures += !runs[i].ok();
    entries.push_back({{"index", i},
                       {"seed", to_json(seeds[i])},
                       {"file", name},
                       {"status", to_string(runs[i].status)},
                       {"message", runs[i].message},
                       {"t_end", runs[i].t_end()},
                       {"separatrix_adjacent", detail::adjacent_surfaces(kind, seeds[i])}});
  }
  const std::vector<double> eg = detail::default_grid(kind);
  const EquilibriumAtlas atlas = find_equilibria(kind, p, grid_seeds(kind.dimension(), eg[0], eg[1], eg[2]));
  json results{{"system", system_name(kind.tag)},
               {"seeds", entries},
               {"failures", failures},
               {"equilibria", to_json(atlas)},
               {"csv_header", csv_header(kind)}};
  if (kind.tag == SystemKind::Tag::PlaneH) results["h"] = kind.h;
  std::ofstream manifest(std::filesystem::path(cfg.out) / "manifest.json", std::ios::binary);
  manifest << envelope("portrait", cfg, results).dump(2) << '\n';
  io.out << "wrote " << seeds.size() << " trajectories and manifest.json to " << cfg.out << '\n';
  return kExitOk;
}

inline int cmd_regimes(const RunConfig& cfg, Streams io) {
  const bool short_mode = cfg.mode == "short";
  const MaterialParams p = cfg.material();
  QTensor q0;
  if (cfg.q0.empty()) {
    q0 = (short_mode ? 0.1 : 0.2) * uniaxial(1.0, Vec3::UnitX());
  } else {
    if (cfg.q0.size() != 5) throw ConfigError("regimes needs a 5-component q0");
    q0 = QTensor::from_array({cfg.q0[0], cfg.q0[1], cfg.q0[2], cfg.q0[3], cfg.q0[4]});
  }
  const std::vector<double> xis =
      !cfg.xis.empty() ? cfg.xis : (short_mode ? std::vector<double>{10, 100, 1000} : std::vector<double>{0.1, 0.01, 0.001});
  RegimeOptions opt;
  opt.integrator = cfg.integrator;
  opt.jobs = cfg.jobs;
  opt.allow_large_initial = cfg.allow_large;
  const RegimeReport rep = short_mode ? short_regime_experiment(q0, p, xis, cfg.tmax.value_or(0.5), opt)
                                      : long_regime_experiment(q0, p, xis, cfg.tmax.value_or(1.0), opt);
  detail::emit(cfg, io.out, [&](std::ostream& os) { os << envelope("regimes", cfg, to_json(rep)).dump(2) << '\n'; });
  if (!rep.all_ok()) {
    detail::report_error(&cfg, io.err, "numerical", "one or more xi runs failed; see per_xi statuses", kExitNumerical);
    return kExitNumerical;
  }
  return kExitOk;
}

inline int cmd_invariants(const RunConfig& cfg, Streams io) {
  const auto checks = run_invariant_suite(cfg.suite, cfg.material());
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    list.push_back({{"suite", c.suite}, {"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    all = all && c.pass;
  }
  detail::emit(cfg, io.out, [&](std::ostream& os) {
    os << envelope("invariants", cfg, {{"suite", cfg.suite}, {"checks", list}, {"all_pass", all}}).dump(2) << '\n';
  });
  return all ? kExitOk : kExitNumerical;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "equilibria", "portrait", "regimes", "invariants"};
  return names;
}

/// Dispatches a subcommand, mapping exceptions onto the exit-code contract.
inline int run_command(const std::string& name, const RunConfig& cfg, Streams io) {
  try {
    if (name == "simulate") return cmd_simulate(cfg, io);
    if (name == "equilibria") return cmd_equilibria(cfg, io);
    if (name == "portrait") return cmd_portrait(cfg, io);
    if (name == "regimes") return cmd_regimes(cfg, io);
    if (name == "invariants") return cmd_invariants(cfg, io);
    throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    detail::report_error(&cfg, io.err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    detail::report_error(&cfg, io.err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const std::exception& e) {
    detail::report_error(&cfg, io.err, "numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  }
}

}  // namespace qshear::cli
