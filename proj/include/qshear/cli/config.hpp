#pragma once

// Run configuration shared by every subcommand. Sources, lowest precedence
// first: built-in defaults, --preset, --config file, explicit flags.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qshear/dynamics.hpp"
#include "qshear/errors.hpp"
#include "qshear/integrator.hpp"

namespace qshear::cli {

enum class OutputFormat { Csv, Json };

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not a number: '" + text + "'");
  }
  if (used != t.size()) throw ConfigError("'" + key + "': trailing characters in '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError("'" + key + "': value must be finite");
  return v;
}

inline long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  if (v != std::floor(v)) throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  return static_cast<long>(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (!text.empty() && text.back() == ',') throw ConfigError("'" + key + "': trailing comma");
  return out;
}

inline std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

/// Default initial condition for the figure-1 runs (the source does not print one).
inline const std::vector<double> kFigureOneQ0{0.3, 0.1, 0.2, 0.0, 0.0};

struct RunConfig {
  std::string system = "full";
  std::vector<double> params{-0.2, 0.1, 0.1, 0.5};
  std::vector<double> q0;  // empty: system default
  double t0 = 0.0;
  std::optional<double> tmax;  // unset: command default
  IntegratorConfig integrator{};
  double h = 0.0;
  double delta = 1.0;
  double gamma = 0.0;
  OutputFormat format = OutputFormat::Csv;
  std::string out;  // empty: standard output
  int jobs = 1;
  // regimes
  std::string mode = "short";
  std::vector<double> xis;  // empty: mode default
  bool allow_large = false;
  // invariants
  std::string suite = "all";
  // equilibria / portrait
  std::vector<double> grid;  // lo,hi,step; empty: system default
  std::string plane = "none";

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k{
        "system", "params", "q0", "t0", "tmax", "rel-tol", "abs-tol", "max-step", "max-steps", "sample-dt",
        "h", "delta", "gamma", "format", "out", "jobs", "preset", "mode", "xis", "allow-large", "suite",
        "grid", "plane"};
    return k;
  }

  void apply(const std::string& key, const std::string& value) {
    if (key == "system") {
      parse_system_name(trim(value));
      system = trim(value);
    } else if (key == "params") {
      params = parse_list(key, value);
      if (params.size() != 4) throw ConfigError("'params' expects a,b,c,xi");
      MaterialParams(params[0], params[1], params[2], params[3]);
    } else if (key == "q0") {
      q0 = parse_list(key, value);
    } else if (key == "t0") {
      t0 = parse_real(key, value);
    } else if (key == "tmax") {
      tmax = parse_real(key, value);
    } else if (key == "rel-tol") {
      integrator.rel_tol = parse_real(key, value);
    } else if (key == "abs-tol") {
      integrator.abs_tol = parse_real(key, value);
    } else if (key == "max-step") {
      integrator.max_step = parse_real(key, value);
    } else if (key == "max-steps") {
      integrator.max_steps = parse_integer(key, value);
    } else if (key == "sample-dt") {
      integrator.sample_dt = parse_real(key, value);
    } else if (key == "h") {
      h = parse_real(key, value);
    } else if (key == "delta") {
      delta = parse_real(key, value);
    } else if (key == "gamma") {
      gamma = parse_real(key, value);
    } else if (key == "format") {
      const std::string f = trim(value);
      if (f == "csv") format = OutputFormat::Csv;
      else if (f == "json") format = OutputFormat::Json;
      else throw ConfigError("'format' must be csv or json");
    } else if (key == "out") {
      out = trim(value);
    } else if (key == "jobs") {
      const long j = parse_integer(key, value);
      if (j < 1 || j > 256) throw ConfigError("'jobs' must be in [1, 256]");
      jobs = static_cast<int>(j);
    } else if (key == "preset") {
      apply_preset(trim(value));
    } else if (key == "mode") {
      const std::string m = trim(value);
      if (m != "short" && m != "long") throw ConfigError("'mode' must be short or long");
      mode = m;
    } else if (key == "xis") {
      xis = parse_list(key, value);
      if (xis.empty()) throw ConfigError("'xis' must not be empty");
    } else if (key == "allow-large") {
      allow_large = parse_bool(key, value);
    } else if (key == "suite") {
      const std::string s = trim(value);
      if (s != "all" && s != "corotational" && s != "shorttime" && s != "phys") {
        throw ConfigError("'suite' must be all, corotational, shorttime or phys");
      }
      suite = s;
    } else if (key == "grid") {
      grid = parse_list(key, value);
      if (grid.size() != 3 || !(grid[2] > 0.0) || grid[1] < grid[0]) {
        throw ConfigError("'grid' expects lo,hi,step with step > 0 and hi >= lo");
      }
    } else if (key == "plane") {
      const std::string s = trim(value);
      if (s != "none" && s != "plus" && s != "minus" && s != "x-sixth" && s != "xy-diag") {
        throw ConfigError("'plane' must be none, plus, minus, x-sixth or xy-diag");
      }
      plane = s;
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }

  void apply_preset(const std::string& name) {
    if (name == "fig1-top" || name == "fig1-bottom") {
      system = "full";
      params = {-0.2, 0.1, 0.1, name == "fig1-top" ? 0.5 : 3.0};
      q0 = kFigureOneQ0;
      t0 = 0.0;
      tmax = 50.0;
    } else {
      throw ConfigError("unknown preset '" + name + "' (known: fig1-top, fig1-bottom)");
    }
  }

  SystemKind kind() const {
    using T = SystemKind::Tag;
    switch (parse_system_name(system)) {
      case T::PlaneH: return SystemKind::plane_h(h);
      case T::Legacy: return SystemKind::legacy(delta, gamma);
      default: {
        SystemKind k;
        k.tag = parse_system_name(system);
        return k;
      }
    }
  }

  MaterialParams material() const { return {params[0], params[1], params[2], params[3]}; }

  /// Initial state, defaulting per system dimension.
  StateVec initial_state() const {
    const SystemKind k = kind();
    std::vector<double> v = q0;
    if (v.empty()) {
      switch (k.dimension()) {
        case 5: v = kFigureOneQ0; break;
        case 3: v = k.tag == SystemKind::Tag::Phys ? std::vector<double>{1.0, 0.0, 0.3}
                                                   : std::vector<double>{0.3, 0.1, 0.2}; break;
        default: v = {0.3, 0.1}; break;
      }
    }
    if (static_cast<int>(v.size()) != k.dimension()) {
      throw ConfigError("'q0' has " + std::to_string(v.size()) + " components, system '" + system + "' needs " +
                        std::to_string(k.dimension()));
    }
    StateVec s(k.dimension());
    for (int i = 0; i < k.dimension(); ++i) s(i) = v[i];
    return s;
  }

  /// Flat key/value echo; loading it back through apply() reproduces this config.
  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> m;
    m["system"] = system;
    m["params"] = join_reals(params);
    if (!q0.empty()) m["q0"] = join_reals(q0);
    m["t0"] = format_real(t0);
    if (tmax) m["tmax"] = format_real(*tmax);
    m["rel-tol"] = format_real(integrator.rel_tol);
    m["abs-tol"] = format_real(integrator.abs_tol);
    m["max-step"] = format_real(integrator.max_step);
    m["max-steps"] = std::to_string(integrator.max_steps);
    m["sample-dt"] = format_real(integrator.sample_dt);
    m["h"] = format_real(h);
    m["delta"] = format_real(delta);
    m["gamma"] = format_real(gamma);
    m["format"] = format == OutputFormat::Csv ? "csv" : "json";
    if (!out.empty()) m["out"] = out;
    m["jobs"] = std::to_string(jobs);
    m["mode"] = mode;
    if (!xis.empty()) m["xis"] = join_reals(xis);
    m["allow-large"] = allow_large ? "true" : "false";
    m["suite"] = suite;
    if (!grid.empty()) m["grid"] = join_reals(grid);
    m["plane"] = plane;
    return m;
  }
};

/// Reads either a flat `key = value` file ('#' comments) or a JSON report
/// envelope, whose "config" object is applied key by key.
inline void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (trim(text).starts_with("{")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "': " + e.what());
    }
    const nlohmann::json& obj = doc.contains("config") ? doc["config"] : doc;
    if (!obj.is_object()) throw ConfigError("config file '" + path + "': expected an object");
    for (const auto& [k, v] : obj.items()) {
      cfg.apply(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return;
  }
  std::stringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace qshear::cli
