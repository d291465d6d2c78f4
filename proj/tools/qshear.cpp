// qshear: command-line front end for the homogeneous Q-tensor shear model.
//
//   qshear simulate   --preset fig1-top --out run.csv
//   qshear equilibria --system shorttime
//   qshear portrait   --system plane-h --h -0.3 --out portrait/
//   qshear regimes    --mode long --jobs 3
//   qshear invariants --suite corotational

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "qshear/cli/commands.hpp"

namespace {

using qshear::cli::RunConfig;

// Flag values are collected as raw strings and fed through RunConfig::apply,
// so flags and config files share one parser and one set of error messages.
struct RawFlags {
  std::map<std::string, std::string> values;
  std::string config_file;
  bool allow_large = false;
};

void add_common(CLI::App& cmd, RawFlags& raw) {
  static const std::map<std::string, std::string> help{
      {"system", "system kind (full, corotational, gradient, eigen, reduced, rescaled, shorttime-matrix, "
                 "shorttime, plane-h, phys, legacy)"},
      {"params", "a,b,c,xi"},
      {"q0", "initial state, comma separated"},
      {"t0", "start time"},
      {"tmax", "end time (regimes: horizon T)"},
      {"rel-tol", "relative tolerance"},
      {"abs-tol", "absolute tolerance"},
      {"max-step", "largest step size"},
      {"max-steps", "step budget"},
      {"sample-dt", "output sampling interval"},
      {"h", "H1 level for plane-h"},
      {"delta", "legacy flow strength"},
      {"gamma", "legacy strain weight"},
      {"format", "csv or json"},
      {"out", "output path (portrait: directory)"},
      {"jobs", "concurrent integrations"},
      {"preset", "fig1-top or fig1-bottom"},
      {"mode", "regimes: short or long"},
      {"xis", "regimes: comma-separated xi list"},
      {"suite", "invariants: all, corotational, shorttime, phys"},
      {"grid", "lo,hi,step seed grid"},
      {"plane", "portrait seeding plane: none, plus, minus, x-sixth, xy-diag"},
  };
  for (const auto& [key, text] : help) {
    cmd.add_option_function<std::string>("--" + key, [&raw, key](const std::string& v) { raw.values[key] = v; }, text)
        ->allow_extra_args(false);
  }
  cmd.add_flag("--allow-large", raw.allow_large, "regimes: permit |Q0| >= 1 in short mode");
  cmd.add_option("--config", raw.config_file, "flat key=value file or a previous JSON report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous Q-tensor dynamics under shear flow"};
  app.require_subcommand(1);
  // -h would clash with the plane-h level flag --h
  app.set_help_flag("--help", "print help and exit");
  app.set_version_flag("--version", qshear::cli::kToolVersion);

  static const std::map<std::string, std::string> summary{
      {"simulate", "integrate one trajectory and write it as CSV or JSON"},
      {"equilibria", "locate and classify equilibria from a seed grid"},
      {"portrait", "integrate a seed family into a directory with a manifest"},
      {"regimes", "short/long time-scale regime experiments over a xi list"},
      {"invariants", "run the built-in invariant checks"},
  };
  RawFlags raw;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : qshear::cli::command_names()) {
    subs[name] = app.add_subcommand(name, summary.count(name) ? summary.at(name) : "");
    add_common(*subs[name], raw);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qshear::cli::kExitConfig;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  RunConfig cfg;
  try {
    if (auto it = raw.values.find("preset"); it != raw.values.end()) cfg.apply("preset", it->second);
    if (!raw.config_file.empty()) qshear::cli::load_config_file(raw.config_file, cfg);
    // format first so errors in later keys are already reported in the right shape
    if (auto it = raw.values.find("format"); it != raw.values.end()) cfg.apply("format", it->second);
    for (const auto& [key, value] : raw.values) {
      if (key != "preset") cfg.apply(key, value);
    }
    if (raw.allow_large) cfg.allow_large = true;
  } catch (const std::exception& e) {
    if (cfg.format == qshear::cli::OutputFormat::Json) {
      std::cerr << qshear::cli::error_object("config", e.what(), qshear::cli::kExitConfig).dump() << '\n';
    } else {
      std::cerr << "qshear: config error: " << e.what() << '\n';
    }
    return qshear::cli::kExitConfig;
  }
  return qshear::cli::run_command(command, cfg, {std::cout, std::cerr});
}
