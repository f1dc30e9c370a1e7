// Command-line front end: coefficient series, trajectories, presets, sweeps
// and the validation harness. Exit codes: 0 ok, 2 config error, 3 numerical
// failure, 4 a checked observable failed.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "selfosc/config.hpp"
#include "selfosc/errors.hpp"
#include "selfosc/run.hpp"
#include "selfosc/scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kValidationFailure = 4;

struct Globals {
  std::string config_path;
  std::string out;
  unsigned workers = 0;
  double rtol = 0.0;
  double t_max = 0.0;
  double dt = 0.0;
};

selfosc::RunConfig load(const Globals& g, bool required) {
  selfosc::RunConfig cfg;
  if (!g.config_path.empty())
    cfg = selfosc::parse_config(g.config_path);
  else if (required)
    throw selfosc::ConfigError("--config is required for this command");
  if (g.workers) cfg.workers = g.workers;
  if (g.rtol > 0.0) cfg.rtol = g.rtol;
  if (g.t_max > 0.0) cfg.t_max = g.t_max;
  if (g.dt > 0.0) cfg.dt = g.dt;
  if (!g.out.empty()) cfg.output_dir = g.out;
  cfg.validate();
  return cfg;
}

int report(const selfosc::ResultBundle& b) {
  for (const auto& o : b.observables)
    std::printf("%-48s %-24s %s\n", o.name.c_str(), selfosc::format_number(o.value).c_str(),
                o.status.c_str());
  std::printf("wrote %zu files to %s\n", b.files.size(), b.directory.string().c_str());
  return b.passed() ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupation-number dynamics of oscillators coupled to fermionic and bosonic baths"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file");
  app.add_option("--out", g.out, "Output directory (overrides [run] output)");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--rtol", g.rtol, "Quadrature relative tolerance")->check(CLI::PositiveNumber);
  app.add_option("--t-max", g.t_max, "Override [run] t_max")->check(CLI::PositiveNumber);
  app.add_option("--dt", g.dt, "Override [run] dt")->check(CLI::PositiveNumber);

  auto* coeffs = app.add_subcommand("coeffs", "Friction and diffusion coefficient series");
  auto* evolve = app.add_subcommand("evolve", "Occupation number of a single oscillator");
  auto* coupled = app.add_subcommand("coupled", "Two coupled oscillators and dissipation energies");
  auto* asym = app.add_subcommand("asymptotics", "Roots and large-time limits");
  auto* scenario = app.add_subcommand("scenario", "Run a figure preset");
  std::string scenario_name;
  scenario->add_option("name", scenario_name, "fig1..fig8")
      ->required()
      ->check(CLI::IsMember(selfosc::scenario_names()));
  auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep over [sweep] axes");
  auto* validate = app.add_subcommand("validate", "Oracle comparison and invariant suite");
  std::string fault = "none";
  validate->add_option("--inject-fault", fault, "Corrupt the run on purpose")
      ->check(CLI::IsMember({"none", "lambda_sign"}));
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*scenario) {
      selfosc::RunConfig cfg = selfosc::make_scenario(scenario_name).config;
      if (!g.config_path.empty()) {
        // Run settings from the file, physics from the preset.
        const auto user = selfosc::parse_config(g.config_path);
        if (!user.scenario.empty() && user.scenario != scenario_name)
          throw selfosc::ConfigError("config selects scenario '" + user.scenario +
                                     "', command line selects '" + scenario_name + "'");
        cfg.t_max = user.t_max;
        cfg.dt = user.dt;
        cfg.form = user.form;
        cfg.substeps = user.substeps;
        cfg.initial = user.initial;
        cfg.rtol = user.rtol;
        cfg.w_max_factor = user.w_max_factor;
        cfg.abs_A_power = user.abs_A_power;
        cfg.oracle = user.oracle;
        cfg.output_dir = user.output_dir;
        cfg.workers = user.workers;
      }
      if (g.workers) cfg.workers = g.workers;
      if (g.rtol > 0.0) cfg.rtol = g.rtol;
      if (g.t_max > 0.0) cfg.t_max = g.t_max;
      if (g.dt > 0.0) cfg.dt = g.dt;
      if (!g.out.empty()) cfg.output_dir = g.out;
      return report(selfosc::run_scenario(cfg, cfg.output_dir));
    }
    const auto cfg = load(g, true);
    if (*coeffs) return report(selfosc::run_coeffs(cfg, cfg.output_dir));
    if (*evolve) return report(selfosc::run_evolve(cfg, cfg.output_dir));
    if (*coupled) return report(selfosc::run_coupled(cfg, cfg.output_dir));
    if (*asym) return report(selfosc::run_asymptotics(cfg, cfg.output_dir));
    if (*validate) {
      const auto f = fault == "lambda_sign" ? selfosc::Fault::LambdaSign : selfosc::Fault::None;
      return report(selfosc::run_validate(cfg, cfg.output_dir, f));
    }
    if (*sweep) {
      const auto r = selfosc::run_sweep(cfg, cfg.output_dir);
      int code = kOk;
      for (const auto& p : r.points) {
        std::printf("point_%04zu %s%s%s\n", p.index, p.status.c_str(), p.message.empty() ? "" : " ",
                    p.message.c_str());
        if (p.status == "error") code = kNumericalError;
        else if (p.status == "failed" && code == kOk) code = kValidationFailure;
      }
      std::printf("index: %s\n", r.index_path.string().c_str());
      return code;
    }
  } catch (const selfosc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const selfosc::DomainError& e) {
    std::fprintf(stderr, "invalid parameters: %s\n", e.what());
    return kConfigError;
  } catch (const selfosc::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
