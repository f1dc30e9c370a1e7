#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selfosc/dynamics.hpp"
#include "selfosc/model.hpp"
#include "selfosc/transport.hpp"

namespace selfosc {

/// One oscillator and its two baths as written in the config file. Bath
/// order is kept as given; system() canonicalizes it.
struct OscillatorConfig {
  double Omega = 1.0;
  std::array<BathSpec, 2> baths{BathSpec{Statistics::Bosonic, 0.0, 10.0, 0.0},
                                BathSpec{Statistics::Bosonic, 0.0, 10.0, 0.0}};

  SystemSpec system() const;
  bool operator==(const OscillatorConfig&) const = default;
};

struct InitialState {
  double n1 = 0.0, n2 = 0.0;
  double dn1_dt = 0.0, dn2_dt = 0.0;
  bool operator==(const InitialState&) const = default;
};

struct OracleConfig {
  std::size_t modes = 400;
  double w_max_over_gamma = 20.0;
  double t_max = 10.0;
  double tolerance = 0.03;
  bool operator==(const OracleConfig&) const = default;
};

/// `path` uses the config spelling, e.g. "coupling.beta" or "bath.1.alpha".
/// An axis without values does not multiply the sweep.
struct SweepAxis {
  std::string path;
  std::vector<double> values;
  bool operator==(const SweepAxis&) const = default;
};

struct RunConfig {
  /// Preset name (fig1..fig8) or empty for an explicit system.
  std::string scenario;
  OscillatorConfig oscillator;
  std::optional<OscillatorConfig> oscillator2;
  double beta = 0.0;

  double t_max = 20.0;
  double dt = 0.005;
  SecondOrderForm form = SecondOrderForm::FirstIntegral;
  unsigned substeps = 2;
  InitialState initial;

  double rtol = 1e-7;
  double w_max_factor = 20.0;
  int abs_A_power = 2;

  OracleConfig oracle;
  std::vector<SweepAxis> axes;

  std::string output_dir = "out";
  unsigned workers = 1;

  bool coupled() const { return oscillator2.has_value(); }
  SystemSpec system(std::size_t which = 0) const;
  CoupledSpec coupled_spec() const;
  TransportOptions transport() const;
  EvolveOptions evolve_options() const;
  CoupledInit coupled_init() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Reads and validates a config file. Sections:
///   [oscillator] Omega; [bath.1] / [bath.2] statistics, alpha,
///   gamma_over_Omega, kT_over_hOmega; [oscillator2], [bath2.1], [bath2.2];
///   [coupling] beta; [run] scenario, t_max, dt, form, substeps, workers,
///   output; [initial] n1, n2, dn1_dt, dn2_dt; [quadrature] rtol,
///   w_max_factor; [kernel] abs_A_power; [oracle] modes, w_max_over_gamma,
///   t_max, tolerance; [sweep] <parameter path> = v1, v2, ...
/// A `scenario` key (top level or in [run]) loads a preset; physical
/// sections may not be combined with it. Errors carry the line number.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

/// Text that parse_config_text() maps back to an identical RunConfig.
std::string serialize_config(const RunConfig& config);

/// Numeric parameters addressable by sweep axes.
std::vector<std::string> parameter_paths(const RunConfig& config);
/// Sets a numeric parameter by path and clears `scenario`, since the
/// physics no longer matches the preset. Throws ConfigError on unknown paths.
void set_parameter(RunConfig& config, const std::string& path, double value);
double get_parameter(const RunConfig& config, const std::string& path);

std::string to_string(SecondOrderForm form);

}  // namespace selfosc
