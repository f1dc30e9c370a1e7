#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "selfosc/config.hpp"
#include "selfosc/io.hpp"

namespace selfosc {

/// Files written into one output directory plus the observables that were
/// evaluated. Every bundle has metadata.json and observables.csv.
struct ResultBundle {
  std::filesystem::path directory;
  std::string command;
  std::vector<std::string> files;
  std::vector<Observable> observables;
  std::string metadata_json;

  /// No observable has status "fail".
  bool passed() const;
  const Observable* find(const std::string& name) const;
};

ResultBundle run_coeffs(const RunConfig& config, const std::filesystem::path& out);
ResultBundle run_evolve(const RunConfig& config, const std::filesystem::path& out);
ResultBundle run_coupled(const RunConfig& config, const std::filesystem::path& out);
ResultBundle run_asymptotics(const RunConfig& config, const std::filesystem::path& out);

/// Runs the preset named by config.scenario; run, quadrature and kernel
/// settings come from `config`.
ResultBundle run_scenario(const RunConfig& config, const std::filesystem::path& out);
ResultBundle run_scenario(const std::string& name, const std::filesystem::path& out);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<double> values;
  std::string status;  // ok, failed (an observable failed) or error
  std::string message;
  std::vector<Observable> summary;
};

struct SweepResult {
  std::filesystem::path index_path;
  std::vector<std::string> axes;
  std::vector<SweepPoint> points;
};

/// Cartesian product of the non-empty axes, each point run as `evolve` or
/// `coupled` into out/point_NNNN. Points run on `workers` threads; the index
/// CSV is written once at the end and does not depend on scheduling.
/// Invalid axes throw ConfigError before any point runs.
SweepResult run_sweep(const RunConfig& config, const std::filesystem::path& out);
std::string sweep_index_csv(const SweepResult& result);

enum class Fault { None, LambdaSign };

/// Oracle comparison and invariant suite for the configured system(s).
/// With Fault::LambdaSign the friction series fed to the master equation
/// has its sign flipped, which must make the oracle comparison fail.
ResultBundle run_validate(const RunConfig& config, const std::filesystem::path& out,
                          Fault fault = Fault::None);

}  // namespace selfosc
