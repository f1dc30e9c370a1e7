#pragma once

#include <string>
#include <vector>

#include "selfosc/config.hpp"

namespace selfosc {

/// What a preset emits besides its observables.
enum class ScenarioProduct {
  Coefficients,      // lambda, D, D/lambda of one oscillator
  Trajectory,        // n1(t) of one oscillator
  PairCoefficients,  // lambda, D of both oscillators
  PairTrajectories,  // n1, n2 for each beta of the family
  Energies,          // E1, E2 for each beta
  EnergyDeltas,      // Delta E1,2 and their rates for each beta
};

struct Scenario {
  std::string name;
  std::string description;
  ScenarioProduct product = ScenarioProduct::Coefficients;
  RunConfig config;
  std::vector<double> beta_family;
};

const std::vector<std::string>& scenario_names();
bool is_scenario(const std::string& name);
/// Throws ConfigError for unknown names.
Scenario make_scenario(const std::string& name);

}  // namespace selfosc
