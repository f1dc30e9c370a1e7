#include "selfosc/scenarios.hpp"

#include <algorithm>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

BathSpec bath(Statistics s, double alpha, double gamma, double T) { return {s, alpha, gamma, T}; }

constexpr auto F = Statistics::Fermionic;
constexpr auto B = Statistics::Bosonic;

// Caption of the first figure: gamma_1/Omega_1 = 10, gamma_2/Omega_1 = 15,
// alpha_1 = 0.1, alpha_2 = 0.05, kT_1 = 1, kT_2 = 0.1 (fermionic, bosonic).
// The occupation-number figure that follows uses the same set with n1(0) = 0.
RunConfig single_mixed() {
  RunConfig c;
  c.oscillator.Omega = 1.0;
  c.oscillator.baths = {bath(F, 0.1, 10.0, 1.0), bath(B, 0.05, 15.0, 0.1)};
  c.t_max = 20.0;
  return c;
}

// Two-oscillator caption: gamma/Omega_1 = 12 for all baths, alpha = 0.03,
// kT/Omega_1 = 0.5, Omega_2/Omega_1 = 2; each oscillator sees a fermionic and
// a bosonic bath. Coupling strengths beta = 0.01, 0.03, 0.1, 0.6.
RunConfig pair_mixed() {
  RunConfig c;
  c.oscillator.Omega = 1.0;
  c.oscillator.baths = {bath(F, 0.03, 12.0, 0.5), bath(B, 0.03, 12.0, 0.5)};
  OscillatorConfig o2;
  o2.Omega = 2.0;
  o2.baths = {bath(F, 0.03, 12.0, 0.5), bath(B, 0.03, 12.0, 0.5)};
  c.oscillator2 = o2;
  c.beta = 0.1;
  c.t_max = 20.0;
  return c;
}

// Mixed/bosonic pair caption: Omega_1 = Omega_2; oscillator 1 with fermionic
// and bosonic baths, gamma/Omega = 12, kT = 0.1 and 1, alpha = 0.03 each;
// oscillator 2 with two bosonic baths, gamma/Omega = 12 and 15, kT = 1 and
// 0.1, alpha = 0.05 and 0.03.
RunConfig pair_mixed_bosonic() {
  RunConfig c;
  c.oscillator.Omega = 1.0;
  c.oscillator.baths = {bath(F, 0.03, 12.0, 0.1), bath(B, 0.03, 12.0, 1.0)};
  OscillatorConfig o2;
  o2.Omega = 1.0;
  o2.baths = {bath(B, 0.05, 12.0, 1.0), bath(B, 0.03, 15.0, 0.1)};
  c.oscillator2 = o2;
  c.beta = 0.1;
  c.t_max = 20.0;
  return c;
}

const std::vector<double> kBetaFamily{0.01, 0.03, 0.1, 0.6};

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4",
                                              "fig5", "fig6", "fig7", "fig8"};
  return names;
}

bool is_scenario(const std::string& name) {
  const auto& n = scenario_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

Scenario make_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "fig1") {
    s.description = "friction, diffusion and their ratio for the mixed-bath oscillator";
    s.product = ScenarioProduct::Coefficients;
    s.config = single_mixed();
  } else if (name == "fig2") {
    s.description = "occupation number of the mixed-bath oscillator, n1(0) = 0";
    s.product = ScenarioProduct::Trajectory;
    s.config = single_mixed();
    // Long enough to see the oscillation persist well past the plotted range.
    s.config.t_max = 50.0;
  } else if (name == "fig3") {
    s.description = "friction and diffusion of two mixed-bath oscillators, Omega2 = 2 Omega1";
    s.product = ScenarioProduct::PairCoefficients;
    s.config = pair_mixed();
  } else if (name == "fig4") {
    s.description = "occupation numbers of the coupled mixed-bath pair for several beta";
    s.product = ScenarioProduct::PairTrajectories;
    s.config = pair_mixed();
    s.beta_family = kBetaFamily;
  } else if (name == "fig5") {
    s.description = "friction and diffusion of a mixed-bath and a bosonic-bath oscillator";
    s.product = ScenarioProduct::PairCoefficients;
    s.config = pair_mixed_bosonic();
  } else if (name == "fig6") {
    s.description = "occupation numbers of the mixed/bosonic pair for several beta";
    s.product = ScenarioProduct::PairTrajectories;
    s.config = pair_mixed_bosonic();
    s.beta_family = kBetaFamily;
  } else if (name == "fig7") {
    s.description = "dissipation energies of the mixed/bosonic pair for several beta";
    s.product = ScenarioProduct::Energies;
    s.config = pair_mixed_bosonic();
    s.beta_family = kBetaFamily;
  } else if (name == "fig8") {
    s.description = "coupling-induced change of the dissipation energies and its rate";
    s.product = ScenarioProduct::EnergyDeltas;
    s.config = pair_mixed_bosonic();
    s.beta_family = kBetaFamily;
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected fig1..fig8)");
  }
  s.config.scenario = name;
  return s;
}

}  // namespace selfosc
