#include "selfosc/model.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

}  // namespace

std::string to_string(Statistics s) {
  return s == Statistics::Bosonic ? "bosonic" : "fermionic";
}

Statistics statistics_from_string(const std::string& name) {
  if (name == "bosonic" || name == "b" || name == "+1" || name == "1") return Statistics::Bosonic;
  if (name == "fermionic" || name == "f" || name == "-1") return Statistics::Fermionic;
  throw DomainError("unknown statistics '" + name + "' (expected bosonic|fermionic)");
}

std::string to_string(StatisticsMode m) {
  switch (m) {
    case StatisticsMode::AllBosonic: return "all-bosonic";
    case StatisticsMode::AllFermionic: return "all-fermionic";
    case StatisticsMode::Mixed: return "mixed";
  }
  return "?";
}

void BathSpec::validate() const {
  require_finite(alpha, "alpha");
  require_finite(gamma, "gamma");
  require_finite(temperature, "temperature");
  if (statistics != Statistics::Bosonic && statistics != Statistics::Fermionic)
    throw DomainError("statistics must be +1 or -1");
  // alpha == 0 is admitted as the decoupled limit.
  if (alpha < 0.0) throw DomainError("alpha must be >= 0");
  if (gamma <= 0.0) throw DomainError("gamma must be > 0");
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
}

StatisticsMode SystemSpec::mode() const {
  const auto s1 = baths[0].statistics;
  const auto s2 = baths[1].statistics;
  if (s1 == Statistics::Bosonic && s2 == Statistics::Bosonic) return StatisticsMode::AllBosonic;
  if (s1 == Statistics::Fermionic && s2 == Statistics::Fermionic)
    return StatisticsMode::AllFermionic;
  return StatisticsMode::Mixed;
}

void SystemSpec::validate() const {
  require_finite(oscillator.omega_renormalized, "Omega");
  if (oscillator.omega_renormalized <= 0.0) throw DomainError("Omega must be > 0");
  for (const auto& b : baths) b.validate();
  const double expected = bare_frequency(oscillator.omega_renormalized, baths[0], baths[1]);
  if (std::abs(expected - oscillator.omega_bare) > 1e-12 * expected)
    throw DomainError("omega_bare inconsistent with Omega and bath couplings");
  if (mode() == StatisticsMode::Mixed && baths[0].statistics != Statistics::Fermionic)
    throw DomainError("mixed mode requires bath 1 fermionic and bath 2 bosonic");
}

std::vector<std::string> SystemSpec::warnings() const {
  std::vector<std::string> out;
  for (int i = 0; i < 2; ++i) {
    if (baths[i].alpha > 0.0 && baths[i].gamma < 5.0 * oscillator.omega_bare) {
      out.push_back("bath " + std::to_string(i + 1) + ": gamma=" +
                    std::to_string(baths[i].gamma) + " < 5*omega=" +
                    std::to_string(5.0 * oscillator.omega_bare) +
                    " (fast-bath regime not satisfied)");
    }
  }
  return out;
}

SystemSpec make_system(double Omega, const BathSpec& bath1, const BathSpec& bath2) {
  SystemSpec spec;
  spec.baths = {bath1, bath2};
  if (bath1.statistics == Statistics::Bosonic && bath2.statistics == Statistics::Fermionic)
    std::swap(spec.baths[0], spec.baths[1]);
  for (const auto& b : spec.baths) b.validate();
  require_finite(Omega, "Omega");
  if (Omega <= 0.0) throw DomainError("Omega must be > 0");
  spec.oscillator.omega_renormalized = Omega;
  spec.oscillator.omega_bare = bare_frequency(Omega, spec.baths[0], spec.baths[1]);
  return spec;
}

SystemSpec with_statistics(const SystemSpec& spec, Statistics s) {
  SystemSpec out = spec;
  out.baths[0].statistics = s;
  out.baths[1].statistics = s;
  return out;
}

void CoupledSpec::validate() const {
  for (const auto& s : systems) s.validate();
  require_finite(beta, "beta");
  if (beta < 0.0) throw DomainError("beta must be >= 0");
}

double equilibrium_occupation(double w, double T, Statistics s) {
  require_finite(w, "w");
  require_finite(T, "T");
  if (w <= 0.0) throw DomainError("equilibrium_occupation requires w > 0");
  if (T < 0.0) throw DomainError("temperature must be >= 0");
  if (T == 0.0) return 0.0;
  const double x = w / T;
  if (s == Statistics::Bosonic) return 1.0 / std::expm1(x);
  return 1.0 / (std::exp(x) + 1.0);
}

double spectral_density(double w, const BathSpec& bath) {
  require_finite(w, "w");
  if (w < 0.0) throw DomainError("spectral_density requires w >= 0");
  const double g2 = bath.gamma * bath.gamma;
  return bath.alpha * g2 / (g2 + w * w) / std::numbers::pi;
}

double bare_frequency(double Omega, const BathSpec& bath1, const BathSpec& bath2) {
  return Omega + 2.0 * bath1.alpha * bath1.gamma + 2.0 * bath2.alpha * bath2.gamma;
}

double mixing_fraction(const BathSpec& bath1, const BathSpec& bath2) {
  const double total = bath1.alpha + bath2.alpha;
  if (!(total > 0.0)) throw DomainError("mixing_fraction: both couplings are zero");
  return bath1.alpha / total;
}

}  // namespace selfosc
