#pragma once

#include <array>
#include <string>
#include <vector>

namespace selfosc {

// Units throughout: hbar = k_B = 1, frequencies in units of the first
// oscillator's renormalized frequency, time in its inverse, temperatures as
// kT/(hbar Omega_1).

enum class Statistics : int { Fermionic = -1, Bosonic = +1 };

inline int sign(Statistics s) { return static_cast<int>(s); }
std::string to_string(Statistics s);
Statistics statistics_from_string(const std::string& name);

struct BathSpec {
  Statistics statistics = Statistics::Bosonic;
  double alpha = 0.0;        // dimensionless coupling strength
  double gamma = 1.0;        // Lorentzian cutoff
  double temperature = 0.0;  // kT / (hbar Omega_1)

  /// Throws DomainError on negative/non-finite parameters.
  void validate() const;
  bool operator==(const BathSpec&) const = default;
};

struct OscillatorSpec {
  double omega_renormalized = 1.0;
  double omega_bare = 1.0;
};

enum class StatisticsMode { AllBosonic, AllFermionic, Mixed };
std::string to_string(StatisticsMode m);

/// One oscillator with its two baths. Build with make_system(), which
/// derives the bare frequency and puts mixed configurations in canonical
/// order (bath 1 fermionic, bath 2 bosonic).
struct SystemSpec {
  OscillatorSpec oscillator;
  std::array<BathSpec, 2> baths;

  StatisticsMode mode() const;
  double Omega() const { return oscillator.omega_renormalized; }
  double omega() const { return oscillator.omega_bare; }

  void validate() const;
  /// Soft diagnostics, e.g. a bath cutoff that is not much larger than the
  /// bare frequency.
  std::vector<std::string> warnings() const;
};

SystemSpec make_system(double Omega, const BathSpec& bath1, const BathSpec& bath2);

/// Copy of `spec` with both baths switched to statistics `s`. Frequencies,
/// couplings, cutoffs and temperatures are kept.
SystemSpec with_statistics(const SystemSpec& spec, Statistics s);

struct CoupledSpec {
  std::array<SystemSpec, 2> systems;
  double beta = 0.0;  // oscillator-oscillator coupling, units of Omega_1^2

  void validate() const;
};

/// 1 / (exp(w/T) - eps); the T = 0 limit is 0.
double equilibrium_occupation(double w, double T, Statistics s);

/// Lorentzian spectral function (1/pi) alpha gamma^2 / (gamma^2 + w^2).
double spectral_density(double w, const BathSpec& bath);

/// omega = Omega + 2 alpha_1 gamma_1 + 2 alpha_2 gamma_2.
double bare_frequency(double Omega, const BathSpec& bath1, const BathSpec& bath2);

/// p = alpha_1 / (alpha_1 + alpha_2).
double mixing_fraction(const BathSpec& bath1, const BathSpec& bath2);

}  // namespace selfosc
