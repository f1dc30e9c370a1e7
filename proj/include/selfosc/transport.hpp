#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "selfosc/kernels.hpp"
#include "selfosc/model.hpp"

namespace selfosc {

struct TransportOptions {
  double quadrature_rtol = 1e-7;
  /// w_max = factor * max(gamma_max, 2 omega, T_max).
  double w_max_factor = 20.0;
  /// Power of |A| in the friction kernel ln[|A|^p + eps |B|^2].
  int abs_A_power = 2;
  double ratio_floor = 1e-6;
  std::size_t max_panels = 400000;
  /// Worker threads for independent grid times; results do not depend on it.
  unsigned workers = 1;

  void validate() const;
};

/// Uniform grid t_i = i * dt, i = 0..steps.
struct TimeGrid {
  double dt = 0.005;
  std::size_t steps = 0;

  static TimeGrid covering(double t_max, double dt);
  double time(std::size_t i) const { return dt * static_cast<double>(i); }
  double t_max() const { return time(steps); }
  std::size_t size() const { return steps + 1; }
};

/// I^(lambda)(t) and its time derivative, with the quadrature error
/// estimate of the value.
struct BathIntegral {
  double value = 0.0;
  double rate = 0.0;
  double error = 0.0;
};

/// Friction/diffusion coefficients on a uniform grid.
///
/// For a same-statistics system lambda/diffusion are lambda_a, D_a and the
/// per-bath arrays hold D^(l), I^(l), J^(l). In mixed mode lambda/diffusion
/// are the combined lambda_1, D_1; partial_diffusion holds D_f^(1) and
/// D_b^(2); bath_integrals holds I_f^(1) and I_b^(2); lambda_f/lambda_b hold
/// the constituent frictions.
struct CoefficientSeries {
  StatisticsMode mode = StatisticsMode::AllBosonic;
  TimeGrid grid;
  double mixing_fraction = 1.0;

  std::vector<double> time;
  std::vector<double> lambda;
  std::vector<double> diffusion;
  std::array<std::vector<double>, 2> partial_diffusion;
  std::array<std::vector<double>, 2> bath_integrals;
  std::array<std::vector<double>, 2> bath_integral_rates;
  std::array<std::vector<double>, 2> J_parts;
  /// D / lambda, NaN where |lambda| < ratio_floor.
  std::vector<double> ratio;
  std::vector<double> lambda_f, lambda_b;

  double max_quadrature_error = 0.0;

  std::size_t size() const { return time.size(); }
};

double w_max(const SystemSpec& spec, double factor = 20.0);

/// I^(bath)(t) using the statistics of spec.baths[bath]; bath is 0 or 1.
BathIntegral bath_integral_I(const KernelSet& kernels, int bath, double t,
                             const TransportOptions& opt = {});
/// Same integral with the statistics overridden.
BathIntegral bath_integral_I(const KernelSet& kernels, int bath, Statistics stats, double t,
                             const TransportOptions& opt = {});

/// Friction and diffusion for a system whose baths share statistics.
CoefficientSeries same_statistics_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                               const TransportOptions& opt = {});

/// Mixed fermionic-bosonic combination
///   lambda_1 = p lambda_f + (1 - p) lambda_b - 2 D_f^(1),
///   D_1 = D_f^(1) + D_b^(2).
CoefficientSeries mixed_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                     const TransportOptions& opt = {});

/// Dispatches on spec.mode(). With both couplings zero it returns the exact
/// decoupled series lambda = D = 0 without touching the roots.
CoefficientSeries compute_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                       const TransportOptions& opt = {});

/// t -> infinity limit of I^(bath) for the given statistics.
double asymptotic_bath_integral(const SystemSpec& spec, int bath, Statistics stats,
                                const TransportOptions& opt = {});
/// Uses the statistics of spec.baths[bath].
double asymptotic_bath_integral(const SystemSpec& spec, int bath,
                                const TransportOptions& opt = {});

/// Weak-coupling, high-temperature limit p n1(omega,T1) + (1-p) n2(omega,T2).
double markovian_asymptote(const SystemSpec& spec);

/// r = I_b2 / (1 - p) - (I_f1 / p) / (1 - 2 I_f1 / p). r = 0 is the
/// condition for a stationary D_1/lambda_1 in mixed mode.
double stationarity_residual(double p, double I_f1, double I_b2);
double stationarity_condition_residual(const SystemSpec& spec, const TransportOptions& opt = {});

}  // namespace selfosc
