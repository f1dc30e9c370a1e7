#pragma once

#include <array>
#include <string>
#include <vector>

#include "selfosc/model.hpp"
#include "selfosc/transport.hpp"

namespace selfosc {

/// Occupation numbers (one or two channels) on a uniform grid.
struct Trajectory {
  TimeGrid grid;
  std::vector<double> time;
  std::vector<std::vector<double>> n;
  std::vector<std::vector<double>> dn_dt;
  /// Short description of the coefficient series that drove the run.
  std::string source;

  std::size_t channels() const { return n.size(); }
  std::size_t size() const { return time.size(); }
};

/// Piecewise cubic interpolation of a series on a uniform grid: on cell
/// [t_i, t_{i+1}] the 4-point Lagrange polynomial through t_{i-1}..t_{i+2}
/// (shifted inward at the ends). `cell` pins the piece; by default it is the
/// cell containing t.
class SeriesInterpolant {
 public:
  static constexpr std::size_t kAutoCell = static_cast<std::size_t>(-1);

  SeriesInterpolant(double dt, const std::vector<double>& values);
  double operator()(double t, std::size_t cell = kAutoCell) const;
  double derivative(double t, std::size_t cell = kAutoCell) const;

 private:
  std::size_t stencil(double t, std::size_t cell) const;
  double dt_;
  const std::vector<double>* values_;
};

struct EvolveOptions {
  /// RK4 steps per coefficient-grid interval.
  unsigned substeps = 2;
};

/// How the second-order equations are integrated.
///   FirstIntegral: state (n, y) with y = dn/dt + 2 lambda n - 2 D, for which
///     dy/dt = 0 (single) or -beta (n_1 - n_2) (coupled). Needs no derivatives
///     of lambda or D.
///   Explicit: state (n, dn/dt) with d lambda/dt and dD/dt taken from the
///     derivative of the cubic interpolant of the coefficient series.
enum class SecondOrderForm { FirstIntegral, Explicit };

/// dn/dt = -2 lambda n + 2 D with fixed-step RK4.
Trajectory evolve_single(const CoefficientSeries& coeffs, double n0, double t_max,
                         const EvolveOptions& opt = {});

/// d^2n/dt^2 + 2 lambda dn/dt + 2 (d lambda/dt) n = 2 dD/dt.
Trajectory evolve_single_second_order(const CoefficientSeries& coeffs, double n0, double dn0,
                                      double t_max,
                                      SecondOrderForm form = SecondOrderForm::FirstIntegral,
                                      const EvolveOptions& opt = {});

struct CoupledInit {
  std::array<double, 2> n{0.0, 0.0};
  std::array<double, 2> dn{0.0, 0.0};
};

/// Two oscillators coupled through beta (n_1 - n_2) added to the second-order
/// equation of oscillator 1 and beta (n_2 - n_1) to that of oscillator 2.
Trajectory evolve_coupled(const CoupledSpec& spec, const CoefficientSeries& c1,
                          const CoefficientSeries& c2, const CoupledInit& init, double t_max,
                          SecondOrderForm form = SecondOrderForm::FirstIntegral,
                          const EvolveOptions& opt = {});

/// E(t) = 2 Omega int_0^t lambda n dt' by the trapezoid rule on the grid.
std::vector<double> dissipation_energy(const Trajectory& traj, const CoefficientSeries& coeffs,
                                       double Omega, std::size_t channel = 0);

struct DeltaDissipation {
  std::vector<double> time;
  std::array<std::vector<double>, 2> energy;      // E(beta, t)
  std::array<std::vector<double>, 2> reference;   // E(beta = 0, t)
  std::array<std::vector<double>, 2> delta;       // E(beta) - E(0)
  std::array<std::vector<double>, 2> rate;        // windowed d(delta)/dt
  double window = 0.0;
};

/// Runs the coupled system and its beta = 0 reference on the same series.
/// The rate is a centred difference over a window of one period 2 pi/Omega_1
/// (shrunk near the ends of the grid).
DeltaDissipation delta_dissipation(const CoupledSpec& spec, const CoefficientSeries& c1,
                                   const CoefficientSeries& c2, double t_max,
                                   const CoupledInit& init = {},
                                   SecondOrderForm form = SecondOrderForm::FirstIntegral);
/// Computes both coefficient series first.
DeltaDissipation delta_dissipation(const CoupledSpec& spec, double t_max, double dt,
                                   const TransportOptions& opt = {});

/// Mean of |values| over the window.
double window_mean_abs(const std::vector<double>& time, const std::vector<double>& values,
                       double t_a, double t_b);

struct PeriodEstimate {
  double period = 0.0;
  double period_std = 0.0;
  double spectral_period = 0.0;
  /// Zero-crossing and spectral estimates differ by more than 5%.
  bool low_confidence = false;
  std::size_t crossings = 0;
};

/// Period from upward zero crossings of the mean-detrended series over
/// [t_a, t_b], cross-checked against the peak of its discrete spectrum.
/// Throws InsufficientDataError with fewer than 3 crossings.
PeriodEstimate estimate_period(const std::vector<double>& time, const std::vector<double>& values,
                               double t_a, double t_b);

struct Stationarity {
  bool stationary = true;
  double variation = 0.0;
};

/// (max - min) / max(|mean|, floor) over the window; non-finite samples are
/// skipped.
Stationarity detect_stationarity(const std::vector<double>& time,
                                 const std::vector<double>& values, double t_a, double t_b,
                                 double tol = 0.01, double floor = 1e-12);

/// Values of `series` at the interior local maxima of `lambda` in [t_a, t_b].
std::vector<double> sample_at_maxima(const std::vector<double>& time,
                                     const std::vector<double>& lambda,
                                     const std::vector<double>& series, double t_a, double t_b);

enum class Detrend { Mean, Linear };

/// Pearson correlation of the two detrended channels over the window.
/// Throws NumericalError if either channel has zero variance.
double antiphase_metric(const std::vector<double>& time, const std::vector<double>& n1,
                        const std::vector<double>& n2, double t_a, double t_b,
                        Detrend detrend = Detrend::Mean);

/// Sum over baths of the t -> infinity bath integrals of a same-statistics
/// system.
double asymptotic_occupation(const SystemSpec& spec, const TransportOptions& opt = {});

}  // namespace selfosc
