#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <vector>

#include "selfosc/dynamics.hpp"
#include "selfosc/model.hpp"

namespace selfosc {

/// A Lorentzian bath replaced by N modes on the uniform midpoint grid
/// w_i = (i - 1/2) dw, dw = w_max / N, with
///   alpha_i^2 = w_i dw (1/pi) alpha gamma^2 / (gamma^2 + w_i^2).
struct DiscretizedBath {
  Statistics statistics = Statistics::Bosonic;
  double dw = 0.0;
  std::vector<double> frequencies;
  std::vector<double> couplings;
  std::vector<double> occupations;

  std::size_t size() const { return frequencies.size(); }
  /// 2 pi / dw; a finite bath revives after this time.
  double recurrence_time() const;
};

/// Requires N >= 50 and w_max >= 10 gamma.
DiscretizedBath sample_bath(const BathSpec& bath, std::size_t N, double w_max);

/// (1/pi) alpha gamma atan(w_max/gamma): the integral that sum_i alpha_i^2 / w_i
/// approximates on [0, w_max].
double truncated_coupling_sum(const BathSpec& bath, double w_max);

struct ExactOptions {
  /// Integration step h = step_factor / (largest mode frequency).
  double step_factor = 0.05;
  std::size_t max_modes = 2000;
  /// Initial oscillator occupation.
  double n0 = 0.0;
};

struct ExactSeries {
  std::vector<double> time;
  std::vector<double> n;
  double recurrence_time = 0.0;
};

/// Exact oscillator occupation for the oscillator coupled to two discretized
/// bosonic baths through (a + a^dagger)(c_i + c_i^dagger).
///
/// a(t) = sum_j r_j(t) phi_j(0) over phi = (a, a^dagger, c_i, c_i^dagger, ...);
/// the row r obeys dr/dt = r L with L the Heisenberg generator, and for the
/// diagonal initial state n(t) = sum_j |r_j|^2 <phi_j^dagger phi_j>(0).
/// Output is sampled every dt_out.
ExactSeries evolve_exact(const SystemSpec& spec, const std::array<DiscretizedBath, 2>& baths,
                         double t_max, double dt_out, const ExactOptions& opt = {});

enum class CouplingForm { Full, RotatingWave };

/// d phi / dt = L phi for the operator vector phi.
Eigen::MatrixXcd heisenberg_generator(const SystemSpec& spec,
                                      const std::array<DiscretizedBath, 2>& baths,
                                      CouplingForm form = CouplingForm::Full);

/// Second moments S_jk = <phi_j^dagger phi_k> over the full operator vector.
class MomentState {
 public:
  /// Oscillator with occupation n0, baths thermal.
  static MomentState initial(const std::array<DiscretizedBath, 2>& baths, double n0);

  /// dS/dt = conj(L) S + S L^T, RK4 with the given step.
  void evolve(const Eigen::MatrixXcd& L, double duration, double step);

  double oscillator_occupation() const;
  /// Sum of <a^dagger a> and all <c_i^dagger c_i>.
  double total_excitation() const;
  /// max |S - S^dagger|.
  double hermiticity_defect() const;
  /// Smallest occupation entry <phi^dagger phi> over annihilation operators.
  double min_occupation() const;

  const Eigen::MatrixXcd& matrix() const { return S_; }

 private:
  Eigen::MatrixXcd S_;
};

struct Comparison {
  double max_deviation = 0.0;
  double mean_deviation = 0.0;
  double worst_time = 0.0;
  std::size_t samples = 0;
};

/// Deviation |a - b| on the samples of a inside the common window, with b
/// interpolated linearly. Throws DomainError if the windows do not overlap.
Comparison compare(const std::vector<double>& time_a, const std::vector<double>& a,
                   const std::vector<double>& time_b, const std::vector<double>& b);
Comparison compare(const Trajectory& master, const ExactSeries& exact, std::size_t channel = 0);

}  // namespace selfosc
