#pragma once

#include <array>
#include <complex>

#include "selfosc/model.hpp"

namespace selfosc {

using cdouble = std::complex<double>;

/// Roots of the characteristic quartic
///   (s^2 + omega Omega)(s + g1)(s + g2)
///     + 2 s omega [a1 g1 (s + g2) + a2 g2 (s + g1)] = 0
/// together with the four-node divided-difference weights
///   xi'_k = prod_{i != k} 1 / (s_k - s_i).
struct RootSet {
  std::array<cdouble, 4> roots{};
  std::array<cdouble, 4> xi_prime{};
  /// Monic coefficients, highest degree first: s^4 + c1 s^3 + ... + c4.
  std::array<double, 5> quartic_coefficients{};

  cdouble quartic(cdouble s) const;
  cdouble quartic_derivative(cdouble s) const;
  /// Largest real part; the slowest decay rate is -max_real_part().
  double max_real_part() const;
};

std::array<double, 5> quartic_coefficients(const SystemSpec& spec);

/// Companion-matrix eigenvalues polished by Newton iteration.
///
/// Roots are returned sorted by (real, imag) with exact conjugate pairing.
/// Throws InstabilityError if any root has a positive real part (purely
/// imaginary roots of the decoupled oscillator are admitted), and
/// DegeneracyError if two roots are closer than 1e-8 * max|s|.
RootSet characteristic_roots(const SystemSpec& spec);

/// A(t), B(t) and the bath-resolved parts B_1, B_2, with first time
/// derivatives.
struct Amplitudes {
  cdouble A, B;
  std::array<cdouble, 2> B_parts;
  cdouble dA, dB;
  std::array<cdouble, 2> dB_parts;
};

/// Bath-mode propagators M(w,t), N(w,t) and their time derivatives.
struct Propagators {
  cdouble M, N, dM, dN;
};

/// Exact split of the propagators into the stationary s_0 term and the
/// decaying root terms:
///   M = RM(w) e^{-iwt} + TM(w,t),  dM/dt = -iw RM e^{-iwt} + dTM,
/// and likewise for N. `mu`, `nu` are dTM + iw TM and dTN + iw TN, which do
/// not depend on w.
struct PropagatorParts {
  cdouble RM, RN;
  cdouble TM, TN, dTM, dTN;
  cdouble mu, nu;
};

/// Precomputed exponential-sum coefficients for one RootSet.
///
/// All kernels are sums over the characteristic roots s_k (plus, for M and
/// N, the extra node s_0 = -i w):
///   A(t) = sum_k xi'_k e^{s_k t} [(s_k - i omega) G(s_k) + i h(s_k)]
///   B(t) = -i sum_k xi'_k e^{s_k t} h(s_k)
/// with G(s) = (s + g1)(s + g2) and h(s) = a1 g1^2 (s + g2) + a2 g2^2 (s + g1).
/// The A expression is the pole-free equivalent of
///   i sum_k xi'_k e^{s_k t} (s_k - i omega)/(s_k + i omega) h(s_k),
/// available as amplitude_A_pole_form() for cross-checking.
class KernelSet {
 public:
  KernelSet(const RootSet& roots, const SystemSpec& spec);

  /// e^{s_k t} for the four roots, optionally multiplied by e^{-shift t}.
  struct TimeFactors {
    double t = 0.0;
    std::array<cdouble, 4> exp_st{};
  };
  TimeFactors time_factors(double t, double shift = 0.0) const;

  /// Amplitudes at time t. With shift != 0 every amplitude is multiplied by
  /// e^{-shift t} (used to keep exponentially decaying moduli in range).
  Amplitudes amplitudes(double t, double shift = 0.0) const;
  cdouble amplitude_A_pole_form(double t) const;

  Propagators propagators(double w, double t) const;
  Propagators propagators(double w, const TimeFactors& tf) const;
  PropagatorParts propagator_parts(double w, const TimeFactors& tf) const;

  /// Root-term coefficients of TM and TN: TM = sum_k m_k e^{s_k t}/(s_k + iw).
  const std::array<cdouble, 4>& m_coefficients() const { return m_coef_; }
  const std::array<cdouble, 4>& n_coefficients() const { return n_coef_; }

  /// t -> infinity modulus squares |M|^2 and |N|^2 (only the s_0 node
  /// survives).
  std::array<double, 2> stationary_moduli(double w) const;

  const RootSet& roots() const { return roots_; }
  const SystemSpec& spec() const { return spec_; }

 private:
  RootSet roots_;
  SystemSpec spec_;
  double omega_;
  double g1_, g2_;
  std::array<cdouble, 4> a_coef_{}, b_coef_{}, m_coef_{}, n_coef_{};
  std::array<std::array<cdouble, 4>, 2> bpart_coef_{};
  std::array<cdouble, 4> apole_coef_{};
};

Amplitudes amplitudes_AB(const RootSet& roots, const SystemSpec& spec, double t);
Propagators propagators_MN(const RootSet& roots, const SystemSpec& spec, double w, double t);

}  // namespace selfosc
