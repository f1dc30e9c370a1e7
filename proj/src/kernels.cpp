#include "selfosc/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

constexpr cdouble kI{0.0, 1.0};

std::string format_root(cdouble s) {
  std::ostringstream os;
  os.precision(12);
  os << s.real() << (s.imag() < 0 ? " - " : " + ") << std::abs(s.imag()) << "i";
  return os.str();
}

cdouble newton_polish(const RootSet& rs, cdouble s) {
  for (int iter = 0; iter < 60; ++iter) {
    const cdouble dq = rs.quartic_derivative(s);
    if (dq == 0.0) break;
    const cdouble step = rs.quartic(s) / dq;
    s -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) break;
  }
  return s;
}

}  // namespace

cdouble RootSet::quartic(cdouble s) const {
  cdouble acc = quartic_coefficients[0];
  for (std::size_t i = 1; i < 5; ++i) acc = acc * s + quartic_coefficients[i];
  return acc;
}

cdouble RootSet::quartic_derivative(cdouble s) const {
  cdouble acc = 4.0 * quartic_coefficients[0];
  for (std::size_t i = 1; i < 4; ++i)
    acc = acc * s + static_cast<double>(4 - i) * quartic_coefficients[i];
  return acc;
}

double RootSet::max_real_part() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : roots) m = std::max(m, s.real());
  return m;
}

std::array<double, 5> quartic_coefficients(const SystemSpec& spec) {
  const double w = spec.omega();
  const double W = spec.Omega();
  const auto& b1 = spec.baths[0];
  const auto& b2 = spec.baths[1];
  const double g1 = b1.gamma, g2 = b2.gamma;
  const double a1 = b1.alpha, a2 = b2.alpha;
  // (s^2 + w W)(s^2 + (g1+g2) s + g1 g2)
  //   + 2 w [(a1 g1 + a2 g2) s^2 + g1 g2 (a1 + a2) s]
  return {1.0,
          g1 + g2,
          g1 * g2 + w * W + 2.0 * w * (a1 * g1 + a2 * g2),
          w * W * (g1 + g2) + 2.0 * w * g1 * g2 * (a1 + a2),
          w * W * g1 * g2};
}

RootSet characteristic_roots(const SystemSpec& spec) {
  spec.validate();
  RootSet rs;
  rs.quartic_coefficients = quartic_coefficients(spec);
  const auto& c = rs.quartic_coefficients;

  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int j = 0; j < 4; ++j) companion(0, j) = -c[j + 1];
  for (int i = 1; i < 4; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");

  std::array<cdouble, 4> raw;
  for (int k = 0; k < 4; ++k) raw[k] = newton_polish(rs, solver.eigenvalues()(k));

  double scale = 0.0;
  for (const auto& s : raw) scale = std::max(scale, std::abs(s));
  const double imag_tol = 1e-9 * scale;

  // Enforce exact conjugate closure: upper-half-plane roots keep their
  // polished value, their partners become exact conjugates, near-real roots
  // become real.
  std::array<bool, 4> used{};
  std::vector<cdouble> out;
  for (int k = 0; k < 4; ++k) {
    if (used[k] || raw[k].imag() <= imag_tol) continue;
    used[k] = true;
    int partner = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      if (used[j] || raw[j].imag() >= -imag_tol) continue;
      const double d = std::abs(raw[j] - std::conj(raw[k]));
      if (d < best) best = d, partner = j;
    }
    if (partner < 0) throw NumericalError("complex root without conjugate partner");
    used[partner] = true;
    out.push_back(raw[k]);
    out.push_back(std::conj(raw[k]));
  }
  for (int k = 0; k < 4; ++k) {
    if (used[k]) continue;
    if (std::abs(raw[k].imag()) > imag_tol)
      throw NumericalError("complex root without conjugate partner");
    // Real root: re-polish in real arithmetic.
    double x = raw[k].real();
    for (int iter = 0; iter < 60; ++iter) {
      const double q = rs.quartic(x).real();
      const double dq = rs.quartic_derivative(x).real();
      if (dq == 0.0) break;
      const double step = q / dq;
      x -= step;
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
    }
    out.emplace_back(x, 0.0);
  }
  std::sort(out.begin(), out.end(), [](cdouble a, cdouble b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::copy(out.begin(), out.end(), rs.roots.begin());

  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  for (const auto& s : rs.roots) {
    if (std::abs(rs.quartic(s)) > 1e-9 * cmax)
      throw NumericalError("root residual too large at s = " + format_root(s));
  }
  for (int j = 0; j < 4; ++j)
    for (int k = j + 1; k < 4; ++k)
      if (std::abs(rs.roots[j] - rs.roots[k]) < 1e-8 * scale)
        throw DegeneracyError("near-degenerate characteristic roots " +
                              format_root(rs.roots[j]) + " and " + format_root(rs.roots[k]));
  for (const auto& s : rs.roots) {
    if (s.real() > 1e-10 * scale)
      throw InstabilityError("unstable characteristic root s = " + format_root(s));
  }

  for (int k = 0; k < 4; ++k) {
    cdouble prod = 1.0;
    for (int i = 0; i < 4; ++i)
      if (i != k) prod *= rs.roots[k] - rs.roots[i];
    rs.xi_prime[k] = 1.0 / prod;
  }
  return rs;
}

KernelSet::KernelSet(const RootSet& roots, const SystemSpec& spec)
    : roots_(roots), spec_(spec), omega_(spec.omega()),
      g1_(spec.baths[0].gamma), g2_(spec.baths[1].gamma) {
  const double a1 = spec.baths[0].alpha, a2 = spec.baths[1].alpha;
  for (int k = 0; k < 4; ++k) {
    const cdouble s = roots_.roots[k];
    const cdouble xi = roots_.xi_prime[k];
    const cdouble G = (s + g1_) * (s + g2_);
    const cdouble h1 = a1 * g1_ * g1_ * (s + g2_);
    const cdouble h2 = a2 * g2_ * g2_ * (s + g1_);
    const cdouble h = h1 + h2;
    a_coef_[k] = xi * ((s - kI * omega_) * G + kI * h);
    b_coef_[k] = -kI * xi * h;
    bpart_coef_[0][k] = -kI * xi * h1;
    bpart_coef_[1][k] = -kI * xi * h2;
    m_coef_[k] = -xi * (kI * s + omega_) * G;
    n_coef_[k] = xi * (kI * s - omega_) * G;
    apole_coef_[k] = kI * xi * (s - kI * omega_) / (s + kI * omega_) * h;
  }
}

KernelSet::TimeFactors KernelSet::time_factors(double t, double shift) const {
  TimeFactors tf;
  tf.t = t;
  for (int k = 0; k < 4; ++k) tf.exp_st[k] = std::exp((roots_.roots[k] - shift) * t);
  return tf;
}

Amplitudes KernelSet::amplitudes(double t, double shift) const {
  const auto tf = time_factors(t, shift);
  Amplitudes out{};
  for (int k = 0; k < 4; ++k) {
    const cdouble e = tf.exp_st[k];
    const cdouble s = roots_.roots[k];
    out.A += a_coef_[k] * e;
    out.dA += a_coef_[k] * s * e;
    out.B += b_coef_[k] * e;
    out.dB += b_coef_[k] * s * e;
    for (int l = 0; l < 2; ++l) {
      out.B_parts[l] += bpart_coef_[l][k] * e;
      out.dB_parts[l] += bpart_coef_[l][k] * s * e;
    }
  }
  return out;
}

cdouble KernelSet::amplitude_A_pole_form(double t) const {
  cdouble acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += apole_coef_[k] * std::exp(roots_.roots[k] * t);
  return acc;
}

Propagators KernelSet::propagators(double w, double t) const {
  return propagators(w, time_factors(t));
}

Propagators KernelSet::propagators(double w, const TimeFactors& tf) const {
  const cdouble s0{0.0, -w};
  const cdouble xi0 = 1.0 / roots_.quartic(s0);
  const cdouble G0 = cdouble(g1_, -w) * cdouble(g2_, -w);
  const double wt = w * tf.t;
  const cdouble e0{std::cos(wt), -std::sin(wt)};
  const cdouble base = xi0 * e0 * G0;

  Propagators p;
  p.M = -base * (w + omega_);
  p.N = base * (w - omega_);
  p.dM = p.M * s0;
  p.dN = p.N * s0;
  for (int k = 0; k < 4; ++k) {
    const cdouble s = roots_.roots[k];
    const cdouble f = tf.exp_st[k] / (s - s0);
    const cdouble m = m_coef_[k] * f;
    const cdouble n = n_coef_[k] * f;
    p.M += m;
    p.N += n;
    p.dM += m * s;
    p.dN += n * s;
  }
  return p;
}

PropagatorParts KernelSet::propagator_parts(double w, const TimeFactors& tf) const {
  const cdouble s0{0.0, -w};
  const cdouble base = cdouble(g1_, -w) * cdouble(g2_, -w) / roots_.quartic(s0);
  PropagatorParts p{};
  p.RM = -base * (w + omega_);
  p.RN = base * (w - omega_);
  for (int k = 0; k < 4; ++k) {
    const cdouble s = roots_.roots[k];
    const cdouble m = m_coef_[k] * tf.exp_st[k];
    const cdouble n = n_coef_[k] * tf.exp_st[k];
    const cdouble inv = 1.0 / (s - s0);
    p.TM += m * inv;
    p.TN += n * inv;
    p.dTM += m * s * inv;
    p.dTN += n * s * inv;
    p.mu += m;
    p.nu += n;
  }
  return p;
}

std::array<double, 2> KernelSet::stationary_moduli(double w) const {
  const cdouble s0{0.0, -w};
  const double q2 = std::norm(roots_.quartic(s0));
  const double G2 = (g1_ * g1_ + w * w) * (g2_ * g2_ + w * w);
  return {(w + omega_) * (w + omega_) * G2 / q2, (w - omega_) * (w - omega_) * G2 / q2};
}

Amplitudes amplitudes_AB(const RootSet& roots, const SystemSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("amplitudes_AB requires t >= 0");
  return KernelSet(roots, spec).amplitudes(t);
}

Propagators propagators_MN(const RootSet& roots, const SystemSpec& spec, double w, double t) {
  if (!(w > 0.0)) throw DomainError("propagators_MN requires w > 0");
  if (!(t >= 0.0)) throw DomainError("propagators_MN requires t >= 0");
  return KernelSet(roots, spec).propagators(w, t);
}

}  // namespace selfosc
