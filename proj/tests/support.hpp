#pragma once

// Helpers shared by the test suites. The brute-force bath integral below is
// deliberately independent of the library's transport code: it rebuilds M and
// N from the five-node sums in long double and integrates with composite
// Simpson on a dense uniform grid.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "selfosc/kernels.hpp"
#include "selfosc/model.hpp"
#include "selfosc/transport.hpp"

namespace testsupport {

using ld = long double;
using cld = std::complex<long double>;

inline selfosc::SystemSpec fig1_system() {
  using selfosc::Statistics;
  return selfosc::make_system(1.0, {Statistics::Fermionic, 0.1, 10.0, 1.0},
                              {Statistics::Bosonic, 0.05, 15.0, 0.1});
}

inline selfosc::SystemSpec weak_bosonic(double T = 1.0) {
  using selfosc::Statistics;
  return selfosc::make_system(1.0, {Statistics::Bosonic, 0.01, 10.0, T},
                              {Statistics::Bosonic, 0.01, 10.0, T});
}

struct MN {
  cld M, N;
};

/// M(w,t), N(w,t) from the five nodes {-iw, s_1..s_4}.
inline MN five_node(const selfosc::RootSet& rs, const selfosc::SystemSpec& spec, double w, double t) {
  std::vector<cld> s{cld(0.0L, -static_cast<ld>(w))};
  for (const auto& r : rs.roots) s.emplace_back(r.real(), r.imag());
  const ld g1 = spec.baths[0].gamma, g2 = spec.baths[1].gamma, om = spec.omega();
  const cld I(0.0L, 1.0L);
  MN out{};
  for (std::size_t k = 0; k < s.size(); ++k) {
    cld prod = 1.0L;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (j != k) prod *= s[k] - s[j];
    const cld e = std::exp(s[k] * static_cast<ld>(t)) / prod;
    const cld G = (s[k] + g1) * (s[k] + g2);
    out.M += -e * (I * s[k] + om) * G;
    out.N += e * (I * s[k] - om) * G;
  }
  return out;
}

/// (alpha gamma^2 / pi) int_0^W w/(gamma^2 + w^2) [n |M|^2 + (1 + eps n) |N|^2] dw
/// by composite Simpson with `n` intervals.
inline double brute_force_I(const selfosc::SystemSpec& spec, int bath, selfosc::Statistics stats,
                            double t, double W, std::size_t n) {
  const auto rs = selfosc::characteristic_roots(spec);
  const auto& b = spec.baths[bath];
  const double eps = selfosc::sign(stats);
  auto f = [&](double w) -> ld {
    // w n(w) has a finite limit at 0 for bosons; step just off the origin.
    w = std::max(w, 1e-6);
    const auto mn = five_node(rs, spec, w, t);
    const ld occ = selfosc::equilibrium_occupation(w, b.temperature, stats);
    return w / (b.gamma * b.gamma + w * w) *
           (occ * std::norm(mn.M) + (1.0L + eps * occ) * std::norm(mn.N));
  };
  if (n % 2) ++n;
  const ld h = static_cast<ld>(W) / static_cast<ld>(n);
  ld acc = f(0.0) + f(W);
  for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0L : 2.0L) * f(static_cast<double>(h * i));
  return static_cast<double>(acc * h / 3.0L * b.alpha * b.gamma * b.gamma / std::numbers::pi_v<ld>);
}

/// Constant coefficients on a uniform grid.
inline selfosc::CoefficientSeries constant_series(double lambda, double D, double t_max, double dt) {
  selfosc::CoefficientSeries c;
  c.grid = selfosc::TimeGrid::covering(t_max, dt);
  const std::size_t n = c.grid.size();
  for (std::size_t i = 0; i < n; ++i) c.time.push_back(c.grid.time(i));
  c.lambda.assign(n, lambda);
  c.diffusion.assign(n, D);
  for (int l = 0; l < 2; ++l) {
    c.partial_diffusion[l].assign(n, 0.5 * D);
    c.bath_integrals[l].assign(n, 0.0);
    c.bath_integral_rates[l].assign(n, 0.0);
    c.J_parts[l].assign(n, 0.0);
  }
  c.ratio.assign(n, D / lambda);
  return c;
}

}  // namespace testsupport
