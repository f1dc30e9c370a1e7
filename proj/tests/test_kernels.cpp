#include <cmath>

#include "doctest.h"
#include "selfosc/errors.hpp"
#include "selfosc/kernels.hpp"
#include "support.hpp"

using namespace selfosc;

namespace {

std::vector<SystemSpec> corpus() {
  const Statistics F = Statistics::Fermionic, B = Statistics::Bosonic;
  return {
      testsupport::fig1_system(),
      make_system(1.0, {F, 0.03, 12.0, 0.5}, {B, 0.03, 12.0, 0.5}),
      make_system(2.0, {F, 0.03, 12.0, 0.5}, {B, 0.03, 12.0, 0.5}),
      make_system(1.0, {F, 0.03, 12.0, 0.1}, {B, 0.03, 12.0, 1.0}),
      make_system(1.0, {B, 0.05, 12.0, 1.0}, {B, 0.03, 15.0, 0.1}),
      testsupport::weak_bosonic(),
  };
}

}  // namespace

TEST_CASE("quartic coefficients for the mixed single system") {
  const auto c = quartic_coefficients(testsupport::fig1_system());
  CHECK(c[0] == 1.0);
  CHECK(c[1] == doctest::Approx(25.0));
  CHECK(c[4] == doctest::Approx(675.0).epsilon(1e-14));
}

TEST_CASE("characteristic roots of the mixed single system") {
  const auto rs = characteristic_roots(testsupport::fig1_system());
  CHECK(rs.roots[0].real() == doctest::Approx(-14.59975).epsilon(1e-6));
  CHECK(rs.roots[1].real() == doctest::Approx(-8.91725).epsilon(1e-6));
  CHECK(rs.roots[2].real() == doctest::Approx(-0.741496).epsilon(1e-6));
  CHECK(std::abs(rs.roots[2].imag()) == doctest::Approx(2.152888).epsilon(1e-6));
  CHECK(rs.roots[3] == std::conj(rs.roots[2]));
  CHECK(rs.max_real_part() < 0.0);
}

TEST_CASE("zero coupling gives +-i omega, -gamma1, -gamma2") {
  const auto s = make_system(1.3, {Statistics::Bosonic, 0.0, 7.0, 1.0},
                             {Statistics::Bosonic, 0.0, 11.0, 1.0});
  const auto rs = characteristic_roots(s);
  CHECK(std::abs(rs.roots[0] - cdouble(-11.0, 0.0)) < 1e-10);
  CHECK(std::abs(rs.roots[1] - cdouble(-7.0, 0.0)) < 1e-10);
  CHECK(std::abs(rs.roots[2] - cdouble(0.0, -1.3)) < 1e-10);
  CHECK(std::abs(rs.roots[3] - cdouble(0.0, 1.3)) < 1e-10);
}

TEST_CASE("root residuals over the corpus") {
  for (const auto& s : corpus()) {
    const auto rs = characteristic_roots(s);
    double cmax = 0.0;
    for (double v : rs.quartic_coefficients) cmax = std::max(cmax, std::abs(v));
    for (const auto& r : rs.roots) CHECK(std::abs(rs.quartic(r)) <= 1e-9 * cmax);
  }
}

TEST_CASE("roots do not depend on statistics") {
  const auto s = testsupport::fig1_system();
  const auto a = characteristic_roots(with_statistics(s, Statistics::Fermionic));
  const auto b = characteristic_roots(with_statistics(s, Statistics::Bosonic));
  for (int k = 0; k < 4; ++k) {
    CHECK(a.roots[k] == b.roots[k]);
    CHECK(a.xi_prime[k] == b.xi_prime[k]);
  }
}

TEST_CASE("degenerate roots are rejected") {
  const auto s = make_system(1.0, {Statistics::Bosonic, 0.0, 10.0, 1.0},
                             {Statistics::Bosonic, 0.0, 10.0, 1.0});
  CHECK_THROWS_AS(characteristic_roots(s), DegeneracyError);
}

TEST_CASE("kernel values at t = 0") {
  for (const auto& s : corpus()) {
    const auto rs = characteristic_roots(s);
    const KernelSet k(rs, s);
    const auto a = k.amplitudes(0.0);
    CHECK(std::abs(a.A - 1.0) < 1e-12);
    CHECK(std::abs(a.B) < 1e-12);
    CHECK(std::abs(a.B_parts[0]) < 1e-12);
    CHECK(std::abs(a.B_parts[1]) < 1e-12);
    for (double w : {0.1, 1.0, 4.5, 30.0}) {
      const auto p = k.propagators(w, 0.0);
      CHECK(std::abs(p.M) < 1e-12);
      CHECK(std::abs(p.N) < 1e-12);
      CHECK(std::abs(p.dN - cdouble(0.0, 1.0)) < 1e-10);
    }
  }
}

TEST_CASE("pole form of A agrees with the pole-free form") {
  const auto s = testsupport::fig1_system();
  const KernelSet k(characteristic_roots(s), s);
  for (double t : {0.0, 0.3, 1.0, 2.5, 7.0}) {
    const auto a = k.amplitudes(t).A;
    CHECK(std::abs(a - k.amplitude_A_pole_form(t)) < 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("analytic time derivatives match central differences") {
  const auto s = testsupport::fig1_system();
  const KernelSet k(characteristic_roots(s), s);
  const double h = 1e-4;
  for (double t : {0.5, 1.0, 3.0}) {
    const auto a = k.amplitudes(t);
    const auto ap = k.amplitudes(t + h), am = k.amplitudes(t - h);
    const cdouble dA = (ap.A - am.A) / (2.0 * h);
    const cdouble dB = (ap.B - am.B) / (2.0 * h);
    CHECK(std::abs(dA - a.dA) <= 1e-6 * std::abs(a.dA));
    CHECK(std::abs(dB - a.dB) <= 1e-6 * std::abs(a.dB));
    const double B2 = std::norm(a.B);
    const double dB2 = (std::norm(ap.B) - std::norm(am.B)) / (2.0 * h);
    CHECK(B2 >= 0.0);
    CHECK(dB2 == doctest::Approx(2.0 * std::real(std::conj(a.B) * a.dB)).epsilon(1e-4));
    const auto p = k.propagators(1.0, t);
    const auto pp = k.propagators(1.0, t + h), pm = k.propagators(1.0, t - h);
    CHECK(std::abs((pp.M - pm.M) / (2.0 * h) - p.dM) <= 1e-6 * std::abs(p.dM));
    CHECK(std::abs((pp.N - pm.N) / (2.0 * h) - p.dN) <= 1e-6 * std::abs(p.dN));
  }
}

TEST_CASE("bath-resolved B parts add up and vanish with their coupling") {
  const auto s = testsupport::fig1_system();
  const KernelSet k(characteristic_roots(s), s);
  for (double t : {0.2, 1.0, 4.0}) {
    const auto a = k.amplitudes(t);
    CHECK(std::abs(a.B_parts[0] + a.B_parts[1] - a.B) < 1e-13);
  }
  const auto s2 = make_system(1.0, {Statistics::Bosonic, 0.1, 10.0, 1.0},
                              {Statistics::Bosonic, 0.0, 15.0, 0.1});
  const KernelSet k2(characteristic_roots(s2), s2);
  for (double t : {0.2, 1.0, 4.0}) CHECK(std::abs(k2.amplitudes(t).B_parts[1]) == 0.0);
}

TEST_CASE("propagators agree with an independent five-node evaluation") {
  const auto s = testsupport::fig1_system();
  const auto rs = characteristic_roots(s);
  const KernelSet k(rs, s);
  for (double w : {0.3, 1.0, 4.5, 12.0}) {
    for (double t : {0.1, 2.0, 6.0}) {
      const auto p = k.propagators(w, t);
      const auto ref = testsupport::five_node(rs, s, w, t);
      CHECK(std::abs(p.M - cdouble(ref.M)) < 1e-10 * std::max(1.0, std::abs(p.M)));
      CHECK(std::abs(p.N - cdouble(ref.N)) < 1e-10 * std::max(1.0, std::abs(p.N)));
      CHECK(std::isfinite(std::norm(p.M)));
    }
  }
}

TEST_CASE("stationary plus transient split reproduces M and N") {
  const auto s = testsupport::fig1_system();
  const KernelSet k(characteristic_roots(s), s);
  for (double w : {0.5, 4.5, 20.0}) {
    for (double t : {0.0, 0.7, 3.0}) {
      const auto tf = k.time_factors(t);
      const auto parts = k.propagator_parts(w, tf);
      const auto p = k.propagators(w, tf);
      const cdouble e = std::polar(1.0, -w * t);
      CHECK(std::abs(parts.RM * e + parts.TM - p.M) < 1e-12);
      CHECK(std::abs(parts.RN * e + parts.TN - p.N) < 1e-12);
      CHECK(std::abs(cdouble(0.0, -w) * parts.RM * e + parts.dTM - p.dM) < 1e-11);
      CHECK(std::abs(parts.mu - (parts.dTM + cdouble(0.0, w) * parts.TM)) < 1e-11);
      const auto mod = k.stationary_moduli(w);
      CHECK(mod[0] == doctest::Approx(std::norm(parts.RM)).epsilon(1e-12));
      CHECK(mod[1] == doctest::Approx(std::norm(parts.RN)).epsilon(1e-12));
    }
  }
}

TEST_CASE("argument checks") {
  const auto s = testsupport::fig1_system();
  const auto rs = characteristic_roots(s);
  CHECK_THROWS_AS(amplitudes_AB(rs, s, -1.0), DomainError);
  CHECK_THROWS_AS(propagators_MN(rs, s, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(propagators_MN(rs, s, 1.0, -1.0), DomainError);
}
