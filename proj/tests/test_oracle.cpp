#include <cmath>

#include "doctest.h"
#include "selfosc/errors.hpp"
#include "selfosc/oracle.hpp"
#include "support.hpp"

using namespace selfosc;

namespace {

SystemSpec small_system(double alpha) {
  return make_system(1.0, {Statistics::Bosonic, alpha, 1.0, 1.0},
                     {Statistics::Bosonic, alpha, 1.2, 0.5});
}

std::array<DiscretizedBath, 2> small_baths(const SystemSpec& s, std::size_t N = 50) {
  return {sample_bath(s.baths[0], N, 12.0), sample_bath(s.baths[1], N, 12.0)};
}

}  // namespace

TEST_CASE("midpoint bath sampling") {
  const BathSpec b{Statistics::Bosonic, 0.05, 10.0, 1.0};
  const auto d = sample_bath(b, 400, 200.0);
  CHECK(d.size() == 400);
  CHECK(d.dw == doctest::Approx(0.5));
  CHECK(d.frequencies.front() == doctest::Approx(0.25));
  CHECK(d.recurrence_time() == doctest::Approx(2.0 * std::numbers::pi / 0.5));
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sum += d.couplings[i] * d.couplings[i] / d.frequencies[i];
  CHECK(sum == doctest::Approx(truncated_coupling_sum(b, 200.0)).epsilon(1e-5));
  CHECK(d.occupations[0] == doctest::Approx(equilibrium_occupation(0.25, 1.0, Statistics::Bosonic)));
  CHECK_THROWS_AS(sample_bath(b, 10, 200.0), DomainError);
  CHECK_THROWS_AS(sample_bath(b, 400, 50.0), DomainError);
}

TEST_CASE("rotating-wave coupling conserves the excitation number") {
  const auto s = small_system(0.05);
  const auto baths = small_baths(s);
  const auto L = heisenberg_generator(s, baths, CouplingForm::RotatingWave);
  auto m = MomentState::initial(baths, 1.0);
  const double before = m.total_excitation();
  m.evolve(L, 0.2, 0.01);
  CHECK(m.total_excitation() == doctest::Approx(before).epsilon(1e-9));
  CHECK(m.oscillator_occupation() < 1.0);
}

TEST_CASE("moment evolution stays hermitian and positive") {
  const auto s = small_system(0.05);
  const auto baths = small_baths(s);
  auto m = MomentState::initial(baths, 0.0);
  CHECK(m.hermiticity_defect() == 0.0);
  m.evolve(heisenberg_generator(s, baths), 0.2, 0.02);
  CHECK(m.hermiticity_defect() < 1e-12);
  CHECK(m.min_occupation() >= -1e-12);
  CHECK(m.oscillator_occupation() > 0.0);
}

TEST_CASE("row evolution agrees with moment evolution") {
  const auto s = small_system(0.05);
  const auto baths = small_baths(s);
  ExactOptions opt;
  opt.n0 = 0.3;
  const auto ex = evolve_exact(s, baths, 0.3, 0.1, opt);
  auto m = MomentState::initial(baths, 0.3);
  m.evolve(heisenberg_generator(s, baths), 0.3, 0.005);
  CHECK(ex.n.front() == doctest::Approx(0.3));
  CHECK(ex.n.back() == doctest::Approx(m.oscillator_occupation()).epsilon(1e-7));
}

TEST_CASE("uncoupled oscillator keeps its occupation") {
  const auto s = make_system(1.0, {Statistics::Bosonic, 0.0, 1.0, 1.0},
                             {Statistics::Bosonic, 0.0, 1.2, 1.0});
  ExactOptions opt;
  opt.n0 = 0.7;
  const auto ex = evolve_exact(s, small_baths(s), 2.0, 0.5, opt);
  for (double n : ex.n) CHECK(n == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("fermionic baths and oversized runs are rejected") {
  const auto s = testsupport::fig1_system();
  const auto b = make_system(1.0, {Statistics::Bosonic, 0.01, 1.0, 1.0},
                             {Statistics::Bosonic, 0.01, 1.0, 1.0});
  CHECK_THROWS_AS(evolve_exact(s, small_baths(b), 1.0, 0.1), DomainError);
  ExactOptions opt;
  opt.max_modes = 10;
  CHECK_THROWS_AS(evolve_exact(b, small_baths(b), 1.0, 0.1, opt), DomainError);
}

TEST_CASE("comparison helper") {
  const std::vector<double> ta{0.0, 1.0, 2.0}, a{0.0, 1.0, 2.0};
  const std::vector<double> tb{0.0, 2.0}, b{0.0, 3.0};
  const auto c = compare(ta, a, tb, b);
  CHECK(c.max_deviation == doctest::Approx(1.0));
  CHECK(c.worst_time == doctest::Approx(2.0));
  CHECK(c.samples == 3);
  CHECK_THROWS_AS(compare(ta, a, std::vector<double>{5.0, 6.0}, b), DomainError);
}
