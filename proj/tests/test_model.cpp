#include <cmath>

#include "doctest.h"
#include "selfosc/errors.hpp"
#include "selfosc/model.hpp"
#include "selfosc/transport.hpp"
#include "support.hpp"

using namespace selfosc;

TEST_CASE("bare frequency adds the coupling shifts") {
  BathSpec b1{Statistics::Fermionic, 0.1, 10.0, 1.0}, b2{Statistics::Bosonic, 0.05, 15.0, 0.1};
  CHECK(bare_frequency(1.0, b1, b2) == doctest::Approx(4.5).epsilon(1e-14));
  BathSpec c{Statistics::Bosonic, 0.03, 12.0, 0.5};
  CHECK(bare_frequency(1.0, c, c) == doctest::Approx(2.44).epsilon(1e-14));
}

TEST_CASE("mixing fraction") {
  BathSpec b1{Statistics::Fermionic, 0.1, 10.0, 1.0}, b2{Statistics::Bosonic, 0.05, 15.0, 0.1};
  CHECK(mixing_fraction(b1, b2) == doctest::Approx(2.0 / 3.0));
  b1.alpha = b2.alpha = 0.03;
  CHECK(mixing_fraction(b1, b2) == doctest::Approx(0.5));
  b1.alpha = b2.alpha = 0.0;
  CHECK_THROWS_AS(mixing_fraction(b1, b2), DomainError);
}

TEST_CASE("mixed systems are put in fermionic-first order") {
  BathSpec f{Statistics::Fermionic, 0.1, 10.0, 1.0}, b{Statistics::Bosonic, 0.05, 15.0, 0.1};
  const auto s = make_system(1.0, b, f);
  CHECK(s.mode() == StatisticsMode::Mixed);
  CHECK(s.baths[0].statistics == Statistics::Fermionic);
  CHECK(s.baths[0].alpha == 0.1);
  CHECK(s.baths[1].gamma == 15.0);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("statistics modes") {
  BathSpec b{Statistics::Bosonic, 0.01, 10.0, 1.0};
  CHECK(make_system(1.0, b, b).mode() == StatisticsMode::AllBosonic);
  BathSpec f = b;
  f.statistics = Statistics::Fermionic;
  CHECK(make_system(1.0, f, f).mode() == StatisticsMode::AllFermionic);
  const auto swapped = with_statistics(testsupport::fig1_system(), Statistics::Bosonic);
  CHECK(swapped.mode() == StatisticsMode::AllBosonic);
  CHECK(swapped.baths[0].alpha == 0.1);
  CHECK(swapped.omega() == doctest::Approx(4.5));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make_system(1.0, {Statistics::Bosonic, -0.1, 10.0, 1.0},
                              {Statistics::Bosonic, 0.1, 10.0, 1.0}),
                  DomainError);
  CHECK_THROWS_AS(make_system(1.0, {Statistics::Bosonic, 0.1, 0.0, 1.0},
                              {Statistics::Bosonic, 0.1, 10.0, 1.0}),
                  DomainError);
  CHECK_THROWS_AS(make_system(1.0, {Statistics::Bosonic, 0.1, 10.0, -1.0},
                              {Statistics::Bosonic, 0.1, 10.0, 1.0}),
                  DomainError);
  CHECK_THROWS_AS(make_system(-1.0, {}, {}), DomainError);
  CHECK_NOTHROW(make_system(1.0, {Statistics::Bosonic, 0.0, 10.0, 0.0},
                            {Statistics::Bosonic, 0.0, 10.0, 0.0}));
  CHECK(statistics_from_string("fermionic") == Statistics::Fermionic);
  CHECK_THROWS_AS(statistics_from_string("anyonic"), DomainError);
}

TEST_CASE("equilibrium occupations") {
  CHECK(equilibrium_occupation(1.0, 1.0, Statistics::Bosonic) ==
        doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-14));
  CHECK(equilibrium_occupation(1.0, 1.0, Statistics::Fermionic) ==
        doctest::Approx(1.0 / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(equilibrium_occupation(1.0, 0.0, Statistics::Bosonic) == 0.0);
  CHECK(equilibrium_occupation(1.0, 1e12, Statistics::Fermionic) == doctest::Approx(0.5));
  CHECK_THROWS_AS(equilibrium_occupation(0.0, 1.0, Statistics::Bosonic), DomainError);
}

TEST_CASE("spectral density is Lorentzian") {
  BathSpec b{Statistics::Bosonic, 0.2, 4.0, 1.0};
  CHECK(spectral_density(0.0, b) == doctest::Approx(0.2 / std::numbers::pi));
  CHECK(spectral_density(4.0, b) == doctest::Approx(0.5 * 0.2 / std::numbers::pi));
}

TEST_CASE("Markovian asymptote") {
  // Bare frequency 1: Omega = 1 - 2 (a1 g1 + a2 g2).
  BathSpec b1{Statistics::Bosonic, 0.002, 1.0, 1.0}, b2{Statistics::Bosonic, 0.001, 1.0, 0.1};
  const auto s = make_system(1.0 - 2.0 * 0.003, b1, b2);
  CHECK(s.omega() == doctest::Approx(1.0).epsilon(1e-14));
  const double expected = 2.0 / 3.0 * 0.581977 + 1.0 / 3.0 / (std::exp(10.0) - 1.0);
  CHECK(markovian_asymptote(s) == doctest::Approx(expected).epsilon(1e-3));
  CHECK(markovian_asymptote(s) == doctest::Approx(0.388).epsilon(1e-3));

  BathSpec e{Statistics::Bosonic, 0.001, 1.0, 1.0};
  const auto eq = make_system(1.0 - 0.004, e, e);
  CHECK(markovian_asymptote(eq) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)));

  BathSpec hot{Statistics::Fermionic, 0.01, 10.0, 1e9};
  CHECK(markovian_asymptote(make_system(1.0, hot, hot)) == doctest::Approx(0.5));
}
