#include <cmath>
#include <numbers>

#include "doctest.h"
#include "selfosc/quadrature.hpp"

using namespace selfosc;

TEST_CASE("polynomials are integrated exactly") {
  auto f = [](double x) { return quad::Vec<2>{x * x * x - 2.0 * x, std::pow(x, 20)}; };
  const auto r = quad::integrate<2>(f, std::vector<double>{-1.0, 0.5, 2.0}, {0.0, 0.0});
  CHECK(r.value[0] == doctest::Approx(4.0 - 4.0 - (0.25 - 1.0)).epsilon(1e-15));
  CHECK(r.value[1] == doctest::Approx((std::pow(2.0, 21) + 1.0) / 21.0).epsilon(1e-13));
  CHECK(r.panels == 2);
}

TEST_CASE("oscillatory integrand against its closed form") {
  const double w = 37.0;
  auto f = [w](double x) { return quad::Vec<2>{std::cos(w * x) * std::exp(-x), std::sin(w * x) * std::exp(-x)}; };
  const auto r = quad::integrate<2>(f, 0.0, 10.0, 1.0, {1e-14, 1e-14}, {1e-10, 400000});
  const double d = 1.0 + w * w, e = std::exp(-10.0);
  const double c = (1.0 + e * (w * std::sin(10.0 * w) - std::cos(10.0 * w))) / d;
  const double s = (w - e * (std::sin(10.0 * w) + w * std::cos(10.0 * w))) / d;
  CHECK(std::abs(r.value[0] - c) < 1e-10 * std::abs(c) + 1e-14);
  CHECK(std::abs(r.value[1] - s) < 1e-10 * std::abs(s) + 1e-14);
}

TEST_CASE("error estimate bounds the actual error") {
  auto f = [](double x) { return quad::Vec<1>{1.0 / (1e-3 + x * x)}; };
  const double exact = 2.0 / std::sqrt(1e-3) * std::atan(1.0 / std::sqrt(1e-3));
  for (double rtol : {1e-4, 1e-7, 1e-10}) {
    const auto r = quad::integrate<1>(f, -1.0, 1.0, 2.0, {0.0}, {rtol, 400000});
    CHECK(std::abs(r.value[0] - exact) <= r.error[0] + 1e-14 * exact);
    CHECK(r.error[0] <= rtol * std::abs(r.value[0]));
  }
}

TEST_CASE("result does not depend on how refinement proceeded") {
  auto f = [](double x) { return quad::Vec<1>{std::sqrt(std::abs(x - 0.3))}; };
  const auto a = quad::integrate<1>(f, 0.0, 1.0, 1.0, {0.0}, {1e-9, 400000});
  const auto b = quad::integrate<1>(f, 0.0, 1.0, 1.0, {0.0}, {1e-9, 400000});
  CHECK(a.value[0] == b.value[0]);
  const double exact = (2.0 / 3.0) * (std::pow(0.3, 1.5) + std::pow(0.7, 1.5));
  CHECK(a.value[0] == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("bad input and exhausted budgets") {
  auto f = [](double x) { return quad::Vec<1>{x}; };
  CHECK_THROWS_AS(quad::integrate<1>(f, std::vector<double>{0.0, 1.0, 1.0}, {0.0}), DomainError);
  CHECK(quad::integrate<1>(f, 1.0, 0.0, 0.1, {0.0}).value[0] == 0.0);
  auto g = [](double x) { return quad::Vec<1>{1.0 / std::sqrt(std::abs(x - 0.1234567))}; };
  CHECK_THROWS_AS(quad::integrate<1>(g, 0.0, 1.0, 1.0, {0.0}, {1e-14, 50}), QuadratureError);
  CHECK_THROWS_AS(quad::integrate<1>(f, 0.0, 1.0, 1e-6, {0.0}, {1e-7, 100}), QuadratureError);
}
