#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "selfosc/errors.hpp"

namespace selfosc::quad {

template <std::size_t D>
using Vec = std::array<double, D>;

struct Options {
  double rtol = 1e-7;
  std::size_t max_panels = 400000;
};

template <std::size_t D>
struct Result {
  Vec<D> value{};
  Vec<D> error{};
  std::size_t evaluations = 0;
  std::size_t panels = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t D>
struct Panel {
  double a, b;
  Vec<D> value;
  Vec<D> error;
};

/// One Gauss-Kronrod panel with the QUADPACK error heuristic applied per
/// component.
template <std::size_t D, class F>
Panel<D> gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<Vec<D>, 21> fx;
  fx[20] = f(center);
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    fx[2 * j] = f(center - dx);
    fx[2 * j + 1] = f(center + dx);
  }
  Panel<D> p{a, b, {}, {}};
  for (std::size_t c = 0; c < D; ++c) {
    const double fc = fx[20][c];
    double resk = kWgk[10] * fc;
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (std::size_t j = 0; j < 10; ++j) {
      const double sum = fx[2 * j][c] + fx[2 * j + 1][c];
      resk += kWgk[j] * sum;
      resabs += kWgk[j] * (std::abs(fx[2 * j][c]) + std::abs(fx[2 * j + 1][c]));
      if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fc - mean);
    for (std::size_t j = 0; j < 10; ++j)
      resasc += kWgk[j] * (std::abs(fx[2 * j][c] - mean) + std::abs(fx[2 * j + 1][c] - mean));
    resk *= half;
    resg *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
      err = std::max(50.0 * eps * resabs, err);
    p.value[c] = resk;
    p.error[c] = err;
  }
  return p;
}

template <std::size_t D>
Vec<D> pairwise_sum(const std::vector<Vec<D>>& items, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return items[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Vec<D> l = pairwise_sum(items, lo, mid), r = pairwise_sum(items, mid, hi);
  for (std::size_t c = 0; c < D; ++c) l[c] += r[c];
  return l;
}

}  // namespace detail

/// Panel-adaptive Gauss-Kronrod integration of a vector-valued integrand
/// over the initial panels [breaks[i], breaks[i+1]].
///
/// The panel with the largest scaled error is bisected until every
/// component satisfies err_c <= max(atol_c, rtol * |value_c|). The returned
/// sums are formed in a fixed order (panels sorted by position, pairwise
/// reduction), so results do not depend on refinement history.
template <std::size_t D, class F>
Result<D> integrate(F&& f, const std::vector<double>& breaks, const Vec<D>& atol,
                    const Options& opt = {}) {
  Result<D> res;
  if (breaks.size() < 2) return res;
  const std::size_t n0 = breaks.size() - 1;
  if (n0 > opt.max_panels)
    throw QuadratureError("initial panel count exceeds max_panels", 0.0);

  std::vector<detail::Panel<D>> panels;
  panels.reserve(n0 * 2);
  for (std::size_t i = 0; i < n0; ++i) {
    if (!(breaks[i + 1] > breaks[i])) throw DomainError("quadrature breakpoints must increase");
    panels.push_back(detail::gk21<D>(f, breaks[i], breaks[i + 1]));
  }
  res.evaluations = 21 * n0;

  Vec<D> total{}, total_err{};
  for (const auto& p : panels)
    for (std::size_t c = 0; c < D; ++c) total[c] += p.value[c], total_err[c] += p.error[c];

  auto tolerance = [&](std::size_t c) { return std::max(atol[c], opt.rtol * std::abs(total[c])); };
  auto scaled = [&](const detail::Panel<D>& p) {
    double s = 0.0;
    for (std::size_t c = 0; c < D; ++c) s = std::max(s, p.error[c] / std::max(tolerance(c), 1e-300));
    return s;
  };
  auto converged = [&] {
    for (std::size_t c = 0; c < D; ++c)
      if (total_err[c] > tolerance(c)) return false;
    return true;
  };

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;
  if (!converged())
    for (std::size_t i = 0; i < panels.size(); ++i) heap.emplace(scaled(panels[i]), i);

  while (!converged()) {
    if (panels.size() >= opt.max_panels || heap.empty()) {
      double worst = 0.0;
      for (std::size_t c = 0; c < D; ++c)
        worst = std::max(worst, total_err[c] / std::max(std::abs(total[c]), 1e-300));
      throw QuadratureError("quadrature did not converge; achieved relative error estimate " +
                                std::to_string(worst),
                            worst);
    }
    const std::size_t idx = heap.top().second;
    heap.pop();
    const auto old = panels[idx];
    const double mid = 0.5 * (old.a + old.b);
    if (!(mid > old.a && mid < old.b)) continue;  // cannot split further
    auto left = detail::gk21<D>(f, old.a, mid);
    auto right = detail::gk21<D>(f, mid, old.b);
    res.evaluations += 42;
    for (std::size_t c = 0; c < D; ++c) {
      total[c] += left.value[c] + right.value[c] - old.value[c];
      total_err[c] += left.error[c] + right.error[c] - old.error[c];
    }
    panels[idx] = left;
    panels.push_back(right);
    heap.emplace(scaled(panels[idx]), idx);
    heap.emplace(scaled(panels.back()), panels.size() - 1);
  }

  std::sort(panels.begin(), panels.end(),
            [](const auto& x, const auto& y) { return x.a < y.a; });
  std::vector<Vec<D>> vals, errs;
  vals.reserve(panels.size());
  errs.reserve(panels.size());
  for (const auto& p : panels) vals.push_back(p.value), errs.push_back(p.error);
  res.value = detail::pairwise_sum<D>(vals, 0, vals.size());
  res.error = detail::pairwise_sum<D>(errs, 0, errs.size());
  res.panels = panels.size();
  return res;
}

/// [a, b] cut into equal initial panels no wider than `initial_width`.
template <std::size_t D, class F>
Result<D> integrate(F&& f, double a, double b, double initial_width, const Vec<D>& atol,
                    const Options& opt = {}) {
  if (!(b > a)) return {};
  const double n = std::max(1.0, std::ceil((b - a) / std::max(initial_width, 1e-300)));
  if (n > static_cast<double>(opt.max_panels))
    throw QuadratureError("initial panel count exceeds max_panels", 0.0);
  const auto n0 = static_cast<std::size_t>(n);
  std::vector<double> breaks(n0 + 1);
  for (std::size_t i = 0; i < n0; ++i)
    breaks[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n0);
  breaks[n0] = b;
  return integrate<D>(f, breaks, atol, opt);
}

}  // namespace selfosc::quad
