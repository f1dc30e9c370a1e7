#include "selfosc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

constexpr double kPi = std::numbers::pi;

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& x, double a, const State<N>& k) {
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * k[i];
  return out;
}

/// Classic RK4 over the grid with `substeps` steps per interval. The rhs
/// receives the index of the grid cell being crossed, so every stage of a step
/// sees the same piece of the interpolated coefficients. `record` receives
/// (grid index, t, state) at every grid point.
template <std::size_t N, class Rhs, class Record>
void rk4(const TimeGrid& grid, unsigned substeps, State<N> x, Rhs&& rhs, Record&& record) {
  const double h = grid.dt / static_cast<double>(substeps);
  record(0, 0.0, x);
  for (std::size_t i = 0; i < grid.steps; ++i) {
    for (unsigned j = 0; j < substeps; ++j) {
      const double t = grid.time(i) + h * static_cast<double>(j);
      const auto k1 = rhs(t, x, i);
      const auto k2 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k1), i);
      const auto k3 = rhs(t + 0.5 * h, axpy(x, 0.5 * h, k2), i);
      const auto k4 = rhs(t + h, axpy(x, h, k3), i);
      for (std::size_t c = 0; c < N; ++c) x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    const double t = grid.time(i + 1);
    for (double v : x) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite occupation at t = " << t;
        throw IntegrationError(os.str(), t);
      }
    }
    record(i + 1, t, x);
  }
}

TimeGrid covered_grid(const CoefficientSeries& c, double t_max) {
  if (c.size() == 0) throw DomainError("empty coefficient series");
  const auto grid = TimeGrid::covering(t_max, c.grid.dt);
  if (grid.size() > c.size()) {
    std::ostringstream os;
    os << "coefficient series covers t <= " << c.time.back() << ", run needs t_max = " << t_max;
    throw DomainError(os.str());
  }
  return grid;
}

void check_same_grid(const CoefficientSeries& a, const CoefficientSeries& b) {
  if (std::abs(a.grid.dt - b.grid.dt) > 1e-12 * a.grid.dt)
    throw DomainError("coefficient series use different time steps");
}

Trajectory make_trajectory(const TimeGrid& grid, std::size_t channels, std::string source) {
  Trajectory tr;
  tr.grid = grid;
  tr.time.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) tr.time[i] = grid.time(i);
  tr.n.assign(channels, std::vector<double>(grid.size(), 0.0));
  tr.dn_dt.assign(channels, std::vector<double>(grid.size(), 0.0));
  tr.source = std::move(source);
  return tr;
}

std::string describe(const CoefficientSeries& c) {
  std::ostringstream os;
  os << to_string(c.mode) << " coefficients, dt = " << c.grid.dt << ", t_max = "
     << c.grid.t_max();
  return os.str();
}

struct Coefficients {
  SeriesInterpolant lambda, D;
  explicit Coefficients(const CoefficientSeries& c)
      : lambda(c.grid.dt, c.lambda), D(c.grid.dt, c.diffusion) {}
};

std::pair<std::size_t, std::size_t> window_indices(const std::vector<double>& time, double t_a,
                                                   double t_b) {
  if (!(t_b > t_a)) throw DomainError("window must satisfy t_a < t_b");
  const double slack = time.size() > 1 ? 1e-9 * (time[1] - time[0]) : 0.0;
  std::size_t lo = time.size(), hi = 0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (time[i] >= t_a - slack && time[i] <= t_b + slack) lo = std::min(lo, i), hi = i;
  }
  if (lo >= time.size() || hi <= lo) throw InsufficientDataError("window holds fewer than 2 samples");
  return {lo, hi + 1};
}

std::vector<double> detrended(const std::vector<double>& time, const std::vector<double>& v,
                              std::size_t lo, std::size_t hi, Detrend mode) {
  const double n = static_cast<double>(hi - lo);
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = lo; i < hi; ++i) mt += time[i], mv += v[i];
  mt /= n, mv /= n;
  double slope = 0.0;
  if (mode == Detrend::Linear) {
    double stt = 0.0, stv = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      stt += (time[i] - mt) * (time[i] - mt), stv += (time[i] - mt) * (v[i] - mv);
    if (stt > 0.0) slope = stv / stt;
  }
  std::vector<double> out(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out[i - lo] = v[i] - mv - slope * (time[i] - mt);
  return out;
}

}  // namespace

SeriesInterpolant::SeriesInterpolant(double dt, const std::vector<double>& values)
    : dt_(dt), values_(&values) {
  if (!(dt > 0.0)) throw DomainError("interpolation step must be > 0");
  if (values.size() < 2) throw DomainError("interpolation needs at least 2 samples");
}

std::size_t SeriesInterpolant::stencil(double t, std::size_t cell) const {
  const std::size_t n = values_->size();
  const std::size_t m = std::min<std::size_t>(4, n);
  const double c = cell == kAutoCell ? std::floor(t / dt_) : static_cast<double>(cell);
  const double first = std::clamp(c - 1.0, 0.0, static_cast<double>(n - m));
  return static_cast<std::size_t>(first);
}

double SeriesInterpolant::operator()(double t, std::size_t cell) const {
  const auto& v = *values_;
  const std::size_t m = std::min<std::size_t>(4, v.size());
  const std::size_t i0 = stencil(t, cell);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double basis = 1.0;
    const double xj = dt_ * static_cast<double>(i0 + j);
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const double xk = dt_ * static_cast<double>(i0 + k);
      basis *= (t - xk) / (xj - xk);
    }
    acc += basis * v[i0 + j];
  }
  return acc;
}

double SeriesInterpolant::derivative(double t, std::size_t cell) const {
  const auto& v = *values_;
  const std::size_t m = std::min<std::size_t>(4, v.size());
  const std::size_t i0 = stencil(t, cell);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double xj = dt_ * static_cast<double>(i0 + j);
    double denom = 1.0;
    for (std::size_t k = 0; k < m; ++k)
      if (k != j) denom *= xj - dt_ * static_cast<double>(i0 + k);
    // d/dt prod_{k != j} (t - x_k)
    double dsum = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      double prod = 1.0;
      for (std::size_t k = 0; k < m; ++k)
        if (k != j && k != l) prod *= t - dt_ * static_cast<double>(i0 + k);
      dsum += prod;
    }
    acc += dsum / denom * v[i0 + j];
  }
  return acc;
}

Trajectory evolve_single(const CoefficientSeries& coeffs, double n0, double t_max,
                         const EvolveOptions& opt) {
  if (!(n0 >= 0.0)) throw DomainError("initial occupation must be >= 0");
  if (opt.substeps == 0) throw DomainError("substeps must be >= 1");
  const auto grid = covered_grid(coeffs, t_max);
  const Coefficients c(coeffs);
  auto tr = make_trajectory(grid, 1, describe(coeffs));
  auto rhs = [&](double t, const State<1>& x, std::size_t cell) -> State<1> {
    return {-2.0 * c.lambda(t, cell) * x[0] + 2.0 * c.D(t, cell)};
  };
  rk4<1>(grid, opt.substeps, {n0}, rhs, [&](std::size_t i, double t, const State<1>& x) {
    tr.n[0][i] = x[0];
    tr.dn_dt[0][i] = rhs(t, x, i)[0];
  });
  return tr;
}

Trajectory evolve_single_second_order(const CoefficientSeries& coeffs, double n0, double dn0,
                                      double t_max, SecondOrderForm form,
                                      const EvolveOptions& opt) {
  if (!(n0 >= 0.0)) throw DomainError("initial occupation must be >= 0");
  if (!std::isfinite(dn0)) throw DomainError("initial derivative must be finite");
  if (opt.substeps == 0) throw DomainError("substeps must be >= 1");
  const auto grid = covered_grid(coeffs, t_max);
  const Coefficients c(coeffs);
  auto tr = make_trajectory(grid, 1, describe(coeffs));
  if (form == SecondOrderForm::FirstIntegral) {
    const double y0 = dn0 + 2.0 * c.lambda(0.0) * n0 - 2.0 * c.D(0.0);
    auto dn = [&](double t, const State<2>& x, std::size_t cell) {
      return x[1] - 2.0 * c.lambda(t, cell) * x[0] + 2.0 * c.D(t, cell);
    };
    rk4<2>(grid, opt.substeps, {n0, y0},
           [&](double t, const State<2>& x, std::size_t cell) -> State<2> {
             return {dn(t, x, cell), 0.0};
           },
           [&](std::size_t i, double t, const State<2>& x) {
             tr.n[0][i] = x[0];
             tr.dn_dt[0][i] = dn(t, x, i);
           });
  } else {
    rk4<2>(grid, opt.substeps, {n0, dn0},
           [&](double t, const State<2>& x, std::size_t cell) -> State<2> {
             return {x[1], 2.0 * c.D.derivative(t, cell) - 2.0 * c.lambda(t, cell) * x[1] -
                               2.0 * c.lambda.derivative(t, cell) * x[0]};
           },
           [&](std::size_t i, double, const State<2>& x) {
             tr.n[0][i] = x[0];
             tr.dn_dt[0][i] = x[1];
           });
  }
  return tr;
}

Trajectory evolve_coupled(const CoupledSpec& spec, const CoefficientSeries& c1,
                          const CoefficientSeries& c2, const CoupledInit& init, double t_max,
                          SecondOrderForm form, const EvolveOptions& opt) {
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta)) throw DomainError("beta must be >= 0");
  for (int j = 0; j < 2; ++j) {
    if (!(init.n[j] >= 0.0)) throw DomainError("initial occupation must be >= 0");
    if (!std::isfinite(init.dn[j])) throw DomainError("initial derivative must be finite");
  }
  if (opt.substeps == 0) throw DomainError("substeps must be >= 1");
  check_same_grid(c1, c2);
  const auto grid = covered_grid(c1, t_max);
  covered_grid(c2, t_max);
  const std::array<Coefficients, 2> c{Coefficients(c1), Coefficients(c2)};
  const double beta = spec.beta;
  auto tr = make_trajectory(grid, 2, describe(c1) + "; " + describe(c2));

  if (form == SecondOrderForm::FirstIntegral) {
    // x = (n1, y1, n2, y2)
    auto dn = [&](int j, double t, const State<4>& x, std::size_t cell) {
      return x[2 * j + 1] - 2.0 * c[j].lambda(t, cell) * x[2 * j] + 2.0 * c[j].D(t, cell);
    };
    State<4> x0{};
    for (int j = 0; j < 2; ++j) {
      x0[2 * j] = init.n[j];
      x0[2 * j + 1] = init.dn[j] + 2.0 * c[j].lambda(0.0) * init.n[j] - 2.0 * c[j].D(0.0);
    }
    rk4<4>(grid, opt.substeps, x0,
           [&](double t, const State<4>& x, std::size_t cell) -> State<4> {
             const double pull = beta * (x[0] - x[2]);
             return {dn(0, t, x, cell), -pull, dn(1, t, x, cell), pull};
           },
           [&](std::size_t i, double t, const State<4>& x) {
             for (int j = 0; j < 2; ++j) {
               tr.n[j][i] = x[2 * j];
               tr.dn_dt[j][i] = dn(j, t, x, i);
             }
           });
  } else {
    // x = (n1, v1, n2, v2)
    State<4> x0{init.n[0], init.dn[0], init.n[1], init.dn[1]};
    rk4<4>(grid, opt.substeps, x0,
           [&](double t, const State<4>& x, std::size_t cell) -> State<4> {
             State<4> d{};
             for (int j = 0; j < 2; ++j) {
               const double other = x[2 * (1 - j)];
               d[2 * j] = x[2 * j + 1];
               d[2 * j + 1] = 2.0 * c[j].D.derivative(t, cell) -
                              2.0 * c[j].lambda(t, cell) * x[2 * j + 1] -
                              2.0 * c[j].lambda.derivative(t, cell) * x[2 * j] -
                              beta * (x[2 * j] - other);
             }
             return d;
           },
           [&](std::size_t i, double, const State<4>& x) {
             for (int j = 0; j < 2; ++j) {
               tr.n[j][i] = x[2 * j];
               tr.dn_dt[j][i] = x[2 * j + 1];
             }
           });
  }
  return tr;
}

std::vector<double> dissipation_energy(const Trajectory& traj, const CoefficientSeries& coeffs,
                                       double Omega, std::size_t channel) {
  if (channel >= traj.channels()) throw DomainError("trajectory channel out of range");
  if (std::abs(traj.grid.dt - coeffs.grid.dt) > 1e-12 * coeffs.grid.dt ||
      traj.size() > coeffs.size())
    throw DomainError("trajectory and coefficient grids do not match");
  const auto& n = traj.n[channel];
  std::vector<double> E(traj.size(), 0.0);
  for (std::size_t i = 1; i < E.size(); ++i) {
    const double f0 = coeffs.lambda[i - 1] * n[i - 1];
    const double f1 = coeffs.lambda[i] * n[i];
    E[i] = E[i - 1] + Omega * (f0 + f1) * (traj.time[i] - traj.time[i - 1]);
  }
  return E;
}

DeltaDissipation delta_dissipation(const CoupledSpec& spec, const CoefficientSeries& c1,
                                   const CoefficientSeries& c2, double t_max,
                                   const CoupledInit& init, SecondOrderForm form) {
  CoupledSpec reference = spec;
  reference.beta = 0.0;
  const auto on = evolve_coupled(spec, c1, c2, init, t_max, form);
  const auto off = evolve_coupled(reference, c1, c2, init, t_max, form);

  DeltaDissipation out;
  out.time = on.time;
  out.window = 2.0 * kPi / spec.systems[0].Omega();
  const std::array<const CoefficientSeries*, 2> series{&c1, &c2};
  const std::size_t n = on.size();
  const auto half = static_cast<std::size_t>(std::max(1.0, std::round(0.5 * out.window / on.grid.dt)));
  for (std::size_t j = 0; j < 2; ++j) {
    const double Omega = spec.systems[j].Omega();
    out.energy[j] = dissipation_energy(on, *series[j], Omega, j);
    out.reference[j] = dissipation_energy(off, *series[j], Omega, j);
    out.delta[j].resize(n);
    for (std::size_t i = 0; i < n; ++i) out.delta[j][i] = out.energy[j][i] - out.reference[j][i];
    out.rate[j].assign(n, 0.0);
    if (n < 2) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i >= half ? i - half : 0;
      const std::size_t b = std::min(n - 1, i + half);
      out.rate[j][i] = (out.delta[j][b] - out.delta[j][a]) / (out.time[b] - out.time[a]);
    }
  }
  return out;
}

DeltaDissipation delta_dissipation(const CoupledSpec& spec, double t_max, double dt,
                                   const TransportOptions& opt) {
  spec.validate();
  const auto grid = TimeGrid::covering(t_max, dt);
  const auto c1 = compute_coefficients(spec.systems[0], grid, opt);
  const auto c2 = compute_coefficients(spec.systems[1], grid, opt);
  return delta_dissipation(spec, c1, c2, t_max);
}

double window_mean_abs(const std::vector<double>& time, const std::vector<double>& values,
                       double t_a, double t_b) {
  const auto [lo, hi] = window_indices(time, t_a, t_b);
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) acc += std::abs(values[i]);
  return acc / static_cast<double>(hi - lo);
}

PeriodEstimate estimate_period(const std::vector<double>& time, const std::vector<double>& values,
                               double t_a, double t_b) {
  if (time.size() != values.size()) throw DomainError("time and value lengths differ");
  const auto [lo, hi] = window_indices(time, t_a, t_b);
  const auto y = detrended(time, values, lo, hi, Detrend::Mean);

  std::vector<double> up;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] < 0.0 && y[i + 1] >= 0.0) {
      const double f = y[i] / (y[i] - y[i + 1]);
      up.push_back(time[lo + i] + f * (time[lo + i + 1] - time[lo + i]));
    }
  }
  if (up.size() < 3)
    throw InsufficientDataError("fewer than 3 upward zero crossings in [" + std::to_string(t_a) +
                                ", " + std::to_string(t_b) + "]");
  PeriodEstimate pe;
  pe.crossings = up.size();
  const double m = static_cast<double>(up.size() - 1);
  pe.period = (up.back() - up.front()) / m;
  double var = 0.0;
  for (std::size_t k = 1; k < up.size(); ++k) {
    const double d = up[k] - up[k - 1] - pe.period;
    var += d * d;
  }
  pe.period_std = up.size() > 2 ? std::sqrt(var / (m - 1.0)) : 0.0;

  // Hann-windowed spectrum on a frequency grid 8x finer than 1/T, peak
  // refined by a parabola through the neighbouring bins.
  const double span = time[hi - 1] - time[lo];
  const double dt = span / static_cast<double>(y.size() - 1);
  const double df = 1.0 / (8.0 * span);
  const auto bins = static_cast<std::size_t>(0.5 / dt / df);
  std::vector<double> power(bins + 1, 0.0);
  for (std::size_t k = 1; k <= bins; ++k) {
    const double f = df * static_cast<double>(k);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(y.size() - 1);
      const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * x);
      acc += hann * y[i] * std::polar(1.0, -2.0 * kPi * f * (time[lo + i] - time[lo]));
    }
    power[k] = std::norm(acc);
  }
  // Skip the lowest bins, which the window leaks the detrending residue into.
  std::size_t best = 4;
  for (std::size_t k = 4; k <= bins; ++k)
    if (power[k] > power[best]) best = k;
  double shift = 0.0;
  if (best > 1 && best < bins) {
    const double a = power[best - 1], b = power[best], c = power[best + 1];
    const double den = a - 2.0 * b + c;
    if (den != 0.0) shift = 0.5 * (a - c) / den;
  }
  pe.spectral_period = 1.0 / (df * (static_cast<double>(best) + shift));
  pe.low_confidence = std::abs(pe.spectral_period - pe.period) > 0.05 * pe.period;
  return pe;
}

Stationarity detect_stationarity(const std::vector<double>& time,
                                 const std::vector<double>& values, double t_a, double t_b,
                                 double tol, double floor) {
  if (time.size() != values.size()) throw DomainError("time and value lengths differ");
  const auto [lo, hi] = window_indices(time, t_a, t_b);
  double mn = std::numeric_limits<double>::infinity(), mx = -mn, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!std::isfinite(values[i])) continue;
    mn = std::min(mn, values[i]);
    mx = std::max(mx, values[i]);
    sum += values[i];
    ++count;
  }
  if (count == 0) throw InsufficientDataError("no finite samples in the stationarity window");
  Stationarity st;
  st.variation = (mx - mn) / std::max(std::abs(sum / static_cast<double>(count)), floor);
  st.stationary = st.variation < tol;
  return st;
}

std::vector<double> sample_at_maxima(const std::vector<double>& time,
                                     const std::vector<double>& lambda,
                                     const std::vector<double>& series, double t_a, double t_b) {
  if (time.size() != lambda.size() || time.size() != series.size())
    throw DomainError("time, lambda and series lengths differ");
  const auto [lo, hi] = window_indices(time, t_a, t_b);
  std::vector<double> out;
  for (std::size_t i = std::max<std::size_t>(lo, 1); i < hi && i + 1 < time.size(); ++i)
    if (lambda[i] > lambda[i - 1] && lambda[i] >= lambda[i + 1]) out.push_back(series[i]);
  return out;
}

double antiphase_metric(const std::vector<double>& time, const std::vector<double>& n1,
                        const std::vector<double>& n2, double t_a, double t_b, Detrend detrend) {
  if (time.size() != n1.size() || time.size() != n2.size())
    throw DomainError("channels are not on one grid");
  const auto [lo, hi] = window_indices(time, t_a, t_b);
  const auto a = detrended(time, n1, lo, hi, detrend);
  const auto b = detrended(time, n2, lo, hi, detrend);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) saa += a[i] * a[i], sbb += b[i] * b[i], sab += a[i] * b[i];
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw NumericalError("anti-phase metric undefined: a channel has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double asymptotic_occupation(const SystemSpec& spec, const TransportOptions& opt) {
  spec.validate();
  if (spec.mode() == StatisticsMode::Mixed)
    throw DomainError("asymptotic occupation requires baths of equal statistics");
  if (spec.baths[0].alpha == 0.0 && spec.baths[1].alpha == 0.0)
    throw DomainError("asymptotic occupation undefined without bath coupling");
  return asymptotic_bath_integral(spec, 0, opt) + asymptotic_bath_integral(spec, 1, opt);
}

}  // namespace selfosc
