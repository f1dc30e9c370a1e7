#include "selfosc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "selfosc/errors.hpp"
#include "selfosc/quadrature.hpp"

namespace selfosc {

namespace {

constexpr double kPi = std::numbers::pi;

struct IntegralRequest {
  int bath;
  Statistics stats;
};

// Occupation factors n^eq and 1 + eps n^eq; the T = 0 and w -> 0 limits are
// handled explicitly.
std::array<double, 2> occupation_factors(double w, double T, Statistics s) {
  if (T == 0.0) return {0.0, 1.0};
  const double n = equilibrium_occupation(w, T, s);
  return {n, 1.0 + sign(s) * n};
}

/// Integrates a non-oscillatory integrand over [lo, infinity) by doubling
/// chunks until the newest chunk is below a tenth of the absolute floor and
/// of rtol times the running total.
template <std::size_t D, class F>
quad::Result<D> integrate_tail(F&& f, double lo, const quad::Vec<D>& atol, double rtol,
                               std::size_t max_panels) {
  quad::Options qo{rtol, max_panels};
  quad::Result<D> res;
  for (int doubling = 0; doubling < 80; ++doubling) {
    const double hi = 2.0 * lo;
    const auto chunk = quad::integrate<D>(f, lo, hi, lo / 8.0, atol, qo);
    bool small = true;
    for (std::size_t c = 0; c < D; ++c) {
      res.value[c] += chunk.value[c];
      res.error[c] += chunk.error[c];
      if (std::abs(chunk.value[c]) > 0.1 * std::max(atol[c], rtol * std::abs(res.value[c])))
        small = false;
    }
    res.evaluations += chunk.evaluations;
    res.panels += chunk.panels;
    lo = hi;
    if (small) return res;
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < D; ++c)
    worst = std::max(worst, res.error[c] / std::max(std::abs(res.value[c]), 1e-300));
  throw QuadratureError("half-line tail did not decay", worst);
}

double prefactor(const BathSpec& b) { return b.alpha * b.gamma * b.gamma / kPi; }

struct Resonance {
  double center, half_width;
};

// Near w = -Im s_k the root terms 1/(s_k + iw) peak with width |Re s_k|.
std::vector<Resonance> resonances(const RootSet& roots) {
  std::vector<Resonance> out;
  for (const auto& s : roots.roots)
    if (s.imag() < 0.0 && s.real() < 0.0) out.push_back({-s.imag(), -s.real()});
  return out;
}

/// Initial panel edges on [0, L]: panels no wider than `osc` (one period of
/// e^{iwt}), than max(feature, w/8) (rational structure scales with w far
/// from the poles), and than half a resonance width near each resonance.
std::vector<double> panel_breaks(double L, double osc, double feature,
                                 const std::vector<Resonance>& res) {
  std::vector<double> breaks{0.0};
  double x = 0.0;
  while (x < L) {
    double width = std::min(osc, std::max(feature, x / 8.0));
    for (const auto& r : res) {
      const double d = std::abs(x - r.center) - 12.0 * r.half_width;
      width = std::min(width, 0.5 * r.half_width + std::max(0.0, 0.5 * d));
    }
    x = std::min(L, x + width);
    if (L - x < 1e-3 * width) x = L;
    breaks.push_back(x);
  }
  return breaks;
}

/// Integral without the alpha gamma^2 / pi prefactor of
///   w (gbar^2 + w^2) [(omega + w)^2 n + (omega - w)^2 (1 + eps n)] / prod_k (s_k^2 + w^2),
/// the t -> infinity limit of the bath integral.
double asymptotic_bracket(const KernelSet& kernels, int bath, Statistics stats,
                          const TransportOptions& opt) {
  const auto& spec = kernels.spec();
  const auto& b = spec.baths[bath];
  const double gbar = spec.baths[1 - bath].gamma;
  const double omega = spec.omega();
  const auto& roots = kernels.roots().roots;
  auto f = [&](double w) -> quad::Vec<1> {
    if (w == 0.0) return {0.0};
    cdouble den = 1.0;
    for (const auto& s : roots) den *= s * s + w * w;
    if (!(den.real() > 0.0) || std::abs(den.imag()) > 1e-8 * std::abs(den))
      throw NumericalError("asymptotic integral denominator is not real-positive at w = " +
                           std::to_string(w));
    const auto occ = occupation_factors(w, b.temperature, stats);
    const double num = w * (gbar * gbar + w * w) *
                       ((omega + w) * (omega + w) * occ[0] + (omega - w) * (omega - w) * occ[1]);
    return {num / den.real()};
  };
  const double W = w_max(spec, opt.w_max_factor);
  const double rtol = 0.1 * opt.quadrature_rtol;
  const auto breaks = panel_breaks(W, W, std::min(b.gamma, spec.Omega()) / 4.0,
                                   resonances(kernels.roots()));
  const auto head = quad::integrate<1>(f, breaks, {1e-300}, {rtol, opt.max_panels});
  const auto tail = integrate_tail<1>(f, W, {rtol * std::abs(head.value[0])}, rtol,
                                      opt.max_panels);
  return head.value[0] + tail.value[0];
}

/// Finite-time bath integrals for up to two (bath, statistics) requests.
///
/// The propagators split exactly into a stationary part R(w) e^{-iwt} and
/// root terms T(w,t) that decay like e^{s_k t}, so
///   I(t) = I_inf + int weight [n (2 Re(e^{iwt} RM* TM) + |TM|^2) + (1 + eps n)(...N...)],
///   dI/dt = int weight [n (2 Re(e^{iwt} RM* mu) + 2 Re(TM* dTM)) + ...].
/// [0, L] is integrated with panels resolving e^{iwt}; beyond L the
/// oscillating part is summed by integration by parts and the rest by
/// doubling chunks. Once a bound on the root terms is below tolerance the
/// stationary value is returned directly.
template <std::size_t R>
class BathIntegrator {
 public:
  BathIntegrator(const KernelSet& kernels, const std::array<IntegralRequest, R>& req,
                 const TransportOptions& opt)
      : kernels_(kernels), req_(req), opt_(opt), resonances_(resonances(kernels.roots())) {
    const auto& spec = kernels.spec();
    W_ = w_max(spec, opt.w_max_factor);
    feature_ = spec.Omega() * kPi / 4.0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& b = spec.baths[req[r].bath];
      active_[r] = b.alpha > 0.0;
      feature_ = std::min(feature_, b.gamma / 4.0);
      if (!active_[r]) continue;
      stationary_[r] = asymptotic_bracket(kernels, req[r].bath, req[r].stats, opt);
      // Absolute floors relative to the asymptotic magnitude; rates use the
      // renormalized frequency as time scale.
      atol_[2 * r] = 0.1 * opt.quadrature_rtol * std::max(stationary_[r], 1e-300);
      atol_[2 * r + 1] = atol_[2 * r] * spec.Omega();
    }
    compute_bound_constants();
  }

  std::array<BathIntegral, R> operator()(double t) const {
    std::array<BathIntegral, R> out{};
    const auto& spec = kernels_.spec();
    bool any = false;
    for (bool a : active_) any = any || a;
    if (t == 0.0 || !any) return out;  // M(w,0) = N(w,0) = 0

    const auto tf = kernels_.time_factors(t);
    quad::Vec<D> delta{}, err{};
    if (!negligible_transient(tf)) integrate_transient(tf, delta, err);
    for (std::size_t r = 0; r < R; ++r) {
      if (!active_[r]) continue;
      const double pre = prefactor(spec.baths[req_[r].bath]);
      out[r].value = pre * (stationary_[r] + delta[2 * r]);
      out[r].rate = pre * delta[2 * r + 1];
      out[r].error = pre * (err[2 * r] + 0.1 * opt_.quadrature_rtol * stationary_[r]);
    }
    return out;
  }

 private:
  static constexpr std::size_t D = 2 * R;
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  struct Weights {
    double weight, n, n1;
  };
  Weights weights(std::size_t r, double w) const {
    const auto& b = kernels_.spec().baths[req_[r].bath];
    const auto occ = occupation_factors(w, b.temperature, req_[r].stats);
    return {w / (b.gamma * b.gamma + w * w), occ[0], occ[1]};
  }

  // Uniform-in-w bounds |TM|, |TN| <= tau, |dTM|, |dTN| <= dtau, |mu|, |nu| <= mu.
  struct RootBounds {
    double tau = 0.0, dtau = 0.0, mu = 0.0;
  };
  RootBounds root_bounds(const KernelSet::TimeFactors& tf) const {
    RootBounds rb;
    for (const auto* coef : {&kernels_.m_coefficients(), &kernels_.n_coefficients()}) {
      double tau = 0.0, dtau = 0.0, mu = 0.0;
      for (int k = 0; k < 4; ++k) {
        const cdouble s = kernels_.roots().roots[k];
        const double a = std::abs((*coef)[k]) * std::abs(tf.exp_st[k]);
        if (!(s.real() < 0.0)) return {kInf, kInf, kInf};
        tau += a / -s.real();
        dtau += a * std::abs(s) / -s.real();
        mu += a;
      }
      rb.tau = std::max(rb.tau, tau);
      rb.dtau = std::max(rb.dtau, dtau);
      rb.mu = std::max(rb.mu, mu);
    }
    return rb;
  }

  // K1 ~ int weight (|n| + |1 + eps n|) max(|RM|, |RN|) and K0 ~ the same
  // without the R factor, cut far beyond every scale; both padded.
  void compute_bound_constants() {
    const auto tf0 = kernels_.time_factors(0.0);
    for (std::size_t r = 0; r < R; ++r) {
      if (!active_[r]) continue;
      auto f = [&](double w) -> quad::Vec<2> {
        if (w == 0.0) return {0.0, 0.0};
        const auto wt = weights(r, w);
        const auto p = kernels_.propagator_parts(w, tf0);
        const double occ = std::abs(wt.n) + std::abs(wt.n1);
        return {wt.weight * occ * std::max(std::abs(p.RM), std::abs(p.RN)), wt.weight * occ};
      };
      const auto breaks = panel_breaks(W_, W_, feature_, resonances_);
      const auto head = quad::integrate<2>(f, breaks, {1e-300, 1e-300}, {1e-3, opt_.max_panels});
      K1_[r] = 2.0 * head.value[0] + 2.0;
      K0_[r] = 2.0 * head.value[1] + 2.0 * std::log(1e8);
    }
  }

  bool negligible_transient(const KernelSet::TimeFactors& tf) const {
    const auto rb = root_bounds(tf);
    if (!std::isfinite(rb.tau)) return false;
    for (std::size_t r = 0; r < R; ++r) {
      if (!active_[r]) continue;
      const double bv = 2.0 * rb.tau * K1_[r] + rb.tau * rb.tau * K0_[r];
      const double br = 2.0 * rb.mu * K1_[r] + 2.0 * rb.tau * rb.dtau * K0_[r];
      if (bv > atol_[2 * r] || br > atol_[2 * r + 1]) return false;
    }
    return true;
  }

  void integrate_transient(const KernelSet::TimeFactors& tf, quad::Vec<D>& value,
                           quad::Vec<D>& error) const {
    const double t = tf.t;
    const double L = std::max(W_, 200.0 / t);
    auto full = [&](double w) -> quad::Vec<D> {
      quad::Vec<D> v{};
      if (w == 0.0) return v;
      const auto p = kernels_.propagator_parts(w, tf);
      const cdouble ph{std::cos(w * t), std::sin(w * t)};
      const double vm = 2.0 * (ph * std::conj(p.RM) * p.TM).real() + std::norm(p.TM);
      const double vn = 2.0 * (ph * std::conj(p.RN) * p.TN).real() + std::norm(p.TN);
      const double rm = 2.0 * (ph * std::conj(p.RM) * p.mu).real() +
                        2.0 * (std::conj(p.TM) * p.dTM).real();
      const double rn = 2.0 * (ph * std::conj(p.RN) * p.nu).real() +
                        2.0 * (std::conj(p.TN) * p.dTN).real();
      for (std::size_t r = 0; r < R; ++r) {
        if (!active_[r]) continue;
        const auto wt = weights(r, w);
        v[2 * r] = wt.weight * (wt.n * vm + wt.n1 * vn);
        v[2 * r + 1] = wt.weight * (wt.n * rm + wt.n1 * rn);
      }
      return v;
    };
    const auto breaks = panel_breaks(L, 2.0 * kPi / t, feature_, resonances_);
    const auto head =
        quad::integrate<D>(full, breaks, atol_, {opt_.quadrature_rtol, opt_.max_panels});

    // Non-oscillating remainder beyond L.
    auto smooth = [&](double w) -> quad::Vec<D> {
      quad::Vec<D> v{};
      const auto p = kernels_.propagator_parts(w, tf);
      const double vm = std::norm(p.TM), vn = std::norm(p.TN);
      const double rm = 2.0 * (std::conj(p.TM) * p.dTM).real();
      const double rn = 2.0 * (std::conj(p.TN) * p.dTN).real();
      for (std::size_t r = 0; r < R; ++r) {
        if (!active_[r]) continue;
        const auto wt = weights(r, w);
        v[2 * r] = wt.weight * (wt.n * vm + wt.n1 * vn);
        v[2 * r + 1] = wt.weight * (wt.n * rm + wt.n1 * rn);
      }
      return v;
    };
    const auto tail = integrate_tail<D>(smooth, L, atol_, opt_.quadrature_rtol, opt_.max_panels);

    // Oscillating remainder int_L^inf 2 Re(e^{iwt} g(w)) dw, by parts:
    //   e^{iLt} [-g/(it) + g'/(it)^2 - g''/(it)^3] + O(g'''/t^4).
    auto amplitude = [&](double w) {
      std::array<cdouble, D> g{};
      const auto p = kernels_.propagator_parts(w, tf);
      for (std::size_t r = 0; r < R; ++r) {
        if (!active_[r]) continue;
        const auto wt = weights(r, w);
        g[2 * r] = wt.weight * (wt.n * std::conj(p.RM) * p.TM + wt.n1 * std::conj(p.RN) * p.TN);
        g[2 * r + 1] =
            wt.weight * (wt.n * std::conj(p.RM) * p.mu + wt.n1 * std::conj(p.RN) * p.nu);
      }
      return g;
    };
    const double h = L / 64.0;
    const auto g0 = amplitude(L), gm = amplitude(L - h), gp = amplitude(L + h);
    const cdouble it{0.0, t};
    const cdouble phase{std::cos(L * t), std::sin(L * t)};
    for (std::size_t c = 0; c < D; ++c) {
      const cdouble d1 = (gp[c] - gm[c]) / (2.0 * h);
      const cdouble d2 = (gp[c] - 2.0 * g0[c] + gm[c]) / (h * h);
      const cdouble osc = phase * (-g0[c] / it + d1 / (it * it) - d2 / (it * it * it));
      value[c] = head.value[c] + tail.value[c] + 2.0 * osc.real();
      error[c] = head.error[c] + tail.error[c] + std::abs(2.0 * d2 / (it * it * it));
    }
  }

  const KernelSet& kernels_;
  std::array<IntegralRequest, R> req_;
  TransportOptions opt_;
  std::vector<Resonance> resonances_;
  double W_ = 0.0, feature_ = 0.0;
  std::array<bool, R> active_{};
  std::array<double, R> stationary_{}, K0_{}, K1_{};
  quad::Vec<D> atol_{};
};

struct AmplitudeSample {
  double B2, dB2;
  std::array<double, 2> J, dJ;
};

AmplitudeSample amplitude_sample(const Amplitudes& a) {
  AmplitudeSample s{};
  s.B2 = std::norm(a.B);
  s.dB2 = 2.0 * (std::conj(a.B) * a.dB).real();
  const auto& b = a.B_parts;
  const auto& db = a.dB_parts;
  const double cross = (b[0] * std::conj(b[1])).real();
  const double dcross = (db[0] * std::conj(b[1]) + b[0] * std::conj(db[1])).real();
  for (int l = 0; l < 2; ++l) {
    s.J[l] = std::norm(b[l]) + cross;
    s.dJ[l] = 2.0 * (std::conj(b[l]) * db[l]).real() + dcross;
  }
  return s;
}

/// lambda = -1/2 d/dt ln[|A|^p + eps |B|^2], evaluated from amplitudes
/// scaled by e^{-sigma t} (sigma = slowest decay) so the logarithmic
/// derivative stays well conditioned after the kernels have decayed.
double friction(const KernelSet& kernels, double t, Statistics stats, int power) {
  const double sigma = std::min(0.0, kernels.roots().max_real_part());
  // Values and true time derivatives, both multiplied by e^{-sigma t}.
  const auto a = kernels.amplitudes(t, sigma);
  const double eps = sign(stats);
  const double absA = std::abs(a.A);
  const double dabsA2 = 2.0 * (std::conj(a.A) * a.dA).real();
  const double B2 = std::norm(a.B);
  const double dB2 = 2.0 * (std::conj(a.B) * a.dB).real();
  double bracket, dbracket;
  if (power == 2) {
    bracket = absA * absA + eps * B2;
    dbracket = dabsA2 + eps * dB2;
  } else {
    // |A| + eps|B|^2 = e^{sigma t} (|A~| + eps e^{sigma t} |B~|^2)
    const double damp = std::exp(sigma * t);
    const double dabsA = absA > 0.0 ? 0.5 * dabsA2 / absA : 0.0;
    bracket = absA + eps * damp * B2;
    dbracket = dabsA + eps * damp * dB2;
  }
  if (!(bracket > 1e-12)) {
    std::ostringstream os;
    os << "friction kernel denominator vanished (" << bracket << ") at t = " << t;
    throw SingularKernelError(os.str(), t);
  }
  return -0.5 * dbracket / bracket;
}

/// Runs `body(i)` for i in [0, n) on `workers` threads with a fixed
/// index-to-thread assignment; rethrows the exception of the smallest
/// failing index.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < failed_at) failed_at = i, failure = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void allocate(CoefficientSeries& s, const TimeGrid& grid) {
  const std::size_t n = grid.size();
  s.grid = grid;
  s.time.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.time[i] = grid.time(i);
  s.lambda.assign(n, 0.0);
  s.diffusion.assign(n, 0.0);
  s.ratio.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (int l = 0; l < 2; ++l) {
    s.partial_diffusion[l].assign(n, 0.0);
    s.bath_integrals[l].assign(n, 0.0);
    s.bath_integral_rates[l].assign(n, 0.0);
    s.J_parts[l].assign(n, 0.0);
  }
}

void finish(CoefficientSeries& s, const std::vector<double>& errors, double ratio_floor) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::abs(s.lambda[i]) >= ratio_floor) s.ratio[i] = s.diffusion[i] / s.lambda[i];
    if (!std::isfinite(s.lambda[i]) || !std::isfinite(s.diffusion[i]))
      throw NumericalError("non-finite transport coefficient at t = " + std::to_string(s.time[i]));
  }
  for (double e : errors) s.max_quadrature_error = std::max(s.max_quadrature_error, e);
}

}  // namespace

void TransportOptions::validate() const {
  if (!(quadrature_rtol > 0.0 && quadrature_rtol < 1.0))
    throw DomainError("quadrature rtol must be in (0, 1)");
  if (!(w_max_factor >= 1.0)) throw DomainError("w_max_factor must be >= 1");
  if (abs_A_power != 1 && abs_A_power != 2) throw DomainError("abs_A_power must be 1 or 2");
  if (!(ratio_floor > 0.0)) throw DomainError("ratio_floor must be > 0");
}

TimeGrid TimeGrid::covering(double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be > 0");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be >= 0");
  TimeGrid g;
  g.dt = dt;
  g.steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  return g;
}

double w_max(const SystemSpec& spec, double factor) {
  double g = 0.0, T = 0.0;
  for (const auto& b : spec.baths) g = std::max(g, b.gamma), T = std::max(T, b.temperature);
  return factor * std::max({g, 2.0 * spec.omega(), T});
}

BathIntegral bath_integral_I(const KernelSet& kernels, int bath, Statistics stats, double t,
                             const TransportOptions& opt) {
  if (bath != 0 && bath != 1) throw DomainError("bath index must be 0 or 1");
  if (!(t >= 0.0)) throw DomainError("bath_integral_I requires t >= 0");
  opt.validate();
  if (kernels.spec().baths[bath].alpha == 0.0) return {};
  return BathIntegrator<1>(kernels, {IntegralRequest{bath, stats}}, opt)(t)[0];
}

BathIntegral bath_integral_I(const KernelSet& kernels, int bath, double t,
                             const TransportOptions& opt) {
  if (bath != 0 && bath != 1) throw DomainError("bath index must be 0 or 1");
  return bath_integral_I(kernels, bath, kernels.spec().baths[bath].statistics, t, opt);
}

CoefficientSeries same_statistics_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                               const TransportOptions& opt) {
  opt.validate();
  if (spec.mode() == StatisticsMode::Mixed)
    throw DomainError("same_statistics_coefficients requires baths of equal statistics");
  const Statistics stats = spec.baths[0].statistics;
  const KernelSet kernels(characteristic_roots(spec), spec);
  const std::array<IntegralRequest, 2> req{IntegralRequest{0, stats}, IntegralRequest{1, stats}};
  const BathIntegrator<2> integrals(kernels, req, opt);

  CoefficientSeries s;
  s.mode = spec.mode();
  allocate(s, grid);
  std::vector<double> errors(grid.size(), 0.0);
  parallel_for(grid.size(), opt.workers, [&](std::size_t i) {
    const double t = grid.time(i);
    const double lam = friction(kernels, t, stats, opt.abs_A_power);
    const auto amp = amplitude_sample(kernels.amplitudes(t));
    const auto I = integrals(t);
    double D = 0.0;
    for (int l = 0; l < 2; ++l) {
      const double Dl = lam * (amp.J[l] + I[l].value) + 0.5 * (amp.dJ[l] + I[l].rate);
      s.partial_diffusion[l][i] = Dl;
      s.bath_integrals[l][i] = I[l].value;
      s.bath_integral_rates[l][i] = I[l].rate;
      s.J_parts[l][i] = amp.J[l];
      D += Dl;
      errors[i] = std::max(errors[i], I[l].error);
    }
    s.lambda[i] = lam;
    s.diffusion[i] = D;
  });
  finish(s, errors, opt.ratio_floor);
  return s;
}

CoefficientSeries mixed_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                     const TransportOptions& opt) {
  opt.validate();
  if (spec.mode() != StatisticsMode::Mixed)
    throw DomainError("mixed_coefficients requires a fermionic bath 1 and a bosonic bath 2");
  // The characteristic roots do not depend on statistics, so the fermionic
  // and bosonic auxiliary systems share one kernel set.
  const KernelSet kernels(characteristic_roots(spec), spec);
  const double p = mixing_fraction(spec.baths[0], spec.baths[1]);
  const std::array<IntegralRequest, 2> req{IntegralRequest{0, Statistics::Fermionic},
                                           IntegralRequest{1, Statistics::Bosonic}};
  const BathIntegrator<2> integrals(kernels, req, opt);

  CoefficientSeries s;
  s.mode = StatisticsMode::Mixed;
  s.mixing_fraction = p;
  allocate(s, grid);
  s.lambda_f.assign(grid.size(), 0.0);
  s.lambda_b.assign(grid.size(), 0.0);
  std::vector<double> errors(grid.size(), 0.0);
  parallel_for(grid.size(), opt.workers, [&](std::size_t i) {
    const double t = grid.time(i);
    const double lf = friction(kernels, t, Statistics::Fermionic, opt.abs_A_power);
    const double lb = friction(kernels, t, Statistics::Bosonic, opt.abs_A_power);
    const auto amp = amplitude_sample(kernels.amplitudes(t));
    const auto I = integrals(t);
    const double Df1 = lf * (amp.J[0] + I[0].value) + 0.5 * (amp.dJ[0] + I[0].rate);
    const double Db2 = lb * (amp.J[1] + I[1].value) + 0.5 * (amp.dJ[1] + I[1].rate);
    s.lambda_f[i] = lf;
    s.lambda_b[i] = lb;
    s.partial_diffusion[0][i] = Df1;
    s.partial_diffusion[1][i] = Db2;
    for (int l = 0; l < 2; ++l) {
      s.bath_integrals[l][i] = I[l].value;
      s.bath_integral_rates[l][i] = I[l].rate;
      s.J_parts[l][i] = amp.J[l];
      errors[i] = std::max(errors[i], I[l].error);
    }
    s.lambda[i] = p * lf + (1.0 - p) * lb - 2.0 * Df1;
    s.diffusion[i] = Df1 + Db2;
  });
  finish(s, errors, opt.ratio_floor);
  return s;
}

CoefficientSeries compute_coefficients(const SystemSpec& spec, const TimeGrid& grid,
                                       const TransportOptions& opt) {
  if (spec.baths[0].alpha == 0.0 && spec.baths[1].alpha == 0.0) {
    // Decoupled oscillator: B = 0 and |A| = 1, so lambda = D = 0 exactly.
    // Handled here because equal cutoffs make the root sums degenerate.
    opt.validate();
    spec.validate();
    CoefficientSeries s;
    s.mode = spec.mode();
    allocate(s, grid);
    if (s.mode == StatisticsMode::Mixed) {
      s.lambda_f.assign(grid.size(), 0.0);
      s.lambda_b.assign(grid.size(), 0.0);
    }
    return s;
  }
  return spec.mode() == StatisticsMode::Mixed ? mixed_coefficients(spec, grid, opt)
                                              : same_statistics_coefficients(spec, grid, opt);
}

double asymptotic_bath_integral(const SystemSpec& spec, int bath, Statistics stats,
                                const TransportOptions& opt) {
  if (bath != 0 && bath != 1) throw DomainError("bath index must be 0 or 1");
  opt.validate();
  const auto& b = spec.baths[bath];
  if (b.alpha == 0.0) return 0.0;
  const KernelSet kernels(characteristic_roots(spec), spec);
  return prefactor(b) * asymptotic_bracket(kernels, bath, stats, opt);
}

double asymptotic_bath_integral(const SystemSpec& spec, int bath, const TransportOptions& opt) {
  if (bath != 0 && bath != 1) throw DomainError("bath index must be 0 or 1");
  return asymptotic_bath_integral(spec, bath, spec.baths[bath].statistics, opt);
}

double markovian_asymptote(const SystemSpec& spec) {
  const double p = mixing_fraction(spec.baths[0], spec.baths[1]);
  const double w = spec.omega();
  const auto& b1 = spec.baths[0];
  const auto& b2 = spec.baths[1];
  return p * equilibrium_occupation(w, b1.temperature, b1.statistics) +
         (1.0 - p) * equilibrium_occupation(w, b2.temperature, b2.statistics);
}

double stationarity_residual(double p, double I_f1, double I_b2) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mixing fraction must lie in (0, 1)");
  const double pole = 1.0 - 2.0 * I_f1 / p;
  if (std::abs(pole) < 1e-12) throw NumericalError("stationarity condition at its pole (1 - 2 I_f/p = 0)");
  return I_b2 / (1.0 - p) - (I_f1 / p) / pole;
}

double stationarity_condition_residual(const SystemSpec& spec, const TransportOptions& opt) {
  if (spec.mode() != StatisticsMode::Mixed)
    throw DomainError("stationarity condition applies to mixed systems");
  const double p = mixing_fraction(spec.baths[0], spec.baths[1]);
  const double If = asymptotic_bath_integral(spec, 0, Statistics::Fermionic, opt);
  const double Ib = asymptotic_bath_integral(spec, 1, Statistics::Bosonic, opt);
  return stationarity_residual(p, If, Ib);
}

}  // namespace selfosc
