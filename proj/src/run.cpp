#include "selfosc/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

#include "json.hpp"
#include "selfosc/errors.hpp"
#include "selfosc/kernels.hpp"
#include "selfosc/oracle.hpp"
#include "selfosc/scenarios.hpp"

#ifndef SELFOSC_VERSION
#define SELFOSC_VERSION "unknown"
#endif

namespace selfosc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using SeriesPtr = std::shared_ptr<const CoefficientSeries>;
/// Coefficient series of oscillator `which` (0 or 1) on [0, t_max].
using Provider = std::function<SeriesPtr(const RunConfig&, std::size_t which, double t_max)>;

SeriesPtr compute_series(const RunConfig& c, std::size_t which, double t_max) {
  return std::make_shared<const CoefficientSeries>(
      compute_coefficients(c.system(which), TimeGrid::covering(t_max, c.dt), c.transport()));
}

Observable info(std::string name, double value, double lo = kNaN, double hi = kNaN) {
  return {std::move(name), value, lo, hi, kNaN, "info"};
}

Observable judged(std::string name, double value, double lo, double hi, double tol, bool ok) {
  return {std::move(name), value, lo, hi, tol, ok ? "pass" : "fail"};
}

Observable skipped(std::string name, double lo = kNaN, double hi = kNaN) {
  return {std::move(name), kNaN, lo, hi, kNaN, "skipped"};
}

std::string label(double x) { return format_number(x); }

/// [0.35, 0.85] of the run, i.e. [7, 17] for t_max = 20.
std::pair<double, double> locking_window(double t_max) { return {0.35 * t_max, 0.85 * t_max}; }
/// Second half of the run, capped at [10, 20] when the run is long enough.
std::pair<double, double> late_window(double t_max) {
  return t_max >= 20.0 ? std::pair{10.0, 20.0} : std::pair{0.5 * t_max, t_max};
}

class BundleWriter {
 public:
  BundleWriter(std::string command, const fs::path& out) {
    bundle_.command = std::move(command);
    bundle_.directory = out;
    fs::create_directories(out);
  }

  void file(const std::string& name, const std::string& content) {
    write_file_atomic(bundle_.directory / name, content);
    bundle_.files.push_back(name);
  }

  void add(Observable o) { bundle_.observables.push_back(std::move(o)); }
  void add(const std::vector<Observable>& os) {
    for (const auto& o : os) add(o);
  }

  ResultBundle finish(const RunConfig& config, json extra = json::object());

 private:
  ResultBundle bundle_;
};

json system_json(const SystemSpec& s) {
  json baths = json::array();
  for (const auto& b : s.baths)
    baths.push_back({{"statistics", to_string(b.statistics)},
                     {"alpha", b.alpha},
                     {"gamma_over_Omega", b.gamma},
                     {"kT_over_hOmega", b.temperature}});
  return {{"Omega", s.Omega()},
          {"omega_bare", s.omega()},
          {"mode", to_string(s.mode())},
          {"baths", baths},
          {"w_max", w_max(s)},
          {"warnings", s.warnings()}};
}

ResultBundle BundleWriter::finish(const RunConfig& config, json extra) {
  file("observables.csv", observables_csv(bundle_.observables));
  json m;
  m["program"] = "selfosc";
  m["version"] = SELFOSC_VERSION;
  m["command"] = bundle_.command;
  m["config"] = serialize_config(config);
  json systems = json::array();
  systems.push_back(system_json(config.system(0)));
  if (config.coupled()) systems.push_back(system_json(config.system(1)));
  m["systems"] = systems;
  if (config.coupled()) m["beta"] = config.beta;
  m["tolerances"] = {{"quadrature_rtol", config.rtol},
                     {"w_max_factor", config.w_max_factor},
                     {"ratio_floor", TransportOptions{}.ratio_floor},
                     {"dt", config.dt},
                     {"rk4_substeps", config.substeps}};
  m["conventions"] = {
      {"units", "hbar = k_B = 1; frequencies and temperatures in units of Omega_1"},
      {"abs_A_power", config.abs_A_power},
      {"second_order_form", to_string(config.form)},
      {"beta_unit", "Omega_1^2"},
      {"rate_window", 2.0 * kPi / config.oscillator.Omega},
      {"rate_definition",
       "centred difference of Delta E over one period 2 pi / Omega_1; averages are means of "
       "|rate| over the stated window"}};
  m["determinism"] = {{"workers", config.workers},
                      {"worker_independent", true},
                      {"number_format", "shortest round-trip decimal"}};
  m["build"] = {{"compiler", __VERSION__}, {"cxx", static_cast<long>(__cplusplus)}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  bundle_.files.push_back("metadata.json");
  m["files"] = bundle_.files;
  m["status"] = bundle_.passed() ? "passed" : "failed";
  bundle_.metadata_json = m.dump(2) + "\n";
  write_file_atomic(bundle_.directory / "metadata.json", bundle_.metadata_json);
  return bundle_;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double consistent_dn0(const CoefficientSeries& c, double n0) {
  return -2.0 * c.lambda[0] * n0 + 2.0 * c.diffusion[0];
}

/// max |n_first_order - n_second_order| with the second-order form using
/// interpolated derivatives of lambda and D.
double eq_equivalence(const CoefficientSeries& c, double n0, double t_end,
                      const EvolveOptions& opt) {
  const auto a = evolve_single(c, n0, t_end, opt);
  const auto b = evolve_single_second_order(c, n0, consistent_dn0(c, n0), t_end,
                                            SecondOrderForm::Explicit, opt);
  return max_abs_diff(a.n[0], b.n[0], a.size());
}

double occupation_bound(const SystemSpec& s) {
  double m = 0.0;
  for (const auto& b : s.baths) m = std::max(m, equilibrium_occupation(s.omega(), b.temperature, b.statistics));
  return 10.0 * std::max(m, 0.01);
}

Observable boundedness(const std::string& name, const std::vector<double>& n, const SystemSpec& s,
                       double t_max) {
  const auto [mn, mx] = std::minmax_element(n.begin(), n.end());
  const double bound = occupation_bound(s);
  return judged(name, *mx, 0.0, t_max, bound, *mn >= -1e-9 && *mx <= bound);
}

Observable period_observable(const std::string& name, const std::vector<double>& time,
                             const std::vector<double>& values, double lo, double hi,
                             double target = kNaN, double rel_tol = kNaN) {
  try {
    const auto pe = estimate_period(time, values, lo, hi);
    if (std::isnan(target)) return info(name, pe.period, lo, hi);
    return judged(name, pe.period, lo, hi, rel_tol,
                  std::abs(pe.period - target) <= rel_tol * target);
  } catch (const DomainError&) {
    if (std::isnan(target)) return skipped(name, lo, hi);
    return judged(name, kNaN, lo, hi, rel_tol, false);
  }
}

Observable variation_observable(const std::string& name, const std::vector<double>& time,
                                const std::vector<double>& values, double lo, double hi,
                                double min_variation = kNaN) {
  try {
    const double v = detect_stationarity(time, values, lo, hi).variation;
    if (std::isnan(min_variation)) return info(name, v, lo, hi);
    return judged(name, v, lo, hi, min_variation, v > min_variation);
  } catch (const DomainError&) {
    return skipped(name, lo, hi);
  }
}

Observable antiphase_observable(const std::string& name, const Trajectory& tr, double lo,
                                double hi, double threshold = kNaN) {
  try {
    const double r = antiphase_metric(tr.time, tr.n[0], tr.n[1], lo, hi);
    if (std::isnan(threshold)) return info(name, r, lo, hi);
    return judged(name, r, lo, hi, threshold, r < threshold);
  } catch (const Error&) {
    return std::isnan(threshold) ? skipped(name, lo, hi) : judged(name, kNaN, lo, hi, threshold, false);
  }
}

std::vector<Observable> coefficient_observables(const CoefficientSeries& c, const SystemSpec& s,
                                                const std::string& prefix, double t_max) {
  std::vector<Observable> out;
  out.push_back(judged(prefix + "lambda_0", std::abs(c.lambda[0]), 0.0, 0.0, 1e-8,
                       std::abs(c.lambda[0]) <= 1e-8));
  out.push_back(judged(prefix + "D_0", std::abs(c.diffusion[0]), 0.0, 0.0, 1e-8,
                       std::abs(c.diffusion[0]) <= 1e-8));
  const auto [lo, hi] = late_window(t_max);
  out.push_back(variation_observable(prefix + "ratio_variation", c.time, c.ratio, lo, hi));
  out.push_back(info(prefix + "max_quadrature_error", c.max_quadrature_error));
  if (s.mode() == StatisticsMode::Mixed)
    out.push_back(info(prefix + "mixing_fraction", c.mixing_fraction));
  return out;
}

std::vector<Observable> single_observables(const Trajectory& tr, const CoefficientSeries& c,
                                           const SystemSpec& s, const RunConfig& cfg) {
  std::vector<Observable> out;
  const double t = cfg.t_max;
  const auto [lo, hi] = late_window(t);
  out.push_back(info("n1_final", tr.n[0].back(), t, t));
  out.push_back(info("n1_mean", window_mean_abs(tr.time, tr.n[0], lo, hi), lo, hi));
  out.push_back(variation_observable("n1_variation", tr.time, tr.n[0], lo, hi));
  out.push_back(period_observable("n1_period", tr.time, tr.n[0], lo, hi));
  const double t_eq = std::min(t, 20.0);
  const double dev = eq_equivalence(c, cfg.initial.n1, t_eq, cfg.evolve_options());
  out.push_back(judged("eq_equivalence_max_deviation", dev, 0.0, t_eq, 1e-6, dev <= 1e-6));
  out.push_back(boundedness("n1_bounds", tr.n[0], s, t));
  return out;
}

/// beta = 0 coupled run against two independent single-oscillator runs.
Observable decoupling_observable(const RunConfig& cfg, const CoefficientSeries& c1,
                                 const CoefficientSeries& c2) {
  auto spec = cfg.coupled_spec();
  spec.beta = 0.0;
  const auto init = cfg.coupled_init();
  const auto pair = evolve_coupled(spec, c1, c2, init, cfg.t_max, cfg.form, cfg.evolve_options());
  double dev = 0.0;
  const std::array<const CoefficientSeries*, 2> cs{&c1, &c2};
  for (std::size_t j = 0; j < 2; ++j) {
    const auto solo = evolve_single_second_order(*cs[j], init.n[j], init.dn[j], cfg.t_max,
                                                 cfg.form, cfg.evolve_options());
    dev = std::max(dev, max_abs_diff(pair.n[j], solo.n[0], pair.size()));
  }
  return judged("decoupling_max_deviation", dev, 0.0, cfg.t_max, 1e-8, dev <= 1e-8);
}

double min_difference_after(const std::vector<double>& time, const std::vector<double>& a,
                            const std::vector<double>& b, double t0) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < time.size(); ++i)
    if (time[i] >= t0 - 1e-12) m = std::min(m, a[i] - b[i]);
  return m;
}

std::vector<Observable> coupled_observables(const Trajectory& tr, const DeltaDissipation& dd,
                                            const RunConfig& cfg) {
  std::vector<Observable> out;
  const double t = cfg.t_max;
  const auto [lo, hi] = locking_window(t);
  const auto [llo, lhi] = late_window(t);
  out.push_back(info("n1_final", tr.n[0].back(), t, t));
  out.push_back(info("n2_final", tr.n[1].back(), t, t));
  out.push_back(info("n1_mean", window_mean_abs(tr.time, tr.n[0], llo, lhi), llo, lhi));
  out.push_back(info("n2_mean", window_mean_abs(tr.time, tr.n[1], llo, lhi), llo, lhi));
  out.push_back(antiphase_observable("antiphase_correlation", tr, lo, hi));
  out.push_back(info("E1_final", dd.energy[0].back(), t, t));
  out.push_back(info("E2_final", dd.energy[1].back(), t, t));
  out.push_back(info("delta_E1_final", dd.delta[0].back(), t, t));
  out.push_back(info("delta_E2_final", dd.delta[1].back(), t, t));
  if (t > 2.0) {
    out.push_back(info("mean_abs_rate1", window_mean_abs(dd.time, dd.rate[0], 2.0, t), 2.0, t));
    out.push_back(info("mean_abs_rate2", window_mean_abs(dd.time, dd.rate[1], 2.0, t), 2.0, t));
  }
  for (std::size_t j = 0; j < 2; ++j)
    out.push_back(boundedness("n" + std::to_string(j + 1) + "_bounds", tr.n[j],
                              cfg.system(j), t));
  return out;
}

ResultBundle evolve_impl(const RunConfig& cfg, const fs::path& out, const Provider& provider) {
  BundleWriter w("evolve", out);
  const auto c = provider(cfg, 0, cfg.t_max);
  const auto s = cfg.system(0);
  const auto tr = evolve_single(*c, cfg.initial.n1, cfg.t_max, cfg.evolve_options());
  w.file("coefficients.csv", coefficients_csv(*c));
  w.file("trajectory.csv", trajectory_csv(tr));
  w.add(single_observables(tr, *c, s, cfg));
  return w.finish(cfg);
}

ResultBundle coupled_impl(const RunConfig& cfg, const fs::path& out, const Provider& provider) {
  if (!cfg.coupled()) throw ConfigError("coupled run needs [oscillator2]");
  BundleWriter w("coupled", out);
  const auto c1 = provider(cfg, 0, cfg.t_max);
  const auto c2 = provider(cfg, 1, cfg.t_max);
  const auto spec = cfg.coupled_spec();
  const auto init = cfg.coupled_init();
  const auto tr = evolve_coupled(spec, *c1, *c2, init, cfg.t_max, cfg.form, cfg.evolve_options());
  const auto dd = delta_dissipation(spec, *c1, *c2, cfg.t_max, init, cfg.form);
  w.file("coefficients_1.csv", coefficients_csv(*c1));
  w.file("coefficients_2.csv", coefficients_csv(*c2));
  w.file("trajectory.csv", trajectory_csv(tr));
  w.file("energy.csv", energy_csv(dd));
  w.add(coupled_observables(tr, dd, cfg));
  w.add(decoupling_observable(cfg, *c1, *c2));
  return w.finish(cfg, {{"rate_window_used", dd.window}});
}

/// Runs f(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& f) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < threads; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct PairRun {
  double beta = 0.0;
  Trajectory trajectory;
  DeltaDissipation energy;
};

std::vector<PairRun> beta_family_runs(const RunConfig& cfg, const std::vector<double>& betas,
                                      const CoefficientSeries& c1, const CoefficientSeries& c2) {
  std::vector<PairRun> runs(betas.size());
  parallel_for(betas.size(), cfg.workers, [&](std::size_t i) {
    auto spec = cfg.coupled_spec();
    spec.beta = betas[i];
    runs[i].beta = betas[i];
    runs[i].trajectory =
        evolve_coupled(spec, c1, c2, cfg.coupled_init(), cfg.t_max, cfg.form, cfg.evolve_options());
    runs[i].energy = delta_dissipation(spec, c1, c2, cfg.t_max, cfg.coupled_init(), cfg.form);
  });
  return runs;
}

ResultBundle scenario_impl(const RunConfig& cfg, const fs::path& out) {
  const Scenario sc = make_scenario(cfg.scenario);
  BundleWriter w("scenario " + sc.name, out);
  const double t = cfg.t_max;
  const auto [llo, lhi] = late_window(t);
  const auto s1 = cfg.system(0);
  json extra{{"scenario", {{"name", sc.name}, {"description", sc.description}}}};

  switch (sc.product) {
    case ScenarioProduct::Coefficients: {
      const auto c = compute_series(cfg, 0, t);
      w.file("coefficients.csv", coefficients_csv(*c));
      w.add(coefficient_observables(*c, s1, "", t));
      // A non-stationary D/lambda is the self-oscillation signature.
      w.add(variation_observable("ratio_nonstationary", c->time, c->ratio, llo, lhi, 0.01));
      w.add(info("stationarity_residual", stationarity_condition_residual(s1, cfg.transport())));
      break;
    }
    case ScenarioProduct::Trajectory: {
      const auto c = compute_series(cfg, 0, t);
      const auto tr = evolve_single(*c, cfg.initial.n1, t, cfg.evolve_options());
      w.file("coefficients.csv", coefficients_csv(*c));
      w.file("trajectory.csv", trajectory_csv(tr));
      const double period = 2.0 * kPi / s1.Omega();
      w.add(period_observable("n1_period", tr.time, tr.n[0], 3.0, std::min(8.0, t), period, 0.05));
      try {
        const auto pe = estimate_period(tr.time, tr.n[0], 3.0, std::min(8.0, t));
        w.add(info("n1_period_spectral", pe.spectral_period, 3.0, std::min(8.0, t)));
      } catch (const DomainError&) {
        w.add(skipped("n1_period_spectral", 3.0, std::min(8.0, t)));
      }
      w.add(variation_observable("n1_nonstationary", tr.time, tr.n[0], llo, lhi, 0.01));
      if (t > 20.0)
        w.add(variation_observable("n1_nonstationary_end", tr.time, tr.n[0], t - 10.0, t, 0.01));
      const double t_eq = std::min(t, 20.0);
      const double dev = eq_equivalence(*c, cfg.initial.n1, t_eq, cfg.evolve_options());
      w.add(judged("eq_equivalence_max_deviation", dev, 0.0, t_eq, 1e-6, dev <= 1e-6));
      w.add(boundedness("n1_bounds", tr.n[0], s1, t));
      break;
    }
    case ScenarioProduct::PairCoefficients: {
      const auto c1 = compute_series(cfg, 0, t);
      const auto c2 = compute_series(cfg, 1, t);
      const auto s2 = cfg.system(1);
      w.file("coefficients_1.csv", coefficients_csv(*c1));
      w.file("coefficients_2.csv", coefficients_csv(*c2));
      w.add(coefficient_observables(*c1, s1, "osc1_", t));
      w.add(coefficient_observables(*c2, s2, "osc2_", t));
      try {
        w.add(info("lambda_correlation", antiphase_metric(c1->time, c1->lambda, c2->lambda, llo, lhi),
                   llo, lhi));
      } catch (const Error&) {
        w.add(skipped("lambda_correlation", llo, lhi));
      }
      w.add(period_observable("osc1_lambda_period", c1->time, c1->lambda, llo, lhi));
      w.add(period_observable("osc2_lambda_period", c2->time, c2->lambda, llo, lhi));
      if (s2.mode() != StatisticsMode::Mixed) {
        // Same-statistics oscillator: D/lambda sampled at the friction maxima
        // settles to the sum of the asymptotic bath integrals.
        const auto at_max = sample_at_maxima(c2->time, c2->lambda, c2->ratio, llo, lhi);
        const double n_inf = asymptotic_occupation(s2, cfg.transport());
        if (at_max.size() >= 2) {
          const auto [mn, mx] = std::minmax_element(at_max.begin(), at_max.end());
          const double mean = 0.5 * (*mn + *mx);
          const double var = (*mx - *mn) / std::abs(mean);
          w.add(judged("osc2_ratio_at_lambda_maxima_variation", var, llo, lhi, 0.02, var <= 0.02));
          const double rel = std::abs(at_max.back() - n_inf) / n_inf;
          w.add(judged("osc2_ratio_vs_asymptote", rel, llo, lhi, 0.02, rel <= 0.02));
        } else {
          w.add(judged("osc2_ratio_at_lambda_maxima_variation", kNaN, llo, lhi, 0.02, false));
        }
        w.add(info("osc2_asymptotic_occupation", n_inf));
      }
      break;
    }
    case ScenarioProduct::PairTrajectories:
    case ScenarioProduct::Energies:
    case ScenarioProduct::EnergyDeltas: {
      const auto c1 = compute_series(cfg, 0, t);
      const auto c2 = compute_series(cfg, 1, t);
      const auto runs = beta_family_runs(cfg, sc.beta_family, *c1, *c2);
      const auto [lo, hi] = locking_window(t);
      for (const auto& r : runs) {
        const std::string b = label(r.beta);
        if (sc.product == ScenarioProduct::PairTrajectories) {
          w.file("trajectory_beta_" + b + ".csv", trajectory_csv(r.trajectory));
          // The mixed pair locks in anti-phase; the mixed/bosonic pair is
          // reported without a claim.
          const bool claim = sc.name == "fig4";
          w.add(antiphase_observable("antiphase_beta_" + b, r.trajectory, lo, hi,
                                     claim ? -0.5 : kNaN));
        } else {
          w.file("energy_beta_" + b + ".csv", energy_csv(r.energy));
        }
        if (sc.product == ScenarioProduct::Energies) {
          const double m = min_difference_after(r.energy.time, r.energy.energy[1],
                                                r.energy.energy[0], 2.0);
          w.add(judged("E2_minus_E1_min_beta_" + b, m, 2.0, t, 0.0, m > 0.0));
        }
        if (sc.product == ScenarioProduct::EnergyDeltas) {
          const double d1 = r.energy.delta[0].back(), d2 = r.energy.delta[1].back();
          w.add(judged("delta_E1_final_beta_" + b, d1, t, t, 0.0, d1 < 0.0));
          w.add(judged("delta_E2_final_beta_" + b, d2, t, t, 0.0, d2 > 0.0));
          const double r1 = window_mean_abs(r.energy.time, r.energy.rate[0], 2.0, t);
          const double r2 = window_mean_abs(r.energy.time, r.energy.rate[1], 2.0, t);
          w.add(info("mean_abs_rate1_beta_" + b, r1, 2.0, t));
          w.add(info("mean_abs_rate2_beta_" + b, r2, 2.0, t));
          w.add(judged("rate_ratio_beta_" + b, r2 / r1, 2.0, t, 1.0, r2 > r1));
        }
      }
      if (sc.product == ScenarioProduct::PairTrajectories) w.add(decoupling_observable(cfg, *c1, *c2));
      extra["beta_family"] = sc.beta_family;
      extra["rate_window_used"] = 2.0 * kPi / s1.Omega();
      break;
    }
  }
  return w.finish(cfg, extra);
}

/// Shares coefficient series between sweep points with identical physics,
/// grid and quadrature settings. The first requester computes; the rest wait.
class SeriesCache {
 public:
  SeriesPtr get(const RunConfig& c, std::size_t which, double t_max) {
    const std::string key = key_of(c, which, t_max);
    std::shared_future<SeriesPtr> fut;
    std::promise<SeriesPtr> promise;
    bool owner = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = promise.get_future().share();
        entries_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(compute_series(c, which, t_max));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  static std::string key_of(const RunConfig& c, std::size_t which, double t_max) {
    const auto& o = which == 0 ? c.oscillator : *c.oscillator2;
    std::string k = format_number(o.Omega);
    for (const auto& b : o.baths)
      k += "|" + to_string(b.statistics) + "," + format_number(b.alpha) + "," +
           format_number(b.gamma) + "," + format_number(b.temperature);
    k += "|" + format_number(t_max) + "|" + format_number(c.dt) + "|" + format_number(c.rtol) +
         "|" + format_number(c.w_max_factor) + "|" + std::to_string(c.abs_A_power);
    return k;
  }

  std::mutex mu_;
  std::map<std::string, std::shared_future<SeriesPtr>> entries_;
};

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

/// Oracle comparison for one same-statistics bosonic system.
Observable oracle_observable(const std::string& name, const SystemSpec& spec,
                             const RunConfig& cfg, Fault fault) {
  const double t_end = cfg.oracle.t_max;
  std::array<DiscretizedBath, 2> baths;
  for (int b = 0; b < 2; ++b)
    baths[b] = sample_bath(spec.baths[b], cfg.oracle.modes,
                           cfg.oracle.w_max_over_gamma * spec.baths[b].gamma);
  ExactOptions eo;
  eo.n0 = cfg.initial.n1;
  const auto exact = evolve_exact(spec, baths, t_end, cfg.dt, eo);

  auto series = compute_coefficients(spec, TimeGrid::covering(t_end, cfg.dt), cfg.transport());
  if (fault == Fault::LambdaSign)
    for (double& l : series.lambda) l = -l;
  try {
    const auto master = evolve_single(series, cfg.initial.n1, t_end, cfg.evolve_options());
    const auto cmp = compare(master, exact);
    const double tol = cfg.oracle.tolerance;
    return judged(name, cmp.max_deviation, 0.0, t_end, tol, cmp.max_deviation <= tol);
  } catch (const IntegrationError&) {
    return judged(name, kNaN, 0.0, t_end, cfg.oracle.tolerance, false);
  }
}

std::vector<Observable> validate_system(const SystemSpec& s, const RunConfig& cfg,
                                        const std::string& prefix, Fault fault) {
  std::vector<Observable> out;
  if (s.baths[0].alpha == 0.0 && s.baths[1].alpha == 0.0) {
    // Null comparison: nothing couples, both sides must keep n = n0.
    out.push_back(info(prefix + "decoupled", 1.0));
  } else {
    const auto roots = characteristic_roots(s);
    double cmax = 0.0, resid = 0.0;
    for (double v : roots.quartic_coefficients) cmax = std::max(cmax, std::abs(v));
    for (const auto& r : roots.roots) resid = std::max(resid, std::abs(roots.quartic(r)) / cmax);
    out.push_back(judged(prefix + "root_residual", resid, kNaN, kNaN, 1e-9, resid <= 1e-9));
    out.push_back(judged(prefix + "max_root_real_part", roots.max_real_part(), kNaN, kNaN, 0.0,
                         roots.max_real_part() <= 1e-10 * std::abs(roots.roots[0])));
  }

  const auto c = compute_coefficients(s, TimeGrid::covering(cfg.t_max, cfg.dt), cfg.transport());
  out.push_back(judged(prefix + "lambda_0", std::abs(c.lambda[0]), 0.0, 0.0, 1e-8,
                       std::abs(c.lambda[0]) <= 1e-8));
  out.push_back(judged(prefix + "D_0", std::abs(c.diffusion[0]), 0.0, 0.0, 1e-8,
                       std::abs(c.diffusion[0]) <= 1e-8));
  const double t_eq = std::min(cfg.t_max, 20.0);
  const double dev = eq_equivalence(c, cfg.initial.n1, t_eq, cfg.evolve_options());
  out.push_back(judged(prefix + "eq_equivalence_max_deviation", dev, 0.0, t_eq, 1e-6, dev <= 1e-6));
  const auto tr = evolve_single(c, cfg.initial.n1, cfg.t_max, cfg.evolve_options());
  out.push_back(boundedness(prefix + "n_bounds", tr.n[0], s, cfg.t_max));

  switch (s.mode()) {
    case StatisticsMode::AllBosonic:
      out.push_back(oracle_observable(prefix + "oracle_max_deviation", s, cfg, fault));
      break;
    case StatisticsMode::AllFermionic:
      out.push_back(skipped(prefix + "oracle_max_deviation"));
      break;
    case StatisticsMode::Mixed: {
      // No exact closure for the mixed model: check the bosonic constituent
      // against the oracle and the combination formula on the series.
      out.push_back(oracle_observable(prefix + "oracle_bosonic_constituent_max_deviation",
                                      with_statistics(s, Statistics::Bosonic), cfg, fault));
      out.push_back(skipped(prefix + "oracle_fermionic_constituent_max_deviation"));
      const double p = c.mixing_fraction;
      double worst = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double l = p * c.lambda_f[i] + (1.0 - p) * c.lambda_b[i] - 2.0 * c.partial_diffusion[0][i];
        const double d = c.partial_diffusion[0][i] + c.partial_diffusion[1][i];
        worst = std::max({worst, std::abs(l - c.lambda[i]), std::abs(d - c.diffusion[i])});
      }
      out.push_back(judged(prefix + "mixed_combination", worst, 0.0, cfg.t_max, 1e-12, worst <= 1e-12));
      break;
    }
  }
  return out;
}

}  // namespace

bool ResultBundle::passed() const {
  return std::none_of(observables.begin(), observables.end(),
                      [](const Observable& o) { return o.status == "fail"; });
}

const Observable* ResultBundle::find(const std::string& name) const {
  for (const auto& o : observables)
    if (o.name == name) return &o;
  return nullptr;
}

ResultBundle run_coeffs(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  BundleWriter w("coeffs", out);
  const std::size_t count = cfg.coupled() ? 2 : 1;
  for (std::size_t j = 0; j < count; ++j) {
    const auto c = compute_series(cfg, j, cfg.t_max);
    const auto s = cfg.system(j);
    const std::string prefix = count == 1 ? "" : "osc" + std::to_string(j + 1) + "_";
    w.file(count == 1 ? "coefficients.csv" : "coefficients_" + std::to_string(j + 1) + ".csv",
           coefficients_csv(*c));
    w.add(coefficient_observables(*c, s, prefix, cfg.t_max));
    if (s.mode() == StatisticsMode::Mixed)
      w.add(info(prefix + "stationarity_residual",
                 stationarity_condition_residual(s, cfg.transport())));
  }
  return w.finish(cfg);
}

ResultBundle run_evolve(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  return evolve_impl(cfg, out, compute_series);
}

ResultBundle run_coupled(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  return coupled_impl(cfg, out, compute_series);
}

ResultBundle run_asymptotics(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  BundleWriter w("asymptotics", out);
  const auto opt = cfg.transport();
  const std::size_t count = cfg.coupled() ? 2 : 1;
  for (std::size_t j = 0; j < count; ++j) {
    const auto s = cfg.system(j);
    const std::string p = count == 1 ? "" : "osc" + std::to_string(j + 1) + "_";
    const auto roots = characteristic_roots(s);
    for (int k = 0; k < 4; ++k) {
      w.add(info(p + "root" + std::to_string(k + 1) + "_re", roots.roots[k].real()));
      w.add(info(p + "root" + std::to_string(k + 1) + "_im", roots.roots[k].imag()));
    }
    w.add(info(p + "omega_bare", s.omega()));
    for (int b = 0; b < 2; ++b) {
      const auto& bath = s.baths[b];
      const std::string tag = p + "bath" + std::to_string(b + 1);
      w.add(info(tag + "_I_inf", asymptotic_bath_integral(s, b, opt)));
      w.add(info(tag + "_n_eq", equilibrium_occupation(s.omega(), bath.temperature, bath.statistics)));
    }
    w.add(info(p + "markovian_asymptote", markovian_asymptote(s)));
    if (s.mode() == StatisticsMode::Mixed) {
      w.add(info(p + "stationarity_residual", stationarity_condition_residual(s, opt)));
    } else if (s.baths[0].alpha > 0.0 || s.baths[1].alpha > 0.0) {
      w.add(info(p + "asymptotic_occupation", asymptotic_occupation(s, opt)));
    }
  }
  return w.finish(cfg);
}

ResultBundle run_scenario(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  if (cfg.scenario.empty()) throw ConfigError("no scenario selected");
  return scenario_impl(cfg, out);
}

ResultBundle run_scenario(const std::string& name, const fs::path& out) {
  return run_scenario(make_scenario(name).config, out);
}

SweepResult run_sweep(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  std::vector<const SweepAxis*> axes;
  for (const auto& a : cfg.axes)
    if (!a.values.empty()) axes.push_back(&a);

  std::size_t total = 1;
  for (const auto* a : axes) total *= a->values.size();

  // Resolve every point before running anything so that invalid values fail
  // up front.
  SweepResult result;
  for (const auto* a : axes) result.axes.push_back(a->path);
  std::vector<RunConfig> configs(total);
  result.points.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    RunConfig pc = cfg;
    pc.axes.clear();
    pc.workers = 1;
    std::size_t rest = i;
    std::vector<double> values(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      values[k] = axes[k]->values[rest % axes[k]->values.size()];
      rest /= axes[k]->values.size();
      set_parameter(pc, axes[k]->path, values[k]);
    }
    try {
      pc.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("sweep point " + std::to_string(i) + ": " + e.what());
    }
    configs[i] = pc;
    result.points[i].index = i;
    result.points[i].values = values;
  }

  fs::create_directories(out);
  SeriesCache cache;
  const Provider provider = [&cache](const RunConfig& c, std::size_t which, double t_max) {
    return cache.get(c, which, t_max);
  };
  const std::vector<std::string> keys =
      cfg.coupled() ? std::vector<std::string>{"n1_final", "n2_final", "n1_mean", "n2_mean",
                                               "antiphase_correlation", "delta_E1_final",
                                               "delta_E2_final"}
                    : std::vector<std::string>{"n1_final", "n1_mean", "n1_variation"};
  parallel_for(total, cfg.workers, [&](std::size_t i) {
    auto& pt = result.points[i];
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu", i);
    try {
      const auto b = cfg.coupled() ? coupled_impl(configs[i], out / name, provider)
                                   : evolve_impl(configs[i], out / name, provider);
      pt.status = b.passed() ? "ok" : "failed";
      for (const auto& k : keys) {
        const auto* o = b.find(k);
        pt.summary.push_back(o ? *o : skipped(k));
      }
    } catch (const std::exception& e) {
      pt.status = "error";
      pt.message = sanitize(e.what());
      for (const auto& k : keys) pt.summary.push_back(skipped(k));
    }
  });

  result.index_path = out / "index.csv";
  write_file_atomic(result.index_path, sweep_index_csv(result));
  json m{{"program", "selfosc"},
         {"version", SELFOSC_VERSION},
         {"command", "sweep"},
         {"config", serialize_config(cfg)},
         {"points", total},
         {"axes", result.axes},
         {"determinism",
          {{"workers", cfg.workers},
           {"worker_independent", true},
           {"note", "each point runs single-threaded; the index is written once at the end"}}}};
  write_file_atomic(out / "metadata.json", m.dump(2) + "\n");
  return result;
}

std::string sweep_index_csv(const SweepResult& r) {
  std::string out = "point";
  for (const auto& a : r.axes) out += "," + a;
  out += ",status";
  if (!r.points.empty())
    for (const auto& o : r.points.front().summary) out += "," + o.name;
  out += ",message\n";
  for (const auto& p : r.points) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%04zu", p.index);
    out += name;
    for (double v : p.values) out += "," + format_number(v);
    out += "," + p.status;
    for (const auto& o : p.summary) out += "," + format_number(o.value);
    out += "," + p.message + "\n";
  }
  return out;
}

ResultBundle run_validate(const RunConfig& cfg, const fs::path& out, Fault fault) {
  cfg.validate();
  BundleWriter w("validate", out);
  const std::size_t count = cfg.coupled() ? 2 : 1;
  std::vector<std::vector<Observable>> parts(count);
  parallel_for(count, cfg.workers, [&](std::size_t j) {
    parts[j] = validate_system(cfg.system(j), cfg, count == 1 ? "" : "osc" + std::to_string(j + 1) + "_",
                               fault);
  });
  for (const auto& p : parts) w.add(p);
  if (cfg.coupled()) {
    const auto c1 = compute_series(cfg, 0, cfg.t_max);
    const auto c2 = compute_series(cfg, 1, cfg.t_max);
    w.add(decoupling_observable(cfg, *c1, *c2));
  }

  json report = json::array();
  const std::string fault_name = fault == Fault::LambdaSign ? "lambda_sign" : "none";
  auto bundle = w.finish(cfg, {{"fault_injection", fault_name}});
  for (const auto& o : bundle.observables)
    report.push_back({{"name", o.name},
                      {"value", std::isfinite(o.value) ? json(o.value) : json(nullptr)},
                      {"tolerance", std::isfinite(o.tolerance) ? json(o.tolerance) : json(nullptr)},
                      {"status", o.status}});
  json doc{{"passed", bundle.passed()}, {"fault_injection", fault_name}, {"checks", report}};
  write_file_atomic(out / "validation_report.json", doc.dump(2) + "\n");
  bundle.files.push_back("validation_report.json");
  return bundle;
}

}  // namespace selfosc
