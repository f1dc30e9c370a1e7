#include "selfosc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "selfosc/errors.hpp"

namespace selfosc {

namespace {

constexpr double kPi = std::numbers::pi;
using cvec = std::vector<std::complex<double>>;
constexpr std::complex<double> kI{0.0, 1.0};

void require_bosonic(const std::array<DiscretizedBath, 2>& baths) {
  for (const auto& b : baths)
    if (b.statistics != Statistics::Bosonic)
      throw DomainError("the exact oracle covers bosonic baths only");
}

// Operator layout: 0 = a, 1 = a^dagger, then (c_i, c_i^dagger) pairs, bath 1
// modes before bath 2 modes.
struct Modes {
  std::vector<double> w, alpha, n;
};

Modes flatten(const std::array<DiscretizedBath, 2>& baths) {
  Modes m;
  for (const auto& b : baths) {
    m.w.insert(m.w.end(), b.frequencies.begin(), b.frequencies.end());
    m.alpha.insert(m.alpha.end(), b.couplings.begin(), b.couplings.end());
    m.n.insert(m.n.end(), b.occupations.begin(), b.occupations.end());
  }
  return m;
}

}  // namespace

double DiscretizedBath::recurrence_time() const {
  return dw > 0.0 ? 2.0 * kPi / dw : std::numeric_limits<double>::infinity();
}

DiscretizedBath sample_bath(const BathSpec& bath, std::size_t N, double w_max) {
  bath.validate();
  if (N < 50) throw DomainError("bath discretization needs N >= 50");
  if (!(w_max >= 10.0 * bath.gamma)) throw DomainError("bath discretization needs w_max >= 10 gamma");
  DiscretizedBath d;
  d.statistics = bath.statistics;
  d.dw = w_max / static_cast<double>(N);
  d.frequencies.resize(N);
  d.couplings.resize(N);
  d.occupations.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double w = (static_cast<double>(i) + 0.5) * d.dw;
    d.frequencies[i] = w;
    d.couplings[i] = std::sqrt(w * d.dw * spectral_density(w, bath));
    d.occupations[i] = equilibrium_occupation(w, bath.temperature, bath.statistics);
  }
  return d;
}

double truncated_coupling_sum(const BathSpec& bath, double w_max) {
  return bath.alpha * bath.gamma / kPi * std::atan(w_max / bath.gamma);
}

ExactSeries evolve_exact(const SystemSpec& spec, const std::array<DiscretizedBath, 2>& baths,
                         double t_max, double dt_out, const ExactOptions& opt) {
  spec.validate();
  require_bosonic(baths);
  if (spec.mode() != StatisticsMode::AllBosonic)
    throw DomainError("the exact oracle covers bosonic baths only");
  if (!(t_max > 0.0) || !(dt_out > 0.0)) throw DomainError("t_max and dt_out must be > 0");
  if (!(opt.n0 >= 0.0)) throw DomainError("initial occupation must be >= 0");
  const auto m = flatten(baths);
  const std::size_t N = m.w.size();
  if (N > opt.max_modes) {
    std::ostringstream os;
    os << "oracle dimension " << N << " modes exceeds the cap " << opt.max_modes;
    throw DomainError(os.str());
  }
  const double omega = spec.omega();

  double fastest = omega;
  for (double w : m.w) fastest = std::max(fastest, w);
  const double h_max = opt.step_factor / fastest;
  const auto per_out = static_cast<std::size_t>(std::ceil(dt_out / h_max - 1e-9));
  const double h = dt_out / static_cast<double>(per_out);
  const auto outputs = static_cast<std::size_t>(std::ceil(t_max / dt_out - 1e-9));

  // r = (r_a, r_a+, r_c_i, r_c_i+); dr/dt = r L.
  auto rhs = [&](const cvec& r, cvec& dr) {
    std::complex<double> sc{0.0, 0.0};
    for (std::size_t i = 0; i < N; ++i) sc += m.alpha[i] * (r[2 + 2 * i + 1] - r[2 + 2 * i]);
    const std::complex<double> ra = r[0], rad = r[1];
    dr[0] = -kI * omega * ra + kI * sc;
    dr[1] = kI * omega * rad + kI * sc;
    const std::complex<double> drive = kI * (rad - ra);
    for (std::size_t i = 0; i < N; ++i) {
      dr[2 + 2 * i] = -kI * m.w[i] * r[2 + 2 * i] + m.alpha[i] * drive;
      dr[2 + 2 * i + 1] = kI * m.w[i] * r[2 + 2 * i + 1] + m.alpha[i] * drive;
    }
  };
  std::vector<double> weight(2 + 2 * N);
  weight[0] = opt.n0;
  weight[1] = 1.0 + opt.n0;
  for (std::size_t i = 0; i < N; ++i) weight[2 + 2 * i] = m.n[i], weight[3 + 2 * i] = 1.0 + m.n[i];
  auto occupation = [&](const cvec& r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += std::norm(r[j]) * weight[j];
    return acc;
  };

  const std::size_t dim = 2 + 2 * N;
  cvec r(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  r[0] = 1.0;
  ExactSeries out;
  out.recurrence_time = std::min(baths[0].recurrence_time(), baths[1].recurrence_time());
  out.time.push_back(0.0);
  out.n.push_back(occupation(r));
  for (std::size_t k = 0; k < outputs; ++k) {
    for (std::size_t s = 0; s < per_out; ++s) {
      rhs(r, k1);
      for (std::size_t j = 0; j < dim; ++j) tmp[j] = r[j] + 0.5 * h * k1[j];
      rhs(tmp, k2);
      for (std::size_t j = 0; j < dim; ++j) tmp[j] = r[j] + 0.5 * h * k2[j];
      rhs(tmp, k3);
      for (std::size_t j = 0; j < dim; ++j) tmp[j] = r[j] + h * k3[j];
      rhs(tmp, k4);
      for (std::size_t j = 0; j < dim; ++j)
        r[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    const double t = dt_out * static_cast<double>(k + 1);
    const double n = occupation(r);
    if (!std::isfinite(n) || n > 1e6) {
      std::ostringstream os;
      os << "oracle moments blew up at t = " << t;
      throw IntegrationError(os.str(), t);
    }
    out.time.push_back(t);
    out.n.push_back(n);
  }
  return out;
}

Eigen::MatrixXcd heisenberg_generator(const SystemSpec& spec,
                                      const std::array<DiscretizedBath, 2>& baths,
                                      CouplingForm form) {
  require_bosonic(baths);
  const auto m = flatten(baths);
  const std::size_t N = m.w.size();
  const auto dim = static_cast<Eigen::Index>(2 + 2 * N);
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(dim, dim);
  const double omega = spec.omega();
  L(0, 0) = -kI * omega;
  L(1, 1) = kI * omega;
  for (std::size_t i = 0; i < N; ++i) {
    const auto c = static_cast<Eigen::Index>(2 + 2 * i), cd = c + 1;
    const double a = m.alpha[i];
    L(c, c) = -kI * m.w[i];
    L(cd, cd) = kI * m.w[i];
    // da/dt = ... - i a_i c_i, dc_i/dt = ... - i a_i a  (and conjugates)
    L(0, c) = -kI * a;
    L(1, cd) = kI * a;
    L(c, 0) = -kI * a;
    L(cd, 1) = kI * a;
    if (form == CouplingForm::Full) {
      // counter-rotating parts of (a + a^dagger)(c_i + c_i^dagger)
      L(0, cd) = -kI * a;
      L(1, c) = kI * a;
      L(c, 1) = -kI * a;
      L(cd, 0) = kI * a;
    }
  }
  return L;
}

MomentState MomentState::initial(const std::array<DiscretizedBath, 2>& baths, double n0) {
  require_bosonic(baths);
  if (!(n0 >= 0.0)) throw DomainError("initial occupation must be >= 0");
  const auto m = flatten(baths);
  const auto dim = static_cast<Eigen::Index>(2 + 2 * m.w.size());
  MomentState st;
  st.S_ = Eigen::MatrixXcd::Zero(dim, dim);
  st.S_(0, 0) = n0;
  st.S_(1, 1) = 1.0 + n0;
  for (std::size_t i = 0; i < m.w.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(2 + 2 * i);
    st.S_(c, c) = m.n[i];
    st.S_(c + 1, c + 1) = 1.0 + m.n[i];
  }
  return st;
}

void MomentState::evolve(const Eigen::MatrixXcd& L, double duration, double step) {
  if (L.rows() != S_.rows()) throw DomainError("generator and moment matrix sizes differ");
  if (!(step > 0.0) || !(duration >= 0.0)) throw DomainError("step must be > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(duration / step - 1e-9));
  if (steps == 0) return;
  const double h = duration / static_cast<double>(steps);
  const Eigen::MatrixXcd Lc = L.conjugate();
  const Eigen::MatrixXcd Lt = L.transpose();
  auto f = [&](const Eigen::MatrixXcd& S) -> Eigen::MatrixXcd { return Lc * S + S * Lt; };
  for (std::size_t s = 0; s < steps; ++s) {
    const Eigen::MatrixXcd k1 = f(S_);
    const Eigen::MatrixXcd k2 = f(S_ + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = f(S_ + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = f(S_ + h * k3);
    S_ += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

double MomentState::oscillator_occupation() const { return S_(0, 0).real(); }

double MomentState::total_excitation() const {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < S_.rows(); j += 2) acc += S_(j, j).real();
  return acc;
}

double MomentState::hermiticity_defect() const {
  return (S_ - S_.adjoint()).cwiseAbs().maxCoeff();
}

double MomentState::min_occupation() const {
  double mn = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < S_.rows(); j += 2) mn = std::min(mn, S_(j, j).real());
  return mn;
}

Comparison compare(const std::vector<double>& time_a, const std::vector<double>& a,
                   const std::vector<double>& time_b, const std::vector<double>& b) {
  if (time_a.size() != a.size() || time_b.size() != b.size())
    throw DomainError("time and value lengths differ");
  if (time_a.empty() || time_b.empty()) throw DomainError("empty series");
  const double lo = std::max(time_a.front(), time_b.front());
  const double hi = std::min(time_a.back(), time_b.back());
  if (hi < lo) throw DomainError("series windows do not overlap");
  Comparison c;
  double sum = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < time_a.size(); ++i) {
    const double t = time_a[i];
    if (t < lo || t > hi) continue;
    while (j + 1 < time_b.size() && time_b[j + 1] < t) ++j;
    double vb = b[j];
    if (j + 1 < time_b.size() && time_b[j + 1] > time_b[j]) {
      const double f = std::clamp((t - time_b[j]) / (time_b[j + 1] - time_b[j]), 0.0, 1.0);
      vb = b[j] + f * (b[j + 1] - b[j]);
    }
    const double d = std::abs(a[i] - vb);
    if (d > c.max_deviation || c.samples == 0) c.max_deviation = d, c.worst_time = t;
    sum += d;
    ++c.samples;
  }
  if (c.samples == 0) throw DomainError("no samples in the common window");
  c.mean_deviation = sum / static_cast<double>(c.samples);
  return c;
}

Comparison compare(const Trajectory& master, const ExactSeries& exact, std::size_t channel) {
  if (channel >= master.channels()) throw DomainError("trajectory channel out of range");
  return compare(master.time, master.n[channel], exact.time, exact.n);
}

}  // namespace selfosc
