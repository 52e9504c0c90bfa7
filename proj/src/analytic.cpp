#include "kwind/analytic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kwind/errors.hpp"
#include "kwind/krylov.hpp"

namespace kwind {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxIndex = 1000000;

// log of sqrt(Gamma(2D + n) / (n! Gamma(2D)))
double log_binomial_root(int n, double delta) {
  return 0.5 * (std::lgamma(2.0 * delta + n) - std::lgamma(n + 1.0) - std::lgamma(2.0 * delta));
}

}  // namespace

SolvableParams SolvableParams::make(double alpha, double delta, double beta, double norm) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be nonnegative");
  if (!(norm > 0.0)) throw ArgumentError("norm must be positive");
  if (alpha * beta > kPi * (1.0 + 1e-12)) throw ArgumentError("alpha * beta exceeds pi");
  return {alpha, delta, beta, norm};
}

std::vector<double> solvable_b(int count, double alpha, double delta) {
  std::vector<double> b(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 1; n <= count; ++n) b[n - 1] = alpha * std::sqrt(n * (n + 2.0 * delta - 1.0));
  return b;
}

cplx solvable_phi(int n, double t, const SolvableParams& p) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  if (n > kMaxIndex) throw RangeError("solvable_phi index beyond 1e6");
  const cplx az = p.alpha * thermal_time(t, p.beta);
  const cplx log_cosh = std::log(std::cosh(az));
  const cplx th = std::tanh(az);
  const double pre = 0.5 * std::log(p.norm) + log_binomial_root(n, p.delta);
  if (n == 0) return std::exp(pre - 2.0 * p.delta * log_cosh);
  if (th == cplx{}) return {};
  return std::exp(pre + static_cast<double>(n) * std::log(th) - 2.0 * p.delta * log_cosh);
}

std::vector<cplx> solvable_series(int n_count, double t, const SolvableParams& p) {
  std::vector<cplx> out(static_cast<std::size_t>(n_count));
  for (int n = 0; n < n_count; ++n) out[n] = solvable_phi(n, t, p);
  return out;
}

double solvable_thetaK(double t, const SolvableParams& p) {
  return std::atan2(std::sin(0.5 * p.alpha * p.beta), std::sinh(2.0 * p.alpha * t));
}

cplx solvable_CK(double mu, double t, const SolvableParams& p) {
  const cplx az = p.alpha * thermal_time(t, p.beta);
  const cplx th = std::tanh(az);
  const cplx w = std::polar(1.0, mu) * th * th;
  const cplx log_den = 2.0 * p.delta * std::log(1.0 - w) + 4.0 * p.delta * std::log(std::cosh(az));
  return p.norm * std::exp(-log_den);
}

double solvable_muK(double t, const SolvableParams& p) {
  return -2.0 * std::arg(std::tanh(p.alpha * thermal_time(t, p.beta)));
}

cplx asymptotic_phi(int n, double t, const SolvableParams& p, std::optional<double> t_min) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  const double tm = t_min.value_or(1.0 / p.alpha);
  if (t < tm) throw ArgumentError("asymptotic_phi is valid only for t >= t_min");
  const double e = std::exp(-2.0 * p.alpha * t);
  const double theta = 2.0 * e * std::sin(0.5 * p.alpha * p.beta);
  const double mag = -2.0 * n * e * std::cos(0.5 * p.alpha * p.beta);
  return std::polar(std::exp(mag), theta * n);
}

LargeQParams LargeQParams::make(int q_locality, double nu, double beta) {
  if (q_locality < 4 || q_locality % 2 != 0) throw ArgumentError("q must be an even integer >= 4");
  if (!(nu > 0.0 && nu < 1.0)) throw ArgumentError("nu must lie in (0, 1)");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  LargeQParams p;
  p.q_locality = q_locality;
  p.nu = nu;
  p.beta = beta;
  p.alpha = kPi * nu / beta;
  p.delta = 1.0 / q_locality;
  p.script_j = kPi * nu / (beta * std::cos(0.5 * kPi * nu));
  return p;
}

double largeq_b(int n, const LargeQParams& p) {
  if (n < 1) throw ArgumentError("Lanczos index starts at 1");
  if (n == 1) return p.alpha * std::sqrt(2.0 / p.q_locality);
  return p.alpha * std::sqrt(static_cast<double>(n) * (n - 1.0));
}

cplx largeq_phi(int n, double t, const LargeQParams& p) {
  if (n < 0) throw ArgumentError("n must be nonnegative");
  const cplx az = p.alpha * thermal_time(t, p.beta);
  const double q = p.q_locality;
  if (n == 0) return 1.0 - (2.0 / q) * std::log(std::cosh(az));
  const cplx th = std::tanh(az);
  if (th == cplx{}) return {};
  return std::exp(static_cast<double>(n) * std::log(th)) * std::sqrt(2.0 / (n * q));
}

cplx largeq_CK(double mu, double t, const LargeQParams& p) {
  const cplx th = std::tanh(p.alpha * thermal_time(t, p.beta));
  const cplx t2 = th * th;
  return 1.0 + (2.0 / p.q_locality) * std::log((1.0 - t2) / (1.0 - std::polar(1.0, mu) * t2));
}

RampPlateauParams RampPlateauParams::make(double alpha, int n_ramp, double beta,
                                          std::optional<double> plateau_level) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  if (n_ramp < 1) throw ArgumentError("n_ramp must be >= 1");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be nonnegative");
  const double level = plateau_level.value_or(alpha * n_ramp);
  if (!(level >= alpha)) throw ArgumentError("plateau level must be at least alpha");
  return {alpha, n_ramp, level, beta};
}

double ramp_plateau_b(int n, const RampPlateauParams& p) {
  if (n < 1) throw ArgumentError("Lanczos index starts at 1");
  return n <= p.n_ramp ? p.alpha * n : p.plateau_level;
}

std::vector<double> ramp_plateau_coefficients(int count, const RampPlateauParams& p) {
  std::vector<double> b(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 1; n <= count; ++n) b[n - 1] = ramp_plateau_b(n, p);
  return b;
}

double lorentzian_width(double t, double alpha, double beta) {
  const cplx th = std::tanh(alpha * thermal_time(t, beta));
  const double a2 = std::norm(th);  // |tanh|^2 = |tanh^2|
  if (a2 == 0.0) return std::numeric_limits<double>::infinity();
  const double w2 = (1.0 - a2) * (1.0 - a2) / a2;
  return std::sqrt(std::max(0.0, w2));
}

int wavefront_position(std::span<const cplx> phi, double rel) {
  double mx = 0.0;
  for (const auto& v : phi) mx = std::max(mx, std::norm(v));
  for (int n = static_cast<int>(phi.size()) - 1; n >= 0; --n) {
    if (std::norm(phi[n]) > rel * mx) return n;
  }
  return 0;
}

RampPlateauRun ramp_plateau_run(const RampPlateauParams& p, std::span<const double> t_list, int n_max,
                                std::span<const double> mu_grid) {
  const auto b = ramp_plateau_coefficients(n_max - 1, p);
  const TridiagPropagator prop(b, n_max);
  RampPlateauRun run;
  std::vector<double> ts, fronts;
  const double t_star = 2.0 * std::log(static_cast<double>(p.n_ramp)) / p.alpha;
  for (double t : t_list) {
    auto r = prop(thermal_time(t, p.beta));
    RampPlateauSample s;
    s.t = t;
    s.ck = fourier_CK(r.phi, mu_grid, CKNormalization::unit_norm);
    s.front = wavefront_position(r.phi);
    s.truncation_warning = r.truncation_warning;
    s.phi = std::move(r.phi);
    if (t > t_star) {
      ts.push_back(t);
      fronts.push_back(s.front);
    }
    run.samples.push_back(std::move(s));
  }
  if (ts.size() < 3) {
    run.front_speed = std::numeric_limits<double>::quiet_NaN();
    return run;
  }
  double mt = 0, mf = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    mf += fronts[i];
  }
  mt /= ts.size();
  mf /= ts.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mt) * (fronts[i] - mf);
    sxx += (ts[i] - mt) * (ts[i] - mt);
  }
  run.front_speed = sxy / sxx;
  return run;
}

}  // namespace kwind
