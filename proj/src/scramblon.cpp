#include "kwind/scramblon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr double kQuadTol = 1e-12;

double log_binomial_root(int n, double delta) {
  return 0.5 * (std::lgamma(2.0 * delta + n) - std::lgamma(n + 1.0) - std::lgamma(2.0 * delta));
}

// cos(pi nu (1/2 - i T / beta))
cplx vertex_cos(cplx t, const ScramblonParams& p) {
  return std::cos(kPi * p.nu * (0.5 - kI * t / p.beta));
}

// Smallest integer k <= 64 making k (power + 1) and k h both integers, so that
// y = u^k leaves a smooth head integrand; 0 when none exists.
double smoothing_exponent(double power, double h) {
  auto integral = [](double v) { return std::abs(v - std::round(v)) < 1e-9; };
  if (h == 1.0) return 0.0;
  for (int k = 1; k <= 64; ++k) {
    if (integral(k * (power + 1.0)) && integral(k * h)) return k;
  }
  return 0.0;
}

SemiInfiniteOptions exp_decay_options(double power, double decay, double phase_rate, double h = 1.0) {
  SemiInfiniteOptions o;
  o.power = power;
  o.head_exponent = smoothing_exponent(power, h);
  const double scale = 1.0 / std::max(decay, 1e-3);
  o.panel_width = phase_rate > 0.0 ? std::min(2.0 * scale, kPi / phase_rate) : 2.0 * scale;
  o.first_panel = std::min({1.0, scale, o.panel_width});
  o.quad.rel_tol = kQuadTol;
  return o;
}

// G(y) = cos^{2D}(pi nu/2) - f~^A(lambda0 y^h, -i beta/2), computed without cancellation
double growth_integral(double y, double lam0, const ScramblonParams& p) {
  if (y <= 0.0) return 0.0;
  const double c = lam0 * std::pow(y, p.h);
  auto g = [&](double yl) -> cplx { return -std::expm1(-c * std::pow(yl, p.h)) * std::exp(-yl); };
  const auto r = integrate_semi_infinite(g, exp_decay_options(2.0 * p.delta - 1.0, 1.0, 0.0, p.h));
  return std::pow(p.cos_half(), 2.0 * p.delta) / std::tgamma(2.0 * p.delta) * r.value.real();
}

void check_s(double s, const ScramblonParams& p) {
  if (!(s >= p.s0) || !(s < 0.5)) {
    throw RangeError("size fraction s must lie in [s0, 1/2), got " + std::to_string(s));
  }
}

}  // namespace

ScramblonParams ScramblonParams::make(int q_locality, double nu, double beta, double n_majorana,
                                      double h, std::optional<double> delta,
                                      std::optional<double> ladder_c) {
  if (q_locality < 2) throw ArgumentError("q must be >= 2");
  if (!(nu > 0.0 && nu < 1.0)) throw ArgumentError("nu must lie in (0, 1)");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  if (!(n_majorana > 0.0)) throw ArgumentError("N must be positive");
  if (!(h > 0.0 && h <= 1.0)) throw ArgumentError("h must lie in (0, 1]");
  ScramblonParams p;
  p.q_locality = q_locality;
  p.delta = delta.value_or(1.0 / q_locality);
  if (!(p.delta > 0.0)) throw ArgumentError("delta must be positive");
  p.nu = nu;
  p.beta = beta;
  p.n_majorana = n_majorana;
  p.h = h;
  p.alpha = kPi * nu / beta;
  const double c = p.cos_half();
  p.ladder_c = ladder_c.value_or(4.0 * n_majorana * p.delta * p.delta * c);
  if (!(p.ladder_c > 0.0)) throw ArgumentError("ladder constant must be positive");
  p.s0 = 0.5 * (1.0 - std::pow(c, 2.0 * p.delta));
  p.k_const = std::pow(c, 2.0 * p.delta - 1.0) * std::tgamma(2.0 * p.delta + h) /
              (4.0 * n_majorana * p.delta * std::tgamma(2.0 * p.delta + 1.0));
  return p;
}

double ScramblonParams::lambda0(double t) const { return std::exp(lambda_l() * t) / ladder_c; }
double ScramblonParams::cos_half() const { return std::cos(0.5 * kPi * nu); }
double ScramblonParams::sin_half() const { return std::sin(0.5 * kPi * nu); }

nlohmann::json to_json(const ScramblonParams& p) {
  return {{"q", p.q_locality},   {"delta", p.delta}, {"nu", p.nu},       {"beta", p.beta},
          {"N", p.n_majorana},   {"h", p.h},         {"alpha", p.alpha}, {"ladder_c", p.ladder_c},
          {"s0", p.s0},          {"K", p.k_const}};
}

double lambdaL_from_k(double k, double beta) {
  if (!(k >= 0.0)) throw ArgumentError("k must be nonnegative");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  const double k2 = k * k;
  // (sqrt(k^4 + 4k^2) - k^2) / 2 rewritten to avoid cancellation at large k
  const double frac = k == 0.0 ? 0.0 : 2.0 * k2 / (std::sqrt(k2 * k2 + 4.0 * k2) + k2);
  return 2.0 * kPi / beta * (1.0 - frac);
}

double h_from_lambdaL(double lambda_l, double beta, double nu) {
  return lambda_l * beta / (2.0 * kPi * nu);
}

cplx kernel_hR(cplx y, cplx t12, const ScramblonParams& p) {
  if (!(y.real() > 0.0)) throw ArgumentError("kernel_hR needs Re y > 0");
  const double d2 = 2.0 * p.delta;
  return std::exp((d2 - 1.0) * std::log(y) - y * vertex_cos(t12, p)) * std::pow(p.cos_half(), d2) /
         std::tgamma(d2);
}

QuadratureResult kernel_fA_tilde(cplx x, cplx t34, const ScramblonParams& p) {
  const cplx c = vertex_cos(t34, p);
  if (!(c.real() > 0.0)) throw ArgumentError("f~^A needs Re cos(pi nu (1/2 - iT/beta)) > 0");
  const double d2 = 2.0 * p.delta;
  auto g = [&](double y) { return std::exp(-x * std::pow(y, p.h) - c * y); };
  const double rate = std::abs(c.imag()) + std::abs(x.imag()) * p.h;
  auto r = integrate_semi_infinite(g, exp_decay_options(d2 - 1.0, c.real(), rate, p.h));
  const double pre = std::pow(p.cos_half(), d2) / std::tgamma(d2);
  r.value *= pre;
  r.error *= pre;
  return r;
}

cplx fA_closed_form(cplx x, cplx t34, const ScramblonParams& p) {
  const double d2 = 2.0 * p.delta;
  return std::pow(p.cos_half(), d2) * std::exp(-d2 * std::log(vertex_cos(t34, p) + x));
}

double s_of_y(double y, double t, const ScramblonParams& p) {
  if (!(y >= 0.0)) throw ArgumentError("y must be nonnegative");
  return p.s0 + 0.5 * growth_integral(y, p.lambda0(t), p);
}

double y_of_s(double s, double t, const ScramblonParams& p) {
  check_s(s, p);
  if (s == p.s0) return 0.0;
  const double lam0 = p.lambda0(t);
  const double target = 2.0 * (s - p.s0);
  auto f = [&](double log_y) { return growth_integral(std::exp(log_y), lam0, p) - target; };
  // linearized guess, then widen the bracket in log y
  const double guess = std::log(std::pow(p.k_const, -1.0 / p.h) * std::exp(-2.0 * p.alpha * t) *
                                std::pow(s - p.s0, 1.0 / p.h));
  double lo = guess - 1.0, hi = guess + 1.0;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 200 && flo > 0.0; ++i) flo = f(lo -= 2.0);
  for (int i = 0; i < 200 && fhi < 0.0; ++i) {
    hi += 2.0;
    if (hi > 700.0) throw RangeError("s too close to 1/2 for root bracketing");
    fhi = f(hi);
  }
  if (flo > 0.0 || fhi < 0.0) throw RangeError("could not bracket y(s)");
  boost::uintmax_t iters = 200;
  const auto tol = boost::math::tools::eps_tolerance<double>(48);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return std::exp(0.5 * (a + b));
}

std::string to_string(DistributionMethod m) {
  return m == DistributionMethod::delta_approx_exact_inversion ? "delta_approx_exact_inversion"
                                                               : "early_time_linearized";
}

ScramblonDistributions size_dists_exact(const ScramblonParams& p, double t, std::span<const double> s_grid) {
  ScramblonDistributions out;
  out.t = t;
  out.method = DistributionMethod::delta_approx_exact_inversion;
  out.s_grid.assign(s_grid.begin(), s_grid.end());
  const double lam0 = p.lambda0(t);
  out.lambda0_warning = lam0 > 0.1;
  const double d2 = 2.0 * p.delta;
  for (double s : s_grid) {
    const double y = y_of_s(s, t, p);
    double pv = 0.0;
    if (y > 0.0) {
      // p = 2 y^{2D-h} e^{-y cos} / (lambda0 h int y_l^{2D+h-1} e^{-lambda0 (y y_l)^h - y_l})
      const double c = lam0 * std::pow(y, p.h);
      auto g = [&](double yl) -> cplx { return std::exp(-c * std::pow(yl, p.h) - yl); };
      const auto den = integrate_semi_infinite(g, exp_decay_options(d2 + p.h - 1.0, 1.0, 0.0, p.h));
      pv = 2.0 * std::pow(y, d2 - p.h) * std::exp(-y * p.cos_half()) / (lam0 * p.h * den.value.real());
    } else {
      pv = d2 < p.h ? std::numeric_limits<double>::infinity() : 0.0;
    }
    out.y.push_back(y);
    out.p.push_back(pv);
    out.abs_q.push_back(pv);
    out.arg_q.push_back(y * p.sin_half() - kPi * p.nu * p.delta);
  }
  return out;
}

ScramblonDistributions size_dists_linearized(const ScramblonParams& p, double t,
                                             std::span<const double> s_grid) {
  ScramblonDistributions out;
  out.t = t;
  out.method = DistributionMethod::early_time_linearized;
  out.s_grid.assign(s_grid.begin(), s_grid.end());
  out.lambda0_warning = p.lambda0(t) > 0.1;
  const double d2 = 2.0 * p.delta;
  const double k = p.k_const;
  const double e2 = std::exp(-2.0 * p.alpha * t);
  const double pre = 8.0 * p.n_majorana * p.delta * p.delta * p.cos_half() /
                     (p.h * std::tgamma(d2 + p.h)) * std::pow(k, -d2 / p.h + 1.0) *
                     std::exp(-2.0 * d2 * p.alpha * t);
  for (double s : s_grid) {
    check_s(s, p);
    const double ds = s - p.s0;
    const double y = std::pow(k, -1.0 / p.h) * e2 * std::pow(ds, 1.0 / p.h);
    const double pv = pre * std::pow(ds, d2 / p.h - 1.0) * std::exp(-y * p.cos_half());
    out.y.push_back(y);
    out.p.push_back(pv);
    out.abs_q.push_back(pv);
    out.arg_q.push_back(y * p.sin_half() - kPi * p.nu * p.delta);
  }
  return out;
}

cplx compressed_exponential_q(double s, double t, const ScramblonParams& p) {
  check_s(s, p);
  const cplx e = std::exp(-2.0 * p.alpha * cplx(t, 0.25 * p.beta));
  return std::exp(-std::pow(p.k_const, -1.0 / p.h) * std::pow(s - p.s0, 1.0 / p.h) * e);
}

QuadratureResult CS_scramblon_point(double mu, double t, const ScramblonParams& p) {
  const double d2 = 2.0 * p.delta;
  const double a = mu * p.k_const * p.n_majorana * std::exp(2.0 * p.alpha * p.h * t);
  const cplx rot = std::polar(1.0, -0.5 * kPi * p.nu);
  auto g = [&](double y) { return std::exp(-y * rot + kI * a * std::pow(y, p.h)); };
  const double rate = p.sin_half() + std::abs(a) * p.h;
  auto r = integrate_semi_infinite(g, exp_decay_options(d2 - 1.0, p.cos_half(), rate, p.h));
  const cplx pre = std::pow(p.cos_half(), d2) / std::tgamma(d2) *
                   std::exp(kI * (mu * p.s0 * p.n_majorana - kPi * p.nu * p.delta));
  r.value *= pre;
  r.error *= std::abs(pre);
  return r;
}

ScramblonCS CS_scramblon(std::span<const double> mu_grid, double t, const ScramblonParams& p) {
  ScramblonCS out;
  std::vector<cplx> vals(mu_grid.size());
  out.errors.resize(mu_grid.size());
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    try {
      const auto r = CS_scramblon_point(mu_grid[i], t, p);
      vals[i] = r.value;
      out.errors[i] = r.error;
    } catch (const NumericError& e) {
      vals[i] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
      out.errors[i] = e.error_bound();
      out.failures.push_back("mu=" + std::to_string(mu_grid[i]) + ": " + e.what());
    }
  }
  if (out.failures.empty()) {
    out.peak = make_peak(std::vector<double>(mu_grid.begin(), mu_grid.end()), std::move(vals));
  } else {
    out.peak.mu_grid.assign(mu_grid.begin(), mu_grid.end());
    out.peak.values = std::move(vals);
  }
  return out;
}

cplx CS_closed_form_h1(double mu, double t, const ScramblonParams& p) {
  const double a = mu * p.k_const * p.n_majorana * std::exp(2.0 * p.alpha * t);
  const cplx b = std::polar(1.0, -0.5 * kPi * p.nu) - kI * a;
  return std::exp(2.0 * p.delta * std::log(p.cos_half() / b)) *
         std::exp(kI * (mu * p.s0 * p.n_majorana - kPi * p.nu * p.delta));
}

bool has_left_elbow(const FourierPeak& fp) {
  const std::size_t n = fp.values.size();
  if (n < 5 || fp.flat) return false;
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(fp.values[i]) > std::abs(fp.values[i0])) i0 = i;
  }
  // left flank: from the peak towards smaller mu, stopping at the grid edge
  const double floor = 0.05 * std::abs(fp.values[i0]);
  for (std::size_t i = i0; i-- > 0;) {
    const double here = std::abs(fp.values[i]);
    if (here < floor) break;
    if (here > std::abs(fp.values[i + 1]) * (1.0 + 1e-9)) return true;
  }
  return false;
}

cplx r_of_s(double s, double t, const ScramblonParams& p) {
  check_s(s, p);
  const double d = p.delta;
  const double k = p.k_const;
  const double ds = s - p.s0;
  const cplx tb(t, 0.25 * p.beta);
  const double amp = std::sqrt(8.0 * p.n_majorana * d * d * p.cos_half() / (p.h * std::tgamma(2.0 * d + p.h))) *
                     std::pow(k, -d / p.h + 0.5) * std::pow(ds, d / p.h - 0.5);
  return amp * std::exp(-2.0 * d * p.alpha * tb -
                        0.5 * std::pow(k, -1.0 / p.h) * std::pow(ds, 1.0 / p.h) *
                            std::exp(-2.0 * p.alpha * tb));
}

cplx q_two_time(double s, double t1, double t2, const ScramblonParams& p) {
  check_s(s, p);
  const double d = p.delta;
  const double k = p.k_const;
  const double ds = s - p.s0;
  const double amp = 8.0 * p.n_majorana * d * d * p.cos_half() / (p.h * std::tgamma(2.0 * d + p.h)) *
                     std::pow(k, -2.0 * d / p.h + 1.0) * std::pow(ds, 2.0 * d / p.h - 1.0);
  const cplx ph = -kI * kPi * p.nu * d - 2.0 * d * p.alpha * (t1 + t2);
  const double mix = 0.5 * (std::exp(-2.0 * p.alpha * t2) + std::exp(-2.0 * p.alpha * t1));
  const cplx tail = -std::pow(k, -1.0 / p.h) * std::pow(ds, 1.0 / p.h) * mix * std::polar(1.0, -0.5 * kPi * p.nu);
  return amp * std::exp(ph + tail);
}

Rank1Result rank1_factor(const ScramblonParams& p, std::span<const double> s_grid, double t1, double t2) {
  Rank1Result out;
  for (double s : s_grid) {
    const cplx q = q_two_time(s, t1, t2, p);
    const cplx a = r_of_s(s, t1, p);
    const cplx b = r_of_s(s, t2, p);
    out.q_two_time.push_back(q);
    out.r1.push_back(a);
    out.r2.push_back(b);
    if (std::abs(q) > 0.0) out.max_rel_residual = std::max(out.max_rel_residual, std::abs(q - a * b) / std::abs(q));
  }
  return out;
}

double LogValue::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

namespace {

// log-scaled psi_0n for n = 0..n_max
std::vector<LogValue> psi0_series(int n_max, double ell, const ScramblonParams& p) {
  if (n_max < 0) throw ArgumentError("n must be nonnegative");
  if (n_max > 10000) throw RangeError("psi0 recurrence limited to n <= 1e4");
  const double s = ell / p.n_majorana;
  if (!(s > p.s0)) throw RangeError("psi0 needs ell > s0 N");
  const double d = p.delta;
  const double b = 2.0 * d;
  const double a = b - 1.0;
  const double lt = (s - p.s0) / p.k_const;
  const double x = std::pow(lt, 1.0 / p.h);
  const double log_pre = 0.5 * std::log(8.0 * d * d * p.cos_half() / (p.h * std::tgamma(b + p.h) * std::tgamma(b))) -
                         0.5 * x + (d / p.h - 0.5) * std::log(lt) + std::lgamma(b);
  std::vector<LogValue> out;
  out.reserve(static_cast<std::size_t>(n_max + 1));
  // generalized Laguerre L_k^{(a)}(x) with a shared log scale
  double prev = 0.0, cur = 1.0, log_scale = 0.0;
  for (int k = 0; k <= n_max; ++k) {
    if (k == 1) {
      prev = cur;
      cur = 1.0 + a - x;
    } else if (k > 1) {
      const double km = k - 1;
      const double next = ((2.0 * km + 1.0 + a - x) * cur - (km + a) * prev) / (km + 1.0);
      prev = cur;
      cur = next;
    }
    if (std::abs(cur) > 1e150) {
      cur *= 1e-150;
      prev *= 1e-150;
      log_scale += 150.0 * std::log(10.0);
    }
    LogValue v;
    if (cur == 0.0) {
      v = {-std::numeric_limits<double>::infinity(), 0};
    } else {
      const double lg = log_pre + 0.5 * (std::lgamma(k + 1.0) - std::lgamma(b + k)) + std::log(std::abs(cur)) + log_scale;
      const int sign = ((k % 2 == 0) ? 1 : -1) * (cur > 0 ? 1 : -1);
      v = {lg, sign};
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

LogValue psi0_log(int n, double ell, const ScramblonParams& p) { return psi0_series(n, ell, p).back(); }

double psi0(int n, double ell, const ScramblonParams& p) { return psi0_log(n, ell, p).value(); }

PeakInN peak_in_n(const ScramblonParams& p, double ell, double t, int n_cap) {
  const double d = p.delta;
  const cplx az = p.alpha * cplx(t, 0.25 * p.beta);
  const cplx lth = std::log(std::tanh(az));
  const cplx lch = std::log(std::cosh(az));
  const auto psi = psi0_series(n_cap, ell, p);
  std::vector<double> logm(psi.size());
  std::vector<double> phase(psi.size());
  double mx = -std::numeric_limits<double>::infinity();
  int n_end = static_cast<int>(psi.size()) - 1;
  for (int n = 0; n <= n_end; ++n) {
    logm[n] = log_binomial_root(n, d) + n * lth.real() - 2.0 * d * lch.real() + psi[n].log_abs;
    phase[n] = n * lth.imag() - 2.0 * d * lch.imag();
    mx = std::max(mx, logm[n]);
  }
  PeakInN out;
  out.magnitudes.resize(logm.size());
  int n0 = 0;
  for (std::size_t n = 0; n < logm.size(); ++n) {
    out.magnitudes[n] = std::exp(logm[n] - mx);
    if (out.magnitudes[n] > out.magnitudes[static_cast<std::size_t>(n0)]) n0 = static_cast<int>(n);
  }
  // trim the trailing region that carries no weight
  while (n_end > n0 && out.magnitudes[static_cast<std::size_t>(n_end)] < 1e-30) --n_end;
  out.magnitudes.resize(static_cast<std::size_t>(n_end + 1));
  out.phases.assign(phase.begin(), phase.begin() + n_end + 1);
  out.n0 = n0;
  const auto& m = out.magnitudes;
  int lo = n0, hi = n0;
  while (lo > 0 && m[lo - 1] >= 0.5) --lo;
  while (hi < n_end && m[hi + 1] >= 0.5) ++hi;
  double left = lo > 0 ? lo - (m[lo] - 0.5) / (m[lo] - m[lo - 1]) : 0.0;
  double right = hi < n_end ? hi + (m[hi] - 0.5) / (m[hi] - m[hi + 1]) : n_end;
  out.hwhm_n = 0.5 * (right - left);
  double pmin = out.phases[lo], pmax = out.phases[lo];
  for (int n = lo; n <= hi; ++n) {
    pmin = std::min(pmin, out.phases[n]);
    pmax = std::max(pmax, out.phases[n]);
  }
  out.phase_spread = pmax - pmin;
  int peaks = 0;
  for (int n = 0; n <= n_end; ++n) {
    const double l = n > 0 ? m[n - 1] : 0.0;
    const double r = n < n_end ? m[n + 1] : 0.0;
    if (m[n] >= 0.5 && m[n] >= l && m[n] > r) ++peaks;
  }
  out.single_peaked = peaks == 1;
  return out;
}

}  // namespace kwind
