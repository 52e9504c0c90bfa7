#include "kwind/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

using boost::math::quadrature::gauss_kronrod;

}  // namespace

QuadratureResult integrate(const ComplexIntegrand& f, double a, double b, const QuadratureOptions& opts) {
  QuadratureResult r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  long count = 0;
  auto counted = [&](double x) {
    ++count;
    return f(x);
  };
  double err = 0.0;
  double l1 = 0.0;
  r.value = gauss_kronrod<double, 21>::integrate(counted, a, b, static_cast<unsigned>(opts.max_depth),
                                                 opts.rel_tol, &err, &l1);
  r.error = err;
  r.evaluations = count;
  r.converged = std::isfinite(r.value.real()) && std::isfinite(r.value.imag()) &&
                err <= std::max(opts.abs_tol, 10.0 * opts.rel_tol * std::max(std::abs(r.value), l1));
  return r;
}

namespace {

// 1 / (power + 1) for a singular weight; for a bounded weight the smallest
// integer k that makes u^{k (power + 1) - 1} a polynomial.
double default_exponent(double power) {
  if (power < 0.0) return 1.0 / (power + 1.0);
  for (int k = 1; k <= 64; ++k) {
    const double e = k * (power + 1.0);
    if (std::abs(e - std::round(e)) < 1e-9) return k;
  }
  return 1.0;
}

}  // namespace

QuadratureResult integrate_power_weighted(const ComplexIntegrand& g, double power, double a,
                                          const QuadratureOptions& opts, double k) {
  if (!(power > -1.0)) throw ArgumentError("power weight must exceed -1");
  if (!(a > 0.0)) throw ArgumentError("panel end must be positive");
  if (k <= 0.0) k = default_exponent(power);
  const double e = k * (power + 1.0) - 1.0;
  auto h = [&](double u) { return u == 0.0 && e > 0.0 ? cplx{} : g(std::pow(u, k)) * (k * std::pow(u, e)); };
  return integrate(h, 0.0, std::pow(a, 1.0 / k), opts);
}

Accelerated wynn_epsilon(const std::vector<cplx>& s) {
  const std::size_t n = s.size();
  if (n == 0) return {};
  if (n < 3) return {s.back(), n > 1 ? std::abs(s.back() - s[n - 2]) : 0.0};
  // e[k] holds column j of the epsilon table; even columns approximate the limit
  std::vector<cplx> prev(n, cplx{}), cur(s.begin(), s.end());
  cplx best = s.back();
  double best_err = std::abs(s.back() - s[n - 2]);
  cplx last_even = s.back();
  for (std::size_t j = 1; j < n; ++j) {
    std::vector<cplx> next(n - j);
    bool ok = true;
    for (std::size_t i = 0; i + j < n; ++i) {
      const cplx d = cur[i + 1] - cur[i];
      if (std::abs(d) == 0.0) {
        ok = false;
        break;
      }
      next[i] = prev[i + 1] + 1.0 / d;
    }
    if (!ok) break;
    if (j % 2 == 0 && next.size() >= 2) {
      const cplx v = next.back();
      const double err = std::abs(v - next[next.size() - 2]) + std::abs(v - last_even);
      if (err < best_err && std::isfinite(v.real()) && std::isfinite(v.imag())) {
        best = v;
        best_err = err;
      }
      last_even = v;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (cur.size() < 2) break;
  }
  return {best, best_err};
}

QuadratureResult integrate_semi_infinite(const ComplexIntegrand& g, const SemiInfiniteOptions& opts) {
  if (!(opts.first_panel > 0.0) || !(opts.panel_width > 0.0)) {
    throw ArgumentError("panel sizes must be positive");
  }
  const double p = opts.power;
  QuadratureResult total =
      opts.power == 0.0 && opts.head_exponent <= 0.0
          ? integrate(g, 0.0, opts.first_panel, opts.quad)
          : integrate_power_weighted(g, p, opts.first_panel, opts.quad, opts.head_exponent);
  if (!total.converged) {
    throw NumericError("head panel did not converge", std::abs(total.value), total.error);
  }
  auto tail_fn = [&](double y) { return std::pow(y, p) * g(y); };
  std::vector<cplx> partial{total.value};
  double lo = opts.first_panel;
  int small_run = 0;
  double err_sum = total.error;
  for (int k = 0; k < opts.max_panels; ++k) {
    const double hi = lo + opts.panel_width;
    auto r = integrate(tail_fn, lo, hi, opts.quad);
    total.evaluations += r.evaluations;
    // a panel negligible against the running sum only needs an absolute bound
    const bool negligible = std::isfinite(r.error) && r.error <= opts.quad.rel_tol * std::abs(partial.back());
    if (!r.converged && !negligible) {
      throw NumericError("tail panel did not converge", std::abs(partial.back()), r.error);
    }
    err_sum += r.error;
    partial.push_back(partial.back() + r.value);
    lo = hi;
    const double scale = std::max(std::abs(partial.back()), opts.quad.abs_tol);
    small_run = std::abs(r.value) <= opts.quad.rel_tol * scale ? small_run + 1 : 0;
    if (small_run >= 3) {
      total.value = partial.back();
      total.error = err_sum + std::abs(r.value);
      total.converged = true;
      return total;
    }
    // oscillatory tails that decay slowly: accept a settled extrapolation
    if (partial.size() >= 12 && partial.size() % 4 == 0) {
      const std::vector<cplx> last(partial.end() - 12, partial.end());
      const auto acc = wynn_epsilon(last);
      if (acc.error <= opts.quad.rel_tol * std::max(std::abs(acc.value), opts.quad.abs_tol)) {
        total.value = acc.value;
        total.error = err_sum + acc.error;
        total.converged = true;
        return total;
      }
    }
  }
  throw NumericError("semi-infinite tail did not settle", std::abs(partial.back()), err_sum);
}

}  // namespace kwind
