#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kwind/errors.hpp"
#include "kwind/quadrature.hpp"

using namespace kwind;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("finite-interval quadrature") {
  const auto poly = integrate([](double y) { return cplx(3 * y * y, -1.0); }, 0.0, 2.0);
  CHECK(poly.converged);
  CHECK(std::abs(poly.value - cplx(8.0, -2.0)) < 1e-13);

  const auto osc = integrate([](double y) { return std::polar(1.0, 40.0 * y); }, 0.0, 1.0);
  const cplx exact = (std::polar(1.0, 40.0) - 1.0) / cplx(0, 40.0);
  CHECK(std::abs(osc.value - exact) < 1e-12);
  CHECK(osc.error >= 0.0);
  CHECK(osc.evaluations > 0);

  const auto peaked = integrate([](double y) { return cplx(1.0 / (1e-4 + y * y)); }, -1.0, 1.0);
  CHECK(std::abs(peaked.value.real() - 2 * std::atan(1.0 / 1e-2) / 1e-2) < 1e-9);
}

TEST_CASE("power-weighted quadrature removes the endpoint singularity") {
  for (double a : {0.3, 1.0, 4.0}) {
    const auto r = integrate_power_weighted([](double y) { return cplx(std::exp(-y)); }, -0.5, a);
    CHECK(r.converged);
    CHECK(std::abs(r.value.real() - std::sqrt(kPi) * std::erf(std::sqrt(a))) < 1e-13);
  }
  const auto p = integrate_power_weighted([](double y) { return cplx(std::cos(y)); }, -2.0 / 3.0, 1.0);
  // int_0^1 y^{-2/3} cos y = 3 - 3/14 + 3/312 - ...
  double series = 0, term_sign = 1, fact = 1;
  for (int k = 0; k < 12; ++k) {
    if (k > 0) fact *= (2 * k - 1) * (2 * k);
    series += term_sign / (fact * (2 * k + 1.0 / 3.0));
    term_sign = -term_sign;
  }
  CHECK(std::abs(p.value.real() - series) < 1e-13);

  // g carries its own sqrt(y); k = 2 makes the integrand smooth
  const auto s = integrate_power_weighted([](double y) { return cplx(1.0 + std::sqrt(y)); }, -0.5, 1.0, {}, 2.0);
  CHECK(std::abs(s.value.real() - 3.0) < 1e-13);
}

TEST_CASE("semi-infinite quadrature: Gamma integrals and an oscillatory tail") {
  for (double pw : {0.0, -0.5, -2.0 / 3.0, 1.5}) {
    SemiInfiniteOptions o;
    o.power = pw;
    const auto r = integrate_semi_infinite([](double y) { return cplx(std::exp(-y)); }, o);
    CHECK(r.converged);
    CHECK(std::abs(r.value.real() - std::tgamma(pw + 1)) < 1e-11 * std::tgamma(pw + 1));
  }
  const cplx rate(0.1, -1.0);
  SemiInfiniteOptions o;
  o.power = -0.5;
  o.panel_width = kPi;
  o.first_panel = 1.0;
  const auto r = integrate_semi_infinite([rate](double y) { return std::exp(-rate * y); }, o);
  CHECK(std::abs(r.value - std::sqrt(kPi) / std::sqrt(rate)) < 1e-10);
}

TEST_CASE("semi-infinite quadrature reports divergence") {
  SemiInfiniteOptions o;
  o.max_panels = 200;
  try {
    integrate_semi_infinite([](double y) { return cplx(1.0 / (1.0 + y)); }, o);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::isfinite(e.estimate()));
    CHECK(e.error_bound() >= 0.0);
  }
}

TEST_CASE("Wynn epsilon accelerates an alternating series") {
  std::vector<cplx> partial;
  cplx s{};
  for (int k = 0; k < 14; ++k) {
    s += (k % 2 == 0 ? 1.0 : -1.0) / (k + 1.0);
    partial.push_back(s);
  }
  const auto acc = wynn_epsilon(partial);
  CHECK(std::abs(acc.value - std::log(2.0)) < 1e-10);
  CHECK(std::abs(partial.back() - std::log(2.0)) > 1e-2);
  const auto single = wynn_epsilon({cplx(1.5)});
  CHECK(single.value == cplx(1.5));
}
