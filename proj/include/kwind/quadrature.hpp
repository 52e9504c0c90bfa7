#pragma once

// Adaptive quadrature for the scramblon integrals: finite panels by
// Gauss-Kronrod (21 points), an endpoint power weight y^p removed by
// substitution, and semi-infinite tails summed panel by panel with Wynn
// epsilon acceleration.

#include <complex>
#include <functional>
#include <vector>

namespace kwind {

using cplx = std::complex<double>;
using ComplexIntegrand = std::function<cplx(double)>;

struct QuadratureResult {
  cplx value{};
  double error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  int max_depth = 18;
};

/// Adaptive integral of f over [a, b].
QuadratureResult integrate(const ComplexIntegrand& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// Integral of y^power g(y) over [0, a] with power > -1, by the substitution
/// y = u^k. The default removes the weight (k = 1 / (power + 1) for power < 0,
/// otherwise the smallest integer k with k (power + 1) integral); pass a
/// larger k when g itself has a fractional power at the origin.
QuadratureResult integrate_power_weighted(const ComplexIntegrand& g, double power, double a,
                                          const QuadratureOptions& opts = {}, double k = 0.0);

struct SemiInfiniteOptions {
  double power = 0.0;        // endpoint weight y^power on the first panel
  double first_panel = 1.0;  // y* splitting the singular head from the tail
  double panel_width = 1.0;  // tail panel width; use pi / |phase rate| for oscillatory tails
  double head_exponent = 0.0;  // substitution y = u^k on the head panel; 0 picks 1 / (power + 1)
  int max_panels = 20000;
  QuadratureOptions quad{};
};

/// Integral of y^power g(y) over [0, inf). Throws NumericError if the panel
/// sums do not settle within max_panels or a panel misses its tolerance.
QuadratureResult integrate_semi_infinite(const ComplexIntegrand& g, const SemiInfiniteOptions& opts);

struct Accelerated {
  cplx value{};
  double error = 0.0;
};

/// Wynn epsilon extrapolation of a sequence of partial sums.
Accelerated wynn_epsilon(const std::vector<cplx>& partial_sums);

}  // namespace kwind
