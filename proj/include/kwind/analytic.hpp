#pragma once

// Closed-form Krylov models: the solvable family b_n = alpha sqrt(n(n+2D-1)),
// its large-n asymptotics, large-q SYK, and the finite-size ramp-plateau chain.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "kwind/winding.hpp"

namespace kwind {

using cplx = std::complex<double>;

/// t + i beta / 4.
inline cplx thermal_time(double t, double beta) { return {t, 0.25 * beta}; }

struct SolvableParams {
  double alpha = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double norm = 1.0;

  /// Validates alpha > 0, delta > 0, beta >= 0, norm > 0 and alpha beta <= pi.
  static SolvableParams make(double alpha, double delta, double beta, double norm = 1.0);
};

std::vector<double> solvable_b(int count, double alpha, double delta);

cplx solvable_phi(int n, double t, const SolvableParams& p);
std::vector<cplx> solvable_series(int n_count, double t, const SolvableParams& p);
double solvable_thetaK(double t, const SolvableParams& p);
/// Closed form of sum_n phi_n^2 e^{i mu n}, including the norm factor.
cplx solvable_CK(double mu, double t, const SolvableParams& p);
/// -2 Arg tanh(alpha t_beta).
double solvable_muK(double t, const SolvableParams& p);

/// Large-t form exp(-2n e^{-2at} cos(ab/2)) e^{i theta_K n}; throws
/// ArgumentError for t below t_min (default 1/alpha).
cplx asymptotic_phi(int n, double t, const SolvableParams& p, std::optional<double> t_min = {});

struct LargeQParams {
  int q_locality = 4;
  double nu = 0.5;
  double beta = 1.0;
  double alpha = 0.0;
  double delta = 0.0;
  double script_j = 0.0;

  static LargeQParams make(int q_locality, double nu, double beta);
};

double largeq_b(int n, const LargeQParams& p);
cplx largeq_phi(int n, double t, const LargeQParams& p);
cplx largeq_CK(double mu, double t, const LargeQParams& p);

struct RampPlateauParams {
  double alpha = 1.0;
  int n_ramp = 1;
  double plateau_level = 1.0;
  double beta = 1.0;

  /// plateau_level defaults to alpha * n_ramp.
  static RampPlateauParams make(double alpha, int n_ramp, double beta,
                                std::optional<double> plateau_level = {});
};

double ramp_plateau_b(int n, const RampPlateauParams& p);
std::vector<double> ramp_plateau_coefficients(int count, const RampPlateauParams& p);

/// sqrt(-2 + |coth^2(a t_b)| + |tanh^2(a t_b)|).
double lorentzian_width(double t, double alpha, double beta);

/// Largest n with |phi_n|^2 > rel * max |phi|^2.
int wavefront_position(std::span<const cplx> phi, double rel = 1e-6);

struct RampPlateauSample {
  double t = 0.0;
  std::vector<cplx> phi;
  FourierPeak ck;
  int front = 0;
  bool truncation_warning = false;
};

struct RampPlateauRun {
  std::vector<RampPlateauSample> samples;
  /// Least-squares slope of front vs t for t > 2 log(n_ramp) / alpha; NaN if
  /// fewer than 3 samples qualify.
  double front_speed = 0.0;
};

RampPlateauRun ramp_plateau_run(const RampPlateauParams& p, std::span<const double> t_list, int n_max,
                                std::span<const double> mu_grid);

}  // namespace kwind
