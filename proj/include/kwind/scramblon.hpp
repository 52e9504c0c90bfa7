#pragma once

// Scramblon effective theory for large-q SYK coupled to a bath: vertex
// kernels, size and winding distributions in the early-time regime, C_S,
// the rank-one factorization and the Krylov-to-size overlap psi_0n.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kwind/quadrature.hpp"
#include "kwind/winding.hpp"

namespace kwind {

struct ScramblonParams {
  int q_locality = 6;
  double delta = 1.0 / 6.0;
  double nu = 0.5;
  double beta = 1.0;
  double n_majorana = 3000.0;
  double h = 1.0;
  double alpha = 0.0;     // pi nu / beta
  double ladder_c = 0.0;  // default 4 N D^2 cos(pi nu / 2)
  double s0 = 0.0;        // (1 - cos^{2D}(pi nu / 2)) / 2
  double k_const = 0.0;   // cos^{2D-1} Gamma(2D+h) / (4 N D Gamma(2D+1))

  /// Validates 0 < h <= 1, 0 < nu < 1, beta > 0, N > 0. Delta defaults to 1/q.
  static ScramblonParams make(int q_locality, double nu, double beta, double n_majorana, double h,
                              std::optional<double> delta = {},
                              std::optional<double> ladder_c = {});

  double lambda_l() const { return 2.0 * alpha * h; }
  /// C^{-1} e^{lambda_L t}.
  double lambda0(double t) const;
  double cos_half() const;  // cos(pi nu / 2)
  double sin_half() const;
};

nlohmann::json to_json(const ScramblonParams& p);

/// 2 pi / beta (1 - (sqrt(k^4 + 4k^2) - k^2) / 2).
double lambdaL_from_k(double k_ratio, double beta);
/// lambda_L beta / (2 pi nu).
double h_from_lambdaL(double lambda_l, double beta, double nu);

/// h^R(y, T) = y^{2D-1} cos^{2D}(pi nu/2) / Gamma(2D) exp(-y cos(pi nu (1/2 - iT/beta))).
cplx kernel_hR(cplx y, cplx t12, const ScramblonParams& p);

/// f~^A(x, T) = int_0^inf dy e^{-x y^h} h^A(y, T).
QuadratureResult kernel_fA_tilde(cplx x, cplx t34, const ScramblonParams& p);

/// h = 1 closed form cos^{2D}(pi nu/2) (cos(pi nu (1/2 - iT/beta)) + x)^{-2D}.
cplx fA_closed_form(cplx x, cplx t34, const ScramblonParams& p);

/// s(y) from 1 - 2s = f~^A(lambda0 y^h, -i beta/2).
double s_of_y(double y, double t, const ScramblonParams& p);
/// Inverse of s_of_y by bracketed root finding; RangeError outside [s0, 1/2).
double y_of_s(double s, double t, const ScramblonParams& p);

enum class DistributionMethod { delta_approx_exact_inversion, early_time_linearized };

std::string to_string(DistributionMethod m);

struct ScramblonDistributions {
  double t = 0.0;
  DistributionMethod method = DistributionMethod::delta_approx_exact_inversion;
  std::vector<double> s_grid;
  std::vector<double> y;
  std::vector<double> p;
  std::vector<double> arg_q;
  std::vector<double> abs_q;
  bool lambda0_warning = false;  // lambda0(t) > 0.1
};

/// Delta-function approximation with s(y) inverted exactly by quadrature.
ScramblonDistributions size_dists_exact(const ScramblonParams& p, double t, std::span<const double> s_grid);

/// Closed forms from linearizing e^{-lambda0 (y y_l)^h}.
ScramblonDistributions size_dists_linearized(const ScramblonParams& p, double t,
                                             std::span<const double> s_grid);

/// Unnormalized exp(-K^{-1/h} (s - s0)^{1/h} e^{-2 alpha (t + i beta/4)}).
cplx compressed_exponential_q(double s, double t, const ScramblonParams& p);

struct ScramblonCS {
  FourierPeak peak;
  std::vector<double> errors;  // quadrature error per mu point
  std::vector<std::string> failures;  // mu points where quadrature failed
};

/// C_S(mu, t) with the linearized s(y), by quadrature.
ScramblonCS CS_scramblon(std::span<const double> mu_grid, double t, const ScramblonParams& p);

/// Single-point value of the C_S integral.
QuadratureResult CS_scramblon_point(double mu, double t, const ScramblonParams& p);

/// h = 1 closed form of C_S.
cplx CS_closed_form_h1(double mu, double t, const ScramblonParams& p);

/// True when |values| is not monotone increasing on the left flank of the peak.
bool has_left_elbow(const FourierPeak& fp);

/// r(s, t), with q(s, t1, t2) = r(s, t1) r(s, t2).
cplx r_of_s(double s, double t, const ScramblonParams& p);

/// q(s, t1, t2) from the two-time early-time formula.
cplx q_two_time(double s, double t1, double t2, const ScramblonParams& p);

struct Rank1Result {
  std::vector<cplx> q_two_time;
  std::vector<cplx> r1;
  std::vector<cplx> r2;
  double max_rel_residual = 0.0;
};

Rank1Result rank1_factor(const ScramblonParams& p, std::span<const double> s_grid, double t1, double t2);

struct LogValue {
  double log_abs;  // log |v|; -inf for zero
  int sign;        // +1, -1 or 0
  double value() const;
};

/// psi_0n at size ell = s N; RangeError for n > 1e4 or ell <= s0 N.
LogValue psi0_log(int n, double ell, const ScramblonParams& p);
double psi0(int n, double ell, const ScramblonParams& p);

struct PeakInN {
  int n0 = 0;
  double hwhm_n = 0.0;
  double phase_spread = 0.0;  // max - min of unwrapped Arg phi_n over the half-max window
  bool single_peaked = false;
  std::vector<double> magnitudes;  // |phi_n psi_0n| / max
  std::vector<double> phases;      // Arg phi_n, unwrapped
};

/// |phi_n(t_beta) psi_0n(ell)| with phi_n from the solvable family
/// (alpha = pi nu / beta, Delta, unit norm).
PeakInN peak_in_n(const ScramblonParams& p, double ell, double t, int n_cap = 10000);

}  // namespace kwind
