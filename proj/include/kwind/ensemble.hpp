#pragma once

// Disorder-ensemble orchestration for the spin model: one realization per
// task on a thread pool, aggregation in fixed realization order.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kwind/config.hpp"
#include "kwind/krylov.hpp"
#include "kwind/spin_model.hpp"
#include "kwind/winding.hpp"

namespace kwind {

/// Runs task(i) for i in [0, count) on up to `threads` workers. Returns the
/// error message per index, empty on success.
std::vector<std::string> run_indexed(int count, int threads, const std::function<void(int)>& task);

/// "S<site><axis>" with a 1-based site, e.g. S1x.
DenseOperator parse_operator(const std::string& spec, int n_sites);

struct SpinRealization {
  std::uint64_t seed = 0;
  std::vector<double> b;
  int krylov_dim = 0;
  double seed_norm_sq = 0.0;
  std::vector<std::vector<cplx>> ck;  // [t][mu], unit-norm C_K
  std::vector<PeakLocation> ck_peak;
  std::vector<std::vector<cplx>> cs;  // [t][mu]
  std::vector<PeakLocation> cs_peak;
  std::vector<std::vector<double>> p;  // [t][l]
  std::vector<std::vector<cplx>> q;
  std::vector<double> tail_weight;  // [t]
  std::vector<double> evolved_norm_sq;  // ||rho^{1/2} O(t)||^2
};

/// Full pipeline for one coupling draw at the given absolute times.
SpinRealization compute_spin_realization(const ModelConfig& m, const KrylovConfig& k, std::uint64_t seed,
                                         const std::vector<double>& t_list,
                                         const std::vector<double>& mu_grid);

struct SpinEnsemble {
  double pilot_alpha = 0.0;
  std::vector<double> t;         // absolute times
  std::vector<double> mu;
  std::vector<SpinRealization> realizations;  // successful ones, in index order
  std::vector<std::pair<int, std::string>> failures;

  std::vector<double> b_mean;
  std::vector<double> b_sem;
  std::vector<int> b_count;
  AlphaFit fit{};
  std::vector<std::vector<cplx>> ck_mean;
  std::vector<std::vector<cplx>> cs_mean;
  std::vector<PeakLocation> ck_peak;  // peaks of the averaged C_K
  std::vector<PeakLocation> cs_peak;
  std::vector<double> mu_k_spread;    // standard error of per-realization mu_K
  std::vector<std::vector<double>> p_mean;
  std::vector<std::vector<cplx>> q_mean;
};

/// Pilot Lanczos on seed_base fixes alpha and the time grid
/// t_k = k t_max / (t_count - 1) / (2 alpha); then every realization runs.
SpinEnsemble run_spin_ensemble(const RunConfig& c);

/// Aggregates in realization order; exposed for recomputation from parts.
void aggregate(SpinEnsemble& e, int fit_lo, int fit_hi);

}  // namespace kwind
