#include "kwind/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <optional>
#include <thread>

#include "kwind/errors.hpp"

namespace kwind {

std::vector<std::string> run_indexed(int count, int threads, const std::function<void(int)>& task) {
  std::vector<std::string> errors(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const int n = std::clamp(threads, 1, std::max(count, 1));
  if (n == 1) {
    worker();
    return errors;
  }
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  }
  return errors;
}

DenseOperator parse_operator(const std::string& spec, int n_sites) {
  if (spec.size() < 3 || (spec[0] != 'S' && spec[0] != 's')) {
    throw ArgumentError("operator must look like S1x, got '" + spec + "'");
  }
  const char ax = static_cast<char>(std::tolower(static_cast<unsigned char>(spec.back())));
  const std::string digits = spec.substr(1, spec.size() - 2);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ArgumentError("bad site in operator '" + spec + "'");
  }
  const int site = std::stoi(digits);
  if (site < 1 || site > n_sites) throw ArgumentError("operator site out of range in '" + spec + "'");
  Axis a;
  switch (ax) {
    case 'x': a = Axis::X; break;
    case 'y': a = Axis::Y; break;
    case 'z': a = Axis::Z; break;
    default: throw ArgumentError("bad axis in operator '" + spec + "'");
  }
  return spin_operator(n_sites, site - 1, a);
}

namespace {

LanczosOptions lanczos_options(const KrylovConfig& k, int n_sites) {
  LanczosOptions o;
  o.tol = k.tol;
  o.reorth = reorth_from_string(k.reorth);
  o.n_max = k.n_max > 0 ? k.n_max : default_krylov_depth(n_sites, o.memory_budget_mb);
  return o;
}

}  // namespace

SpinRealization compute_spin_realization(const ModelConfig& m, const KrylovConfig& k, std::uint64_t seed,
                                         const std::vector<double>& t_list,
                                         const std::vector<double>& mu_grid) {
  SpinRealization r;
  r.seed = seed;
  const auto couplings = sample_couplings(m.n_sites, seed, m.variance_scale);
  const auto sh = diagonalize(build_hamiltonian(couplings), m.beta);
  const auto op = parse_operator(m.op, m.n_sites);
  const auto th = make_seed(op, thermal_root(sh));
  r.seed_norm_sq = th.norm_sq;
  const auto kd = lanczos(th, sh, lanczos_options(k, m.n_sites));
  r.b = kd.b;
  r.krylov_dim = kd.krylov_dim;
  const Eigen::MatrixXcd o_frame = to_eigenframe(sh, op);
  for (double t : t_list) {
    const Eigen::MatrixXcd x = thermal_evolved_frame(sh, o_frame, t);
    const auto amps = overlap_amplitudes(kd, x, t, m.beta, th.norm_sq);
    auto ck = fourier_CK(amps.phi, mu_grid);
    r.ck_peak.push_back({ck.mu_K, ck.width, ck.peak_magnitude, ck.flat});
    r.ck.push_back(std::move(ck.values));
    r.tail_weight.push_back(amps.tail_weight);
    r.evolved_norm_sq.push_back(x.squaredNorm() / static_cast<double>(x.rows()));
    const auto sd = size_distributions(decompose(from_eigenframe(sh, x)), t);
    auto cs = fourier_CS(sd, mu_grid);
    r.cs_peak.push_back({cs.mu_K, cs.width, cs.peak_magnitude, cs.flat});
    r.cs.push_back(std::move(cs.values));
    r.p.push_back(sd.p);
    r.q.push_back(sd.q);
  }
  return r;
}

void aggregate(SpinEnsemble& e, int fit_lo, int fit_hi) {
  const auto& rs = e.realizations;
  const std::size_t nr = rs.size();
  e.b_mean.clear();
  e.b_sem.clear();
  e.b_count.clear();
  if (nr == 0) return;
  std::size_t len = 0;
  for (const auto& r : rs) len = std::max(len, r.b.size());
  for (std::size_t n = 0; n < len; ++n) {
    double s = 0, s2 = 0;
    int cnt = 0;
    for (const auto& r : rs) {
      if (n < r.b.size()) {
        s += r.b[n];
        s2 += r.b[n] * r.b[n];
        ++cnt;
      }
    }
    const double mean = s / cnt;
    const double var = cnt > 1 ? std::max(0.0, (s2 - cnt * mean * mean) / (cnt - 1)) : 0.0;
    e.b_mean.push_back(mean);
    e.b_sem.push_back(std::sqrt(var / cnt));
    e.b_count.push_back(cnt);
  }
  const int hi = std::min<int>(fit_hi, static_cast<int>(e.b_mean.size()));
  if (hi - fit_lo + 1 >= 3) e.fit = fit_alpha(e.b_mean, fit_lo, hi);

  const std::size_t nt = e.t.size();
  const std::size_t nm = e.mu.size();
  const double inv = 1.0 / static_cast<double>(nr);
  e.ck_mean.assign(nt, std::vector<cplx>(nm));
  e.cs_mean.assign(nt, std::vector<cplx>(nm));
  e.p_mean.assign(nt, std::vector<double>(rs[0].p[0].size()));
  e.q_mean.assign(nt, std::vector<cplx>(rs[0].q[0].size()));
  e.ck_peak.clear();
  e.cs_peak.clear();
  e.mu_k_spread.clear();
  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (const auto& r : rs) {
      for (std::size_t j = 0; j < nm; ++j) {
        e.ck_mean[ti][j] += r.ck[ti][j];
        e.cs_mean[ti][j] += r.cs[ti][j];
      }
      for (std::size_t l = 0; l < r.p[ti].size(); ++l) {
        e.p_mean[ti][l] += r.p[ti][l];
        e.q_mean[ti][l] += r.q[ti][l];
      }
    }
    for (auto& v : e.ck_mean[ti]) v *= inv;
    for (auto& v : e.cs_mean[ti]) v *= inv;
    for (auto& v : e.p_mean[ti]) v *= inv;
    for (auto& v : e.q_mean[ti]) v *= inv;
    e.ck_peak.push_back(find_peak(e.ck_mean[ti], e.mu));
    e.cs_peak.push_back(find_peak(e.cs_mean[ti], e.mu));
    double s = 0, s2 = 0;
    for (const auto& r : rs) {
      s += r.ck_peak[ti].mu_K;
      s2 += r.ck_peak[ti].mu_K * r.ck_peak[ti].mu_K;
    }
    const double mean = s * inv;
    const double var = nr > 1 ? std::max(0.0, (s2 - nr * mean * mean) / (nr - 1.0)) : 0.0;
    e.mu_k_spread.push_back(std::sqrt(var * inv));
  }
}

SpinEnsemble run_spin_ensemble(const RunConfig& c) {
  const auto& m = c.model;
  SpinEnsemble e;
  e.mu = uniform_mu_grid(c.analysis.mu_points);
  const int fit_hi = c.analysis.fit_hi > 0 ? c.analysis.fit_hi : std::max(m.n_sites - 1, c.analysis.fit_lo + 2);

  // pilot fit fixes the time unit 1/(2 alpha)
  {
    const auto couplings = sample_couplings(m.n_sites, m.seed_base, m.variance_scale);
    const auto sh = diagonalize(build_hamiltonian(couplings), m.beta);
    const auto th = make_seed(parse_operator(m.op, m.n_sites), thermal_root(sh));
    LanczosOptions o = lanczos_options(c.krylov, m.n_sites);
    o.n_max = std::min(o.n_max, fit_hi + 2);
    const auto kd = lanczos(th, sh, o);
    if (static_cast<int>(kd.b.size()) < fit_hi) throw NumericError("pilot Lanczos terminated before the fit window");
    e.pilot_alpha = fit_alpha(kd.b, c.analysis.fit_lo, fit_hi).alpha;
    if (!(e.pilot_alpha > 0.0)) throw NumericError("pilot alpha is not positive", e.pilot_alpha);
  }
  const int nt = c.analysis.t_count;
  for (int k = 0; k < nt; ++k) {
    const double scaled = nt > 1 ? c.analysis.t_max * k / (nt - 1) : 0.0;
    e.t.push_back(scaled / (2.0 * e.pilot_alpha));
  }

  std::vector<std::optional<SpinRealization>> slots(static_cast<std::size_t>(m.realizations));
  const auto errors = run_indexed(m.realizations, c.resolved_threads(), [&](int i) {
    slots[i] = compute_spin_realization(m, c.krylov, m.seed_base + static_cast<std::uint64_t>(i), e.t, e.mu);
  });
  for (int i = 0; i < m.realizations; ++i) {
    if (!errors[i].empty()) {
      e.failures.emplace_back(i, errors[i]);
    } else {
      e.realizations.push_back(std::move(*slots[i]));
    }
  }
  aggregate(e, c.analysis.fit_lo, fit_hi);
  return e;
}

}  // namespace kwind
