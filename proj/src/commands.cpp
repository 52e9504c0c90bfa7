#include "kwind/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "kwind/analytic.hpp"
#include "kwind/csv.hpp"
#include "kwind/ensemble.hpp"
#include "kwind/errors.hpp"
#include "kwind/scramblon.hpp"

namespace kwind {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::string path_in(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_fourier(const std::string& path, const std::vector<double>& t, double to_units,
                   const std::vector<double>& mu, const std::vector<std::vector<cplx>>& values,
                   const std::string& what) {
  CsvWriter w(path, {"t", "t_2alpha", "mu", "re", "im", "abs"},
              "t absolute; t_2alpha = t in units of 1/(2 alpha); mu in radians; " + what);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const cplx v = values[i][j];
      w.row({t[i], t[i] * to_units, mu[j], v.real(), v.imag(), std::abs(v)});
    }
  }
}

void write_sizes(const std::string& path, const std::vector<double>& t, double to_units,
                 const std::vector<std::vector<double>>& p, const std::vector<std::vector<cplx>>& q) {
  CsvWriter w(path, {"t", "t_2alpha", "ell", "p", "re_q", "im_q", "abs_q", "arg_q"},
              "t absolute; t_2alpha = t in units of 1/(2 alpha); ell = Pauli size; p and q unnormalized");
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t l = 0; l < p[i].size(); ++l) {
      const cplx v = q[i][l];
      w.row({t[i], t[i] * to_units, static_cast<double>(l), p[i][l], v.real(), v.imag(), std::abs(v), std::arg(v)});
    }
  }
}

void write_realization(const fs::path& dir, const RunConfig& c, const SpinEnsemble& e, const SpinRealization& r) {
  fs::create_directories(dir);
  const double u = 2.0 * e.pilot_alpha;
  {
    CsvWriter w(path_in(dir, "b_n.csv"), {"n", "b"}, "n is the 1-based Lanczos index; b in units of H");
    for (std::size_t n = 0; n < r.b.size(); ++n) w.row({n + 1.0, r.b[n]});
  }
  {
    CsvWriter w(path_in(dir, "mu_K.csv"), {"t", "t_2alpha", "mu_K", "width", "cs_mu_K", "cs_width", "tail_weight"},
                "t absolute; t_2alpha uses the pilot alpha; widths are HWHM of |C|^2 in radians");
    for (std::size_t i = 0; i < e.t.size(); ++i) {
      w.row({e.t[i], e.t[i] * u, r.ck_peak[i].mu_K, r.ck_peak[i].width, r.cs_peak[i].mu_K, r.cs_peak[i].width,
             r.tail_weight[i]});
    }
  }
  write_fourier(path_in(dir, "C_K.csv"), e.t, u, e.mu, r.ck, "C_K normalized to sum |phi|^2 = 1");
  write_fourier(path_in(dir, "C_S.csv"), e.t, u, e.mu, r.cs, "C_S = sum_l q(l) e^{i mu l}");
  write_sizes(path_in(dir, "size_dists.csv"), e.t, u, r.p, r.q);
  std::ofstream(dir / "couplings.json")
      << to_json(sample_couplings(c.model.n_sites, r.seed, c.model.variance_scale)).dump() << "\n";
}

}  // namespace

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ArgumentError& e) {
    log << "argument error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const RangeError& e) {
    log << "argument error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const ResourceError& e) {
    log << "resource error: " << e.what() << " (needs " << e.required_mb() << " MB, budget " << e.budget_mb()
        << " MB)\n";
    return kExitArgument;
  } catch (const NumericError& e) {
    log << "numeric failure: " << e.what() << " (estimate " << e.estimate() << ", error bound " << e.error_bound()
        << ")\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int cmd_spin_run(const RunConfig& c, std::ostream& log) {
  const fs::path out(c.output_dir);
  // rough footprint of the per-realization series kept for aggregation
  const double per_real_mb = c.analysis.t_count * (2.0 * c.analysis.mu_points * 16.0 +
                                                   (c.model.n_sites + 1) * 24.0) / 1048576.0;
  const double budget = default_memory_budget_mb();
  const int depth = c.krylov.n_max > 0 ? c.krylov.n_max : default_krylov_depth(c.model.n_sites, budget);
  const int workers = std::min(c.resolved_threads(), c.model.realizations);
  const double basis_mb = static_cast<double>(workers) * depth * basis_vector_bytes(c.model.n_sites) / 1048576.0;
  const double need = per_real_mb * c.model.realizations + basis_mb;
  if (need > budget) throw ResourceError("ensemble exceeds the memory budget", need, budget);
  log << "spin-run: N=" << c.model.n_sites << " beta=" << c.model.beta << " realizations=" << c.model.realizations
      << " threads=" << c.resolved_threads() << "\n";
  const auto e = run_spin_ensemble(c);
  fs::create_directories(out);
  const double u = 2.0 * e.pilot_alpha;
  const double uf = 2.0 * e.fit.alpha;
  {
    CsvWriter w(path_in(out, "b_n.csv"), {"n", "b_mean", "b_sem", "count"},
                "n is the 1-based Lanczos index; b in units of H; sem = standard error over realizations");
    for (std::size_t n = 0; n < e.b_mean.size(); ++n) w.row({n + 1.0, e.b_mean[n], e.b_sem[n], 1.0 * e.b_count[n]});
  }
  {
    const SolvableParams sp{e.fit.alpha, 0.5, c.model.beta, 1.0};
    CsvWriter w(path_in(out, "mu_K.csv"),
                {"t", "t_2alpha", "t_2alpha_fit", "mu_K", "width", "mu_K_sem", "mu_K_pred", "cs_mu_K", "cs_width"},
                "t absolute; t_2alpha uses the pilot alpha, t_2alpha_fit the averaged-b fit; mu_K_pred = "
                "-2 Arg tanh(alpha (t + i beta/4)) with the fitted alpha; widths are HWHM of |C|^2");
    for (std::size_t i = 0; i < e.t.size(); ++i) {
      w.row({e.t[i], e.t[i] * u, e.t[i] * uf, e.ck_peak[i].mu_K, e.ck_peak[i].width, e.mu_k_spread[i],
             e.fit.alpha > 0.0 ? solvable_muK(e.t[i], sp) : std::nan(""), e.cs_peak[i].mu_K, e.cs_peak[i].width});
    }
  }
  write_fourier(path_in(out, "C_K_avg.csv"), e.t, u, e.mu, e.ck_mean, "disorder average of unit-norm C_K");
  write_fourier(path_in(out, "C_S_avg.csv"), e.t, u, e.mu, e.cs_mean, "disorder average of C_S");
  write_sizes(path_in(out, "size_dists_avg.csv"), e.t, u, e.p_mean, e.q_mean);
  if (c.analysis.per_realization) {
    for (std::size_t i = 0; i < e.realizations.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "r%05llu",
                    static_cast<unsigned long long>(e.realizations[i].seed - c.model.seed_base));
      write_realization(out / name, c, e, e.realizations[i]);
    }
  }
  json failures = json::array();
  for (const auto& [i, msg] : e.failures) failures.push_back({{"realization", i}, {"seed", c.model.seed_base + i}, {"error", msg}});
  write_manifest(c.output_dir, "spin-run", c,
                 {{"pilot_alpha", e.pilot_alpha},
                  {"alpha_fit", {{"alpha", e.fit.alpha}, {"intercept", e.fit.intercept}, {"residual", e.fit.residual}}},
                  {"completed", e.realizations.size()},
                  {"failures", failures}});
  log << "alpha (pilot) = " << e.pilot_alpha << ", alpha (averaged fit) = " << e.fit.alpha << "\n";
  if (!e.failures.empty()) {
    for (const auto& [i, msg] : e.failures) log << "realization " << i << " failed: " << msg << "\n";
    return e.realizations.empty() ? kExitNumeric : kExitPartial;
  }
  return kExitOk;
}

int cmd_analytic(const RunConfig& c, std::ostream& log) {
  const auto& a = c.analytic;
  const fs::path out(c.output_dir);
  fs::create_directories(out);
  const double alpha = kPi * a.nu / a.beta;
  const auto sp = SolvableParams::make(alpha, a.delta, a.beta);
  const auto lq = LargeQParams::make(a.largeq_q, a.nu, a.beta);
  const auto mu = uniform_mu_grid(a.mu_points);
  const std::string tunits = "t in units of 1/(2 alpha), alpha = pi nu / beta";
  {
    CsvWriter phi(path_in(out, "solvable_phi.csv"), {"t_2alpha", "n", "re", "im", "abs", "re_tridiag", "im_tridiag"},
                  tunits + "; closed form and tridiagonal propagation, unit seed norm");
    CsvWriter ck(path_in(out, "solvable_C_K.csv"), {"t_2alpha", "mu", "re", "im", "abs"},
                 tunits + "; closed form with unit norm factor");
    CsvWriter mk(path_in(out, "solvable_mu_K.csv"), {"t_2alpha", "mu_K", "mu_K_closed", "width", "theta_K", "flat"},
                 tunits + "; mu_K from the grid peak, width = HWHM of |C_K|^2");
    const TridiagPropagator prop(solvable_b(a.n_max - 1, alpha, a.delta), a.n_max);
    for (double ts : a.t_list) {
      const double t = ts / (2.0 * alpha);
      const auto r = prop(thermal_time(t, a.beta));
      if (r.truncation_warning) log << "warning: truncation at t_2alpha=" << ts << " (boundary " << r.boundary_amplitude << ")\n";
      for (int n = 0; n < std::min(a.n_out, a.n_max); ++n) {
        const cplx v = solvable_phi(n, t, sp);
        phi.row({ts, 1.0 * n, v.real(), v.imag(), std::abs(v), r.phi[n].real(), r.phi[n].imag()});
      }
      std::vector<cplx> vals;
      for (double m : mu) vals.push_back(solvable_CK(m, t, sp));
      for (std::size_t j = 0; j < mu.size(); ++j) ck.row({ts, mu[j], vals[j].real(), vals[j].imag(), std::abs(vals[j])});
      const auto pk = find_peak(vals, mu);
      mk.row({ts, pk.mu_K, solvable_muK(t, sp), pk.width, solvable_thetaK(t, sp), pk.flat ? 1.0 : 0.0});
    }
  }
  {
    CsvWriter phi(path_in(out, "largeq_phi.csv"), {"t_2alpha", "n", "re", "im", "abs"},
                  tunits + "; large-q SYK leading order, q = " + std::to_string(a.largeq_q));
    CsvWriter ck(path_in(out, "largeq_C_K.csv"), {"t_2alpha", "mu", "re", "im", "abs"}, tunits);
    for (double ts : a.t_list) {
      const double t = ts / (2.0 * lq.alpha);
      for (int n = 0; n < a.n_out; ++n) {
        const cplx v = largeq_phi(n, t, lq);
        phi.row({ts, 1.0 * n, v.real(), v.imag(), std::abs(v)});
      }
      for (double m : mu) {
        const cplx v = largeq_CK(m, t, lq);
        ck.row({ts, m, v.real(), v.imag(), std::abs(v)});
      }
    }
  }
  json speeds = json::object();
  {
    CsvWriter col(path_in(out, "ramp_collapse.csv"), {"N", "t", "t_over_logN", "N_abs_mu_K"},
                  "ramp-plateau chain; t in units of 1/alpha; mu_K of unit-norm C_K");
    for (int n : a.ramp_sizes) {
      const auto p = RampPlateauParams::make(a.ramp_alpha, n, a.ramp_beta);
      std::vector<double> ts;
      for (int k = 0; k < a.ramp_t_count; ++k) {
        ts.push_back(a.ramp_t_max * std::log(n) / a.ramp_alpha * k / std::max(1, a.ramp_t_count - 1));
      }
      const auto run = ramp_plateau_run(p, ts, a.ramp_n_max, mu);
      CsvWriter w(path_in(out, "ramp_N" + std::to_string(n) + ".csv"),
                  {"t", "t_over_logN", "mu_K", "width", "lorentzian_width", "front", "truncation_warning"},
                  "ramp-plateau chain with plateau alpha N; t in units of 1/alpha; width = HWHM of |C_K|^2; "
                  "lorentzian_width for the unbounded linear ramp");
      for (const auto& s : run.samples) {
        const double x = s.t / std::log(n);
        w.row({s.t, x, s.ck.mu_K, s.ck.width, lorentzian_width(s.t, a.ramp_alpha, a.ramp_beta), 1.0 * s.front,
               s.truncation_warning ? 1.0 : 0.0});
        col.row({1.0 * n, s.t, x, n * std::abs(s.ck.mu_K)});
      }
      speeds[std::to_string(n)] = run.front_speed;
    }
  }
  write_manifest(c.output_dir, "analytic", c, {{"alpha", alpha}, {"ramp_front_speed", speeds}});
  return kExitOk;
}

int cmd_scramblon(const RunConfig& c, std::ostream& log) {
  const auto& sc = c.scramblon;
  const fs::path out(c.output_dir);
  fs::create_directories(out);
  const auto mu = uniform_mu_grid(sc.mu_points);
  json summary = json::array();
  bool any_failure = false;
  for (double h : sc.h_list) {
    const auto p = ScramblonParams::make(sc.q, sc.nu, sc.beta, sc.n_majorana, h, sc.delta, sc.ladder_c);
    const double t = sc.t_scaled / (2.0 * p.alpha);
    const std::string suffix = "_h" + tag(h) + ".csv";
    std::vector<double> grid;
    for (int k = 1; k <= sc.s_points; ++k) grid.push_back(p.s0 + (sc.s_max - p.s0) * k / sc.s_points);
    json rec = {{"h", h}, {"params", to_json(p)}, {"t", t}, {"lambda0", p.lambda0(t)}};
    {
      std::vector<std::string> failures;
      ScramblonDistributions ex;
      try {
        ex = size_dists_exact(p, t, grid);
      } catch (const NumericError& e) {
        failures.push_back(e.what());
      }
      const auto lin = size_dists_linearized(p, t, grid);
      CsvWriter w(path_in(out, "scramblon_dists" + suffix),
                  {"s", "p_exact", "arg_q_exact", "p_linearized", "arg_q_linearized"},
                  "s = ell/N; exact = delta approximation with s(y) inverted by quadrature; arg_q unwrapped; t = " +
                      tag(sc.t_scaled) + "/(2 alpha)");
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double pe = ex.p.empty() ? std::nan("") : ex.p[i];
        const double ae = ex.arg_q.empty() ? std::nan("") : ex.arg_q[i];
        w.row({grid[i], pe, ae, lin.p[i], lin.arg_q[i]});
      }
      rec["lambda0_warning"] = lin.lambda0_warning;
      if (lin.lambda0_warning) log << "warning: lambda0 > 0.1 at h=" << h << "\n";
      for (const auto& f : failures) log << "exact distribution failed at h=" << h << ": " << f << "\n";
      rec["dist_failures"] = failures;
      any_failure = any_failure || !failures.empty();
    }
    {
      const auto cs = CS_scramblon(mu, t, p);
      std::vector<std::string> cols{"mu", "re", "im", "abs", "error"};
      if (h == 1.0) cols.insert(cols.end(), {"re_closed", "im_closed"});
      CsvWriter w(path_in(out, "scramblon_C_S" + suffix), cols,
                  "mu in radians; C_S by quadrature with a-posteriori error; closed form for h = 1");
      double dev = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        const cplx v = cs.peak.values[j];
        w << mu[j] << v.real() << v.imag() << std::abs(v) << cs.errors[j];
        if (h == 1.0) {
          const cplx cf = CS_closed_form_h1(mu[j], t, p);
          w << cf.real() << cf.imag();
          if (std::isfinite(v.real())) dev = std::max(dev, std::abs(v - cf));
        }
        w.end_row();
      }
      rec["C_S"] = {{"mu_K", cs.peak.mu_K}, {"width", cs.peak.width}, {"left_elbow", has_left_elbow(cs.peak)},
                    {"failures", cs.failures}};
      if (h == 1.0) {
        rec["C_S"]["closed_form_max_dev"] = dev;
        log << "h=1 C_S closed form vs quadrature: max deviation " << dev << "\n";
      }
      for (const auto& f : cs.failures) log << "quadrature failure at h=" << h << ": " << f << "\n";
      any_failure = any_failure || !cs.failures.empty();
    }
    {
      CsvWriter w(path_in(out, "peak_in_n" + suffix), {"s_minus_s0", "ell", "n0", "hwhm_n", "phase_spread", "single_peaked"},
                  "peak of |phi_n psi_0n| in the Krylov index; phase spread of Arg phi_n over the half-max window (rad)");
      for (double d : sc.peak_offsets) {
        const double ell = (p.s0 + d) * p.n_majorana;
        try {
          const auto pk = peak_in_n(p, ell, t);
          w.row({d, ell, 1.0 * pk.n0, pk.hwhm_n, pk.phase_spread, pk.single_peaked ? 1.0 : 0.0});
        } catch (const RangeError& e) {
          log << "peak-in-n skipped at s-s0=" << d << ": " << e.what() << "\n";
          w.row({d, ell, std::nan(""), std::nan(""), std::nan(""), std::nan("")});
        }
      }
    }
    summary.push_back(rec);
  }
  write_manifest(c.output_dir, "scramblon", c, {{"runs", summary}});
  return any_failure ? kExitNumeric : kExitOk;
}

int cmd_selftest(const AcceptanceOptions& opts, std::ostream& log) {
  int failed = 0;
  run_acceptance(opts, [&](const CriterionResult& r) {
    log << format_result(r) << std::endl;
    if (!r.pass) ++failed;
  });
  log << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << "\n";
  return failed == 0 ? kExitOk : kExitNumeric;
}

}  // namespace kwind
