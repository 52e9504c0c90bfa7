#include "kwind/winding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImagTol = 1e-10;

double wrap_angle(double x) {
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0) x += 2.0 * kPi;
  return x - kPi;
}

std::vector<std::vector<std::size_t>> sector_codes(int n) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n + 1));
  const std::size_t total = std::size_t{1} << (2 * n);
  for (std::size_t code = 0; code < total; ++code) out[string_size(code, n)].push_back(code);
  return out;
}

// Real Pauli amplitudes of one Hermitian basis operator.
Eigen::VectorXd real_coefficients(const KrylovData& kd, int n, double& imag_residue) {
  const auto c = decompose(kd.basis_operator(n));
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = c.data()[i].real();
    imag_residue = std::max(imag_residue, std::abs(c.data()[i].imag()));
  }
  return out;
}

OverlapSpectrum finish_spectrum(int ell, Eigen::MatrixXd m, double imag_residue) {
  if (imag_residue > kImagTol) {
    throw NumericError("Krylov basis operator has non-real Pauli amplitudes", imag_residue, kImagTol);
  }
  OverlapSpectrum s;
  s.ell = ell;
  s.m = 0.5 * (m + m.transpose());
  s.imag_residue = imag_residue;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.m);
  s.eigenvalues = es.eigenvalues().reverse();
  s.eigenvectors = es.eigenvectors().rowwise().reverse();
  return s;
}

}  // namespace

SizeDistributions size_distributions(const PauliCoefficients& c, double t) {
  const int n = c.n_sites();
  SizeDistributions sd;
  sd.t = t;
  sd.p.assign(static_cast<std::size_t>(n + 1), 0.0);
  sd.q.assign(static_cast<std::size_t>(n + 1), cplx{});
  for (std::size_t code = 0; code < c.size(); ++code) {
    const cplx v = c.data()[code];
    const int ell = string_size(code, n);
    sd.p[ell] += std::norm(v);
    sd.q[ell] += v * v;
  }
  return sd;
}

std::vector<double> uniform_mu_grid(int points) {
  if (points < 5) throw ArgumentError("mu grid needs at least 5 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = -kPi + 2.0 * kPi * i / points;
  return g;
}

PeakLocation find_peak(std::span<const cplx> values, std::span<const double> mu_grid) {
  const std::size_t n = values.size();
  if (n < 5 || mu_grid.size() != n) throw ArgumentError("find_peak needs >= 5 matching grid points");
  std::vector<double> mag(n);
  std::size_t finite = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(values[i]);
    if (std::isfinite(mag[i])) ++finite;
  }
  if (finite < 5) throw NumericError("find_peak needs >= 5 finite values", 0.0, static_cast<double>(finite));
  // failed points take the mean of their nearest finite neighbours
  if (finite < n) {
    const std::vector<double> raw = mag;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(raw[i])) continue;
      std::size_t l = i, r = i;
      do l = (l + n - 1) % n; while (!std::isfinite(raw[l]));
      do r = (r + 1) % n; while (!std::isfinite(raw[r]));
      mag[i] = 0.5 * (raw[l] + raw[r]);
    }
  }
  const auto [mn_it, mx_it] = std::minmax_element(mag.begin(), mag.end());
  const double mx = *mx_it;
  const double mn = *mn_it;
  PeakLocation out;
  out.peak_magnitude = mx;
  if (!(mx > 0.0) || mx / mn < 1.0 + 1e-9) {
    out.flat = true;
    out.mu_K = 0.0;
    out.width = kPi;
    return out;
  }
  const std::size_t i0 = static_cast<std::size_t>(mx_it - mag.begin());
  const double dmu = mu_grid[1] - mu_grid[0];
  const double ym = mag[(i0 + n - 1) % n];
  const double yp = mag[(i0 + 1) % n];
  const double y0 = mag[i0];
  const double denom = ym - 2.0 * y0 + yp;
  double offset = 0.0;
  if (denom < 0.0) offset = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
  out.mu_K = wrap_angle(mu_grid[i0] + offset * dmu);

  const double half = 0.5 * mx * mx;
  auto sq = [&](std::size_t i) { return mag[i % n] * mag[i % n]; };
  // walk outward until |v|^2 drops below half max, then interpolate
  double right = -1.0, left = -1.0;
  for (std::size_t s = 1; s < n; ++s) {
    const double a = sq(i0 + s - 1), b = sq(i0 + s);
    if (b < half) {
      right = (static_cast<double>(s) - 1.0 + (a - half) / (a - b)) * dmu;
      break;
    }
  }
  for (std::size_t s = 1; s < n; ++s) {
    const double a = sq(i0 + n - s + 1), b = sq(i0 + n - s);
    if (b < half) {
      left = (static_cast<double>(s) - 1.0 + (a - half) / (a - b)) * dmu;
      break;
    }
  }
  out.width = (right < 0.0 || left < 0.0) ? kPi : 0.5 * (left + right);
  return out;
}

FourierPeak make_peak(std::vector<double> mu_grid, std::vector<cplx> values) {
  FourierPeak fp;
  const auto loc = find_peak(values, mu_grid);
  fp.mu_grid = std::move(mu_grid);
  fp.values = std::move(values);
  fp.mu_K = loc.mu_K;
  fp.width = loc.width;
  fp.peak_magnitude = loc.peak_magnitude;
  fp.flat = loc.flat;
  return fp;
}

FourierPeak fourier_CK(std::span<const cplx> phi, std::span<const double> mu_grid,
                       CKNormalization norm) {
  double raw = 0.0;
  for (const auto& v : phi) raw += std::norm(v);
  const double scale = (norm == CKNormalization::unit_norm && raw > 0.0) ? 1.0 / raw : 1.0;
  std::vector<cplx> sq(phi.size());
  for (std::size_t n = 0; n < phi.size(); ++n) sq[n] = phi[n] * phi[n] * scale;
  std::vector<cplx> vals(mu_grid.size());
  for (std::size_t j = 0; j < mu_grid.size(); ++j) {
    // Horner in e^{i mu}, highest index first
    const cplx w = std::polar(1.0, mu_grid[j]);
    cplx acc{};
    for (std::size_t n = sq.size(); n-- > 0;) acc = acc * w + sq[n];
    vals[j] = acc;
  }
  auto fp = make_peak(std::vector<double>(mu_grid.begin(), mu_grid.end()), std::move(vals));
  fp.raw_norm_sq = raw;
  return fp;
}

FourierPeak fourier_CS(const SizeDistributions& sd, std::span<const double> mu_grid) {
  std::vector<cplx> vals(mu_grid.size());
  for (std::size_t j = 0; j < mu_grid.size(); ++j) {
    cplx acc{};
    for (std::size_t ell = 0; ell < sd.q.size(); ++ell) {
      acc += sd.q[ell] * std::polar(1.0, mu_grid[j] * static_cast<double>(ell));
    }
    vals[j] = acc;
  }
  auto fp = make_peak(std::vector<double>(mu_grid.begin(), mu_grid.end()), std::move(vals));
  for (double v : sd.p) fp.raw_norm_sq += v;
  return fp;
}

OverlapSpectrum overlap_matrix(const KrylovData& kd, int ell) {
  if (!kd.has_basis()) throw StateError("overlap_matrix needs the stored Krylov basis");
  if (ell < 0 || ell > kd.n_sites) throw ArgumentError("size sector out of range");
  const auto codes = sector_codes(kd.n_sites)[ell];
  const int k = kd.krylov_dim;
  Eigen::MatrixXd c(static_cast<Eigen::Index>(codes.size()), k);
  double imag = 0.0;
  for (int n = 0; n < k; ++n) {
    const auto full = real_coefficients(kd, n, imag);
    for (std::size_t r = 0; r < codes.size(); ++r) {
      c(static_cast<Eigen::Index>(r), n) = full[static_cast<Eigen::Index>(codes[r])];
    }
  }
  return finish_spectrum(ell, c.transpose() * c, imag);
}

std::vector<OverlapSpectrum> overlap_spectra(const KrylovData& kd, double memory_budget_mb) {
  if (!kd.has_basis()) throw StateError("overlap_spectra needs the stored Krylov basis");
  const int n_sites = kd.n_sites;
  const int k = kd.krylov_dim;
  const double cache_mb = static_cast<double>(k) * static_cast<double>(std::size_t{1} << (2 * n_sites)) *
                          sizeof(double) / (1024.0 * 1024.0);
  std::vector<OverlapSpectrum> out;
  if (cache_mb > memory_budget_mb) {
    for (int ell = 0; ell <= n_sites; ++ell) out.push_back(overlap_matrix(kd, ell));
    return out;
  }
  const auto sectors = sector_codes(n_sites);
  std::vector<Eigen::MatrixXd> rows;
  for (const auto& s : sectors) rows.emplace_back(static_cast<Eigen::Index>(s.size()), k);
  double imag = 0.0;
  for (int n = 0; n < k; ++n) {
    const auto full = real_coefficients(kd, n, imag);
    for (std::size_t ell = 0; ell < sectors.size(); ++ell) {
      for (std::size_t r = 0; r < sectors[ell].size(); ++r) {
        rows[ell](static_cast<Eigen::Index>(r), n) = full[static_cast<Eigen::Index>(sectors[ell][r])];
      }
    }
  }
  for (int ell = 0; ell <= n_sites; ++ell) {
    out.push_back(finish_spectrum(ell, rows[ell].transpose() * rows[ell], imag));
  }
  return out;
}

Reconstruction eigen_reconstruct(const std::vector<OverlapSpectrum>& spectra,
                                 const KrylovAmplitudes& amps) {
  Reconstruction rec;
  rec.sd.t = amps.t;
  rec.sd.p.assign(spectra.size(), 0.0);
  rec.sd.q.assign(spectra.size(), cplx{});
  const auto k = static_cast<Eigen::Index>(amps.phi.size());
  Eigen::VectorXcd phi(k);
  for (Eigen::Index n = 0; n < k; ++n) phi[n] = amps.phi[n];
  double total = 0.0;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto& s = spectra[i];
    if (s.eigenvectors.rows() != k) throw ArgumentError("Krylov depth of spectrum and amplitudes differ");
    const Eigen::VectorXcd qv = s.eigenvectors.transpose().cast<cplx>() * phi;
    double p = 0.0;
    cplx q{};
    for (Eigen::Index nu = 0; nu < qv.size(); ++nu) {
      p += s.eigenvalues[nu] * std::norm(qv[nu]);
      q += s.eigenvalues[nu] * qv[nu] * qv[nu];
    }
    rec.sd.p[static_cast<std::size_t>(s.ell)] = p;
    rec.sd.q[static_cast<std::size_t>(s.ell)] = q;
    total += p;
  }
  rec.deficit = amps.target_norm_sq - total;
  return rec;
}

SpectralGap spectral_gap(const OverlapSpectrum& spec) {
  if (spec.eigenvalues.size() < 2) throw ArgumentError("spectral_gap needs K >= 2");
  const double l0 = spec.eigenvalues[0];
  const double l1 = spec.eigenvalues[1];
  return {l0, l1, l0 > 0.0 ? l1 / l0 : 0.0};
}

std::vector<double> unwrap_phases(std::span<const double> phases) {
  std::vector<double> out(phases.begin(), phases.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i] = out[i - 1] + wrap_angle(phases[i] - out[i - 1]);
  }
  return out;
}

std::vector<PhaseRow> phase_vs_size(const SizeDistributions& sd, double floor) {
  std::vector<PhaseRow> rows;
  bool have_prev = false;
  double prev = 0.0;
  for (std::size_t ell = 0; ell < sd.q.size(); ++ell) {
    PhaseRow r{static_cast<int>(ell), 0.0, std::abs(sd.q[ell]), sd.p[ell], sd.p[ell] < floor};
    if (!r.masked) {
      const double raw = std::arg(sd.q[ell]);
      r.phase = have_prev ? prev + wrap_angle(raw - prev) : raw;
      prev = r.phase;
      have_prev = true;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kwind
