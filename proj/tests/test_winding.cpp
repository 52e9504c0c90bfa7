#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kwind/analytic.hpp"
#include "kwind/errors.hpp"
#include "kwind/winding.hpp"
#include "test_util.hpp"

using namespace kwind;

namespace {

constexpr double kPi = std::numbers::pi;

double grid_step(const std::vector<double>& mu) { return mu[1] - mu[0]; }

double periodic_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

OverlapSpectrum synthetic_spectrum(int ell, Eigen::VectorXd lambda) {
  OverlapSpectrum s;
  s.ell = ell;
  const auto k = lambda.size();
  s.eigenvectors = Eigen::MatrixXd::Identity(k, k);
  s.m = lambda.asDiagonal();
  s.eigenvalues = std::move(lambda);
  return s;
}

}  // namespace

TEST_CASE("size distributions: single string, real coefficients and the one-qubit thermal example") {
  PauliCoefficients single(3);
  single[PauliString::from_label("IXI")] = 1.0;
  const auto sd = size_distributions(single);
  for (int l = 0; l <= 3; ++l) {
    CHECK(sd.p[l] == (l == 1 ? 1.0 : 0.0));
    CHECK(sd.q[l] == cplx(l == 1 ? 1.0 : 0.0));
  }

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<cplx> real(1u << 8);
  for (auto& v : real) v = g(rng);
  const auto rs = size_distributions(PauliCoefficients(4, real));
  for (int l = 0; l <= 4; ++l) CHECK(rs.q[l] == cplx(rs.p[l]));

  const double beta = 0.9;
  const double norm = std::sqrt(2 * std::cosh(beta));
  PauliCoefficients th(1);
  th[PauliString::from_label("X")] = std::cosh(beta / 2) / norm;
  th[PauliString::from_label("Y")] = cplx(0, -std::sinh(beta / 2) / norm);
  const auto ts = size_distributions(th);
  CHECK(std::abs(ts.p[1] - 0.5) < 1e-15);
  CHECK(std::abs(ts.q[1] - 1.0 / (2 * std::cosh(beta))) < 1e-15);
  CHECK(ts.p[0] == 0.0);
}

TEST_CASE("size distributions obey |q| <= p and sum to the operator norm") {
  std::mt19937_64 rng(5);
  const auto m = random_matrix(rng, 32);
  const auto op = DenseOperator::from_matrix(m);
  const auto sd = size_distributions(decompose(op));
  double s = 0;
  for (std::size_t l = 0; l < sd.p.size(); ++l) {
    CHECK(std::abs(sd.q[l]) <= sd.p[l] + 1e-15);
    s += sd.p[l];
  }
  CHECK(std::abs(s - norm_sq(op)) < 1e-10);
}

TEST_CASE("uniform grid covers [-pi, pi)") {
  const auto mu = uniform_mu_grid(1024);
  REQUIRE(mu.size() == 1024);
  CHECK(mu.front() == -kPi);
  CHECK(mu.back() < kPi);
  CHECK(mu[512] == 0.0);
  CHECK(std::abs(grid_step(mu) - 2 * kPi / 1024) < 1e-15);
}

TEST_CASE("fourier_CK: unit amplitude is flat, solvable series matches the closed form") {
  const auto mu = uniform_mu_grid(1024);
  const std::vector<cplx> e0{1.0, 0.0, 0.0};
  const auto flat = fourier_CK(e0, mu);
  CHECK(flat.flat);
  for (const auto& v : flat.values) CHECK(std::abs(v - 1.0) < 1e-15);

  const auto p = SolvableParams::make(kPi / 2, 0.25, 1.0);
  const double t = 1.0 / (2 * p.alpha);
  const auto phi = solvable_series(400, t, p);
  const auto ck = fourier_CK(phi, mu, CKNormalization::raw);
  double worst = 0, scale = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const cplx exact = solvable_CK(mu[i], t, p);
    worst = std::max(worst, std::abs(ck.values[i] - exact));
    scale = std::max(scale, std::abs(exact));
  }
  CHECK(worst / scale < 1e-10);
  CHECK(periodic_distance(ck.mu_K, solvable_muK(t, p)) <= grid_step(mu));
  CHECK(ck.width > 0.0);

  // unit_norm rescales sum |phi|^2 to one
  const auto un = fourier_CK(phi, mu);
  double s = 0;
  for (const auto& v : phi) s += std::norm(v);
  CHECK(std::abs(un.raw_norm_sq - s) < 1e-12);
  CHECK(std::abs(un.values[512] * s - ck.values[512]) < 1e-12);
}

TEST_CASE("fourier_CS: delta at one size, zero frequency and brute-force DFT") {
  const auto mu = uniform_mu_grid(256);
  SizeDistributions one;
  one.p = {0, 1, 0};
  one.q = {0, 1, 0};
  const auto cs1 = fourier_CS(one, mu);
  CHECK(cs1.flat);
  for (std::size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(cs1.values[i] - std::polar(1.0, mu[i])) < 1e-14);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  SizeDistributions sd;
  for (int l = 0; l <= 9; ++l) {
    sd.q.emplace_back(g(rng), g(rng));
    sd.p.push_back(std::abs(sd.q.back()) + 0.1);
  }
  const auto cs = fourier_CS(sd, mu);
  cplx total{};
  for (const auto& v : sd.q) total += v;
  CHECK(std::abs(cs.values[128] - total) < 1e-12);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    cplx direct{};
    for (std::size_t l = 0; l < sd.q.size(); ++l) {
      direct += sd.q[l] * cplx(std::cos(mu[i] * l), std::sin(mu[i] * l));
    }
    CHECK(std::abs(cs.values[i] - direct) < 1e-12);
  }
}

TEST_CASE("find_peak on a synthetic Lorentzian, a constant and the saturating solvable model") {
  const auto mu = uniform_mu_grid(1024);
  std::vector<cplx> lor;
  for (double m : mu) lor.push_back(1.0 / cplx(m - 0.7, 0.2));
  const auto pk = find_peak(lor, mu);
  CHECK(std::abs(pk.mu_K - 0.7) < grid_step(mu));
  CHECK(std::abs(pk.width - 0.2) < grid_step(mu));
  CHECK_FALSE(pk.flat);

  const std::vector<cplx> constant(mu.size(), cplx(0.3, -0.2));
  const auto cp = find_peak(constant, mu);
  CHECK(cp.flat);
  CHECK(cp.mu_K == 0.0);
  CHECK(cp.width == kPi);

  // at alpha = pi / beta the peak is a branch point, so the measured width
  // only reflects the sampling and shrinks with the grid
  const auto p = SolvableParams::make(kPi, 0.25, 1.0);
  for (int points : {1024, 4096}) {
    const auto grid = uniform_mu_grid(points);
    std::vector<cplx> sat;
    for (double m : grid) sat.push_back(solvable_CK(m, 0.37, p));
    const auto sp = find_peak(sat, grid);
    CHECK(sp.width <= 2 * grid_step(grid));
    CHECK(sp.width >= 0.0);
  }
}

TEST_CASE("find_peak wraps around the grid edge") {
  const auto mu = uniform_mu_grid(512);
  std::vector<cplx> v;
  for (double m : mu) v.push_back(1.0 / cplx(std::remainder(m - 3.1, 2 * kPi), 0.1));
  const auto pk = find_peak(v, mu);
  CHECK(periodic_distance(pk.mu_K, 3.1) < grid_step(mu));
  CHECK(std::abs(pk.width - 0.1) < grid_step(mu));
}

TEST_CASE("overlap matrices for the single qubit") {
  const auto h = DenseOperator::from_matrix(PauliString::from_label("Z").matrix());
  const auto sh = diagonalize(h, 0.0);
  const auto x = DenseOperator::from_matrix(PauliString::from_label("X").matrix());
  const auto kd = lanczos(make_seed(x, thermal_root(sh)), sh);
  const auto m0 = overlap_matrix(kd, 0);
  const auto m1 = overlap_matrix(kd, 1);
  CHECK(m0.m.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m1.m - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(overlap_matrix(kd, 2), ArgumentError);
  auto gone = kd;
  gone.discard_basis();
  CHECK_THROWS_AS(overlap_matrix(gone, 1), StateError);
}

TEST_CASE("overlap spectra are PSD projector blocks and reconstruct p and q") {
  const int n = 3;
  const double beta = 0.8;
  const auto sh = diagonalize(build_hamiltonian(sample_couplings(n, 9)), beta);
  const auto op = spin_operator(n, 1, Axis::Z);
  const auto seed = make_seed(op, thermal_root(sh));
  const auto kd = lanczos(seed, sh);
  const auto spectra = overlap_spectra(kd);
  REQUIRE(spectra.size() == static_cast<std::size_t>(n + 1));
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(kd.krylov_dim, kd.krylov_dim);
  for (const auto& s : spectra) {
    total += s.m;
    CHECK((s.m - s.m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.eigenvalues.minCoeff() > -1e-10);
    CHECK(s.eigenvalues.maxCoeff() < 1 + 1e-10);
    for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) CHECK(s.eigenvalues[i] <= s.eigenvalues[i - 1]);
    const Eigen::MatrixXd gram = s.eigenvectors.transpose() * s.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
    const auto single = overlap_matrix(kd, s.ell);
    CHECK((single.m - s.m).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK((total - Eigen::MatrixXd::Identity(kd.krylov_dim, kd.krylov_dim)).cwiseAbs().maxCoeff() < 1e-10);

  for (double t : {0.0, 0.9, 3.4}) {
    const auto x = thermal_evolved(sh, op, t);
    const auto direct = size_distributions(decompose(x), t);
    const auto amps = overlap_amplitudes(kd, x, t, beta, seed.norm_sq, AmplitudeConvention::raw);
    const auto rec = eigen_reconstruct(spectra, amps);
    CHECK(std::abs(rec.deficit) < 1e-10);
    for (int l = 0; l <= n; ++l) {
      CHECK(std::abs(rec.sd.p[l] - direct.p[l]) < 1e-10);
      CHECK(std::abs(rec.sd.q[l] - direct.q[l]) < 1e-10);
    }
  }

  KrylovAmplitudes e0;
  e0.phi.assign(kd.krylov_dim, cplx{});
  e0.phi[0] = 1.0;
  e0.target_norm_sq = 1.0;
  const auto rec0 = eigen_reconstruct(spectra, e0);
  for (int l = 0; l <= n; ++l) {
    CHECK(std::abs(rec0.sd.p[l] - spectra[l].m(0, 0)) < 1e-12);
    CHECK(std::abs(rec0.sd.q[l] - spectra[l].m(0, 0)) < 1e-12);
  }
}

TEST_CASE("rank-one sectors align phases; spectral gap examples") {
  Eigen::VectorXd lam(3);
  lam << 1.0, 0.0, 0.0;
  const std::vector<OverlapSpectrum> spectra{synthetic_spectrum(0, lam)};
  KrylovAmplitudes a;
  a.phi = {cplx(0.3, 0.4), cplx(-0.2, 0.1), cplx(0.5, -0.6)};
  const auto rec = eigen_reconstruct(spectra, a);
  CHECK(std::abs(rec.sd.q[0] - a.phi[0] * a.phi[0]) < 1e-15);
  CHECK(std::abs(std::abs(rec.sd.q[0]) - rec.sd.p[0]) < 1e-15);
  CHECK(spectral_gap(spectra[0]).ratio == 0.0);

  Eigen::VectorXd half(2);
  half << 0.5, 0.5;
  const auto g = spectral_gap(synthetic_spectrum(0, half));
  CHECK(g.lambda0 == 0.5);
  CHECK(g.ratio == 1.0);
  CHECK_THROWS_AS(spectral_gap(synthetic_spectrum(0, Eigen::VectorXd::Ones(1))), ArgumentError);
}

TEST_CASE("phase_vs_size recovers a linear phase and masks empty sectors") {
  const double c = 0.9;
  SizeDistributions sd;
  for (int l = 0; l <= 12; ++l) {
    const double p = std::exp(-0.3 * l) + 0.01;
    sd.p.push_back(p);
    sd.q.push_back(std::polar(p, c * l));
  }
  sd.p.push_back(0.0);
  sd.q.push_back(0.0);
  const auto rows = phase_vs_size(sd);
  REQUIRE(rows.size() == 14);
  for (int l = 0; l <= 12; ++l) {
    CHECK_FALSE(rows[l].masked);
    CHECK(std::abs(rows[l].phase - c * l) < 1e-12);
  }
  CHECK(rows[13].masked);

  SizeDistributions real;
  real.p = {1.0, 2.0, 0.5};
  real.q = {1.0, -2.0, 0.5};
  const auto rr = phase_vs_size(real);
  for (const auto& r : rr) {
    const double m = std::remainder(r.phase, 2 * kPi);
    CHECK((std::abs(m) < 1e-15 || std::abs(std::abs(m) - kPi) < 1e-15));
  }
}

TEST_CASE("unwrap_phases removes 2 pi jumps") {
  std::vector<double> wrapped;
  for (int k = 0; k < 40; ++k) wrapped.push_back(std::remainder(0.7 * k, 2 * kPi));
  const auto u = unwrap_phases(wrapped);
  for (int k = 0; k < 40; ++k) CHECK(std::abs(u[k] - 0.7 * k) < 1e-12);
}

TEST_CASE("find_peak bridges non-finite points and rejects mostly failed input") {
  const auto mu = uniform_mu_grid(1024);
  std::vector<cplx> lor;
  for (double m : mu) lor.push_back(1.0 / cplx(m - 0.7, 0.2));
  const auto clean = find_peak(lor, mu);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i : {3u, 100u, 900u, 1023u}) lor[i] = cplx(nan, nan);
  const auto pk = find_peak(lor, mu);
  CHECK(pk.mu_K == doctest::Approx(clean.mu_K).epsilon(1e-12));
  CHECK(std::abs(pk.width - clean.width) < 1e-4);

  std::vector<cplx> bad(16, cplx(nan, 0.0));
  bad[0] = bad[5] = 1.0;
  CHECK_THROWS_AS(find_peak(bad, uniform_mu_grid(16)), NumericError);
}
