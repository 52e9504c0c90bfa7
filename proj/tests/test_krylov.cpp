#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "kwind/analytic.hpp"
#include "kwind/errors.hpp"
#include "kwind/krylov.hpp"
#include "test_util.hpp"

using namespace kwind;

namespace {

Eigen::MatrixXcd pauli(const char* label) { return PauliString::from_label(label).matrix(); }

struct Chain {
  SpectralHamiltonian sh;
  DenseOperator op;
  ThermalSeed seed;
};

Chain spin_chain(int n, double beta, std::uint64_t s) {
  auto sh = diagonalize(build_hamiltonian(sample_couplings(n, s)), beta);
  auto op = spin_operator(n, 0, Axis::X);
  auto seed = make_seed(op, thermal_root(sh));
  return {std::move(sh), std::move(op), std::move(seed)};
}

}  // namespace

TEST_CASE("single qubit Lanczos: b = [2], basis {X, -Y}") {
  const auto h = DenseOperator::from_matrix(pauli("Z"));
  const auto sh = diagonalize(h, 0.0);
  const auto seed = make_seed(DenseOperator::from_matrix(pauli("X")), thermal_root(sh));
  const auto kd = lanczos(seed, h);
  REQUIRE(kd.b.size() == 1);
  CHECK(kd.b[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(kd.krylov_dim == 2);
  CHECK(kd.terminated);
  CHECK(max_abs(kd.basis_operator(0).matrix() - pauli("X")) < 1e-14);
  CHECK(max_abs(kd.basis_operator(1).matrix() + pauli("Y")) < 1e-14);
}

TEST_CASE("seed commuting with H terminates at K = 1") {
  const auto h = DenseOperator::from_matrix(pauli("ZI") + 0.3 * pauli("IZ"));
  const auto sh = diagonalize(h, 0.5);
  const auto seed = make_seed(DenseOperator::from_matrix(pauli("ZZ")), thermal_root(sh));
  const auto kd = lanczos(seed, sh);
  CHECK(kd.b.empty());
  CHECK(kd.krylov_dim == 1);
  CHECK(kd.terminated);
}

TEST_CASE("Lanczos basis is orthonormal, Hermitian and tridiagonalizes L") {
  const auto c = spin_chain(4, 1.0, 3);
  LanczosOptions o;
  o.n_max = 60;
  const auto kd = lanczos(c.seed, c.sh, o);
  const Eigen::MatrixXd& q = kd.packed_basis();
  const Eigen::MatrixXd gram = q.transpose() * q;
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
  for (int n = 0; n < kd.krylov_dim; n += 7) {
    const auto b = kd.basis_operator(n);
    CHECK(b.is_hermitian(1e-12));
    CHECK(std::abs(norm_sq(b) - 1.0) < 1e-10);
  }
  for (int m = 0; m < kd.krylov_dim; m += 5) {
    for (int n = 0; n < kd.krylov_dim; n += 3) {
      const cplx l = kd.liouvillian_element(m, n);
      if (std::abs(m - n) >= 2) CHECK(std::abs(l) < 1e-8);
      if (m == n + 1) CHECK(std::abs(std::abs(l) - kd.b[n]) < 1e-10);
    }
  }
  for (double b : kd.b) CHECK(b > kd.tol);
}

TEST_CASE("Lanczos from the dense Hamiltonian equals the spectral path") {
  const auto c = spin_chain(3, 0.7, 2);
  LanczosOptions o;
  o.n_max = 20;
  const auto a = lanczos(c.seed, c.sh, o);
  const auto b = lanczos(c.seed, c.sh.reassemble(), o);
  REQUIRE(a.b.size() == b.b.size());
  for (std::size_t i = 0; i < a.b.size(); ++i) CHECK(std::abs(a.b[i] - b.b[i]) < 1e-10);
}

TEST_CASE("N = 6 spin model has linearly growing b_n at small n") {
  const auto c = spin_chain(6, 1.0, 1);
  LanczosOptions o;
  o.n_max = 12;
  const auto kd = lanczos(c.seed, c.sh, o);
  const auto fit = fit_alpha(kd.b, 2, 5);
  CHECK(fit.alpha > 0.0);
}

TEST_CASE("Lanczos argument and resource errors") {
  const auto c = spin_chain(3, 1.0, 1);
  LanczosOptions o;
  o.memory_budget_mb = 1e-4;
  CHECK_THROWS_AS(lanczos(c.seed, c.sh, o), ResourceError);
  ThermalSeed bad = c.seed;
  bad.o0.matrix()(0, 1) += cplx(0.0, 0.3);
  CHECK_THROWS_AS(lanczos(bad, c.sh), ArgumentError);
  LanczosOptions zero;
  zero.n_max = 0;
  CHECK_THROWS_AS(lanczos(c.seed, c.sh, zero), ArgumentError);
}

TEST_CASE("default Krylov depth follows the memory budget") {
  CHECK(basis_vector_bytes(8) == 65536u * 8u);
  CHECK(default_krylov_depth(8, 2048.0) == 512);
  CHECK(default_krylov_depth(8, 64.0) == 128);
}

TEST_CASE("overlap amplitudes: unit vector at t = 0, beta = 0 and one-qubit thermal values") {
  const auto c = spin_chain(3, 0.0, 4);
  const auto kd = lanczos(c.seed, c.sh);
  const auto a = overlap_amplitudes(kd, thermal_evolved(c.sh, c.op, 0.0), 0.0, 0.0, c.seed.norm_sq);
  CHECK(std::abs(a.phi[0] - 1.0) < 1e-12);
  for (std::size_t n = 1; n < a.phi.size(); ++n) CHECK(std::abs(a.phi[n]) < 1e-12);

  const double beta = 1.2;
  const auto sh = diagonalize(DenseOperator::from_matrix(pauli("Z")), beta);
  const auto x = DenseOperator::from_matrix(pauli("X"));
  const auto seed = make_seed(x, thermal_root(sh));
  const auto kd1 = lanczos(seed, sh);
  for (double t : {0.0, 0.4, 1.7}) {
    const cplx tb(t, beta / 4);
    const auto u = overlap_amplitudes(kd1, thermal_evolved(sh, x, t), t, beta, seed.norm_sq);
    CHECK(std::abs(u.phi[0] - std::cos(2.0 * tb)) < 1e-12);
    CHECK(std::abs(u.phi[1] - std::sin(2.0 * tb)) < 1e-12);
    const auto r = overlap_amplitudes(kd1, thermal_evolved(sh, x, t), t, beta, seed.norm_sq, AmplitudeConvention::raw);
    CHECK(std::abs(r.phi[0] - std::cos(2.0 * tb) * std::sqrt(seed.norm_sq)) < 1e-12);
    CHECK(std::abs(u.tail_weight) < 1e-12);
  }
}

TEST_CASE("tail weight shrinks as the Krylov depth grows") {
  const auto c = spin_chain(4, 1.0, 5);
  const double t = 3.0;
  const Eigen::MatrixXcd xf = thermal_evolved_frame(c.sh, to_eigenframe(c.sh, c.op), t);
  double prev = 2.0;
  for (int k : {2, 4, 8, 16, 32}) {
    LanczosOptions o;
    o.n_max = k;
    const auto kd = lanczos(c.seed, c.sh, o);
    const auto a = overlap_amplitudes(kd, xf, t, 1.0, c.seed.norm_sq);
    CHECK(a.tail_weight <= prev + 1e-14);
    prev = a.tail_weight;
  }
}

TEST_CASE("amplitude norm is time independent and captured by the basis") {
  const auto c = spin_chain(4, 1.0, 6);
  const auto kd = lanczos(c.seed, c.sh);
  const Eigen::MatrixXcd of = to_eigenframe(c.sh, c.op);
  double first = -1.0;
  for (int k = 0; k < 10; ++k) {
    const double t = 1.5 * k;
    const auto a = overlap_amplitudes(kd, thermal_evolved_frame(c.sh, of, t), t, 1.0, c.seed.norm_sq);
    double s = 0;
    for (const auto& v : a.phi) s += std::norm(v);
    if (first < 0) first = s;
    CHECK(std::abs(s - first) < 1e-10);
    CHECK(std::abs(a.tail_weight) < 1e-10);
  }
}

TEST_CASE("tridiag_propagate examples") {
  const std::vector<double> b{2.0};
  for (double t : {0.0, 0.3, 1.9}) {
    const auto r = tridiag_propagate(b, t, 2);
    CHECK(std::abs(r.phi[0] - std::cos(2 * t)) < 1e-14);
    CHECK(std::abs(r.phi[1] - std::sin(2 * t)) < 1e-14);
  }
  const auto sb = solvable_b(199, 1.0, 0.5);
  const auto z0 = tridiag_propagate(sb, 0.0, 200);
  CHECK(std::abs(z0.phi[0] - 1.0) < 1e-12);
  for (std::size_t n = 1; n < z0.phi.size(); ++n) CHECK(std::abs(z0.phi[n]) < 1e-12);
  const auto real_t = tridiag_propagate(sb, 1.5, 200);
  double s = 0;
  for (const auto& v : real_t.phi) s += std::norm(v);
  CHECK(std::abs(s - 1.0) < 1e-10);
  CHECK_FALSE(real_t.truncation_warning);
  const auto far = tridiag_propagate(sb, 6.0, 200);
  CHECK(far.truncation_warning);
  CHECK_THROWS_AS(tridiag_propagate(sb, 1.0, 400), ArgumentError);
}

TEST_CASE("tridiagonal path matches exact overlaps at N = 4") {
  const auto c = spin_chain(4, 1.0, 2);
  const auto kd = lanczos(c.seed, c.sh, LanczosOptions{.n_max = 256});
  const TridiagPropagator prop(kd.b, kd.krylov_dim);
  const Eigen::MatrixXcd of = to_eigenframe(c.sh, c.op);
  std::vector<double> b(kd.b.begin(), kd.b.end());
  const double alpha = fit_alpha(b, 2, 4).alpha;
  for (int k = 0; k <= 8; ++k) {
    const double t = 2.0 / alpha * k / 8.0;
    const auto exact = overlap_amplitudes(kd, thermal_evolved_frame(c.sh, of, t), t, 1.0, c.seed.norm_sq);
    const auto tri = prop(cplx(t, 0.25));
    for (int n = 0; n < kd.krylov_dim; ++n) CHECK(std::abs(exact.phi[n] - tri.phi[n]) < 1e-6);
  }
}

TEST_CASE("fit_alpha examples") {
  std::vector<double> lin;
  for (int n = 1; n <= 20; ++n) lin.push_back(2.0 * n);
  const auto f = fit_alpha(lin, 1, 20);
  CHECK(f.alpha == doctest::Approx(2.0));
  CHECK(f.residual < 1e-14);
  std::vector<double> asym;
  const double a = std::numbers::pi / 2;
  for (int n = 1; n <= 60; ++n) asym.push_back(a * std::sqrt(n * (n - 1.0)));
  CHECK(std::abs(fit_alpha(asym, 10, 50).alpha / a - 1.0) < 0.01);
  const auto rp = ramp_plateau_coefficients(40, RampPlateauParams::make(1.0, 10, 1.0));
  CHECK(std::abs(fit_alpha(rp, 15, 40).alpha) < 1e-12);
  CHECK_THROWS_AS(fit_alpha(lin, 5, 6), ArgumentError);
  CHECK_THROWS_AS(fit_alpha(lin, 10, 30), ArgumentError);
}

TEST_CASE("KrylovData serialization") {
  const auto c = spin_chain(2, 0.5, 1);
  const auto kd = lanczos(c.seed, c.sh);
  const auto j = to_json(kd);
  CHECK(j["b"].size() == kd.b.size());
  const auto path = (std::filesystem::temp_directory_path() / "kwind_basis_test.bin").string();
  write_basis(kd, path);
  const auto back = read_basis(path);
  REQUIRE(static_cast<int>(back.size()) == kd.krylov_dim);
  for (int n = 0; n < kd.krylov_dim; ++n) CHECK(max_abs(back[n].matrix() - kd.basis_operator(n).matrix()) == 0.0);
  std::filesystem::remove(path);
  auto copy = kd;
  copy.discard_basis();
  CHECK_THROWS_AS(copy.packed(0), StateError);
}
