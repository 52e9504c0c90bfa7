#include "kwind/spin_model.hpp"

#include <bit>
#include <cmath>

#include "kwind/errors.hpp"
#include "kwind/rng.hpp"

namespace kwind {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kSeedFloor = 1e-14;

std::size_t n_pairs(int n) { return static_cast<std::size_t>(n) * (n - 1) / 2; }

}  // namespace

std::size_t CouplingSet::pair_index(int n_sites, int i, int j) {
  if (i < 0 || j >= n_sites || i >= j) throw ArgumentError("coupling pair must satisfy 0 <= i < j < N");
  // pairs (0,1),(0,2),...,(0,N-1),(1,2),...
  const auto ii = static_cast<std::size_t>(i);
  return ii * (2 * static_cast<std::size_t>(n_sites) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

double CouplingSet::J(int i, int j, Axis a) const {
  return couplings.at(3 * pair_index(n_sites, i, j) + static_cast<std::size_t>(a));
}

double& CouplingSet::J(int i, int j, Axis a) {
  return couplings.at(3 * pair_index(n_sites, i, j) + static_cast<std::size_t>(a));
}

double default_variance(int n_sites) { return 1.0 / (9.0 * n_sites); }

CouplingSet sample_couplings(int n_sites, std::uint64_t seed, double variance_scale) {
  if (n_sites < 2) throw ArgumentError("sample_couplings needs n_sites >= 2");
  const double var = variance_scale > 0.0 ? variance_scale : default_variance(n_sites);
  const double sd = std::sqrt(var);
  const CounterRng rng(seed);
  CouplingSet c{n_sites, seed, var, std::vector<double>(3 * n_pairs(n_sites))};
  for (std::size_t k = 0; k < c.couplings.size(); ++k) c.couplings[k] = sd * rng.normal(k);
  return c;
}

CouplingSet zero_couplings(int n_sites) {
  if (n_sites < 2) throw ArgumentError("coupling sets need n_sites >= 2");
  return {n_sites, 0, default_variance(n_sites), std::vector<double>(3 * n_pairs(n_sites), 0.0)};
}

nlohmann::json to_json(const CouplingSet& c) {
  return {{"n_sites", c.n_sites},
          {"seed", c.seed},
          {"variance_scale", c.variance_scale},
          {"couplings", c.couplings}};
}

CouplingSet couplings_from_json(const nlohmann::json& j) {
  CouplingSet c;
  c.n_sites = j.at("n_sites").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.variance_scale = j.at("variance_scale").get<double>();
  c.couplings = j.at("couplings").get<std::vector<double>>();
  if (c.n_sites < 2 || c.couplings.size() != 3 * n_pairs(c.n_sites)) {
    throw ArgumentError("coupling record has wrong length for n_sites");
  }
  return c;
}

DenseOperator build_hamiltonian(const CouplingSet& c) {
  if (c.couplings.size() != 3 * n_pairs(c.n_sites)) throw ArgumentError("malformed coupling set");
  const int n = c.n_sites;
  const std::size_t d = std::size_t{1} << n;
  DenseOperator h(n);
  auto& m = h.matrix();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const std::uint32_t pair = (1u << i) | (1u << j);
      const double jx = 0.25 * c.J(i, j, Axis::X);
      const double jy = 0.25 * c.J(i, j, Axis::Y);
      const double jz = 0.25 * c.J(i, j, Axis::Z);
      for (std::size_t r = 0; r < d; ++r) {
        const auto ru = static_cast<std::uint32_t>(r);
        const bool same = ((ru >> i) & 1u) == ((ru >> j) & 1u);
        const auto col = static_cast<Eigen::Index>(r);
        // Z_i Z_j is diagonal; X_i X_j and Y_i Y_j flip both spins, Y Y picks up -1 when aligned.
        m(col, col) += same ? jz : -jz;
        m(static_cast<Eigen::Index>(ru ^ pair), col) += jx + (same ? -jy : jy);
      }
    }
  }
  return h;
}

DenseOperator spin_operator(int n_sites, int site, Axis a) {
  static constexpr Pauli kMap[3] = {Pauli::X, Pauli::Y, Pauli::Z};
  const auto p = PauliString::single(n_sites, site, kMap[static_cast<int>(a)]);
  return {n_sites, 0.5 * p.matrix()};
}

Eigen::VectorXd SpectralHamiltonian::boltzmann() const {
  Eigen::VectorXd w = (-beta * (energies.array() - energies.minCoeff())).exp();
  return w / w.sum();
}

DenseOperator SpectralHamiltonian::reassemble() const {
  return {n_sites, vectors * energies.cast<cplx>().asDiagonal() * vectors.adjoint()};
}

SpectralHamiltonian diagonalize(const DenseOperator& h, double beta) {
  if (beta < 0.0) throw ArgumentError("beta must be nonnegative");
  if (!h.is_hermitian(kHermitianTol * std::max(1.0, h.matrix().cwiseAbs().maxCoeff()))) {
    throw ArgumentError("diagonalize: matrix is not Hermitian");
  }
  SpectralHamiltonian sh;
  sh.n_sites = h.n_sites();
  sh.beta = beta;
  const auto& m = h.matrix();
  if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::MatrixXd re = m.real();
    re = 0.5 * (re + re.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re);
    sh.energies = es.eigenvalues();
    sh.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    sh.energies = es.eigenvalues();
    sh.vectors = es.eigenvectors();
  }
  return sh;
}

DenseOperator thermal_root(const SpectralHamiltonian& sh) {
  const Eigen::VectorXd w4 = sh.boltzmann().array().pow(0.25);
  return {sh.n_sites, sh.vectors * w4.cast<cplx>().asDiagonal() * sh.vectors.adjoint()};
}

ThermalSeed make_seed(const DenseOperator& o, const DenseOperator& rho4) {
  if (o.n_sites() != rho4.n_sites()) throw ArgumentError("make_seed: dimension mismatch");
  Eigen::MatrixXcd s = rho4.matrix() * o.matrix() * rho4.matrix();
  const double nsq = s.squaredNorm() / static_cast<double>(s.rows());
  if (!(nsq >= kSeedFloor)) throw DegenerateSeedError("thermal seed norm below 1e-14");
  s /= std::sqrt(nsq);
  return {DenseOperator(o.n_sites(), std::move(s)), nsq};
}

Eigen::MatrixXcd to_eigenframe(const SpectralHamiltonian& sh, const DenseOperator& a) {
  return sh.vectors.adjoint() * a.matrix() * sh.vectors;
}

DenseOperator from_eigenframe(const SpectralHamiltonian& sh, const Eigen::MatrixXcd& a) {
  return {sh.n_sites, sh.vectors * a * sh.vectors.adjoint()};
}

Eigen::MatrixXcd evolve_in_frame(const SpectralHamiltonian& sh, const Eigen::MatrixXcd& a_frame,
                                 cplx z) {
  const Eigen::Index d = sh.dim();
  const double e0 = sh.energies.minCoeff();
  const double e1 = sh.energies.maxCoeff();
  const double mid = 0.5 * (e0 + e1);
  // e^{i E_a z} e^{-i E_b z}; shifting by mid leaves the product unchanged
  Eigen::VectorXcd ph(d), phc(d);
  for (Eigen::Index a = 0; a < d; ++a) {
    ph[a] = std::exp(cplx(0, 1) * (sh.energies[a] - mid) * z);
    phc[a] = std::exp(-cplx(0, 1) * (sh.energies[a] - mid) * z);
  }
  return ph.asDiagonal() * a_frame * phc.asDiagonal();
}

DenseOperator heisenberg_evolve(const SpectralHamiltonian& sh, const DenseOperator& a, double t) {
  if (t == 0.0) return a;
  return from_eigenframe(sh, evolve_in_frame(sh, to_eigenframe(sh, a), t));
}

Eigen::MatrixXcd thermal_evolved_frame(const SpectralHamiltonian& sh,
                                       const Eigen::MatrixXcd& o_frame, double t) {
  const Eigen::VectorXcd sq = sh.boltzmann().array().sqrt().cast<cplx>();
  return sq.asDiagonal() * evolve_in_frame(sh, o_frame, t);
}

DenseOperator thermal_evolved(const SpectralHamiltonian& sh, const DenseOperator& o, double t) {
  return from_eigenframe(sh, thermal_evolved_frame(sh, to_eigenframe(sh, o), t));
}

}  // namespace kwind
