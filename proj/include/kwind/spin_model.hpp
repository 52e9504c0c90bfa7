#pragma once

// Disordered all-to-all 2-local spin Hamiltonian, its spectral
// decomposition, thermal roots and exact Heisenberg evolution.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kwind/pauli.hpp"

namespace kwind {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

struct CouplingSet {
  int n_sites = 0;
  std::uint64_t seed = 0;
  double variance_scale = 0.0;
  /// J_ij^a for i < j in lexicographic pair order, a = x, y, z innermost.
  std::vector<double> couplings;

  static std::size_t pair_index(int n_sites, int i, int j);
  double J(int i, int j, Axis a) const;
  double& J(int i, int j, Axis a);
};

/// Default variance 1/(9N).
double default_variance(int n_sites);

/// Gaussian couplings, mean 0; variance_scale <= 0 selects the default.
CouplingSet sample_couplings(int n_sites, std::uint64_t seed, double variance_scale = 0.0);

/// All-zero coupling set, for hand-built Hamiltonians.
CouplingSet zero_couplings(int n_sites);

nlohmann::json to_json(const CouplingSet& c);
CouplingSet couplings_from_json(const nlohmann::json& j);

/// H = sum_{i<j} sum_a J_ij^a S_i^a S_j^a with S = sigma/2.
DenseOperator build_hamiltonian(const CouplingSet& c);

/// S^a on one site.
DenseOperator spin_operator(int n_sites, int site, Axis a);

struct SpectralHamiltonian {
  int n_sites = 0;
  double beta = 0.0;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd vectors;  // columns are eigenvectors

  Eigen::Index dim() const { return energies.size(); }
  /// Thermal weights e^{-beta E}/Z.
  Eigen::VectorXd boltzmann() const;
  DenseOperator reassemble() const;
};

/// Throws ArgumentError if h is not Hermitian to 1e-10 or beta < 0.
SpectralHamiltonian diagonalize(const DenseOperator& h, double beta);

/// rho^{1/4}.
DenseOperator thermal_root(const SpectralHamiltonian& sh);

struct ThermalSeed {
  DenseOperator o0;
  double norm_sq;  // (rho^{1/4} O rho^{1/4} | rho^{1/4} O rho^{1/4})
};

/// Throws DegenerateSeedError if the norm is below 1e-14.
ThermalSeed make_seed(const DenseOperator& o, const DenseOperator& rho4);

/// A in the eigenbasis, V^dagger A V.
Eigen::MatrixXcd to_eigenframe(const SpectralHamiltonian& sh, const DenseOperator& a);
DenseOperator from_eigenframe(const SpectralHamiltonian& sh, const Eigen::MatrixXcd& a);

/// e^{iHz} A e^{-iHz} for complex z, applied in the eigenframe.
Eigen::MatrixXcd evolve_in_frame(const SpectralHamiltonian& sh, const Eigen::MatrixXcd& a_frame,
                                 cplx z);

/// A(t) = e^{iHt} A e^{-iHt}.
DenseOperator heisenberg_evolve(const SpectralHamiltonian& sh, const DenseOperator& a, double t);

/// rho^{1/2} O(t) in the eigenframe, given O in the eigenframe.
Eigen::MatrixXcd thermal_evolved_frame(const SpectralHamiltonian& sh,
                                       const Eigen::MatrixXcd& o_frame, double t);

/// rho^{1/2} O(t).
DenseOperator thermal_evolved(const SpectralHamiltonian& sh, const DenseOperator& o, double t);

}  // namespace kwind
