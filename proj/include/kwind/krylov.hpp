#pragma once

// Lanczos recursion on operator space and propagation of the Krylov
// wavefunction in complex time.
//
// Basis operators are kept in the Hermitian convention and stored in the
// energy eigenframe of H, where the Liouvillian is diagonal. Each Hermitian
// matrix is packed into D^2 real numbers (diagonal, sqrt(2) Re and sqrt(2) Im
// of the upper triangle) and scaled by 1/sqrt(D), so the Euclidean dot
// product of two packed vectors equals the normalized trace inner product.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kwind/pauli.hpp"
#include "kwind/spin_model.hpp"

namespace kwind {

enum class ReorthMode { full, none };

std::string to_string(ReorthMode m);
ReorthMode reorth_from_string(const std::string& s);

/// Memory budget in MB from KWIND_MEMORY_MB, default 2048.
double default_memory_budget_mb();

/// Bytes held by one stored basis vector for N sites.
std::size_t basis_vector_bytes(int n_sites);

/// min(512, budget / vector size).
int default_krylov_depth(int n_sites, double budget_mb);

struct LanczosOptions {
  int n_max = 512;
  double tol = 1e-8;
  ReorthMode reorth = ReorthMode::full;
  double memory_budget_mb = default_memory_budget_mb();
  bool keep_basis = true;
};

class KrylovData {
 public:
  int n_sites = 0;
  std::vector<double> b;  // b_1, b_2, ...
  bool terminated = false;
  ReorthMode reorth_mode = ReorthMode::full;
  int krylov_dim = 0;  // number of basis operators K
  double tol = 0.0;

  bool has_basis() const { return basis_.cols() > 0; }
  void discard_basis();

  /// Packed eigenframe vector of basis operator n (StateError if discarded).
  Eigen::Ref<const Eigen::VectorXd> packed(int n) const;
  const Eigen::MatrixXd& packed_basis() const;
  /// Basis operator n in the eigenframe.
  Eigen::MatrixXcd frame_operator(int n) const;
  /// Basis operator n in the computational basis.
  DenseOperator basis_operator(int n) const;
  const Eigen::MatrixXcd& frame() const { return frame_; }
  const Eigen::VectorXd& energies() const { return energies_; }

  /// (O_m | L O_n) in the Hermitian convention.
  cplx liouvillian_element(int m, int n) const;

  friend KrylovData lanczos(const ThermalSeed&, const SpectralHamiltonian&, const LanczosOptions&);

 private:
  Eigen::MatrixXd basis_;   // D^2 x K packed
  Eigen::MatrixXcd frame_;  // eigenvectors of H
  Eigen::VectorXd energies_;
};

/// Pack a Hermitian eigenframe matrix (upper triangle is read).
Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& a);
Eigen::MatrixXcd unpack_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Index dim);

/// Throws ArgumentError for a non-Hermitian seed and ResourceError when
/// n_max stored vectors would exceed the memory budget.
KrylovData lanczos(const ThermalSeed& seed, const SpectralHamiltonian& sh,
                   const LanczosOptions& opts = {});
KrylovData lanczos(const ThermalSeed& seed, const DenseOperator& h, const LanczosOptions& opts = {});

enum class AmplitudeConvention { unit_seed, raw };

struct KrylovAmplitudes {
  double t = 0.0;
  double beta = 0.0;
  std::vector<cplx> phi;
  double tail_weight = 0.0;
  double seed_norm_sq = 1.0;    // N of the thermal seed
  double target_norm_sq = 0.0;  // ||rho^{1/2} O(t)||^2 in the chosen convention
  AmplitudeConvention convention = AmplitudeConvention::unit_seed;
};

/// phi_n = (O_n | X) for X = rho^{1/2} O(t); unit_seed divides by sqrt(N) so
/// that phi matches e^{iL t_beta} applied to the unit seed.
KrylovAmplitudes overlap_amplitudes(const KrylovData& kd, const Eigen::MatrixXcd& evolved_frame,
                                    double t, double beta, double seed_norm_sq,
                                    AmplitudeConvention conv = AmplitudeConvention::unit_seed);
KrylovAmplitudes overlap_amplitudes(const KrylovData& kd, const DenseOperator& evolved, double t,
                                    double beta, double seed_norm_sq,
                                    AmplitudeConvention conv = AmplitudeConvention::unit_seed);

struct TridiagResult {
  std::vector<cplx> phi;
  bool truncation_warning = false;
  double boundary_amplitude = 0.0;
};

/// Column 0 of e^{iTz} for the tridiagonal T with off-diagonals b, rotated to
/// the Hermitian convention. The spectral data is computed once.
class TridiagPropagator {
 public:
  /// Uses b_1 .. b_{n_max-1}; b must hold at least n_max - 1 entries.
  TridiagPropagator(std::span<const double> b, int n_max, double warn_threshold = 1e-6);

  TridiagResult operator()(cplx z) const;
  int n_max() const { return n_max_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  /// True when the first-row weights came from the recurrence, false when
  /// full eigenvectors were needed.
  bool used_recurrence() const { return used_recurrence_; }

 private:
  int n_max_;
  double warn_threshold_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd u_;         // u(n, k): normalized eigenvector components
  Eigen::VectorXd log_u0_;    // log |u(0, k)|
  bool used_recurrence_ = true;
};

TridiagResult tridiag_propagate(std::span<const double> b, cplx z, int n_max,
                                double warn_threshold = 1e-6);

struct AlphaFit {
  double alpha;
  double intercept;
  double residual;  // ||b - fit|| / ||b|| over the window
};

/// Least squares b_n = alpha n + c for n in [n_lo, n_hi] (b[0] is b_1).
AlphaFit fit_alpha(std::span<const double> b, int n_lo, int n_hi);

nlohmann::json to_json(const KrylovData& kd);

/// Basis operators (computational basis) to a binary file: "KRYLBAS1",
/// uint64 n_sites, K, dim, then K row-major dim x dim complex matrices as
/// interleaved little-endian doubles.
void write_basis(const KrylovData& kd, const std::string& path);
std::vector<DenseOperator> read_basis(const std::string& path);

}  // namespace kwind
