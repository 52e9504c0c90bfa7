#pragma once

// Pauli-string algebra on N qubits and the dense <-> Pauli-coefficient
// transforms used to measure operator size.
//
// Strings are stored in the symplectic convention: one x-bit and one z-bit
// per site, P(x, z) = i^{|x & z|} X^x Z^z, so that Y carries both bits.
// Site k corresponds to bit k of the masks and to bit k of the Hilbert-space
// basis index.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kwind {

using cplx = std::complex<double>;

/// Largest system handled by the dense 4^N coefficient arrays.
inline constexpr int kMaxSites = 10;

enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

class PauliString {
 public:
  PauliString(int n_sites, std::uint32_t x_bits, std::uint32_t z_bits);

  static PauliString identity(int n_sites) { return PauliString(n_sites, 0, 0); }
  /// Label such as "XIZ"; character k is site k.
  static PauliString from_label(std::string_view label);
  /// Inverse of code(): x bits in the low N bits, z bits above them.
  static PauliString from_code(int n_sites, std::size_t code);
  static PauliString single(int n_sites, int site, Pauli p);

  int n_sites() const { return n_sites_; }
  std::uint32_t x_bits() const { return x_; }
  std::uint32_t z_bits() const { return z_; }
  std::size_t code() const { return std::size_t{x_} | (std::size_t{z_} << n_sites_); }
  Pauli at(int site) const;
  std::string label() const;

  /// Dense 2^N x 2^N matrix.
  Eigen::MatrixXcd matrix() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  int n_sites_;
  std::uint32_t x_;
  std::uint32_t z_;
};

struct PauliProduct {
  cplx phase;  // one of +-1, +-i
  PauliString result;
};

/// phase * matrix(result) == matrix(p) * matrix(q).
PauliProduct pauli_multiply(const PauliString& p, const PauliString& q);

/// Number of non-identity sites.
int string_size(const PauliString& p);
int string_size(std::size_t code, int n_sites);

/// 2^N x 2^N complex matrix tagged with its site count.
class DenseOperator {
 public:
  explicit DenseOperator(int n_sites);
  DenseOperator(int n_sites, Eigen::MatrixXcd m);
  /// Infers N from the dimension; throws ArgumentError unless it is 2^N.
  static DenseOperator from_matrix(Eigen::MatrixXcd m);
  static DenseOperator identity(int n_sites);

  int n_sites() const { return n_sites_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::MatrixXcd& matrix() { return m_; }

  DenseOperator adjoint() const { return {n_sites_, m_.adjoint()}; }
  bool is_hermitian(double tol) const;

 private:
  int n_sites_;
  Eigen::MatrixXcd m_;
};

/// Normalized trace inner product (A|B) = Tr(A^dagger B) / 2^N.
cplx inner(const DenseOperator& a, const DenseOperator& b);
double norm_sq(const DenseOperator& a);

/// Dense array of Pauli amplitudes c_P indexed by PauliString::code().
class PauliCoefficients {
 public:
  explicit PauliCoefficients(int n_sites);
  PauliCoefficients(int n_sites, std::vector<cplx> coeffs);

  int n_sites() const { return n_sites_; }
  std::size_t size() const { return c_.size(); }
  cplx operator[](const PauliString& p) const { return c_[p.code()]; }
  cplx& operator[](const PauliString& p) { return c_[p.code()]; }
  cplx at(std::size_t code) const { return c_.at(code); }
  std::span<const cplx> data() const { return c_; }
  std::span<cplx> data() { return c_; }

  double norm_sq() const;

 private:
  int n_sites_;
  std::vector<cplx> c_;
};

/// c_P = Tr(P a) / 2^N for all 4^N strings, in Theta(N 4^N) operations.
PauliCoefficients decompose(const DenseOperator& a);
/// Same, from a raw matrix; throws ArgumentError for non power-of-two sizes
/// or N above max_sites.
PauliCoefficients decompose(const Eigen::MatrixXcd& a, int max_sites = kMaxSites);

/// Sum_P c_P P.
DenseOperator reconstruct(const PauliCoefficients& c);

/// Keep only the amplitudes of strings with exactly ell non-identity sites.
PauliCoefficients project_size(const PauliCoefficients& c, int ell);

}  // namespace kwind
