#include "kwind/pauli.hpp"

#include <bit>
#include <cmath>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

cplx i_pow(int k) { return kIPow[((k % 4) + 4) % 4]; }

void check_sites(int n_sites) {
  if (n_sites < 1 || n_sites > 16) {
    throw ArgumentError("n_sites must be in [1, 16], got " + std::to_string(n_sites));
  }
}

// In-place unnormalized Walsh-Hadamard transform over the low n bits.
void walsh_hadamard(std::span<cplx> v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const cplx a = v[j];
        const cplx b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

int sites_from_dim(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw ArgumentError("operator dimension " + std::to_string(dim) + " is not a power of two");
  }
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

}  // namespace

PauliString::PauliString(int n_sites, std::uint32_t x_bits, std::uint32_t z_bits)
    : n_sites_(n_sites), x_(x_bits), z_(z_bits) {
  check_sites(n_sites);
  const std::uint32_t mask = (n_sites == 32) ? ~0u : ((1u << n_sites) - 1u);
  if ((x_bits & ~mask) || (z_bits & ~mask)) {
    throw ArgumentError("Pauli mask has bits beyond n_sites");
  }
}

PauliString PauliString::from_label(std::string_view label) {
  const int n = static_cast<int>(label.size());
  check_sites(n);
  std::uint32_t x = 0, z = 0;
  for (int k = 0; k < n; ++k) {
    switch (label[k]) {
      case 'I': break;
      case 'X': x |= 1u << k; break;
      case 'Z': z |= 1u << k; break;
      case 'Y': x |= 1u << k; z |= 1u << k; break;
      default: throw ArgumentError(std::string("invalid Pauli label character '") + label[k] + "'");
    }
  }
  return {n, x, z};
}

PauliString PauliString::from_code(int n_sites, std::size_t code) {
  check_sites(n_sites);
  const std::size_t mask = (std::size_t{1} << n_sites) - 1;
  if (code >> (2 * n_sites)) throw ArgumentError("Pauli code out of range");
  return {n_sites, static_cast<std::uint32_t>(code & mask),
          static_cast<std::uint32_t>((code >> n_sites) & mask)};
}

PauliString PauliString::single(int n_sites, int site, Pauli p) {
  check_sites(n_sites);
  if (site < 0 || site >= n_sites) throw ArgumentError("site index out of range");
  const auto bits = static_cast<std::uint32_t>(p);
  return {n_sites, (bits & 1u) << site, ((bits >> 1) & 1u) << site};
}

Pauli PauliString::at(int site) const {
  if (site < 0 || site >= n_sites_) throw ArgumentError("site index out of range");
  return static_cast<Pauli>(((x_ >> site) & 1u) | (((z_ >> site) & 1u) << 1));
}

std::string PauliString::label() const {
  static constexpr char kChars[4] = {'I', 'X', 'Z', 'Y'};
  std::string s(static_cast<std::size_t>(n_sites_), 'I');
  for (int k = 0; k < n_sites_; ++k) s[k] = kChars[static_cast<int>(at(k))];
  return s;
}

Eigen::MatrixXcd PauliString::matrix() const {
  const Eigen::Index d = Eigen::Index{1} << n_sites_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  const cplx ph = i_pow(std::popcount(x_ & z_));
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto ru = static_cast<std::uint32_t>(r);
    const double sign = (std::popcount(z_ & ru) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(ru ^ x_), r) = ph * sign;
  }
  return m;
}

PauliProduct pauli_multiply(const PauliString& p, const PauliString& q) {
  if (p.n_sites() != q.n_sites()) throw ArgumentError("Pauli strings have different sizes");
  const std::uint32_t x1 = p.x_bits(), z1 = p.z_bits();
  const std::uint32_t x2 = q.x_bits(), z2 = q.z_bits();
  const std::uint32_t x3 = x1 ^ x2, z3 = z1 ^ z2;
  const int k = std::popcount(x1 & z1) + std::popcount(x2 & z2) + 2 * std::popcount(z1 & x2) -
                std::popcount(x3 & z3);
  return {i_pow(k), PauliString(p.n_sites(), x3, z3)};
}

int string_size(const PauliString& p) { return std::popcount(p.x_bits() | p.z_bits()); }

int string_size(std::size_t code, int n_sites) {
  const std::size_t mask = (std::size_t{1} << n_sites) - 1;
  return std::popcount((code & mask) | ((code >> n_sites) & mask));
}

DenseOperator::DenseOperator(int n_sites) : n_sites_(n_sites) {
  check_sites(n_sites);
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  m_ = Eigen::MatrixXcd::Zero(d, d);
}

DenseOperator::DenseOperator(int n_sites, Eigen::MatrixXcd m) : n_sites_(n_sites), m_(std::move(m)) {
  check_sites(n_sites);
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  if (m_.rows() != d || m_.cols() != d) {
    throw ArgumentError("matrix shape does not match 2^n_sites");
  }
}

DenseOperator DenseOperator::from_matrix(Eigen::MatrixXcd m) {
  if (m.rows() != m.cols()) throw ArgumentError("operator matrix is not square");
  const int n = sites_from_dim(m.rows());
  return {n, std::move(m)};
}

DenseOperator DenseOperator::identity(int n_sites) {
  check_sites(n_sites);
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  return {n_sites, Eigen::MatrixXcd::Identity(d, d)};
}

bool DenseOperator::is_hermitian(double tol) const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

cplx inner(const DenseOperator& a, const DenseOperator& b) {
  if (a.n_sites() != b.n_sites()) throw ArgumentError("operators have different sizes");
  // Tr(A^dagger B) = sum_ij conj(A_ij) B_ij
  return a.matrix().conjugate().cwiseProduct(b.matrix()).sum() / static_cast<double>(a.dim());
}

double norm_sq(const DenseOperator& a) {
  return a.matrix().squaredNorm() / static_cast<double>(a.dim());
}

PauliCoefficients::PauliCoefficients(int n_sites) : n_sites_(n_sites) {
  check_sites(n_sites);
  c_.assign(std::size_t{1} << (2 * n_sites), cplx{});
}

PauliCoefficients::PauliCoefficients(int n_sites, std::vector<cplx> coeffs)
    : n_sites_(n_sites), c_(std::move(coeffs)) {
  check_sites(n_sites);
  if (c_.size() != (std::size_t{1} << (2 * n_sites))) {
    throw ArgumentError("coefficient array length is not 4^n_sites");
  }
}

double PauliCoefficients::norm_sq() const {
  double s = 0.0;
  for (const auto& c : c_) s += std::norm(c);
  return s;
}

PauliCoefficients decompose(const DenseOperator& a) {
  const int n = a.n_sites();
  if (n > kMaxSites) {
    throw ArgumentError("decompose supports at most " + std::to_string(kMaxSites) + " sites");
  }
  const std::size_t d = std::size_t{1} << n;
  const double inv_d = 1.0 / static_cast<double>(d);
  const auto& m = a.matrix();
  PauliCoefficients out(n);
  std::vector<cplx> v(d);
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t r = 0; r < d; ++r) {
      v[r] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r ^ x));
    }
    walsh_hadamard(v);
    for (std::size_t z = 0; z < d; ++z) {
      out.data()[x | (z << n)] = i_pow(std::popcount(x & z)) * v[z] * inv_d;
    }
  }
  return out;
}

PauliCoefficients decompose(const Eigen::MatrixXcd& a, int max_sites) {
  if (a.rows() != a.cols()) throw ArgumentError("operator matrix is not square");
  const int n = sites_from_dim(a.rows());
  if (n > max_sites) {
    throw ArgumentError("decompose limited to " + std::to_string(max_sites) + " sites, got " +
                        std::to_string(n));
  }
  return decompose(DenseOperator(n, a));
}

DenseOperator reconstruct(const PauliCoefficients& c) {
  const int n = c.n_sites();
  if (n > kMaxSites) {
    throw ArgumentError("reconstruct supports at most " + std::to_string(kMaxSites) + " sites");
  }
  const std::size_t d = std::size_t{1} << n;
  DenseOperator out(n);
  auto& m = out.matrix();
  std::vector<cplx> w(d);
  for (std::size_t x = 0; x < d; ++x) {
    for (std::size_t z = 0; z < d; ++z) {
      w[z] = c.data()[x | (z << n)] * i_pow(std::popcount(x & z));
    }
    walsh_hadamard(w);
    for (std::size_t r = 0; r < d; ++r) {
      m(static_cast<Eigen::Index>(r ^ x), static_cast<Eigen::Index>(r)) = w[r];
    }
  }
  return out;
}

PauliCoefficients project_size(const PauliCoefficients& c, int ell) {
  const int n = c.n_sites();
  if (ell < 0 || ell > n) throw ArgumentError("size must be in [0, n_sites]");
  PauliCoefficients out(n);
  for (std::size_t code = 0; code < c.size(); ++code) {
    if (string_size(code, n) == ell) out.data()[code] = c.data()[code];
  }
  return out;
}

}  // namespace kwind
