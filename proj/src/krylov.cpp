#include "kwind/krylov.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kRescale = 1e100;
const double kLogRescale = std::log(kRescale);

// Gather form of iL on packed vectors: w[p] = coef[p] * v[partner[p]].
struct PackedLiouvillian {
  std::vector<Eigen::Index> partner;
  Eigen::VectorXd coef;

  explicit PackedLiouvillian(const Eigen::VectorXd& e) {
    const Eigen::Index d = e.size();
    partner.resize(static_cast<std::size_t>(d * d));
    coef.setZero(d * d);
    for (Eigen::Index b = 0; b < d; ++b) {
      for (Eigen::Index a = 0; a < d; ++a) {
        const Eigen::Index p = a + b * d;
        if (a < b) {
          partner[p] = b + a * d;
          coef[p] = -(e[a] - e[b]);
        } else if (a > b) {
          // imaginary slot of upper entry (b, a)
          partner[p] = b + a * d;
          coef[p] = e[b] - e[a];
        } else {
          partner[p] = p;
        }
      }
    }
  }

  void apply(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> w) const {
    const Eigen::Index n = coef.size();
    for (Eigen::Index p = 0; p < n; ++p) w[p] = coef[p] * v[partner[static_cast<std::size_t>(p)]];
  }
};

double log_abs_sum_sq(const std::vector<double>& log_abs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : log_abs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : log_abs) s += std::exp(2.0 * (x - mx));
  return 2.0 * mx + std::log(s);
}

}  // namespace

std::string to_string(ReorthMode m) { return m == ReorthMode::full ? "full" : "none"; }

ReorthMode reorth_from_string(const std::string& s) {
  if (s == "full") return ReorthMode::full;
  if (s == "none") return ReorthMode::none;
  throw ArgumentError("reorth must be 'full' or 'none', got '" + s + "'");
}

double default_memory_budget_mb() {
  if (const char* env = std::getenv("KWIND_MEMORY_MB")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return 2048.0;
}

std::size_t basis_vector_bytes(int n_sites) {
  return (std::size_t{1} << (2 * n_sites)) * sizeof(double);
}

int default_krylov_depth(int n_sites, double budget_mb) {
  const double fit = budget_mb * 1024.0 * 1024.0 / static_cast<double>(basis_vector_bytes(n_sites));
  return static_cast<int>(std::clamp(std::floor(fit), 1.0, 512.0));
}

Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& a) {
  const Eigen::Index d = a.rows();
  Eigen::VectorXd v(d * d);
  for (Eigen::Index b = 0; b < d; ++b) {
    for (Eigen::Index r = 0; r <= b; ++r) {
      if (r == b) {
        v[r + b * d] = a(r, r).real();
      } else {
        v[r + b * d] = kSqrt2 * a(r, b).real();
        v[b + r * d] = kSqrt2 * a(r, b).imag();
      }
    }
  }
  return v;
}

Eigen::MatrixXcd unpack_hermitian(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Index d) {
  if (v.size() != d * d) throw ArgumentError("packed vector length does not match dimension");
  Eigen::MatrixXcd a(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    a(b, b) = v[b + b * d];
    for (Eigen::Index r = 0; r < b; ++r) {
      const cplx z(v[r + b * d] / kSqrt2, v[b + r * d] / kSqrt2);
      a(r, b) = z;
      a(b, r) = std::conj(z);
    }
  }
  return a;
}

void KrylovData::discard_basis() {
  basis_.resize(0, 0);
}

Eigen::Ref<const Eigen::VectorXd> KrylovData::packed(int n) const {
  if (!has_basis()) throw StateError("Krylov basis was discarded");
  if (n < 0 || n >= krylov_dim) throw ArgumentError("basis index out of range");
  return basis_.col(n);
}

const Eigen::MatrixXd& KrylovData::packed_basis() const {
  if (!has_basis()) throw StateError("Krylov basis was discarded");
  return basis_;
}

Eigen::MatrixXcd KrylovData::frame_operator(int n) const {
  const Eigen::Index d = energies_.size();
  return unpack_hermitian(packed(n), d) * std::sqrt(static_cast<double>(d));
}

DenseOperator KrylovData::basis_operator(int n) const {
  return {n_sites, frame_ * frame_operator(n) * frame_.adjoint()};
}

cplx KrylovData::liouvillian_element(int m, int n) const {
  const PackedLiouvillian lv(energies_);
  Eigen::VectorXd w(basis_.rows());
  lv.apply(packed(n), w);
  return cplx(0, -1) * packed(m).dot(w);
}

KrylovData lanczos(const ThermalSeed& seed, const SpectralHamiltonian& sh, const LanczosOptions& opts) {
  if (opts.n_max < 1) throw ArgumentError("n_max must be >= 1");
  if (!(opts.tol > 0.0)) throw ArgumentError("tol must be positive");
  if (seed.o0.n_sites() != sh.n_sites) throw ArgumentError("seed and Hamiltonian sizes differ");
  if (!seed.o0.is_hermitian(1e-10)) throw ArgumentError("Lanczos seed must be Hermitian");

  const double need_mb = static_cast<double>(opts.n_max) *
                         static_cast<double>(basis_vector_bytes(sh.n_sites)) / (1024.0 * 1024.0);
  if (need_mb > opts.memory_budget_mb) {
    throw ResourceError("Krylov basis needs " + std::to_string(need_mb) + " MB, budget is " +
                            std::to_string(opts.memory_budget_mb) + " MB",
                        need_mb, opts.memory_budget_mb);
  }

  const Eigen::Index d = sh.dim();
  const Eigen::Index len = d * d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  KrylovData kd;
  kd.n_sites = sh.n_sites;
  kd.reorth_mode = opts.reorth;
  kd.tol = opts.tol;
  kd.frame_ = sh.vectors;
  kd.energies_ = sh.energies;
  kd.basis_.resize(len, opts.n_max);

  const PackedLiouvillian lv(sh.energies);
  Eigen::VectorXd q0 = pack_hermitian(to_eigenframe(sh, seed.o0)) * inv_sqrt_d;
  q0 /= q0.norm();
  kd.basis_.col(0) = q0;
  int k = 1;

  const double spread = sh.energies.maxCoeff() - sh.energies.minCoeff();
  Eigen::VectorXd w(len);
  Eigen::VectorXd h;
  while (true) {
    const int n = k;  // computing b_n and O_n
    lv.apply(kd.basis_.col(n - 1), w);
    if (n >= 2) w += kd.b[n - 2] * kd.basis_.col(n - 2);
    if (opts.reorth == ReorthMode::full) {
      auto q = kd.basis_.leftCols(k);
      for (int pass = 0; pass < 2; ++pass) {
        h.noalias() = q.transpose() * w;
        w.noalias() -= q * h;
      }
    }
    const double bn = w.norm();
    const double thresh = n == 1 ? opts.tol * spread : opts.tol * kd.b[0];
    if (!(bn > thresh)) {
      kd.terminated = true;
      break;
    }
    kd.b.push_back(bn);
    if (k == opts.n_max) break;
    kd.basis_.col(k) = w / bn;
    ++k;
  }
  kd.krylov_dim = k;
  if (opts.keep_basis) {
    if (k < opts.n_max) kd.basis_.conservativeResize(Eigen::NoChange, k);
  } else {
    kd.discard_basis();
  }
  return kd;
}

KrylovData lanczos(const ThermalSeed& seed, const DenseOperator& h, const LanczosOptions& opts) {
  return lanczos(seed, diagonalize(h, 0.0), opts);
}

KrylovAmplitudes overlap_amplitudes(const KrylovData& kd, const Eigen::MatrixXcd& x, double t,
                                    double beta, double seed_norm_sq, AmplitudeConvention conv) {
  const auto& q = kd.packed_basis();
  const Eigen::Index d = kd.energies().size();
  if (x.rows() != d || x.cols() != d) throw ArgumentError("evolved operator dimension mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  // X = A + iB with A, B Hermitian
  const Eigen::MatrixXcd xa = x.adjoint();
  const Eigen::VectorXd pa = pack_hermitian(0.5 * (x + xa)) * inv_sqrt_d;
  const Eigen::VectorXd pb = pack_hermitian(cplx(0, -0.5) * (x - xa)) * inv_sqrt_d;
  const Eigen::VectorXd ra = q.transpose() * pa;
  const Eigen::VectorXd rb = q.transpose() * pb;

  KrylovAmplitudes out;
  out.t = t;
  out.beta = beta;
  out.seed_norm_sq = seed_norm_sq;
  out.convention = conv;
  const double scale = conv == AmplitudeConvention::unit_seed ? 1.0 / std::sqrt(seed_norm_sq) : 1.0;
  out.phi.resize(static_cast<std::size_t>(q.cols()));
  double sum = 0.0;
  for (Eigen::Index n = 0; n < q.cols(); ++n) {
    out.phi[n] = cplx(ra[n], rb[n]) * scale;
    sum += std::norm(out.phi[n]);
  }
  out.target_norm_sq = x.squaredNorm() / static_cast<double>(d) * scale * scale;
  out.tail_weight = out.target_norm_sq > 0.0 ? 1.0 - sum / out.target_norm_sq : 0.0;
  return out;
}

KrylovAmplitudes overlap_amplitudes(const KrylovData& kd, const DenseOperator& evolved, double t,
                                    double beta, double seed_norm_sq, AmplitudeConvention conv) {
  const Eigen::MatrixXcd xf = kd.frame().adjoint() * evolved.matrix() * kd.frame();
  return overlap_amplitudes(kd, xf, t, beta, seed_norm_sq, conv);
}

TridiagPropagator::TridiagPropagator(std::span<const double> b, int n_max, double warn_threshold)
    : n_max_(n_max), warn_threshold_(warn_threshold) {
  if (n_max < 1) throw ArgumentError("n_max must be >= 1");
  if (static_cast<int>(b.size()) < n_max - 1) {
    throw ArgumentError("tridiag_propagate needs at least n_max - 1 Lanczos coefficients");
  }
  const Eigen::Index m = n_max;
  if (m == 1) {
    lambda_ = Eigen::VectorXd::Zero(1);
    u_ = Eigen::MatrixXd::Ones(1, 1);
    log_u0_ = Eigen::VectorXd::Zero(1);
    return;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m - 1);
  for (Eigen::Index i = 0; i < m - 1; ++i) {
    if (!(b[i] > 0.0)) throw ArgumentError("Lanczos coefficients must be positive");
    sub[i] = b[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  lambda_ = es.eigenvalues();

  // Eigenvector components from the three-term recurrence with log scaling;
  // this keeps the tiny first-row weights of extreme eigenvalues accurate.
  Eigen::MatrixXd p(m, m);
  Eigen::MatrixXd scale(m, m);  // number of rescalings applied before row n
  log_u0_.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double lam = lambda_[k];
    double prev = 0.0, cur = 1.0;
    int rescales = 0;
    p(0, k) = 1.0;
    scale(0, k) = 0;
    for (Eigen::Index n = 0; n + 1 < m; ++n) {
      double next = (lam * cur - (n > 0 ? sub[n - 1] * prev : 0.0)) / sub[n];
      prev = cur;
      cur = next;
      if (std::abs(cur) > kRescale) {
        cur /= kRescale;
        prev /= kRescale;
        ++rescales;
      }
      p(n + 1, k) = cur;
      scale(n + 1, k) = rescales;
    }
    // stored rows carry the rescale count at the time they were written; a
    // later rescale does not touch earlier rows
    std::vector<double> log_abs(static_cast<std::size_t>(m));
    for (Eigen::Index n = 0; n < m; ++n) {
      log_abs[n] = std::log(std::abs(p(n, k))) + scale(n, k) * kLogRescale;
    }
    const double log_norm = 0.5 * log_abs_sum_sq(log_abs);
    log_u0_[k] = -log_norm;
    for (Eigen::Index n = 0; n < m; ++n) {
      const double la = log_abs[n] - log_norm;
      p(n, k) = la < -745.0 ? 0.0 : std::copysign(std::exp(la), p(n, k));
    }
  }
  double w0 = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) w0 += std::exp(2.0 * log_u0_[k]);
  if (std::abs(w0 - 1.0) < 1e-8 && p.allFinite()) {
    u_ = std::move(p);
    return;
  }
  used_recurrence_ = false;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  lambda_ = es.eigenvalues();
  u_ = es.eigenvectors();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (u_(0, k) < 0) u_.col(k) *= -1.0;
    log_u0_[k] = std::log(std::max(u_(0, k), std::numeric_limits<double>::min()));
  }
}

TridiagResult TridiagPropagator::operator()(cplx z) const {
  const Eigen::Index m = n_max_;
  // c_k = u_0k e^{i lambda_k z}, combined in log space before the product
  Eigen::VectorXd logc(m);
  for (Eigen::Index k = 0; k < m; ++k) logc[k] = log_u0_[k] - lambda_[k] * z.imag();
  const double cmax = logc.maxCoeff();
  Eigen::VectorXcd c(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double mag = std::exp(logc[k] - cmax);
    const double ph = lambda_[k] * z.real();
    c[k] = cplx(mag * std::cos(ph), mag * std::sin(ph));
  }
  const Eigen::VectorXd re = u_ * c.real();
  const Eigen::VectorXd im = u_ * c.imag();
  const double big = std::exp(cmax);
  static constexpr cplx kRot[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  TridiagResult out;
  out.phi.resize(static_cast<std::size_t>(m));
  for (Eigen::Index n = 0; n < m; ++n) out.phi[n] = kRot[n % 4] * cplx(re[n], im[n]) * big;
  out.boundary_amplitude = std::abs(out.phi.back());
  out.truncation_warning = m > 1 && out.boundary_amplitude > warn_threshold_;
  return out;
}

TridiagResult tridiag_propagate(std::span<const double> b, cplx z, int n_max, double warn_threshold) {
  return TridiagPropagator(b, n_max, warn_threshold)(z);
}

AlphaFit fit_alpha(std::span<const double> b, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi > static_cast<int>(b.size()) || n_hi - n_lo + 1 < 3) {
    throw ArgumentError("fit window must lie inside b and hold at least 3 points");
  }
  const int m = n_hi - n_lo + 1;
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = n_lo + i;
    a(i, 1) = 1.0;
    y[i] = b[n_lo + i - 1];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
  const double ynorm = y.norm();
  const double res = (a * coef - y).norm();
  return {coef[0], coef[1], ynorm > 0.0 ? res / ynorm : res};
}

nlohmann::json to_json(const KrylovData& kd) {
  return {{"n_sites", kd.n_sites},
          {"krylov_dim", kd.krylov_dim},
          {"terminated", kd.terminated},
          {"reorth", to_string(kd.reorth_mode)},
          {"tol", kd.tol},
          {"b", kd.b}};
}

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ArgumentError("truncated Krylov basis file");
  return v;
}

}  // namespace

void write_basis(const KrylovData& kd, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open " + path + " for writing");
  os.write("KRYLBAS1", 8);
  const std::uint64_t dim = std::uint64_t{1} << kd.n_sites;
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(kd.n_sites));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(kd.krylov_dim));
  put_le<std::uint64_t>(os, dim);
  for (int n = 0; n < kd.krylov_dim; ++n) {
    const auto op = kd.basis_operator(n);
    for (Eigen::Index r = 0; r < op.dim(); ++r) {
      for (Eigen::Index c = 0; c < op.dim(); ++c) {
        put_le<double>(os, op.matrix()(r, c).real());
        put_le<double>(os, op.matrix()(r, c).imag());
      }
    }
  }
}

std::vector<DenseOperator> read_basis(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "KRYLBAS1", 8) != 0) throw ArgumentError("bad Krylov basis header");
  const auto n_sites = static_cast<int>(get_le<std::uint64_t>(is));
  const auto k = get_le<std::uint64_t>(is);
  const auto dim = static_cast<Eigen::Index>(get_le<std::uint64_t>(is));
  if (dim != (Eigen::Index{1} << n_sites)) throw ArgumentError("basis file dimension mismatch");
  std::vector<DenseOperator> out;
  out.reserve(k);
  for (std::uint64_t n = 0; n < k; ++n) {
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        const double re = get_le<double>(is);
        const double im = get_le<double>(is);
        m(r, c) = cplx(re, im);
      }
    }
    out.emplace_back(n_sites, std::move(m));
  }
  return out;
}

}  // namespace kwind
