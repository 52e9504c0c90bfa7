#pragma once

// Coherence diagnostics: size and winding distributions, Fourier peaks of
// C_K and C_S, and the size-resolved Krylov overlap matrices M(l).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kwind/krylov.hpp"
#include "kwind/pauli.hpp"

namespace kwind {

struct SizeDistributions {
  double t = 0.0;
  std::vector<double> p;  // sum_{|P|=l} |c_P|^2, l = 0..N
  std::vector<cplx> q;    // sum_{|P|=l} c_P^2
};

SizeDistributions size_distributions(const PauliCoefficients& c, double t = 0.0);

/// Uniform grid over [-pi, pi).
std::vector<double> uniform_mu_grid(int points = 1024);

struct PeakLocation {
  double mu_K = 0.0;
  double width = 0.0;  // half width at half maximum of |value|^2
  double peak_magnitude = 0.0;
  bool flat = false;
};

/// Periodic argmax of |values| with 3-point quadratic refinement; width by
/// linear interpolation of |values|^2. Flat input gives mu_K = 0, width = pi.
PeakLocation find_peak(std::span<const cplx> values, std::span<const double> mu_grid);

struct FourierPeak {
  std::vector<double> mu_grid;
  std::vector<cplx> values;
  double mu_K = 0.0;
  double width = 0.0;
  double peak_magnitude = 0.0;
  bool flat = false;
  double raw_norm_sq = 0.0;  // sum |phi_n|^2 or sum p(l) before any rescaling
};

FourierPeak make_peak(std::vector<double> mu_grid, std::vector<cplx> values);

enum class CKNormalization { unit_norm, raw };

/// C_K(mu) = sum_n phi_n^2 e^{i mu n}; unit_norm first rescales sum |phi_n|^2 to 1.
FourierPeak fourier_CK(std::span<const cplx> phi, std::span<const double> mu_grid,
                       CKNormalization norm = CKNormalization::unit_norm);

/// C_S(mu) = sum_l q(l) e^{i mu l}.
FourierPeak fourier_CS(const SizeDistributions& sd, std::span<const double> mu_grid);

struct OverlapSpectrum {
  int ell = 0;
  Eigen::MatrixXd m;             // M_nm(l)
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column nu is psi_nu
  double imag_residue = 0.0;     // largest discarded imaginary Pauli amplitude
};

/// M(l) for one sector.
OverlapSpectrum overlap_matrix(const KrylovData& kd, int ell);

/// M(l) for l = 0..N, decomposing each basis operator once when the
/// coefficient cache fits the memory budget.
std::vector<OverlapSpectrum> overlap_spectra(const KrylovData& kd,
                                             double memory_budget_mb = default_memory_budget_mb());

struct Reconstruction {
  SizeDistributions sd;
  double deficit = 0.0;  // target norm minus sum_l p(l)
};

Reconstruction eigen_reconstruct(const std::vector<OverlapSpectrum>& spectra,
                                 const KrylovAmplitudes& amps);

struct SpectralGap {
  double lambda0;
  double lambda1;
  double ratio;
};

SpectralGap spectral_gap(const OverlapSpectrum& spec);

struct PhaseRow {
  int ell;
  double phase;  // unwrapped Arg q(l)
  double abs_q;
  double p;
  bool masked;   // p below the floor; phase not meaningful
};

std::vector<PhaseRow> phase_vs_size(const SizeDistributions& sd, double floor = 1e-12);

/// Nearest-branch unwrapping of a phase sequence.
std::vector<double> unwrap_phases(std::span<const double> phases);

}  // namespace kwind
