#pragma once

#include "prft/floquet.hpp"
#include "prft/statistics.hpp"

namespace prft {

/// Matter-space Kraus operators K_n conditioning on photon outcome n
/// (offsets relative to round(nbar)), on a rectangular lattice window.
struct KrausSet {
  std::vector<int> lo;
  std::vector<int> extent;
  std::vector<Matrix> ops;  // row-major over the window
  double time = 0.0;

  long size() const { return static_cast<long>(ops.size()); }
  long flat_index(const std::vector<int>& n) const;
  const Matrix& at(const std::vector<int>& n) const;

  Matrix completeness() const;          // sum_n K_n^dag K_n
  double completeness_defect() const;   // max |completeness - 1|

  /// Outcome probabilities tr[K_n rho K_n^dag] for a matter density matrix.
  PhotonDistribution outcome_distribution(const Matrix& rho) const;
};

struct KrausOptions {
  double halfwidth_sigmas = 8.0;       // phi window: phibar +- 8/sigma
  int samples_per_inverse_sigma = 16;  // >= 16 points per 1/sigma width
  bool approximate_propagator = false; // linearized Floquet form of U_phi
  EvolveOptions evolve;
};

/// K_n = e^{-i omega.n t} (2 pi)^{-N/2} int dphi U_phi(t) a_phi e^{-i phi.n},
/// evaluated as a windowed discrete Fourier transform over a uniform phi
/// grid resolving a_phi. The prefactor is fixed by completeness
/// sum K^dag K = 1 rather than read off the printed constant.
/// With `approximate_propagator`, U_phi is replaced by its linearized
/// Floquet expansion around phibar; the exact and approximate channels can
/// then be compared directly.
KrausSet kraus_operators(const DrivenSystem& sys,
                         const GaussianPhotonState& state, double t,
                         const std::vector<int>& lo,
                         const std::vector<int>& extent,
                         const KrausOptions& opts = KrausOptions{});

/// Overlap sum_n sqrt(p(n - dn1) p(n - dn2)) of two shifted copies of the
/// initial distribution; fractional shifts interpolate linearly. Lies in
/// [0, 1], with exactly 1 at equal shifts.
double coherence_integral(const PhotonDistribution& initial,
                          const RealVector& dn1, const RealVector& dn2);

/// C_{mu nu} for all Floquet-state pairs at time t (shifts t grad E_mu).
RealMatrix coherence_matrix(const FloquetDecomposition& decomp,
                            const PhotonDistribution& initial, double t);

/// Same, but for diagonal-Sigma Gaussian states where the joint lattice
/// factorizes into per-mode marginals (keeps large fig-scale windows cheap).
RealMatrix coherence_matrix_gaussian(const FloquetDecomposition& decomp,
                                     const GaussianPhotonState& state,
                                     double t, double halfwidth_sigmas = 10.0);

/// Lattice Gaussian |a_n|^2 of the state over the given window; the initial
/// distribution entering the coherence integrals.
PhotonDistribution gaussian_lattice_distribution(
    const GaussianPhotonState& state, const std::vector<int>& lo,
    const std::vector<int>& extent);

/// Semiclassical reduced matter state
/// rho = sum_{mu nu} C_{mu nu} c_mu c_nu^* |u_mu(t)><u_nu(t)|
///       e^{i (E_nu - E_mu) t}.
Matrix reduced_density_semiclassical(const FloquetDecomposition& decomp,
                                     const RealMatrix& coherence, double t);

/// tr[rho O] for Hermitian O; the imaginary residue is checked, not dropped
/// silently.
double observable_expectation(const Matrix& rho, const Matrix& observable);

/// Density-matrix validity defects (Hermiticity, trace, negativity).
struct DensityMatrixChecks {
  double hermiticity = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;
};
DensityMatrixChecks check_density_matrix(const Matrix& rho);

}  // namespace prft
