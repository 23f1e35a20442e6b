#pragma once

#include <optional>
#include <vector>

#include "prft/types.hpp"

namespace prft {

/// How a drive mode couples to the matter system.
///
/// Cosine:   amplitude * V * cos(omega t - phi)  with Hermitian V.
/// Rotating: (amplitude/2) * [C e^{-i(omega t - phi)} + C^dag e^{+i(omega t - phi)}],
///           the excitation-conserving (single-sideband) coupling; C need not
///           be Hermitian. omega = 0 describes the drive in its co-rotating
///           frame, where the Hamiltonian is static but still phase-dressed.
enum class DriveKind { Cosine, Rotating };

struct DriveMode {
  double frequency = 0.0;  // rad / time, >= 0
  double amplitude = 0.0;  // energy units, >= 0 (Omega_k = 2 g alpha_k)
  double phase = 0.0;      // mean phase, stored wrapped to [-pi, pi)
  DriveKind kind = DriveKind::Cosine;
  Matrix coupling;         // matter-space coupling operator
};

/// Smallest tau > 0 with omega_k tau in 2*pi*Z for every nonzero frequency.
/// Throws SpecError when the frequencies are not commensurate within 1e-9
/// relative tolerance, or when every frequency is zero.
double commensurate_period(const std::vector<DriveMode>& modes);

/// Matter Hamiltonian plus classical drive modes. Immutable after
/// construction; all member functions are pure.
class DrivenSystem {
 public:
  /// `reference_period` is required when all mode frequencies vanish (static
  /// rotating-frame systems have no intrinsic period); otherwise it is
  /// ignored and the commensurate period is derived from the mode list.
  DrivenSystem(Matrix matter_hamiltonian, std::vector<DriveMode> modes,
               std::optional<double> reference_period = std::nullopt);

  const Matrix& matter_hamiltonian() const { return matter_hamiltonian_; }
  const std::vector<DriveMode>& modes() const { return modes_; }
  int dim() const { return static_cast<int>(matter_hamiltonian_.rows()); }
  int n_modes() const { return static_cast<int>(modes_.size()); }
  double period() const { return period_; }

  /// True when every drive frequency is zero, i.e. H(phi, t) = H(phi).
  bool time_independent() const { return time_independent_; }

  /// H(phi, t) = H_M + sum_k drive_k(phi_k, t). `phases` is the full phase
  /// vector (the stored mode phases are the nominal means, exposed via
  /// mean_phases(), not added implicitly). Hermitian by construction.
  Matrix hamiltonian(const RealVector& phases, double t) const;

  /// Photon-flux operator j_k = dH/dphi_k, evaluated analytically.
  Matrix flux_operator(const RealVector& phases, double t, int k) const;

  /// Nominal mean phases phibar of the drive modes.
  RealVector mean_phases() const;

 private:
  Matrix matter_hamiltonian_;
  std::vector<DriveMode> modes_;
  double period_;
  bool time_independent_;
};

/// Gaussian photonic initial state in the standard-deviation convention:
/// the amplitude lattice is a_n ~ exp(-1/4 (n - nbar) Sigma^{-2} (n - nbar))
/// so Sigma^2 is the covariance of |a_n|^2.
class GaussianPhotonState {
 public:
  GaussianPhotonState(RealVector mean_photons, RealMatrix sigma,
                      RealVector mean_phases);

  /// Coherent-state preset: Sigma = diag(sqrt(nbar)).
  static GaussianPhotonState coherent(const RealVector& mean_photons,
                                      const RealVector& mean_phases);

  const RealVector& mean_photons() const { return mean_photons_; }
  const RealMatrix& sigma() const { return sigma_; }
  const RealVector& mean_phases() const { return mean_phases_; }
  int n_modes() const { return static_cast<int>(mean_photons_.size()); }

  /// Sigma^2 (enters every exponent).
  const RealMatrix& sigma_sq() const { return sigma_sq_; }
  const RealMatrix& sigma_sq_inverse() const { return sigma_sq_inv_; }

  /// Lattice amplitude a_n at integer offsets n - round(nbar) from the mean,
  /// up to the global phase exp(i phibar . nbar).
  Complex amplitude(const RealVector& offsets) const;

  /// Continuum phase amplitude a_phi in the large-Sigma limit; exact up to
  /// exp(-sigma^2 pi^2) wrap-around corrections. Not 2*pi periodic.
  Complex phase_amplitude(const RealVector& phases) const;

 private:
  RealVector mean_photons_;
  RealMatrix sigma_;
  RealVector mean_phases_;
  RealMatrix sigma_sq_;
  RealMatrix sigma_sq_inv_;
  double log_norm_;  // log of the a_n normalization constant
};

}  // namespace prft
