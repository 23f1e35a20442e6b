#pragma once

#include <functional>

#include "prft/jaynescummings.hpp"
#include "prft/model.hpp"
#include "prft/statistics.hpp"

namespace prft {

/// State on the extended photon-number lattice (offsets from round(nbar)),
/// matter index fastest. Amplitudes are kept in the photonic interaction
/// picture; the free phases e^{-i omega.n t} are reattached on export, so
/// |psi_n|^2 and the matter reduction are picture-independent.
struct SambeState {
  std::vector<int> lo;
  std::vector<int> extent;
  int dim = 0;
  Vector amplitudes;          // row-major over the window, matter fastest
  double time = 0.0;
  RealVector mode_frequencies;
  RealVector reference_mean;  // nbar the offsets refer to

  long sites() const;
  long site_index(const std::vector<int>& n) const;
  double norm() const { return amplitudes.norm(); }
  /// Mass on the outermost two shells of any mode (truncation monitor).
  double boundary_mass() const;
  /// Lab-frame amplitudes at a site (free phases reattached, up to the
  /// global phase from nbar).
  Vector lab_amplitudes(const std::vector<int>& n) const;
};

struct SambeOptions {
  int window = 0;            // per-mode halfwidth; 0 derives it from the rule
                             // ceil(12 sigma + 1.5 t drift_rate)
  double drift_rate = 0.5;   // max_mu |grad E| bound for the window rule
  double dt = 0.0;           // 0: 2.0 for static systems, period/64 otherwise
  int krylov_max = 48;
  double krylov_tol = 1e-12;
  double boundary_tol = 1e-8;
};

/// Evolves a_n (x) matter under the Sambe-space Hamiltonian (number-
/// independent hopping) with a Lanczos exponential propagator; norm is
/// conserved exactly by construction. Static systems step with the frozen
/// Hamiltonian; driven ones use a 4th-order commutator-free Magnus pair.
SambeState sambe_evolve(const DrivenSystem& sys,
                        const GaussianPhotonState& photons,
                        const Vector& matter_state, double t,
                        const SambeOptions& opts = SambeOptions{});

/// As above but sampling a callback at every grid time in `times`.
SambeState sambe_evolve_sampled(
    const DrivenSystem& sys, const GaussianPhotonState& photons,
    const Vector& matter_state, const RealVector& times,
    const SambeOptions& opts,
    const std::function<void(const SambeState&)>& sample);

/// Total MGF sum_n e^{-i chi.n} |psi_n|^2 (including the nbar phase).
Complex sambe_mgf(const SambeState& state, const RealVector& chi);

PhotonDistribution sambe_distribution(const SambeState& state);
PhotonDistribution sambe_marginal(const SambeState& state, int mode);
Matrix sambe_matter_density(const SambeState& state);

/// Moments by direct weighted sums m_l = sum p_n n_k^l, cumulants via the
/// triangle relations; the independent route against the MGF derivatives.
RealVector sambe_direct_cumulants(const SambeState& state, int mode,
                                  int max_order);

/// Interaction-picture propagator blocks U^int_m(t) of a one-mode system,
/// from evolving lattice basis columns at offset 0. Fourier sum
/// sum_m e^{-i m phi} U^int_m reproduces the semiclassical U_phi(t).
std::vector<Matrix> sambe_propagator_blocks(const DrivenSystem& sys,
                                            int window, double t,
                                            const SambeOptions& opts =
                                                SambeOptions{});

/// Genuine truncated-Fock two-mode Jaynes-Cummings evolution (true sqrt(n)
/// matrix elements), in the frame rotating at omega, where the Hamiltonian
/// is static. Offsets are stored relative to round(alpha_k^2).
struct FockJCOptions {
  int n_max = 0;  // 0: derived from alpha via alpha^2 + 8 alpha + 20
  double dt = 2.0;
  int krylov_max = 48;
  double krylov_tol = 1e-12;
  double shell_tol = 1e-8;
};

struct FockJCState {
  int n_max = 0;
  Vector amplitudes;  // (n1, n2) row-major, matter fastest
  double time = 0.0;
  RealVector alpha;
  double top_shell_mass() const;
  SambeState as_offset_state() const;  // view sharing the offset convention
};

FockJCState fock_jc_evolve(const JCParams& params, double g,
                           const RealVector& alpha,
                           const Vector& matter_state, double t,
                           const FockJCOptions& opts = FockJCOptions{});

FockJCState fock_jc_evolve_sampled(
    const JCParams& params, double g, const RealVector& alpha,
    const Vector& matter_state, const RealVector& times,
    const FockJCOptions& opts,
    const std::function<void(const FockJCState&)>& sample);

}  // namespace prft
