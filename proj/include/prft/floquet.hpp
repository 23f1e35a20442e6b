#pragma once

#include <vector>

#include "prft/propagator.hpp"

namespace prft {

/// Floquet decomposition of U_phi(t) at fixed phases: quasienergies,
/// tau-periodic modes on a uniform grid over one period, expansion
/// coefficients of the matter initial state, and quasienergy phase-gradients.
struct FloquetDecomposition {
  double period = 0.0;
  RealVector phases;
  bool static_system = false;   // quasienergies are true eigenvalues, unfolded
  bool degenerate = false;      // monodromy eigenvalues closer than 1e-10

  RealVector quasienergies;     // ascending; folded to (-pi/tau, pi/tau]
                                // unless static_system
  RealVector time_grid;         // uniform over [0, tau]
  std::vector<Matrix> modes;    // modes[i] columns = u_mu(t_i)
  Vector coefficients;          // c_mu = <u_mu(0)|phi(0)>
  RealMatrix gradients;         // dim x N_D, filled by quasienergy_gradient

  /// Modes at arbitrary t (reduced mod tau). Static systems are exact; driven
  /// systems require t to live on the decomposition grid.
  Matrix modes_at(double t) const;
};

struct FloquetOptions {
  int points_per_period = 200;
  double degeneracy_tol = 1e-10;
  EvolveOptions evolve;
};

/// Eigendecomposition of the monodromy U_phi(tau). Static systems bypass the
/// monodromy and diagonalize H(phi) directly (exact, no zone folding).
/// Degenerate subspaces get the basis that diagonalizes the time-averaged
/// flux operator of mode 1.
FloquetDecomposition floquet_decompose(
    const DrivenSystem& sys, const RealVector& phases,
    const Vector& matter_initial_state,
    const FloquetOptions& opts = FloquetOptions{});

/// Hellmann-Feynman gradients: (grad E_mu)_k equals the period-averaged flux
/// expectation in the Floquet mode. Folding-independent. Throws on flagged
/// degeneracy (use the finite-difference path there).
RealMatrix quasienergy_gradient(const DrivenSystem& sys,
                                const RealVector& phases,
                                const FloquetDecomposition& decomp);

/// Central finite differences of E_mu(phi) with branch continuation by mode
/// overlap; cross-check for the Hellmann-Feynman route.
RealMatrix quasienergy_gradient_fd(const DrivenSystem& sys,
                                   const RealVector& phases,
                                   const FloquetDecomposition& decomp,
                                   double step = 1e-3,
                                   const FloquetOptions& opts =
                                       FloquetOptions{});

}  // namespace prft
