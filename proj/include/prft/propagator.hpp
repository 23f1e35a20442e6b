#pragma once

#include <vector>

#include "prft/model.hpp"

namespace prft {

/// Time-ordered propagators U_phi(t_i) of the semiclassical Hamiltonian on a
/// grid, all referenced to t = 0.
struct Propagator {
  RealVector time_grid;            // strictly increasing, starts at 0
  std::vector<Matrix> unitaries;   // U(t_i); unitaries[0] = identity
  RealVector phases;

  double max_unitarity_defect() const;
};

struct EvolveOptions {
  double tolerance = 1e-10;   // refinement target between step halvings
  double initial_dt = 0.0;    // 0: derived from the drive period
  int max_refinements = 12;
};

/// Solves i dU/dt = H_phi(t) U, U(0) = 1 with a 4th-order Magnus scheme whose
/// step exponentials are exact (Hermitian eigendecomposition), so every U is
/// unitary to solver precision. Static systems take the closed-form path
/// U(t) = exp(-i H t).
Propagator evolve(const DrivenSystem& sys, const RealVector& phases,
                  const RealVector& t_grid,
                  const EvolveOptions& opts = EvolveOptions{});

/// Single-time convenience wrapper.
Matrix propagate_to(const DrivenSystem& sys, const RealVector& phases,
                    double t, const EvolveOptions& opts = EvolveOptions{});

/// One 4th-order Magnus step exp(Omega) for i dU/dt = H(t) U over
/// [t, t + dt], with H supplied at the two Gauss-Legendre nodes.
Matrix magnus_step(const Matrix& h1, const Matrix& h2, double dt);

}  // namespace prft
