#include "prft/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prft {

namespace {

double fold_to_zone(double e, double zone) {
  // zone = 2 pi / tau; fold to (-zone/2, zone/2]
  double f = std::remainder(e, zone);
  if (f <= -0.5 * zone) f += zone;
  return f;
}

}  // namespace

Matrix FloquetDecomposition::modes_at(double t) const {
  if (static_system) return modes.front();
  double tr = std::fmod(t, period);
  if (tr < 0.0) tr += period;
  const double dt = time_grid[1] - time_grid[0];
  const double fidx = tr / dt;
  const Eigen::Index i = static_cast<Eigen::Index>(std::llround(fidx));
  if (std::abs(fidx - static_cast<double>(i)) > 1e-6)
    throw SpecError("modes_at: time not on the decomposition grid");
  return modes[std::min<Eigen::Index>(i, time_grid.size() - 1)];
}

FloquetDecomposition floquet_decompose(const DrivenSystem& sys,
                                       const RealVector& phases,
                                       const Vector& matter_initial_state,
                                       const FloquetOptions& opts) {
  if (matter_initial_state.size() != sys.dim())
    throw SpecError("floquet_decompose: state dimension mismatch");
  const int dim = sys.dim();
  const double tau = sys.period();
  const int np = opts.points_per_period;
  RealVector grid(np + 1);
  for (int i = 0; i <= np; ++i) grid[i] = tau * i / np;

  FloquetDecomposition dec;
  dec.period = tau;
  dec.phases = phases;
  dec.time_grid = grid;

  Matrix u0(dim, dim);          // columns u_mu(0)
  RealVector energies(dim);

  if (sys.time_independent()) {
    dec.static_system = true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sys.hamiltonian(phases, 0.0));
    if (es.info() != Eigen::Success)
      throw NumericsError("floquet_decompose: eigensolver failed");
    energies = es.eigenvalues();
    u0 = es.eigenvectors();
    for (int i = 0; i + 1 < dim; ++i)
      if (std::abs(energies[i + 1] - energies[i]) < opts.degeneracy_tol)
        dec.degenerate = true;
    dec.quasienergies = energies;
    dec.modes.assign(grid.size(), u0);
  } else {
    Propagator prop = evolve(sys, phases, grid, opts.evolve);
    const Matrix& monodromy = prop.unitaries.back();
    // Unitary monodromy is normal, so its Schur form is diagonal and the
    // Schur basis is an orthonormal eigenbasis (also inside degenerate
    // clusters).
    Eigen::ComplexSchur<Matrix> schur(monodromy);
    if (schur.info() != Eigen::Success)
      throw NumericsError("floquet_decompose: Schur decomposition failed");
    Matrix q = schur.matrixU();
    Vector lambda = schur.matrixT().diagonal();

    const double zone = 2.0 * pi / tau;
    for (int i = 0; i < dim; ++i) {
      double e = -std::arg(lambda[i]) / tau;
      if (e <= -0.5 * zone) e += zone;
      if (e > 0.5 * zone) e -= zone;
      energies[i] = e;
    }

    // Degenerate clusters (by monodromy eigenvalue): rotate the basis to
    // diagonalize the averaged flux of mode 1, making gradients well-defined.
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return energies[a] < energies[b]; });
    Matrix qs(dim, dim);
    RealVector es(dim);
    for (int i = 0; i < dim; ++i) {
      qs.col(i) = q.col(order[i]);
      es[i] = energies[order[i]];
    }
    Vector ls(dim);
    for (int i = 0; i < dim; ++i) ls[i] = lambda[order[i]];

    Matrix jbar;
    for (int i = 0; i < dim;) {
      int j = i + 1;
      while (j < dim && std::abs(ls[j] - ls[i]) < opts.degeneracy_tol) ++j;
      if (j - i > 1) {
        dec.degenerate = true;
        if (jbar.size() == 0) {
          jbar = Matrix::Zero(dim, dim);
          const Eigen::Index nt = grid.size();
          for (Eigen::Index g = 0; g + 1 < nt; ++g)
            jbar += prop.unitaries[g].adjoint() *
                    sys.flux_operator(phases, grid[g], 0) *
                    prop.unitaries[g];
          jbar /= static_cast<double>(grid.size() - 1);
        }
        Matrix sub = qs.middleCols(i, j - i);
        Eigen::SelfAdjointEigenSolver<Matrix> tie(sub.adjoint() * jbar * sub);
        qs.middleCols(i, j - i) = sub * tie.eigenvectors();
      }
      i = j;
    }
    u0 = qs;
    energies = es;
    dec.quasienergies = energies;

    dec.modes.reserve(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      Matrix m(dim, dim);
      for (int mu = 0; mu < dim; ++mu)
        m.col(mu) = std::exp(Complex(0.0, energies[mu] * grid[g])) *
                    (prop.unitaries[g] * u0.col(mu));
      dec.modes.push_back(std::move(m));
    }
  }

  dec.coefficients = u0.adjoint() * matter_initial_state;
  dec.gradients = RealMatrix::Zero(dim, sys.n_modes());
  return dec;
}

RealMatrix quasienergy_gradient(const DrivenSystem& sys,
                                const RealVector& phases,
                                const FloquetDecomposition& decomp) {
  if (decomp.degenerate)
    throw NumericsError(
        "quasienergy_gradient: degenerate quasienergies; use the "
        "finite-difference path with eigenvector tracking");
  const int dim = sys.dim();
  RealMatrix grad = RealMatrix::Zero(dim, sys.n_modes());
  const Eigen::Index nt = decomp.time_grid.size();
  // Periodic integrand: trapezoid over one full period is spectrally
  // accurate.
  for (int k = 0; k < sys.n_modes(); ++k) {
    for (Eigen::Index i = 0; i < nt; ++i) {
      const double w = (i == 0 || i + 1 == nt) ? 0.5 : 1.0;
      const Matrix j = sys.flux_operator(phases, decomp.time_grid[i], k);
      for (int mu = 0; mu < dim; ++mu) {
        const Vector u = decomp.modes[i].col(mu);
        grad(mu, k) += w * std::real(u.dot(j * u));
      }
    }
    grad.col(k) /= static_cast<double>(nt - 1);
  }
  return grad;
}

RealMatrix quasienergy_gradient_fd(const DrivenSystem& sys,
                                   const RealVector& phases,
                                   const FloquetDecomposition& decomp,
                                   double step, const FloquetOptions& opts) {
  const int dim = sys.dim();
  const double zone = 2.0 * pi / decomp.period;
  Vector dummy = Vector::Zero(dim);
  dummy[0] = 1.0;
  RealMatrix grad(dim, sys.n_modes());
  const Matrix& u0 = decomp.modes.front();
  for (int k = 0; k < sys.n_modes(); ++k) {
    RealVector ppl = phases, pmi = phases;
    ppl[k] += step;
    pmi[k] -= step;
    FloquetDecomposition dp = floquet_decompose(sys, ppl, dummy, opts);
    FloquetDecomposition dm = floquet_decompose(sys, pmi, dummy, opts);
    for (int mu = 0; mu < dim; ++mu) {
      // Branch continuation: pick the shifted mode with maximal overlap.
      int bp = 0, bm = 0;
      double op = -1.0, om = -1.0;
      for (int nu = 0; nu < dim; ++nu) {
        const double wp =
            std::abs(u0.col(mu).dot(dp.modes.front().col(nu)));
        const double wm =
            std::abs(u0.col(mu).dot(dm.modes.front().col(nu)));
        if (wp > op) { op = wp; bp = nu; }
        if (wm > om) { om = wm; bm = nu; }
      }
      double de = dp.quasienergies[bp] - dm.quasienergies[bm];
      if (!decomp.static_system) de = fold_to_zone(de, zone);
      grad(mu, k) = de / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace prft
