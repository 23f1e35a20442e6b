#include "prft/propagator.hpp"

#include <cmath>
#include <sstream>

namespace prft {

double Propagator::max_unitarity_defect() const {
  double d = 0.0;
  for (const auto& u : unitaries) d = std::max(d, unitarity_defect(u));
  return d;
}

Matrix magnus_step(const Matrix& h1, const Matrix& h2, double dt) {
  // Omega = -i dt/2 (H1 + H2) - sqrt(3) dt^2 / 12 [H2, H1]; exp(Omega) is
  // unitary because i*Omega is Hermitian.
  static const double s3 = std::sqrt(3.0);
  const Matrix comm = h2 * h1 - h1 * h2;
  // i*Omega = dt/2 (H1 + H2) - i sqrt(3) dt^2 / 12 [H2, H1]
  const Matrix herm =
      0.5 * dt * (h1 + h2) - iunit * (s3 * dt * dt / 12.0) * comm;
  return expm_hermitian(herm, 1.0);
}

namespace {

// Propagator over [t0, t1] with n Magnus steps.
Matrix evolve_segment(const DrivenSystem& sys, const RealVector& phases,
                      double t0, double t1, int n) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double dt = (t1 - t0) / n;
  Matrix u = Matrix::Identity(sys.dim(), sys.dim());
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    const Matrix h1 = sys.hamiltonian(phases, t + c1 * dt);
    const Matrix h2 = sys.hamiltonian(phases, t + c2 * dt);
    u = magnus_step(h1, h2, dt) * u;
  }
  return u;
}

Propagator evolve_static(const DrivenSystem& sys, const RealVector& phases,
                         const RealVector& t_grid) {
  const Matrix h = sys.hamiltonian(phases, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericsError("evolve: eigendecomposition failed");
  Propagator prop;
  prop.time_grid = t_grid;
  prop.phases = phases;
  prop.unitaries.reserve(t_grid.size());
  for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
    Vector ph(sys.dim());
    for (int j = 0; j < sys.dim(); ++j)
      ph[j] = std::exp(Complex(0.0, -es.eigenvalues()[j] * t_grid[i]));
    prop.unitaries.push_back(es.eigenvectors() * ph.asDiagonal() *
                             es.eigenvectors().adjoint());
  }
  return prop;
}

}  // namespace

Propagator evolve(const DrivenSystem& sys, const RealVector& phases,
                  const RealVector& t_grid, const EvolveOptions& opts) {
  if (t_grid.size() < 1 || t_grid[0] != 0.0)
    throw SpecError("evolve: time grid must start at 0");
  for (Eigen::Index i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1])
      throw SpecError("evolve: time grid must be strictly increasing");

  if (sys.time_independent()) return evolve_static(sys, phases, t_grid);

  double dt0 = opts.initial_dt;
  if (dt0 <= 0.0) {
    double omega_max = 0.0;
    for (const auto& m : sys.modes())
      omega_max = std::max(omega_max, m.frequency);
    dt0 = (2.0 * pi / omega_max) / 64.0;
  }

  const Eigen::Index nt = t_grid.size();
  std::vector<Matrix> coarse(nt), fine(nt);
  double defect = 0.0;
  double scale = 1.0;
  for (int ref = 0; ref <= opts.max_refinements; ++ref) {
    Matrix u = Matrix::Identity(sys.dim(), sys.dim());
    fine[0] = u;
    for (Eigen::Index i = 1; i < nt; ++i) {
      const double a = t_grid[i - 1], b = t_grid[i];
      const int n = std::max(1, static_cast<int>(std::ceil((b - a) /
                                                           (dt0 * scale))));
      u = evolve_segment(sys, phases, a, b, n) * u;
      fine[i] = u;
    }
    if (ref > 0) {
      defect = 0.0;
      for (Eigen::Index i = 0; i < nt; ++i)
        defect = std::max(defect,
                          (fine[i] - coarse[i]).cwiseAbs().maxCoeff());
      if (defect <= opts.tolerance) {
        Propagator prop;
        prop.time_grid = t_grid;
        prop.phases = phases;
        prop.unitaries = std::move(fine);
        return prop;
      }
    }
    coarse = fine;
    scale *= 0.5;
  }
  std::ostringstream os;
  os << "evolve: no convergence to " << opts.tolerance << " within "
     << opts.max_refinements << " halvings (achieved " << defect << ")";
  throw NumericsError(os.str(), defect);
}

Matrix propagate_to(const DrivenSystem& sys, const RealVector& phases,
                    double t, const EvolveOptions& opts) {
  if (t == 0.0) return Matrix::Identity(sys.dim(), sys.dim());
  RealVector grid(2);
  grid << 0.0, t;
  return evolve(sys, phases, grid, opts).unitaries.back();
}

}  // namespace prft
