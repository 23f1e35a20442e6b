#include "prft/decoherence.hpp"

#include <cmath>

#include "prft/counting.hpp"

namespace prft {

long KrausSet::flat_index(const std::vector<int>& n) const {
  long idx = 0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const int j = n[k] - lo[k];
    if (j < 0 || j >= extent[k]) return -1;
    idx = idx * extent[k] + j;
  }
  return idx;
}

const Matrix& KrausSet::at(const std::vector<int>& n) const {
  const long idx = flat_index(n);
  if (idx < 0) throw SpecError("KrausSet::at: outcome outside the window");
  return ops[idx];
}

Matrix KrausSet::completeness() const {
  Matrix acc = Matrix::Zero(ops.front().rows(), ops.front().cols());
  for (const auto& k : ops) acc += k.adjoint() * k;
  return acc;
}

double KrausSet::completeness_defect() const {
  const Matrix c = completeness();
  return (c - Matrix::Identity(c.rows(), c.cols())).cwiseAbs().maxCoeff();
}

PhotonDistribution KrausSet::outcome_distribution(const Matrix& rho) const {
  PhotonDistribution dist;
  dist.lo = lo;
  dist.extent = extent;
  dist.time = time;
  dist.p.resize(size());
  for (long i = 0; i < size(); ++i)
    dist.p[i] = std::real((ops[i] * rho * ops[i].adjoint()).trace());
  const double total = dist.p.sum();
  dist.normalization_defect = std::abs(total - 1.0);
  dist.p /= total;
  return dist;
}

namespace {

struct PhiGrid {
  RealVector nodes;   // per-axis phi values
  double weight;      // integration weight Delta
};

PhiGrid phi_axis(double center, double sigma, const KrausOptions& opts) {
  const double halfwidth = opts.halfwidth_sigmas / sigma;
  const int m = static_cast<int>(std::ceil(2.0 * opts.halfwidth_sigmas *
                                           opts.samples_per_inverse_sigma));
  PhiGrid g;
  g.nodes.resize(m);
  g.weight = 2.0 * halfwidth / m;
  for (int j = 0; j < m; ++j)
    g.nodes[j] = center - halfwidth + (j + 0.5) * g.weight;
  return g;
}

}  // namespace

KrausSet kraus_operators(const DrivenSystem& sys,
                         const GaussianPhotonState& state, double t,
                         const std::vector<int>& lo,
                         const std::vector<int>& extent,
                         const KrausOptions& opts) {
  const int nm = sys.n_modes();
  if (static_cast<int>(lo.size()) != nm ||
      static_cast<int>(extent.size()) != nm)
    throw SpecError("kraus_operators: window dimension mismatch");
  if (nm < 1 || nm > 2)
    throw SpecError("kraus_operators: one or two modes supported");
  const int dim = sys.dim();

  std::vector<PhiGrid> grid(nm);
  for (int k = 0; k < nm; ++k) {
    const double sigma = std::sqrt(state.sigma_sq()(k, k));
    if (opts.samples_per_inverse_sigma < 16)
      throw SpecError("kraus_operators: a_phi would be unresolved "
                      "(need >= 16 samples per 1/sigma width)");
    grid[k] = phi_axis(state.mean_phases()[k], sigma, opts);
  }

  // Optional linearized propagator (Floquet expansion around phibar).
  FloquetDecomposition dec;
  if (opts.approximate_propagator) {
    Vector dummy = Vector::Zero(dim);
    dummy[0] = 1.0;
    dec = floquet_decompose(sys, state.mean_phases(), dummy);
    dec.gradients = quasienergy_gradient(sys, state.mean_phases(), dec);
  }
  PropagatorCache cache(sys, opts.evolve);
  auto propagator = [&](const RealVector& phi) -> Matrix {
    if (!opts.approximate_propagator) return cache.unitary(phi, t);
    Matrix u = Matrix::Zero(dim, dim);
    const Matrix& u0 = dec.modes.front();
    const Matrix ut = dec.modes_at(t);
    const RealVector d = phi - state.mean_phases();
    for (int mu = 0; mu < dim; ++mu) {
      const double phase =
          -t * (dec.quasienergies[mu] + dec.gradients.row(mu).dot(d));
      u += std::exp(Complex(0.0, phase)) * ut.col(mu) * u0.col(mu).adjoint();
    }
    return u;
  };

  KrausSet set;
  set.lo = lo;
  set.extent = extent;
  set.time = t;

  const double norm = std::pow(2.0 * pi, -0.5 * nm);
  RealVector omega(nm);
  for (int k = 0; k < nm; ++k) omega[k] = sys.modes()[k].frequency;

  if (nm == 1) {
    const int m = static_cast<int>(grid[0].nodes.size());
    std::vector<Matrix> g(m);
    RealVector phi(1);
    for (int j = 0; j < m; ++j) {
      phi[0] = grid[0].nodes[j];
      g[j] = propagator(phi) * state.phase_amplitude(phi);
    }
    set.ops.reserve(extent[0]);
    for (int i = 0; i < extent[0]; ++i) {
      const int n = lo[0] + i;
      Matrix acc = Matrix::Zero(dim, dim);
      for (int j = 0; j < m; ++j)
        acc += std::exp(Complex(0.0, grid[0].nodes[j] * n)) * g[j];
      acc *= norm * grid[0].weight;
      acc *= std::exp(Complex(0.0, -omega[0] * n * t));
      set.ops.push_back(std::move(acc));
    }
    return set;
  }

  // Two modes: separable partial DTFT, axis 2 first then axis 1.
  const int m1 = static_cast<int>(grid[0].nodes.size());
  const int m2 = static_cast<int>(grid[1].nodes.size());
  std::vector<Matrix> g(static_cast<std::size_t>(m1) * m2);
  RealVector phi(2);
  for (int j1 = 0; j1 < m1; ++j1)
    for (int j2 = 0; j2 < m2; ++j2) {
      phi << grid[0].nodes[j1], grid[1].nodes[j2];
      g[j1 * m2 + j2] = propagator(phi) * state.phase_amplitude(phi);
    }

  std::vector<Matrix> partial(static_cast<std::size_t>(m1) * extent[1]);
  for (int j1 = 0; j1 < m1; ++j1)
    for (int i2 = 0; i2 < extent[1]; ++i2) {
      const int n2 = lo[1] + i2;
      Matrix acc = Matrix::Zero(dim, dim);
      for (int j2 = 0; j2 < m2; ++j2)
        acc += std::exp(Complex(0.0, grid[1].nodes[j2] * n2)) *
               g[j1 * m2 + j2];
      partial[j1 * extent[1] + i2] = acc * grid[1].weight;
    }

  set.ops.resize(static_cast<std::size_t>(extent[0]) * extent[1]);
  for (int i1 = 0; i1 < extent[0]; ++i1) {
    const int n1 = lo[0] + i1;
    for (int i2 = 0; i2 < extent[1]; ++i2) {
      Matrix acc = Matrix::Zero(dim, dim);
      for (int j1 = 0; j1 < m1; ++j1)
        acc += std::exp(Complex(0.0, grid[0].nodes[j1] * n1)) *
               partial[j1 * extent[1] + i2];
      acc *= norm * grid[0].weight;
      const int n2 = lo[1] + i2;
      acc *= std::exp(Complex(0.0, -(omega[0] * n1 + omega[1] * n2) * t));
      set.ops[i1 * extent[1] + i2] = std::move(acc);
    }
  }
  return set;
}

double coherence_integral(const PhotonDistribution& initial,
                          const RealVector& dn1, const RealVector& dn2) {
  const int nm = initial.n_modes();
  if (dn1.size() != nm || dn2.size() != nm)
    throw SpecError("coherence_integral: shift dimension mismatch");
  if ((dn1 - dn2).cwiseAbs().maxCoeff() == 0.0) return 1.0;
  double acc = 0.0;
  RealVector s1(nm), s2(nm);
  for (long flat = 0; flat < initial.size(); ++flat) {
    const auto n = initial.offsets(flat);
    for (int k = 0; k < nm; ++k) {
      s1[k] = n[k] - dn1[k];
      s2[k] = n[k] - dn2[k];
    }
    const double p1 = initial.interpolate(s1);
    const double p2 = initial.interpolate(s2);
    if (p1 > 0.0 && p2 > 0.0) acc += std::sqrt(p1 * p2);
  }
  return acc;
}

RealMatrix coherence_matrix(const FloquetDecomposition& decomp,
                            const PhotonDistribution& initial, double t) {
  const int dim = static_cast<int>(decomp.quasienergies.size());
  RealMatrix c(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      c(a, b) = coherence_integral(initial,
                                   t * decomp.gradients.row(a).transpose(),
                                   t * decomp.gradients.row(b).transpose());
  return c;
}

RealMatrix coherence_matrix_gaussian(const FloquetDecomposition& decomp,
                                     const GaussianPhotonState& state,
                                     double t, double halfwidth_sigmas) {
  const int nm = state.n_modes();
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b)
      if (a != b && state.sigma()(a, b) != 0.0)
        throw SpecError(
            "coherence_matrix_gaussian: needs a diagonal covariance");
  const int dim = static_cast<int>(decomp.quasienergies.size());
  RealMatrix c = RealMatrix::Ones(dim, dim);
  for (int k = 0; k < nm; ++k) {
    const double sigma = state.sigma()(k, k);
    const double drift = t * decomp.gradients.col(k).cwiseAbs().maxCoeff();
    const int w = static_cast<int>(
        std::ceil(halfwidth_sigmas * sigma + drift + 2.0));
    RealVector nb(1), ph(1);
    nb << 0.0;
    ph << state.mean_phases()[k];
    RealMatrix s1(1, 1);
    s1 << sigma;
    GaussianPhotonState marginal(nb, s1, ph);
    PhotonDistribution init =
        gaussian_lattice_distribution(marginal, {-w}, {2 * w + 1});
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        RealVector d1(1), d2(1);
        d1 << t * decomp.gradients(a, k);
        d2 << t * decomp.gradients(b, k);
        c(a, b) *= coherence_integral(init, d1, d2);
      }
  }
  return c;
}

PhotonDistribution gaussian_lattice_distribution(
    const GaussianPhotonState& state, const std::vector<int>& lo,
    const std::vector<int>& extent) {
  PhotonDistribution dist;
  dist.lo = lo;
  dist.extent = extent;
  long total = 1;
  for (int e : extent) total *= e;
  dist.p.resize(total);
  RealVector off(state.n_modes());
  for (long flat = 0; flat < total; ++flat) {
    const auto n = dist.offsets(flat);
    for (int k = 0; k < state.n_modes(); ++k) off[k] = n[k];
    dist.p[flat] = std::norm(state.amplitude(off));
  }
  dist.normalization_defect = std::abs(dist.p.sum() - 1.0);
  dist.p /= dist.p.sum();
  return dist;
}

Matrix reduced_density_semiclassical(const FloquetDecomposition& decomp,
                                     const RealMatrix& coherence, double t) {
  const int dim = static_cast<int>(decomp.quasienergies.size());
  const Matrix ut = decomp.modes_at(t);
  Matrix rho = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const Complex weight =
          coherence(a, b) * decomp.coefficients[a] *
          std::conj(decomp.coefficients[b]) *
          std::exp(Complex(0.0, (decomp.quasienergies[b] -
                                 decomp.quasienergies[a]) *
                                    t));
      rho += weight * ut.col(a) * ut.col(b).adjoint();
    }
  return rho;
}

double observable_expectation(const Matrix& rho, const Matrix& observable) {
  if (rho.rows() != observable.rows() || rho.cols() != observable.cols())
    throw SpecError("observable_expectation: dimension mismatch");
  if (!is_hermitian(observable, 1e-10))
    throw SpecError("observable_expectation: observable must be Hermitian");
  const Complex value = (rho * observable).trace();
  if (std::abs(value.imag()) > 1e-8 * std::max(1.0, std::abs(value.real())))
    throw NumericsError("observable_expectation: non-real expectation",
                        std::abs(value.imag()));
  return value.real();
}

DensityMatrixChecks check_density_matrix(const Matrix& rho) {
  DensityMatrixChecks c;
  c.hermiticity = hermiticity_defect(rho);
  c.trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint().eval()));
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

}  // namespace prft
