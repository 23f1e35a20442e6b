#include "prft/counting.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace prft {

std::string variant_name(MgfVariant v) {
  switch (v) {
    case MgfVariant::Exact: return "exact";
    case MgfVariant::Prft: return "prft";
    case MgfVariant::Semiclassical: return "semiclassical";
    case MgfVariant::Pfo: return "pfo";
    case MgfVariant::Aprft: return "aprft";
    case MgfVariant::Initial: return "initial";
    case MgfVariant::Total: return "total";
  }
  return "unknown";
}

CountingGrid::CountingGrid(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw SpecError("CountingGrid: no modes");
  total_ = 1;
  for (int g : sizes_) {
    if (g < 2 || (g & (g - 1)) != 0)
      throw SpecError("CountingGrid: sizes must be powers of two >= 2");
    total_ *= g;
  }
}

RealVector CountingGrid::chi(long flat) const {
  RealVector c(n_modes());
  for (int k = n_modes() - 1; k >= 0; --k) {
    c[k] = chi_axis(k, static_cast<int>(flat % sizes_[k]));
    flat /= sizes_[k];
  }
  return c;
}

long CountingGrid::zero_index() const {
  long idx = 0;
  for (int k = 0; k < n_modes(); ++k) idx = idx * sizes_[k] + sizes_[k] / 2;
  return idx;
}

PropagatorCache::PropagatorCache(const DrivenSystem& sys, EvolveOptions opts)
    : sys_(&sys), opts_(opts) {}

PropagatorCache::Key PropagatorCache::key_of(const RealVector& phases) const {
  Key k(phases.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    k[i] = llround(wrap_angle(phases[i]) * 1e12);
  return k;
}

std::size_t PropagatorCache::distinct_phases() const {
  return sys_->time_independent() ? eigs_.size() : floquet_.size();
}

Matrix PropagatorCache::unitary(const RealVector& phases, double t) {
  const int dim = sys_->dim();
  if (sys_->time_independent()) {
    // dim <= 2 has a closed-form exponential; memoizing would only cost
    // memory on large counting-grid sweeps
    if (dim <= 2) return expm_hermitian(sys_->hamiltonian(phases, 0.0), t);
    const Key key = key_of(phases);
    auto it = eigs_.find(key);
    if (it == eigs_.end()) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(sys_->hamiltonian(phases, 0.0));
      if (es.info() != Eigen::Success)
        throw NumericsError("PropagatorCache: eigensolver failed");
      it = eigs_.emplace(key, std::move(es)).first;
    }
    const auto& es = it->second;
    Vector ph(dim);
    for (int j = 0; j < dim; ++j)
      ph[j] = std::exp(Complex(0.0, -es.eigenvalues()[j] * t));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }

  // driven path: U(k tau + r) = U(r) M^k from one per-phase decomposition
  const double tau = sys_->period();
  const Key key = key_of(phases);
  auto it = floquet_.find(key);
  if (it == floquet_.end()) {
    FloquetEntry entry;
    const Matrix monodromy = propagate_to(*sys_, phases, tau, opts_);
    Eigen::ComplexSchur<Matrix> schur(monodromy);
    if (schur.info() != Eigen::Success)
      throw NumericsError("PropagatorCache: Schur decomposition failed");
    entry.eigenvectors = schur.matrixU();
    entry.eigenvalues = schur.matrixT().diagonal();
    entry.in_period.emplace(0, Matrix::Identity(dim, dim));
    entry.in_period.emplace(llround(tau * 1e12), monodromy);
    it = floquet_.emplace(key, std::move(entry)).first;
  }
  FloquetEntry& entry = it->second;

  long long k = static_cast<long long>(std::floor(t / tau + 1e-12));
  double r = t - k * tau;
  if (r < 0.0) {
    r += tau;
    --k;
  }
  const long long rkey = llround(r * 1e12);
  auto rit = entry.in_period.find(rkey);
  if (rit == entry.in_period.end()) {
    // extend from the nearest cached point below r (phase-shifted segment)
    auto below = entry.in_period.upper_bound(rkey);
    --below;
    const double r0 = static_cast<double>(below->first) * 1e-12;
    RealVector shifted = phases;
    for (int m = 0; m < sys_->n_modes(); ++m)
      shifted[m] -= sys_->modes()[m].frequency * r0;
    RealVector grid(2);
    grid << 0.0, r - r0;
    const Matrix seg = evolve(*sys_, shifted, grid, opts_).unitaries.back();
    rit = entry.in_period.emplace(rkey, seg * below->second).first;
  }
  if (k == 0) return rit->second;
  Vector powers(dim);
  for (int j = 0; j < dim; ++j)
    powers[j] = std::pow(entry.eigenvalues[j], static_cast<double>(k));
  return rit->second * entry.eigenvectors * powers.asDiagonal() *
         entry.eigenvectors.adjoint();
}

Complex mgf_initial(const GaussianPhotonState& state, const RealVector& chi) {
  if (chi.size() != state.n_modes())
    throw SpecError("mgf_initial: counting-field dimension mismatch");
  const double quad = chi.dot(state.sigma_sq() * chi);
  const double phase = -state.mean_photons().dot(chi);
  return std::exp(-0.5 * quad) * std::exp(Complex(0.0, phase));
}

namespace {

// <U+_{center - chi/2}(t) U_{center + chi/2}(t)> in the matter state.
Complex two_sided_overlap(PropagatorCache& cache, const RealVector& center,
                          const Vector& state, const RealVector& chi,
                          double t) {
  const Matrix um = cache.unitary(center - 0.5 * chi, t);
  const Matrix up = cache.unitary(center + 0.5 * chi, t);
  return state.dot(um.adjoint() * (up * state));
}

}  // namespace

Complex mgf_prft(const DrivenSystem& sys, const RealVector& phibar,
                 const Vector& matter_state, const RealVector& chi, double t,
                 PropagatorCache* cache) {
  if (chi.size() != sys.n_modes())
    throw SpecError("mgf_prft: counting-field dimension mismatch");
  if (cache) return two_sided_overlap(*cache, phibar, matter_state, chi, t);
  PropagatorCache local(sys);
  return two_sided_overlap(local, phibar, matter_state, chi, t);
}

const GaussHermite& GaussHermite::order(int n) {
  static std::map<int, GaussHermite> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // Golub-Welsch on the Hermite Jacobi matrix; weights sum to sqrt(pi).
  RealMatrix jac = RealMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(jac);
  GaussHermite gh;
  gh.nodes = es.eigenvalues();
  gh.weights.resize(n);
  const double sqrt_pi = std::sqrt(pi);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    gh.weights[i] = sqrt_pi * v0 * v0;
  }
  return cache.emplace(n, std::move(gh)).first->second;
}

namespace {

// Quadrature of <U+_{phi-chi/2} U_{phi+chi/2}> against the normalized
// Gaussian weight; displacement nodes are tensor Gauss-Hermite points mapped
// through the Sigma eigenbasis (exponent 2 d' Sigma^2 d = |x|^2).
Complex gaussian_weighted_overlap(PropagatorCache& cache,
                                  const GaussianPhotonState& photon_state,
                                  const Vector& matter_state,
                                  const RealVector& chi, double t, int order) {
  const int nm = photon_state.n_modes();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(photon_state.sigma());
  const RealMatrix q = es.eigenvectors();
  const RealVector s = es.eigenvalues();
  const GaussHermite& gh = GaussHermite::order(order);

  const RealVector& phibar = photon_state.mean_phases();
  Complex acc = 0.0;
  double wsum = 0.0;
  long total = 1;
  for (int k = 0; k < nm; ++k) total *= order;
  RealVector x(nm), d(nm);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    double w = 1.0;
    for (int k = nm - 1; k >= 0; --k) {
      const int j = static_cast<int>(rem % order);
      rem /= order;
      x[k] = gh.nodes[j];
      w *= gh.weights[j];
    }
    for (int k = 0; k < nm; ++k) d[k] = x[k] / (std::sqrt(2.0) * s[k]);
    const RealVector phi = phibar + q * d;
    acc += w * two_sided_overlap(cache, phi, matter_state, chi, t);
    wsum += w;
  }
  return acc / wsum;
}

}  // namespace

Complex mgf_dynamical_gaussian(const DrivenSystem& sys,
                               const GaussianPhotonState& state,
                               const Vector& matter_state,
                               const RealVector& chi, double t,
                               const QuadratureOptions& opts,
                               PropagatorCache* cache) {
  PropagatorCache local(sys);
  PropagatorCache& c = cache ? *cache : local;
  int order = opts.initial_order;
  Complex prev = gaussian_weighted_overlap(c, state, matter_state, chi, t,
                                           order);
  while (order < opts.max_order) {
    order *= 2;
    const Complex next =
        gaussian_weighted_overlap(c, state, matter_state, chi, t, order);
    if (std::abs(next - prev) <= opts.tolerance) return next;
    prev = next;
  }
  std::ostringstream os;
  os << "mgf_dynamical_gaussian: quadrature did not reach "
     << opts.tolerance << " at order " << order;
  throw NumericsError(os.str(), std::abs(prev));
}

Complex mgf_exact_gaussian(const DrivenSystem& sys,
                           const GaussianPhotonState& state,
                           const Vector& matter_state, const RealVector& chi,
                           double t, const QuadratureOptions& opts,
                           PropagatorCache* cache) {
  return mgf_dynamical_gaussian(sys, state, matter_state, chi, t, opts,
                                cache) *
         mgf_initial(state, chi);
}

GaussianMgfEvaluator::GaussianMgfEvaluator(const DrivenSystem& sys,
                                           const GaussianPhotonState& state,
                                           const Vector& matter_state,
                                           double t,
                                           const QuadratureOptions& opts)
    : sys_(&sys), state_(state), matter_(matter_state), t_(t), cache_(sys) {
  const int nm = sys.n_modes();
  std::vector<RealVector> probes;
  probes.push_back(RealVector::Zero(nm));
  for (int k = 0; k < nm; ++k) {
    RealVector chi = RealVector::Zero(nm);
    chi[k] = pi * (1.0 - 1.0 / 64.0);
    probes.push_back(chi);
  }
  probes.push_back(RealVector::Constant(nm, 0.5 * pi));
  order_ = opts.initial_order;
  for (const auto& chi : probes) {
    int order = opts.initial_order;
    Complex prev = gaussian_weighted_overlap(cache_, state_, matter_, chi,
                                             t_, order);
    while (order < opts.max_order) {
      order *= 2;
      const Complex next =
          gaussian_weighted_overlap(cache_, state_, matter_, chi, t_, order);
      if (std::abs(next - prev) <= opts.tolerance) break;
      prev = next;
    }
    if (order >= opts.max_order)
      throw NumericsError(
          "GaussianMgfEvaluator: probe quadrature failed to converge",
          std::abs(prev));
    order_ = std::max(order_, order);
  }
}

Complex GaussianMgfEvaluator::dynamical(const RealVector& chi) const {
  return gaussian_weighted_overlap(cache_, state_, matter_, chi, t_, order_);
}

Complex GaussianMgfEvaluator::total(const RealVector& chi) const {
  return dynamical(chi) * mgf_initial(state_, chi);
}

Complex mgf_semiclassical_floquet(const FloquetDecomposition& decomp,
                                  const RealVector& chi, double t) {
  if (decomp.gradients.cols() != chi.size())
    throw SpecError("mgf_semiclassical_floquet: gradients not available");
  Complex acc = 0.0;
  for (Eigen::Index mu = 0; mu < decomp.coefficients.size(); ++mu) {
    const double weight = std::norm(decomp.coefficients[mu]);
    const double phase = -t * decomp.gradients.row(mu).dot(chi);
    acc += weight * std::exp(Complex(0.0, phase));
  }
  return acc;
}

PfoEvaluator::PfoEvaluator(const DrivenSystem& sys, const RealVector& phibar,
                           const Vector& matter_state, double t,
                           int points_per_period, const EvolveOptions& opts)
    : state_(matter_state) {
  const int nm = sys.n_modes();
  // Composite Simpson needs an even interval count.
  int n = std::max(
      8, static_cast<int>(std::ceil(t / sys.period() * points_per_period)));
  if (n % 2 != 0) ++n;
  RealVector grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = t * i / n;
  Propagator prop = evolve(sys, phibar, grid, opts);
  flux_.assign(nm, Matrix::Zero(sys.dim(), sys.dim()));
  const double h = t / n;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (int k = 0; k < nm; ++k) {
      const Matrix j = sys.flux_operator(phibar, grid[i], k);
      flux_[k] += (w * h / 3.0) *
                  (prop.unitaries[i].adjoint() * j * prop.unitaries[i]);
    }
  }
  for (int k = 0; k < nm; ++k) {
    const double defect = hermiticity_defect(flux_[k]);
    if (defect > 1e-8)
      throw NumericsError(
          "PfoEvaluator: integrated flux lost Hermiticity; refine the "
          "quadrature grid",
          defect);
    flux_[k] = 0.5 * (flux_[k] + flux_[k].adjoint().eval());
  }
}

Complex PfoEvaluator::operator()(const RealVector& chi) const {
  if (chi.size() != static_cast<Eigen::Index>(flux_.size()))
    throw SpecError("PfoEvaluator: counting-field dimension mismatch");
  Matrix gen = Matrix::Zero(state_.size(), state_.size());
  for (Eigen::Index k = 0; k < chi.size(); ++k) gen += chi[k] * flux_[k];
  const Matrix u = expm_hermitian(gen, 1.0);
  return state_.dot(u * state_);
}

Complex mgf_pfo(const DrivenSystem& sys, const RealVector& phibar,
                const Vector& matter_state, const RealVector& chi, double t,
                int points_per_period) {
  PfoEvaluator eval(sys, phibar, matter_state, t, points_per_period);
  return eval(chi);
}

double MgfTable::normalization_defect() const {
  const long zero = grid.zero_index();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < times.size(); ++i)
    worst = std::max(worst, std::abs(values(i, zero) - Complex(1.0)));
  return worst;
}

double MgfTable::symmetry_defect() const {
  // mirror index of chi -> -chi: j -> (G - j) mod G per axis
  double worst = 0.0;
  for (long flat = 0; flat < grid.total(); ++flat) {
    long rem = flat, mirror = 0;
    std::vector<int> digits(grid.n_modes());
    for (int k = grid.n_modes() - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(rem % grid.size(k));
      rem /= grid.size(k);
    }
    bool has_mirror = true;
    for (int k = 0; k < grid.n_modes(); ++k) {
      const int m = (grid.size(k) - digits[k]) % grid.size(k);
      if (m == 0 && digits[k] != 0) has_mirror = false;  // chi = -pi edge
      mirror = mirror * grid.size(k) + m;
    }
    if (!has_mirror) continue;
    for (Eigen::Index i = 0; i < times.size(); ++i)
      worst = std::max(worst, std::abs(values(i, mirror) -
                                       std::conj(values(i, flat))));
  }
  return worst;
}

MgfTable tabulate_mgf(
    MgfVariant variant,
    const std::function<Complex(const RealVector&, double)>& mgf,
    const CountingGrid& grid, const RealVector& times) {
  MgfTable table{variant, times, grid,
                 Eigen::MatrixXcd(times.size(), grid.total())};
  for (Eigen::Index i = 0; i < times.size(); ++i)
    for (long flat = 0; flat < grid.total(); ++flat)
      table.values(i, flat) = mgf(grid.chi(flat), times[i]);
  return table;
}

Complex mgf_aprft(const DrivenSystem& sys, const RealVector& phibar,
                  const Vector& matter_state, const RealVector& chi, double t,
                  PropagatorCache* cache) {
  PropagatorCache local(sys);
  PropagatorCache& c = cache ? *cache : local;
  const Matrix u0 = c.unitary(phibar, t);
  const Matrix up = c.unitary(phibar + chi, t);
  const Matrix um = c.unitary(phibar - chi, t);
  const Complex a = matter_state.dot(u0.adjoint() * (up * matter_state));
  const Complex b = matter_state.dot(um.adjoint() * (u0 * matter_state));
  return 0.5 * (a + b);
}

}  // namespace prft
