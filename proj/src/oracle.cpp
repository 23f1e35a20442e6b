#include "prft/oracle.hpp"

#include <cmath>

namespace prft {

namespace {

// Sparse matter coupling: list of (row, col, value) triplets.
struct SparseOp {
  struct Entry {
    int row, col;
    Complex value;
  };
  std::vector<Entry> entries;

  static SparseOp from_dense(const Matrix& m, double drop = 0.0) {
    SparseOp op;
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        if (std::abs(m(r, c)) > drop) op.entries.push_back({r, c, m(r, c)});
    return op;
  }
};

// Lanczos approximation of exp(-i A s) v for a Hermitian matrix-free
// operator. Exactly norm preserving (the small exponential is unitary and
// the basis orthonormal).
class LanczosExp {
 public:
  LanczosExp(long n, int m_max, double tol)
      : n_(n), m_max_(m_max), tol_(tol) {
    basis_.resize(m_max + 1);  // allocated lazily; most runs stay small
  }

  void apply(const std::function<void(const Vector&, Vector&)>& op, double s,
             Vector& v) {
    const double beta0 = v.norm();
    if (beta0 == 0.0) return;
    ensure(0);
    ensure(1);
    basis_[0] = v / beta0;
    RealVector alpha(m_max_), beta(m_max_);
    Vector small;
    int m = 0;
    bool converged = false;
    while (m < m_max_) {
      ensure(m + 1);
      op(basis_[m], basis_[m + 1]);
      Complex a = basis_[m].dot(basis_[m + 1]);
      alpha[m] = a.real();
      basis_[m + 1] -= alpha[m] * basis_[m];
      if (m > 0) basis_[m + 1] -= beta[m - 1] * basis_[m - 1];
      // one re-orthogonalization pass keeps the basis clean enough for
      // short-step exponentials
      for (int j = 0; j <= m; ++j)
        basis_[m + 1] -= basis_[j].dot(basis_[m + 1]) * basis_[j];
      beta[m] = basis_[m + 1].norm();
      ++m;
      const bool breakdown = beta[m - 1] < 1e-14 * beta0;
      if (m >= 4 || breakdown) {
        small = small_exponential(alpha, beta, m, s);
        const double err =
            breakdown ? 0.0
                      : beta[m - 1] * std::abs(small[m - 1]) * std::abs(s);
        if (err < tol_ || breakdown) {
          converged = true;
          break;
        }
      }
      if (!breakdown) basis_[m] /= beta[m - 1];
    }
    if (!converged) {
      small = small_exponential(alpha, beta, m, s);
      const double err = beta[m - 1] * std::abs(small[m - 1]) * std::abs(s);
      if (err > 1e3 * tol_)
        throw NumericsError(
            "LanczosExp: Krylov space exhausted; reduce the step", err);
    }
    v.setZero();
    for (int j = 0; j < m; ++j) v += (beta0 * small[j]) * basis_[j];
  }

 private:
  static Vector small_exponential(const RealVector& alpha,
                                  const RealVector& beta, int m, double s) {
    RealMatrix t = RealMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
    Vector u = Vector::Zero(m);
    for (int i = 0; i < m; ++i) {
      const Complex phase = std::exp(Complex(0.0, -es.eigenvalues()[i] * s));
      u += phase * es.eigenvectors().col(i).cast<Complex>() *
           es.eigenvectors()(0, i);
    }
    return u;
  }

  void ensure(int i) {
    if (basis_[i].size() != n_) basis_[i].resize(n_);
  }

  long n_;
  int m_max_;
  double tol_;
  std::vector<Vector> basis_;
};

// Sambe lattice geometry plus the frozen-coefficient Hamiltonian apply.
struct SambeLattice {
  std::vector<int> lo, extent;
  int dim;
  int nm;
  long sites;
  Matrix matter;                  // H_M
  std::vector<SparseOp> coupling;      // C_k
  std::vector<SparseOp> coupling_dag;  // C_k^dag
  std::vector<double> half_amp;        // Omega_k / 2
  std::vector<long> stride;            // per-mode site stride

  SambeLattice(const DrivenSystem& sys, const std::vector<int>& lo_in,
               const std::vector<int>& extent_in)
      : lo(lo_in), extent(extent_in), dim(sys.dim()), nm(sys.n_modes()) {
    sites = 1;
    for (int e : extent) sites *= e;
    matter = sys.matter_hamiltonian();
    for (const auto& m : sys.modes()) {
      coupling.push_back(SparseOp::from_dense(m.coupling, 1e-300));
      coupling_dag.push_back(
          SparseOp::from_dense(m.coupling.adjoint(), 1e-300));
      half_amp.push_back(0.5 * m.amplitude);
    }
    stride.assign(nm, 1);
    for (int k = nm - 2; k >= 0; --k) stride[k] = stride[k + 1] * extent[k + 1];
  }

  // out = [weight_sum * H_M + sum_k (gamma_k C_k T_- + h.c.)] in,
  // gamma_k = half_amp_k * sum_j w_j e^{-i omega_k t_j}.
  void apply(double weight_sum, const std::vector<Complex>& gamma,
             const Vector& in, Vector& out) const {
    out.setZero();
    const Complex* src = in.data();
    Complex* dst = out.data();
    // matter term, dense per site
    for (long s = 0; s < sites; ++s) {
      const Complex* x = src + s * dim;
      Complex* y = dst + s * dim;
      for (int r = 0; r < dim; ++r) {
        Complex acc = 0.0;
        for (int c = 0; c < dim; ++c) acc += matter(r, c) * x[c];
        y[r] = weight_sum * acc;
      }
    }
    // hopping terms; T_- reads the neighbour at n + e_k
    for (int k = 0; k < nm; ++k) {
      const long st = stride[k] * dim;
      const int ext = extent[k];
      const long block = stride[k];          // sites inside one slice step
      const long outer = sites / (block * ext);
      for (long o = 0; o < outer; ++o) {
        for (int i = 0; i < ext; ++i) {
          const long base = (o * ext + i) * block;
          const bool has_up = i + 1 < ext;    // neighbour at n + e_k
          const bool has_down = i > 0;        // neighbour at n - e_k
          for (long b = 0; b < block; ++b) {
            const long s = base + b;
            Complex* y = dst + s * dim;
            if (has_up) {
              const Complex* x = src + s * dim + st;
              for (const auto& e : coupling[k].entries)
                y[e.row] += gamma[k] * e.value * x[e.col];
            }
            if (has_down) {
              const Complex* x = src + s * dim - st;
              for (const auto& e : coupling_dag[k].entries)
                y[e.row] += std::conj(gamma[k]) * e.value * x[e.col];
            }
          }
        }
      }
    }
  }
};

}  // namespace

long SambeState::sites() const {
  long s = 1;
  for (int e : extent) s *= e;
  return s;
}

long SambeState::site_index(const std::vector<int>& n) const {
  long idx = 0;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const int j = n[k] - lo[k];
    if (j < 0 || j >= extent[k]) return -1;
    idx = idx * extent[k] + j;
  }
  return idx;
}

double SambeState::boundary_mass() const {
  double mass = 0.0;
  const int nm = static_cast<int>(lo.size());
  for (long s = 0; s < sites(); ++s) {
    long rem = s;
    bool on_boundary = false;
    for (int k = nm - 1; k >= 0; --k) {
      const int i = static_cast<int>(rem % extent[k]);
      rem /= extent[k];
      if (i <= 1 || i >= extent[k] - 2) on_boundary = true;
    }
    if (on_boundary)
      mass += amplitudes.segment(s * dim, dim).squaredNorm();
  }
  return mass;
}

Vector SambeState::lab_amplitudes(const std::vector<int>& n) const {
  const long s = site_index(n);
  if (s < 0) throw SpecError("lab_amplitudes: site outside the window");
  double phase = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k)
    phase -= mode_frequencies[k] * n[k] * time;
  return std::exp(Complex(0.0, phase)) * amplitudes.segment(s * dim, dim);
}

namespace {

SambeState make_initial_state(const DrivenSystem& sys,
                              const GaussianPhotonState& photons,
                              const Vector& matter_state, double t_final,
                              const SambeOptions& opts) {
  if (matter_state.size() != sys.dim())
    throw SpecError("sambe_evolve: matter state dimension mismatch");
  const int nm = sys.n_modes();
  SambeState st;
  st.dim = sys.dim();
  st.time = 0.0;
  st.mode_frequencies.resize(nm);
  for (int k = 0; k < nm; ++k)
    st.mode_frequencies[k] = sys.modes()[k].frequency;
  st.reference_mean = photons.mean_photons();
  st.lo.resize(nm);
  st.extent.resize(nm);
  for (int k = 0; k < nm; ++k) {
    int w = opts.window;
    if (w <= 0) {
      const double sigma = std::sqrt(photons.sigma_sq()(k, k));
      w = static_cast<int>(
          std::ceil(12.0 * sigma + 1.5 * t_final * opts.drift_rate));
    }
    st.lo[k] = -w;
    st.extent[k] = 2 * w + 1;
  }
  st.amplitudes.resize(st.sites() * st.dim);
  RealVector off(nm);
  for (long s = 0; s < st.sites(); ++s) {
    long rem = s;
    for (int k = nm - 1; k >= 0; --k) {
      off[k] = st.lo[k] + static_cast<int>(rem % st.extent[k]);
      rem /= st.extent[k];
    }
    const Complex a = photons.amplitude(off);
    for (int m = 0; m < st.dim; ++m)
      st.amplitudes[s * st.dim + m] = a * matter_state[m];
  }
  st.amplitudes /= st.amplitudes.norm();
  return st;
}

void sambe_advance(const DrivenSystem& sys, const SambeLattice& lattice,
                   SambeState& st, double t_to, const SambeOptions& opts,
                   LanczosExp& krylov) {
  const bool is_static = sys.time_independent();
  double dt = opts.dt;
  if (dt <= 0.0) dt = is_static ? 2.0 : sys.period() / 64.0;
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  static const double a1 = 0.25 - std::sqrt(3.0) / 6.0;
  static const double a2 = 0.25 + std::sqrt(3.0) / 6.0;
  const int nm = sys.n_modes();
  std::vector<Complex> gamma(nm);
  while (st.time < t_to - 1e-12) {
    const double h = std::min(dt, t_to - st.time);
    if (is_static) {
      for (int k = 0; k < nm; ++k) gamma[k] = lattice.half_amp[k];
      auto op = [&](const Vector& in, Vector& out) {
        lattice.apply(1.0, gamma, in, out);
      };
      krylov.apply(op, h, st.amplitudes);
    } else {
      const double t1 = st.time + c1 * h;
      const double t2 = st.time + c2 * h;
      auto combo = [&](double w1, double w2) {
        for (int k = 0; k < nm; ++k) {
          const double om = st.mode_frequencies[k];
          gamma[k] = lattice.half_amp[k] *
                     (w1 * std::exp(Complex(0.0, -om * t1)) +
                      w2 * std::exp(Complex(0.0, -om * t2)));
        }
        return w1 + w2;
      };
      // commutator-free 4th order: early-node-heavy factor first
      double wsum = combo(a2, a1);
      auto op1 = [&](const Vector& in, Vector& out) {
        lattice.apply(wsum, gamma, in, out);
      };
      krylov.apply(op1, h, st.amplitudes);
      wsum = combo(a1, a2);
      auto op2 = [&](const Vector& in, Vector& out) {
        lattice.apply(wsum, gamma, in, out);
      };
      krylov.apply(op2, h, st.amplitudes);
    }
    st.time += h;
  }
  const double bm = st.boundary_mass();
  if (bm > opts.boundary_tol)
    throw NumericsError(
        "sambe_evolve: boundary mass exceeds the truncation tolerance; "
        "enlarge the window",
        bm);
}

}  // namespace

SambeState sambe_evolve_sampled(
    const DrivenSystem& sys, const GaussianPhotonState& photons,
    const Vector& matter_state, const RealVector& times,
    const SambeOptions& opts,
    const std::function<void(const SambeState&)>& sample) {
  if (times.size() < 1) throw SpecError("sambe_evolve: empty time grid");
  SambeState st = make_initial_state(sys, photons, matter_state,
                                     times[times.size() - 1], opts);
  SambeLattice lattice(sys, st.lo, st.extent);
  LanczosExp krylov(st.amplitudes.size(), opts.krylov_max, opts.krylov_tol);
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    sambe_advance(sys, lattice, st, times[i], opts, krylov);
    if (sample) sample(st);
  }
  return st;
}

SambeState sambe_evolve(const DrivenSystem& sys,
                        const GaussianPhotonState& photons,
                        const Vector& matter_state, double t,
                        const SambeOptions& opts) {
  RealVector times(1);
  times << t;
  return sambe_evolve_sampled(sys, photons, matter_state, times, opts,
                              nullptr);
}

Complex sambe_mgf(const SambeState& state, const RealVector& chi) {
  const int nm = static_cast<int>(state.lo.size());
  if (chi.size() != nm) throw SpecError("sambe_mgf: dimension mismatch");
  Complex acc = 0.0;
  for (long s = 0; s < state.sites(); ++s) {
    long rem = s;
    double phase = 0.0;
    for (int k = nm - 1; k >= 0; --k) {
      const int off = state.lo[k] + static_cast<int>(rem % state.extent[k]);
      rem /= state.extent[k];
      phase -= chi[k] * (off + state.reference_mean[k]);
    }
    const double w =
        state.amplitudes.segment(s * state.dim, state.dim).squaredNorm();
    acc += w * std::exp(Complex(0.0, phase));
  }
  return acc;
}

PhotonDistribution sambe_distribution(const SambeState& state) {
  PhotonDistribution dist;
  dist.lo = state.lo;
  dist.extent = state.extent;
  dist.time = state.time;
  dist.p.resize(state.sites());
  for (long s = 0; s < state.sites(); ++s)
    dist.p[s] = state.amplitudes.segment(s * state.dim, state.dim)
                    .squaredNorm();
  dist.normalization_defect = std::abs(dist.p.sum() - 1.0);
  dist.p /= dist.p.sum();
  return dist;
}

PhotonDistribution sambe_marginal(const SambeState& state, int mode) {
  PhotonDistribution joint = sambe_distribution(state);
  PhotonDistribution dist;
  dist.lo = {state.lo[mode]};
  dist.extent = {state.extent[mode]};
  dist.time = state.time;
  dist.p = RealVector::Zero(state.extent[mode]);
  for (long s = 0; s < joint.size(); ++s) {
    const auto n = joint.offsets(s);
    dist.p[n[mode] - state.lo[mode]] += joint.p[s];
  }
  dist.normalization_defect = joint.normalization_defect;
  return dist;
}

Matrix sambe_matter_density(const SambeState& state) {
  Matrix rho = Matrix::Zero(state.dim, state.dim);
  for (long s = 0; s < state.sites(); ++s) {
    const auto psi = state.amplitudes.segment(s * state.dim, state.dim);
    rho += psi * psi.adjoint();
  }
  return rho;
}

RealVector sambe_direct_cumulants(const SambeState& state, int mode,
                                  int max_order) {
  PhotonDistribution marginal = sambe_marginal(state, mode);
  std::array<double, 4> m{};
  for (long i = 0; i < marginal.size(); ++i) {
    const double n =
        marginal.lo[0] + static_cast<double>(i) + state.reference_mean[mode];
    double pw = marginal.p[i];
    for (int l = 0; l < 4; ++l) {
      m[l] += pw * n;
      pw *= n;
    }
  }
  // m[l] accumulated as p * n^{l+1}
  const auto kappa = cumulants_from_moments(m);
  RealVector out(max_order);
  for (int l = 0; l < max_order; ++l) out[l] = kappa[l];
  return out;
}

std::vector<Matrix> sambe_propagator_blocks(const DrivenSystem& sys,
                                            int window, double t,
                                            const SambeOptions& opts) {
  if (sys.n_modes() != 1)
    throw SpecError("sambe_propagator_blocks: one-mode systems only");
  const int dim = sys.dim();
  std::vector<int> lo = {-window};
  std::vector<int> extent = {2 * window + 1};
  SambeLattice lattice(sys, lo, extent);
  std::vector<Matrix> blocks(extent[0], Matrix::Zero(dim, dim));
  for (int col = 0; col < dim; ++col) {
    SambeState st;
    st.lo = lo;
    st.extent = extent;
    st.dim = dim;
    st.time = 0.0;
    st.mode_frequencies = RealVector::Zero(1);
    st.mode_frequencies[0] = sys.modes()[0].frequency;
    st.reference_mean = RealVector::Zero(1);
    st.amplitudes = Vector::Zero(static_cast<long>(extent[0]) * dim);
    st.amplitudes[static_cast<long>(window) * dim + col] = 1.0;
    SambeOptions o = opts;
    o.boundary_tol = 1.0;  // basis columns spread; caller checks truncation
    LanczosExp krylov(st.amplitudes.size(), o.krylov_max, o.krylov_tol);
    sambe_advance(sys, lattice, st, t, o, krylov);
    for (int i = 0; i < extent[0]; ++i)
      for (int r = 0; r < dim; ++r)
        blocks[i](r, col) = st.amplitudes[static_cast<long>(i) * dim + r];
  }
  return blocks;
}

namespace {

struct FockLattice {
  int n_states;  // per mode: 0..n_max
  int dim = 2;
  double delta;
  double g;

  void apply(const Vector& in, Vector& out) const {
    const long n2s = n_states;
    out.setZero();
    const Complex* src = in.data();
    Complex* dst = out.data();
    // basis |e> = index 0, |g> = index 1
    for (long n1 = 0; n1 < n_states; ++n1)
      for (long n2 = 0; n2 < n_states; ++n2) {
        const long s = (n1 * n2s + n2) * dim;
        dst[s + 0] += 0.5 * delta * src[s + 0];
        dst[s + 1] -= 0.5 * delta * src[s + 1];
        // g sigma_+ a_1: |e, n1> <- sqrt(n1+1) |g, n1+1>
        if (n1 + 1 < n_states)
          dst[s + 0] += g * std::sqrt(double(n1 + 1)) *
                        src[((n1 + 1) * n2s + n2) * dim + 1];
        if (n1 > 0)
          dst[s + 1] += g * std::sqrt(double(n1)) *
                        src[((n1 - 1) * n2s + n2) * dim + 0];
        if (n2 + 1 < n_states)
          dst[s + 0] += g * std::sqrt(double(n2 + 1)) *
                        src[(n1 * n2s + (n2 + 1)) * dim + 1];
        if (n2 > 0)
          dst[s + 1] += g * std::sqrt(double(n2)) *
                        src[(n1 * n2s + (n2 - 1)) * dim + 0];
      }
  }
};

}  // namespace

double FockJCState::top_shell_mass() const {
  const long n_states = n_max + 1;
  double mass = 0.0;
  for (long n1 = 0; n1 < n_states; ++n1)
    for (long n2 = 0; n2 < n_states; ++n2)
      if (n1 >= n_states - 2 || n2 >= n_states - 2)
        mass += amplitudes.segment((n1 * n_states + n2) * 2, 2).squaredNorm();
  return mass;
}

SambeState FockJCState::as_offset_state() const {
  SambeState st;
  const int n_states = n_max + 1;
  st.dim = 2;
  st.time = time;
  st.mode_frequencies = RealVector::Zero(2);
  st.reference_mean.resize(2);
  st.reference_mean << std::round(alpha[0] * alpha[0]),
      std::round(alpha[1] * alpha[1]);
  st.lo = {-static_cast<int>(st.reference_mean[0]),
           -static_cast<int>(st.reference_mean[1])};
  st.extent = {n_states, n_states};
  st.amplitudes = amplitudes;
  return st;
}

FockJCState fock_jc_evolve_sampled(
    const JCParams& params, double g, const RealVector& alpha,
    const Vector& matter_state, const RealVector& times,
    const FockJCOptions& opts,
    const std::function<void(const FockJCState&)>& sample) {
  if (alpha.size() != 2) throw SpecError("fock_jc_evolve: two modes");
  if (matter_state.size() != 2)
    throw SpecError("fock_jc_evolve: two-level matter state");
  int n_max = opts.n_max;
  const double amax = alpha.maxCoeff();
  if (n_max <= 0)
    n_max = static_cast<int>(std::ceil(amax * amax + 8.0 * amax + 20.0));
  for (int k = 0; k < 2; ++k)
    if (alpha[k] * alpha[k] + 6.0 * alpha[k] >= n_max)
      throw SpecError("fock_jc_evolve: truncation too small for alpha");

  const int n_states = n_max + 1;
  FockJCState st;
  st.n_max = n_max;
  st.alpha = alpha;
  st.time = 0.0;
  st.amplitudes.resize(static_cast<long>(n_states) * n_states * 2);
  // coherent amplitudes c_n = e^{-a^2/2} a^n e^{i phi n} / sqrt(n!)
  const RealVector phases = params.phases();
  std::vector<Vector> coherent(2, Vector(n_states));
  for (int k = 0; k < 2; ++k) {
    if (alpha[k] <= 0.0)
      throw SpecError("fock_jc_evolve: alpha must be positive");
    double log_fact = 0.0;
    for (int n = 0; n < n_states; ++n) {
      if (n > 0) log_fact += std::log(double(n));
      const double log_mag = -0.5 * alpha[k] * alpha[k] +
                             n * std::log(alpha[k]) - 0.5 * log_fact;
      coherent[k][n] = std::exp(log_mag) *
                       std::exp(Complex(0.0, phases[k] * n));
    }
  }
  for (long n1 = 0; n1 < n_states; ++n1)
    for (long n2 = 0; n2 < n_states; ++n2)
      for (int m = 0; m < 2; ++m)
        st.amplitudes[(n1 * n_states + n2) * 2 + m] =
            coherent[0][n1] * coherent[1][n2] * matter_state[m];
  st.amplitudes /= st.amplitudes.norm();

  FockLattice lattice{n_states, 2, params.detuning(), g};
  LanczosExp krylov(st.amplitudes.size(), opts.krylov_max, opts.krylov_tol);
  auto op = [&](const Vector& in, Vector& out) { lattice.apply(in, out); };
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    while (st.time < times[i] - 1e-12) {
      const double h = std::min(opts.dt, times[i] - st.time);
      krylov.apply(op, h, st.amplitudes);
      st.time += h;
    }
    const double shell = st.top_shell_mass();
    if (shell > opts.shell_tol)
      throw NumericsError(
          "fock_jc_evolve: top Fock shells populated; raise n_max", shell);
    if (sample) sample(st);
  }
  return st;
}

FockJCState fock_jc_evolve(const JCParams& params, double g,
                           const RealVector& alpha, const Vector& matter_state,
                           double t, const FockJCOptions& opts) {
  RealVector times(1);
  times << t;
  return fock_jc_evolve_sampled(params, g, alpha, matter_state, times, opts,
                                nullptr);
}

}  // namespace prft
