#include "prft/statistics.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace prft {

namespace {

// K = log M on the 1-D stencil j = -4..4 (spacing h/2), phases unwrapped
// outward from chi = 0.
std::array<Complex, 9> log_stencil(const MgfFunction& mgf, int mode,
                                   int n_modes, double h) {
  std::array<Complex, 9> k{};
  std::array<Complex, 9> m{};
  RealVector chi = RealVector::Zero(n_modes);
  for (int j = -4; j <= 4; ++j) {
    chi[mode] = 0.5 * h * j;
    m[j + 4] = mgf(chi);
    if (std::abs(m[j + 4]) < 1e-12)
      throw NumericsError(
          "cumulants_at: |M| < 1e-12 on the stencil; decrease the step",
          std::abs(m[j + 4]));
  }
  auto unwrap = [&](int from, int to, int dir) {
    double prev = std::arg(m[from]);
    k[from] = Complex(std::log(std::abs(m[from])), prev);
    for (int j = from + dir; j != to + dir; j += dir) {
      double a = std::arg(m[j]);
      while (a - prev > pi) a -= 2.0 * pi;
      while (a - prev < -pi) a += 2.0 * pi;
      k[j] = Complex(std::log(std::abs(m[j])), a);
      prev = a;
    }
  };
  unwrap(4, 8, +1);
  unwrap(4, 0, -1);
  return k;
}

// kappa_1..4 from K values at {0, +-h, +-2h}; km/kp are K(-h), K(h) etc.
std::array<double, 4> fd_orders(const Complex& k2m, const Complex& k1m,
                                const Complex& k0, const Complex& k1p,
                                const Complex& k2p, double h) {
  std::array<double, 4> out{};
  // kappa_1 = i K'(0)
  out[0] = std::real(iunit * (k1p - k1m) / (2.0 * h));
  // kappa_2 = -K''(0)
  out[1] = -std::real((k1p - 2.0 * k0 + k1m) / (h * h));
  // kappa_3 = -i K'''(0)
  out[2] = std::real(-iunit * (k2p - 2.0 * k1p + 2.0 * k1m - k2m) /
                     (2.0 * h * h * h));
  // kappa_4 = K''''(0)
  out[3] = std::real((k2p - 4.0 * k1p + 6.0 * k0 - 4.0 * k1m + k2m) /
                     (h * h * h * h));
  return out;
}

}  // namespace

RealVector cumulants_at(const MgfFunction& mgf, int mode, int n_modes,
                        int max_order, double h) {
  if (max_order < 1 || max_order > 4)
    throw SpecError("cumulants_at: orders 1..4 supported");
  if (h <= 0.0 || h > pi / 8.0)
    throw SpecError("cumulants_at: step must lie in (0, pi/8]");
  const auto k = log_stencil(mgf, mode, n_modes, h);
  // index: j = -4..4 <-> k[j+4], spacing h/2
  const auto full = fd_orders(k[0], k[2], k[4], k[6], k[8], h);
  const auto half = fd_orders(k[2], k[3], k[4], k[5], k[6], 0.5 * h);
  RealVector out(max_order);
  for (int l = 0; l < max_order; ++l)
    out[l] = (4.0 * half[l] - full[l]) / 3.0;  // h^2 -> h^4 Richardson
  return out;
}

CumulantSeries cumulant_series(const MgfFamily& family, int mode, int n_modes,
                               int max_order, double h,
                               const RealVector& times, MgfVariant variant) {
  CumulantSeries s;
  s.mode = mode;
  s.max_order = max_order;
  s.variant = variant;
  s.fd_step = h;
  s.times = times;
  s.values.resize(times.size(), max_order);
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const MgfFunction mgf = family(times[i]);
    s.values.row(i) = cumulants_at(mgf, mode, n_modes, max_order, h);
  }
  return s;
}

double covariance_fd(const MgfFunction& mgf, int mode_a, int mode_b,
                     int n_modes, double h) {
  RealVector chi = RealVector::Zero(n_modes);
  auto eval = [&](double a, double b) {
    chi[mode_a] = a;
    chi[mode_b] = b;
    const Complex m = mgf(chi);
    if (std::abs(m) < 1e-12)
      throw NumericsError("covariance_fd: |M| too small");
    return std::log(m);
  };
  const Complex kpp = eval(h, h), kpm = eval(h, -h), kmp = eval(-h, h),
                kmm = eval(-h, -h);
  return -std::real((kpp - kpm - kmp + kmm) / (4.0 * h * h));
}

std::array<double, 4> moments_from_cumulants(const std::array<double, 4>& k) {
  const double k1 = k[0], k2 = k[1], k3 = k[2], k4 = k[3];
  return {k1, k2 + k1 * k1, k3 + 3.0 * k2 * k1 + k1 * k1 * k1,
          k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 +
              k1 * k1 * k1 * k1};
}

std::array<double, 4> cumulants_from_moments(const std::array<double, 4>& m) {
  const double m1 = m[0], m2 = m[1], m3 = m[2], m4 = m[3];
  return {m1, m2 - m1 * m1, m3 - 3.0 * m2 * m1 + 2.0 * m1 * m1 * m1,
          m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 -
              6.0 * m1 * m1 * m1 * m1};
}

long PhotonDistribution::flat_index(const std::vector<int>& n) const {
  long idx = 0;
  for (int k = 0; k < n_modes(); ++k) {
    const int j = n[k] - lo[k];
    if (j < 0 || j >= extent[k]) return -1;
    idx = idx * extent[k] + j;
  }
  return idx;
}

std::vector<int> PhotonDistribution::offsets(long flat) const {
  std::vector<int> n(n_modes());
  for (int k = n_modes() - 1; k >= 0; --k) {
    n[k] = lo[k] + static_cast<int>(flat % extent[k]);
    flat /= extent[k];
  }
  return n;
}

double PhotonDistribution::value(const std::vector<int>& n) const {
  const long idx = flat_index(n);
  return idx < 0 ? 0.0 : p[idx];
}

double PhotonDistribution::interpolate(const RealVector& n) const {
  const int nm = n_modes();
  std::vector<int> base(nm);
  std::vector<double> frac(nm);
  for (int k = 0; k < nm; ++k) {
    const double f = std::floor(n[k]);
    base[k] = static_cast<int>(f);
    frac[k] = n[k] - f;
  }
  double acc = 0.0;
  std::vector<int> corner(nm);
  for (int mask = 0; mask < (1 << nm); ++mask) {
    double w = 1.0;
    for (int k = 0; k < nm; ++k) {
      const int bit = (mask >> k) & 1;
      corner[k] = base[k] + bit;
      w *= bit ? frac[k] : 1.0 - frac[k];
    }
    if (w != 0.0) acc += w * value(corner);
  }
  return acc;
}

double PhotonDistribution::total_variation(
    const PhotonDistribution& other) const {
  // union of the windows
  double tv = 0.0;
  for (long i = 0; i < size(); ++i) {
    const auto n = offsets(i);
    tv += std::abs(p[i] - other.value(n));
  }
  for (long i = 0; i < other.size(); ++i) {
    const auto n = other.offsets(i);
    if (flat_index(n) < 0) tv += std::abs(other.p[i]);
  }
  return 0.5 * tv;
}

namespace {

std::mutex fftw_mutex;

// Inverse transform p_n = 1/G sum_j M(chi_j) e^{+i chi_j n} on the uniform
// grid chi_j = -pi + 2 pi j / G.
std::vector<Complex> inverse_chi_transform(const std::vector<Complex>& m) {
  const int g = static_cast<int>(m.size());
  std::vector<Complex> out(g);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_plan plan = fftw_plan_dft_1d(
        g,
        reinterpret_cast<fftw_complex*>(const_cast<Complex*>(m.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  // bin k of the backward DFT corresponds to n = k (mod G), with the -pi
  // grid origin contributing (-1)^n.
  for (int k = 0; k < g; ++k) {
    const long n = k <= g / 2 ? k : k - g;
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    out[k] *= sign / static_cast<double>(g);
  }
  return out;
}

void finalize_distribution(PhotonDistribution& dist, double clamp_tol) {
  const double total = dist.p.sum();
  dist.normalization_defect = std::abs(total - 1.0);
  const double most_negative = dist.p.minCoeff();
  if (most_negative < -clamp_tol)
    throw NumericsError(
        "distribution_fft: negativity beyond the FFT tolerance",
        -most_negative);
  dist.p = dist.p.cwiseMax(0.0);
  dist.p /= dist.p.sum();
}

}  // namespace

PhotonDistribution distribution_fft(const MgfFunction& mgf, int mode,
                                    int n_modes, double time,
                                    double kappa1_est, double kappa2_est,
                                    const FftOptions& opts) {
  const int g = opts.grid_size;
  if (g < 2 || (g & (g - 1)) != 0)
    throw SpecError("distribution_fft: grid size must be a power of two");
  const double support =
      std::abs(kappa1_est) +
      opts.support_sigmas * std::sqrt(std::max(0.0, kappa2_est));
  if (support > 0.5 * g - 2)
    throw NumericsError(
        "distribution_fft: estimated support exceeds the grid (aliasing); "
        "use a larger grid",
        support);

  std::vector<Complex> m(g);
  RealVector chi = RealVector::Zero(n_modes);
  for (int j = 0; j < g; ++j) {
    chi[mode] = -pi + 2.0 * pi * j / g;
    // referencing to round(nbar): M -> M e^{+i chi nbar} recenters the
    // lattice on the offset convention
    m[j] = mgf(chi) * std::exp(Complex(0.0, chi[mode] * opts.mean_offset));
  }
  const auto pn = inverse_chi_transform(m);

  PhotonDistribution dist;
  dist.lo = {-g / 2};
  dist.extent = {g};
  dist.time = time;
  dist.p.resize(g);
  for (int n = -g / 2; n < g / 2; ++n)
    dist.p[n + g / 2] = std::real(pn[(n + g) % g]);
  finalize_distribution(dist, opts.clamp_tol);
  return dist;
}

PhotonDistribution joint_distribution_fft(const MgfFunction& mgf,
                                          const CountingGrid& grid,
                                          double time,
                                          const RealVector& kappa1_est,
                                          const RealVector& kappa2_est,
                                          double clamp_tol,
                                          double support_sigmas) {
  const int nm = grid.n_modes();
  for (int k = 0; k < nm; ++k) {
    const double support =
        std::abs(kappa1_est[k]) +
        support_sigmas * std::sqrt(std::max(0.0, kappa2_est[k]));
    if (support > 0.5 * grid.size(k) - 2)
      throw NumericsError("joint_distribution_fft: aliasing on mode " +
                              std::to_string(k + 1),
                          support);
  }
  // Dense N-D evaluation; meant for modest grids. Transform axes in turn.
  const long total = grid.total();
  std::vector<Complex> values(total);
  for (long flat = 0; flat < total; ++flat) values[flat] = mgf(grid.chi(flat));

  // Backward DFT along each axis (row-major layout).
  long stride = 1;
  for (int k = nm - 1; k >= 0; --k) {
    const int g = grid.size(k);
    const long blocks = total / g;
    std::vector<Complex> line(g), transformed(g);
    for (long b = 0; b < blocks; ++b) {
      // decompose block index into (outer, inner) around axis k
      const long inner = b % stride;
      const long outer = b / stride;
      const long base = outer * stride * g + inner;
      for (int j = 0; j < g; ++j) line[j] = values[base + j * stride];
      transformed = inverse_chi_transform(line);
      for (int j = 0; j < g; ++j) values[base + j * stride] = transformed[j];
    }
    stride *= g;
  }

  PhotonDistribution dist;
  dist.time = time;
  dist.lo.resize(nm);
  dist.extent.resize(nm);
  for (int k = 0; k < nm; ++k) {
    dist.lo[k] = -grid.size(k) / 2;
    dist.extent[k] = grid.size(k);
  }
  dist.p.resize(total);
  for (long flat = 0; flat < total; ++flat) {
    // map offsets n_k to DFT bins (n + G) mod G per axis
    long rem = flat, bin = 0, stride_acc = 1;
    (void)stride_acc;
    std::vector<int> n(nm);
    for (int k = nm - 1; k >= 0; --k) {
      n[k] = dist.lo[k] + static_cast<int>(rem % dist.extent[k]);
      rem /= dist.extent[k];
    }
    bin = 0;
    for (int k = 0; k < nm; ++k)
      bin = bin * grid.size(k) + ((n[k] + grid.size(k)) % grid.size(k));
    dist.p[flat] = std::real(values[bin]);
  }
  finalize_distribution(dist, clamp_tol);
  return dist;
}

PhotonDistribution semiclassical_distribution(
    const FloquetDecomposition& decomp, const PhotonDistribution& initial,
    double t) {
  const int nm = initial.n_modes();
  if (decomp.gradients.cols() != nm)
    throw SpecError("semiclassical_distribution: gradients not available");
  PhotonDistribution out = initial;
  out.time = t;
  out.p.setZero();
  RealVector shifted(nm);
  for (Eigen::Index mu = 0; mu < decomp.coefficients.size(); ++mu) {
    const double w = std::norm(decomp.coefficients[mu]);
    if (w == 0.0) continue;
    const RealVector dn = t * decomp.gradients.row(mu).transpose();
    for (long flat = 0; flat < out.size(); ++flat) {
      const auto n = out.offsets(flat);
      for (int k = 0; k < nm; ++k) shifted[k] = n[k] - dn[k];
      out.p[flat] += w * initial.interpolate(shifted);
    }
  }
  const double defect = std::abs(out.p.sum() - initial.p.sum());
  if (defect > 1e-9)
    throw NumericsError(
        "semiclassical_distribution: shift pushed probability off the "
        "lattice; enlarge the window",
        defect);
  out.normalization_defect = defect;
  return out;
}

PowerFit fit_power_law(const RealVector& x, const RealVector& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw SpecError("fit_power_law: need >= 2 points");
  const Eigen::Index n = x.size();
  RealVector lx(n), ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw SpecError("fit_power_law: data must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = lx.mean(), my = ly.mean();
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  PowerFit fit;
  fit.exponent = sxy / sxx;
  fit.log_coeff = my - fit.exponent * mx;
  double rss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.log_coeff + fit.exponent * lx[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

RealVector fit_time_polynomial(const RealVector& t, const RealVector& kappa,
                               int l, int r0) {
  const int terms = l - r0 + 1;
  RealMatrix a(t.size(), terms);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    for (int r = 0; r < terms; ++r) a(i, r) = std::pow(t[i], r0 + r);
  return a.colPivHouseholderQr().solve(kappa);
}

ErrorScalingReport error_scaling_fit(const DrivenSystem& sys,
                                     const RealVector& phibar,
                                     const Vector& matter_state,
                                     const std::vector<double>& sigma2_list,
                                     const RealVector& times, int max_order,
                                     double fd_step, double fit_residual_tol) {
  if (sigma2_list.size() < 3)
    throw SpecError("error_scaling_fit: need >= 3 sigma values");
  const int nm = sys.n_modes();
  const int ns = static_cast<int>(sigma2_list.size());

  PropagatorCache cache(sys);
  // PRFT cumulants are sigma-independent: one series.
  const MgfFamily prft_family = [&](double t) -> MgfFunction {
    return [&, t](const RealVector& chi) {
      return mgf_prft(sys, phibar, matter_state, chi, t, &cache);
    };
  };
  CumulantSeries prft = cumulant_series(prft_family, 0, nm, max_order,
                                        fd_step, times, MgfVariant::Prft);

  std::vector<CumulantSeries> exact(ns);
  for (int s = 0; s < ns; ++s) {
    RealVector nbar = RealVector::Zero(nm);
    RealMatrix sigma =
        std::sqrt(sigma2_list[s]) * RealMatrix::Identity(nm, nm);
    GaussianPhotonState state(nbar, sigma, phibar);
    const MgfFamily fam = [&, state](double t) -> MgfFunction {
      return [&, state, t](const RealVector& chi) {
        return mgf_dynamical_gaussian(sys, state, matter_state, chi, t,
                                      QuadratureOptions{}, &cache);
      };
    };
    exact[s] = cumulant_series(fam, 0, nm, max_order, fd_step, times,
                               MgfVariant::Exact);
  }

  ErrorScalingReport report;
  report.times = times;
  report.prft = prft;
  report.exact = exact;
  // Fit window: last decade of the time grid.
  std::vector<Eigen::Index> win;
  for (Eigen::Index i = 0; i < times.size(); ++i)
    if (times[i] >= 0.1 * times[times.size() - 1] && times[i] > 0.0)
      win.push_back(i);

  for (int l = 1; l <= max_order; ++l) {
    ErrorScalingOrder ord;
    ord.order = l;
    ord.sigma2 = Eigen::Map<const RealVector>(sigma2_list.data(), ns);
    ord.error.resize(ns, times.size());
    ord.time_exponent.resize(ns);
    for (int s = 0; s < ns; ++s) {
      for (Eigen::Index i = 0; i < times.size(); ++i)
        ord.error(s, i) =
            std::abs(exact[s].values(i, l - 1) - prft.values(i, l - 1));
      RealVector tw(win.size()), ew(win.size());
      for (std::size_t i = 0; i < win.size(); ++i) {
        tw[i] = times[win[i]];
        ew[i] = std::max(ord.error(s, win[i]), 1e-300);
      }
      PowerFit tf = fit_power_law(tw, ew);
      ord.time_exponent[s] = tf.exponent;
      if (tf.residual > fit_residual_tol) ord.conclusive = false;
    }
    // sigma exponent at the final time
    RealVector s2(ns), err_ref(ns);
    for (int s = 0; s < ns; ++s) {
      s2[s] = sigma2_list[s];
      err_ref[s] = std::max(ord.error(s, times.size() - 1), 1e-300);
    }
    PowerFit sf = fit_power_law(s2, err_ref);
    ord.sigma_exponent = sf.exponent;
    if (sf.residual > fit_residual_tol) ord.conclusive = false;
    // f_l from the largest sigma: error ~ f_l t^l / sigma^2
    const double tref = times[times.size() - 1];
    ord.f_coefficient = ord.error(ns - 1, times.size() - 1) *
                        sigma2_list[ns - 1] / std::pow(tref, l);
    // PRFT expansion kappa_{l,r}, r = 1..l, on the late-time window
    RealVector tw(win.size()), kw(win.size());
    for (std::size_t i = 0; i < win.size(); ++i) {
      tw[i] = times[win[i]];
      kw[i] = prft.values(win[i], l - 1);
    }
    ord.prft_coefficients = fit_time_polynomial(tw, kw, l, 1);
    report.orders.push_back(std::move(ord));
  }
  return report;
}

}  // namespace prft
