#pragma once

#include <array>
#include <functional>

#include "prft/counting.hpp"

namespace prft {

/// M(chi) at one fixed time; chi carries all modes.
using MgfFunction = std::function<Complex(const RealVector&)>;

/// Factory handing out the fixed-time MGF (lets per-time setup such as the
/// integrated flux of the PFO variant happen once per time).
using MgfFamily = std::function<MgfFunction(double t)>;

struct CumulantSeries {
  int mode = 0;
  int max_order = 4;
  MgfVariant variant = MgfVariant::Prft;
  double fd_step = 1e-3;
  RealVector times;
  RealMatrix values;  // times x orders; column l-1 holds kappa_l

  RealVector order(int l) const { return values.col(l - 1); }
};

/// Cumulants kappa_1..kappa_L of mode `mode` by central finite differences
/// of K = log M at chi = 0: the complex log is unwrapped outward from chi=0
/// along the stencil, and each order is Richardson-extrapolated over
/// {h, h/2}. Throws when |M| < 1e-12 on the stencil (log singularity).
RealVector cumulants_at(const MgfFunction& mgf, int mode, int n_modes,
                        int max_order, double h);

CumulantSeries cumulant_series(const MgfFamily& family, int mode, int n_modes,
                               int max_order, double h,
                               const RealVector& times,
                               MgfVariant variant);

/// Cross-mode second cumulant kappa_{11} between modes a and b.
double covariance_fd(const MgfFunction& mgf, int mode_a, int mode_b,
                     int n_modes, double h);

/// Triangle relations between raw moments and cumulants, orders <= 4.
std::array<double, 4> moments_from_cumulants(const std::array<double, 4>& k);
std::array<double, 4> cumulants_from_moments(const std::array<double, 4>& m);

/// Probabilities on an integer offset lattice (relative to round(nbar)),
/// row-major over per-mode windows [lo_k, lo_k + extent_k).
struct PhotonDistribution {
  std::vector<int> lo;
  std::vector<int> extent;
  RealVector p;
  double time = 0.0;
  double normalization_defect = 0.0;

  int n_modes() const { return static_cast<int>(lo.size()); }
  long size() const { return p.size(); }
  long flat_index(const std::vector<int>& n) const;
  std::vector<int> offsets(long flat) const;
  double value(const std::vector<int>& n) const;

  /// Multilinear interpolation at real-valued offsets; zero outside.
  double interpolate(const RealVector& n) const;
  double total_variation(const PhotonDistribution& other) const;
};

struct FftOptions {
  int grid_size = 4096;       // counting grid G per active mode
  double clamp_tol = 1e-9;    // permitted FFT negativity
  double support_sigmas = 6;  // aliasing guard around the kappa estimate
  int mean_offset = 0;        // round(nbar): output offsets are n - mean
};

/// Inverse Fourier transform of the MGF along one mode axis (marginal
/// distribution). kappa estimates feed the Nyquist check: the engine refuses
/// to alias silently.
PhotonDistribution distribution_fft(const MgfFunction& mgf, int mode,
                                    int n_modes, double time,
                                    double kappa1_est, double kappa2_est,
                                    const FftOptions& opts = FftOptions{});

/// Joint distribution over all modes (small grids only).
PhotonDistribution joint_distribution_fft(const MgfFunction& mgf,
                                          const CountingGrid& grid,
                                          double time,
                                          const RealVector& kappa1_est,
                                          const RealVector& kappa2_est,
                                          double clamp_tol = 1e-9,
                                          double support_sigmas = 6);

/// Shift-and-mix evolution of the initial distribution:
/// p(n, t) = sum_mu |c_mu|^2 p(n - t grad E_mu, 0), linear interpolation for
/// the fractional parts. Errors when shifted mass leaves the lattice.
PhotonDistribution semiclassical_distribution(
    const FloquetDecomposition& decomp, const PhotonDistribution& initial,
    double t);

/// Least-squares power-law fit y = c x^e on log-log data.
struct PowerFit {
  double exponent = 0.0;
  double log_coeff = 0.0;
  double residual = 0.0;  // rms of log residuals
  double coeff() const { return std::exp(log_coeff); }
};
PowerFit fit_power_law(const RealVector& x, const RealVector& y);

/// Least-squares fit of kappa(t) = sum_{r=r0}^{l} c_r t^r; returns c_{r0..l}.
RealVector fit_time_polynomial(const RealVector& t, const RealVector& kappa,
                               int l, int r0 = 1);

struct ErrorScalingOrder {
  int order = 0;
  RealVector sigma2;          // swept variances
  RealMatrix error;           // sigma x times, |kappa_exact - kappa_prft|
  RealVector time_exponent;   // per sigma, fitted over the last decade
  double sigma_exponent = 0;  // of error(t_ref) vs sigma^2
  double f_coefficient = 0;   // kappa_error ~ f_l t^l / sigma^2
  RealVector prft_coefficients;  // kappa_{l,r} of the PRFT expansion
  bool conclusive = true;
};

struct ErrorScalingReport {
  RealVector times;
  std::vector<ErrorScalingOrder> orders;
  CumulantSeries prft;                // sigma-independent reference
  std::vector<CumulantSeries> exact;  // one per swept sigma^2
};

/// Sweeps sigma^2, differences EXACT vs PRFT cumulants of mode 0, fits the
/// t- and sigma-power laws and the PRFT time-expansion coefficients.
ErrorScalingReport error_scaling_fit(const DrivenSystem& sys,
                                     const RealVector& phibar,
                                     const Vector& matter_state,
                                     const std::vector<double>& sigma2_list,
                                     const RealVector& times, int max_order,
                                     double fd_step,
                                     double fit_residual_tol = 0.5);

}  // namespace prft
