#include "prft/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace prft {

namespace {

constexpr double kCommensurateTol = 1e-9;  // relative
// Desk-scale bound: genuine rational ratios have small denominators; huge
// ones would only "match" floating-point noise.
constexpr long kMaxDenominator = 1 << 12;

// Best rational approximation p/q to x with q <= qmax (continued fractions).
std::pair<long, long> to_fraction(double x, long qmax) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    long a = static_cast<long>(std::floor(v));
    long p2 = a * p1 + p0;
    long q2 = a * q1 + q0;
    if (q2 > qmax) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = v - static_cast<double>(a);
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  return {p1, q1};
}

}  // namespace

double commensurate_period(const std::vector<DriveMode>& modes) {
  double omega0 = 0.0;
  for (const auto& m : modes)
    if (m.frequency > 0.0 && (omega0 == 0.0 || m.frequency < omega0))
      omega0 = m.frequency;
  if (omega0 == 0.0)
    throw SpecError(
        "commensurate_period: all drive frequencies vanish; a reference "
        "period must be supplied");

  long lcm_q = 1;
  for (const auto& m : modes) {
    if (m.frequency <= 0.0) continue;
    auto [p, q] = to_fraction(m.frequency / omega0, kMaxDenominator);
    if (q <= 0 || std::abs(m.frequency / omega0 - double(p) / double(q)) >
                      kCommensurateTol * (m.frequency / omega0)) {
      std::ostringstream os;
      os << "commensurate_period: frequency " << m.frequency
         << " is not a rational multiple of " << omega0
         << " within tolerance; Floquet machinery unavailable";
      throw SpecError(os.str());
    }
    lcm_q = std::lcm(lcm_q, q);
  }
  const double tau = 2.0 * pi * static_cast<double>(lcm_q) / omega0;
  for (const auto& m : modes) {
    if (m.frequency <= 0.0) continue;
    const double cycles = m.frequency * tau / (2.0 * pi);
    if (std::abs(cycles - std::round(cycles)) > kCommensurateTol * cycles)
      throw SpecError("commensurate_period: residual incommensurability");
  }
  return tau;
}

DrivenSystem::DrivenSystem(Matrix matter_hamiltonian,
                           std::vector<DriveMode> modes,
                           std::optional<double> reference_period)
    : matter_hamiltonian_(std::move(matter_hamiltonian)),
      modes_(std::move(modes)) {
  if (matter_hamiltonian_.rows() != matter_hamiltonian_.cols())
    throw SpecError("DrivenSystem: matter Hamiltonian must be square");
  if (!is_hermitian(matter_hamiltonian_))
    throw SpecError("DrivenSystem: matter Hamiltonian must be Hermitian");
  time_independent_ = true;
  for (auto& m : modes_) {
    if (m.amplitude < 0.0)
      throw SpecError("DrivenSystem: mode amplitude must be >= 0");
    if (m.frequency < 0.0)
      throw SpecError("DrivenSystem: mode frequency must be >= 0");
    if (m.coupling.rows() != matter_hamiltonian_.rows() ||
        m.coupling.cols() != matter_hamiltonian_.cols())
      throw SpecError("DrivenSystem: coupling dimension mismatch");
    if (m.kind == DriveKind::Cosine && !is_hermitian(m.coupling))
      throw SpecError("DrivenSystem: cosine coupling must be Hermitian");
    if (m.kind == DriveKind::Cosine && m.frequency <= 0.0)
      throw SpecError("DrivenSystem: cosine drive needs frequency > 0");
    m.phase = wrap_angle(m.phase);
    if (m.frequency > 0.0) time_independent_ = false;
  }
  if (time_independent_) {
    if (!reference_period || *reference_period <= 0.0)
      throw SpecError(
          "DrivenSystem: static system needs a positive reference period");
    period_ = *reference_period;
  } else {
    period_ = commensurate_period(modes_);
  }
}

Matrix DrivenSystem::hamiltonian(const RealVector& phases, double t) const {
  if (phases.size() != n_modes())
    throw SpecError("hamiltonian: phase vector length != number of modes");
  Matrix h = matter_hamiltonian_;
  for (int k = 0; k < n_modes(); ++k) {
    const DriveMode& m = modes_[k];
    const double theta = m.frequency * t - phases[k];
    if (m.kind == DriveKind::Cosine) {
      h += (m.amplitude * std::cos(theta)) * m.coupling;
    } else {
      const Complex c = 0.5 * m.amplitude * std::exp(Complex(0.0, -theta));
      h += c * m.coupling + std::conj(c) * m.coupling.adjoint();
    }
  }
  return h;
}

Matrix DrivenSystem::flux_operator(const RealVector& phases, double t,
                                   int k) const {
  if (k < 0 || k >= n_modes())
    throw SpecError("flux_operator: mode index out of range");
  if (phases.size() != n_modes())
    throw SpecError("flux_operator: phase vector length != number of modes");
  const DriveMode& m = modes_[k];
  const double theta = m.frequency * t - phases[k];
  if (m.kind == DriveKind::Cosine)
    return (m.amplitude * std::sin(theta)) * m.coupling;
  const Complex c =
      0.5 * m.amplitude * iunit * std::exp(Complex(0.0, -theta));
  return c * m.coupling + std::conj(c) * m.coupling.adjoint();
}

RealVector DrivenSystem::mean_phases() const {
  RealVector p(n_modes());
  for (int k = 0; k < n_modes(); ++k) p[k] = modes_[k].phase;
  return p;
}

GaussianPhotonState::GaussianPhotonState(RealVector mean_photons,
                                         RealMatrix sigma,
                                         RealVector mean_phases)
    : mean_photons_(std::move(mean_photons)),
      sigma_(std::move(sigma)),
      mean_phases_(std::move(mean_phases)) {
  const int n = static_cast<int>(mean_photons_.size());
  if (sigma_.rows() != n || sigma_.cols() != n || mean_phases_.size() != n)
    throw SpecError("GaussianPhotonState: inconsistent dimensions");
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw SpecError("GaussianPhotonState: Sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sigma_);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw SpecError("GaussianPhotonState: Sigma must be positive definite");
  for (int k = 0; k < n; ++k) mean_phases_[k] = wrap_angle(mean_phases_[k]);
  sigma_sq_ = sigma_ * sigma_;
  sigma_sq_inv_ = sigma_sq_.inverse();
  // Product of 1/((2 pi)^{1/4} sqrt(sigma_j)) over principal axes.
  log_norm_ = -0.25 * n * std::log(2.0 * pi);
  for (int k = 0; k < n; ++k)
    log_norm_ -= 0.5 * std::log(es.eigenvalues()[k]);
}

GaussianPhotonState GaussianPhotonState::coherent(
    const RealVector& mean_photons, const RealVector& mean_phases) {
  RealMatrix sigma = RealMatrix::Zero(mean_photons.size(), mean_photons.size());
  for (Eigen::Index k = 0; k < mean_photons.size(); ++k) {
    if (mean_photons[k] <= 0.0)
      throw SpecError("coherent preset needs mean photon numbers > 0");
    sigma(k, k) = std::sqrt(mean_photons[k]);
  }
  return GaussianPhotonState(mean_photons, sigma, mean_phases);
}

Complex GaussianPhotonState::amplitude(const RealVector& offsets) const {
  const double quad = offsets.dot(sigma_sq_inv_ * offsets);
  const double phase = mean_phases_.dot(offsets);
  return std::exp(log_norm_ - 0.25 * quad) *
         std::exp(Complex(0.0, phase));
}

Complex GaussianPhotonState::phase_amplitude(const RealVector& phases) const {
  RealVector d(phases.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k)
    d[k] = phases[k] - mean_phases_[k];
  const double quad = d.dot(sigma_sq_ * d);
  // Prefactor fixed by sum_n |a_n|^2 = int |a_phi|^2 dphi = 1:
  // (2/pi)^{N/4} sqrt(det Sigma).
  const int n = n_modes();
  double log_pref = 0.25 * n * std::log(2.0 / pi);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sigma_);
  for (int k = 0; k < n; ++k)
    log_pref += 0.5 * std::log(es.eigenvalues()[k]);
  const double phase = -d.dot(mean_photons_);
  return std::exp(log_pref - quad) * std::exp(Complex(0.0, phase));
}

}  // namespace prft
