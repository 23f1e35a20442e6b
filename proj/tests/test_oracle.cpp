#include <doctest.h>

#include "prft/counting.hpp"
#include "prft/decoherence.hpp"
#include "prft/oracle.hpp"
#include "prft/propagator.hpp"

using namespace prft;

namespace {

Vector plus_state() {
  Vector v(2);
  v << 1.0, 1.0;
  return v / v.norm();
}

GaussianPhotonState jc_photons(double sigma) {
  const JCParams params = JCParams::fig_preset();
  return GaussianPhotonState(RealVector::Zero(2),
                             sigma * RealMatrix::Identity(2, 2),
                             params.phases());
}

}  // namespace

TEST_CASE("free Sambe evolution only rotates the lab phases") {
  // one cosine mode with zero amplitude: H^int = H_M acts on matter only
  std::vector<DriveMode> modes = {
      {2.0, 0.0, 0.0, DriveKind::Cosine, pauli_x()}};
  DrivenSystem sys(0.4 * pauli_z(), modes);
  RealVector nbar(1), phases(1);
  nbar << 0.0;
  phases << 0.2;
  RealMatrix s(1, 1);
  s << 5.0;
  GaussianPhotonState photons(nbar, s, phases);
  SambeOptions opts;
  opts.window = 70;
  const double t = 3.0;
  SambeState st = sambe_evolve(sys, photons, plus_state(), t, opts);
  CHECK(std::abs(st.norm() - 1.0) < 1e-10);
  // |amplitudes|^2 static
  RealVector off(1);
  for (int n = -15; n <= 15; ++n) {
    off[0] = n;
    const double expected = std::norm(photons.amplitude(off));
    const Vector amp = st.lab_amplitudes({n});
    CHECK(amp.squaredNorm() == doctest::Approx(expected).epsilon(1e-9));
    // lab phases carry e^{-i omega n t} relative to the matter rotation
    const Vector expected_amp =
        photons.amplitude(off) *
        std::exp(Complex(0.0, -2.0 * n * t)) *
        (expm_hermitian(0.4 * pauli_z(), t) * plus_state());
    CHECK((amp - expected_amp).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Sambe MGF matches the exact Gaussian MGF on the JC preset") {
  DrivenSystem sys = jc_rotating_system(JCParams::fig_preset());
  GaussianPhotonState photons = jc_photons(10.0);
  const Vector matter = plus_state();
  const double t = 10.0;
  SambeOptions opts;
  opts.window = 0;
  opts.drift_rate = 0.5;
  SambeState st = sambe_evolve(sys, photons, matter, t, opts);
  CHECK(std::abs(st.norm() - 1.0) < 1e-10);
  CHECK(st.boundary_mass() < 1e-8);
  PropagatorCache cache(sys);
  double worst = 0.0;
  for (double c1 : {0.0, 0.3, -1.2, 2.9})
    for (double c2 : {0.0, -0.7, 1.8}) {
      RealVector chi(2);
      chi << c1, c2;
      const Complex lattice = sambe_mgf(st, chi);
      const Complex engine = mgf_exact_gaussian(
          sys, photons, matter, chi, t, QuadratureOptions{}, &cache);
      worst = std::max(worst, std::abs(lattice - engine));
    }
  CHECK(worst < 1e-6);
}

TEST_CASE("direct lattice cumulants agree with MGF derivatives") {
  DrivenSystem sys = jc_rotating_system(JCParams::fig_preset());
  GaussianPhotonState photons = jc_photons(8.0);
  SambeState st = sambe_evolve(sys, photons, plus_state(), 15.0,
                               SambeOptions{});
  const RealVector direct = sambe_direct_cumulants(st, 0, 2);
  const MgfFunction mgf = [&](const RealVector& chi) {
    return sambe_mgf(st, chi);
  };
  const RealVector fd = cumulants_at(mgf, 0, 2, 2, 1e-3);
  CHECK(std::abs(direct[0] - fd[0]) < 1e-8 * std::max(1.0, std::abs(fd[0])));
  CHECK(std::abs(direct[1] - fd[1]) < 1e-6 * fd[1]);
  // Gaussian initial state: kappa_3, kappa_4 of the t = 0 lattice vanish
  SambeState st0 = sambe_evolve(sys, photons, plus_state(), 0.0,
                                SambeOptions{});
  const RealVector k0 = sambe_direct_cumulants(st0, 0, 4);
  CHECK(std::abs(k0[2]) < 1e-6 * std::pow(8.0, 3));
  CHECK(std::abs(k0[3]) < 1e-6 * std::pow(8.0, 4));
}

TEST_CASE("product initial state stays pure at t = 0") {
  DrivenSystem sys = jc_rotating_system(JCParams::fig_preset());
  SambeState st = sambe_evolve(sys, jc_photons(6.0), plus_state(), 0.0,
                               SambeOptions{});
  const Matrix rho = sambe_matter_density(st);
  const double purity = std::real((rho * rho).trace());
  CHECK(purity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("interaction-picture blocks reconstruct the semiclassical "
          "propagator") {
  // one-mode driven system; Appendix-A equivalence at desk scale
  std::vector<DriveMode> modes = {
      {2.0, 1.1, 0.0, DriveKind::Cosine, pauli_x()}};
  DrivenSystem sys(0.4 * pauli_z(), modes);
  const double t = 4.0;
  SambeOptions opts;
  opts.dt = 0.05;
  const int window = 48;
  const auto blocks = sambe_propagator_blocks(sys, window, t, opts);
  for (double phi : {-2.0, 0.0, 0.8, 2.9}) {
    Matrix sum = Matrix::Zero(2, 2);
    for (int m = -window; m <= window; ++m)
      sum += std::exp(Complex(0.0, -m * phi)) * blocks[m + window];
    RealVector pv(1);
    pv << phi;
    const Matrix direct = propagate_to(sys, pv, t);
    CHECK((sum - direct).cwiseAbs().maxCoeff() < 1e-6);
  }
  // translation invariance: the blocks columns at shifted offsets coincide
  // (tested implicitly: the reconstruction above holds for every phi)
}

TEST_CASE("truncated-Fock JC oracle") {
  const JCParams params = JCParams::fig_preset();
  SUBCASE("g = 0 keeps Poisson statistics static") {
    RealVector alpha(2);
    alpha << 6.0, 6.0;
    FockJCState st = fock_jc_evolve(params, 0.0, alpha, plus_state(), 7.0);
    CHECK(std::abs(st.amplitudes.norm() - 1.0) < 1e-10);
    SambeState view = st.as_offset_state();
    PhotonDistribution dist = sambe_marginal(view, 0);
    // Poisson with mean 36
    double mean = 0.0;
    for (long i = 0; i < dist.size(); ++i)
      mean += (dist.lo[0] + i + view.reference_mean[0]) * dist.p[i];
    CHECK(mean == doctest::Approx(36.0).epsilon(1e-8));
  }
  SUBCASE("photon distribution approaches the PRFT prediction") {
    // alpha^2 = 100: the coherent state is the sigma^2 = nbar Gaussian
    RealVector alpha(2);
    alpha << 10.0, 10.0;
    const double g = 0.5 / alpha[0];  // Omega_k = 2 g alpha = 1
    DrivenSystem sys = jc_rotating_system(params);
    Vector seed = Vector::Zero(2);
    seed[0] = 1.0;
    FloquetDecomposition dec =
        floquet_decompose(sys, params.phases(), seed);
    const Vector matter = dec.modes.front().col(0);
    const double t = 20.0;
    FockJCState st = fock_jc_evolve(params, g, alpha, matter, t);
    SambeState view = st.as_offset_state();
    PhotonDistribution fock = sambe_marginal(view, 0);

    PropagatorCache cache(sys);
    RealVector nbar(2);
    nbar << 100.0, 100.0;
    GaussianPhotonState photons =
        GaussianPhotonState::coherent(nbar, params.phases());
    const MgfFunction mgf = [&](const RealVector& chi) {
      return mgf_prft(sys, params.phases(), matter, chi, t, &cache) *
             mgf_initial(photons, chi);
    };
    FftOptions fft{512, 1e-9, 6, 100};  // offsets relative to nbar = 100
    PhotonDistribution prft =
        distribution_fft(mgf, 0, 2, t, 8.0, 120.0, fft);
    CHECK(fock.total_variation(prft) < 5e-2);
  }
}

TEST_CASE("Sambe and truncated-Fock distributions agree to O(1/alpha)") {
  const JCParams params = JCParams::fig_preset();
  RealVector alpha(2);
  alpha << 10.0, 10.0;
  const double g = 0.5 / alpha[0];
  const double t = 15.0;
  FockJCState fock = fock_jc_evolve(params, g, alpha, plus_state(), t);
  PhotonDistribution pf = sambe_marginal(fock.as_offset_state(), 0);

  DrivenSystem sys = jc_rotating_system(params);
  RealVector nbar(2);
  nbar << 100.0, 100.0;
  GaussianPhotonState photons =
      GaussianPhotonState::coherent(nbar, params.phases());
  SambeState sambe = sambe_evolve(sys, photons, plus_state(), t,
                                  SambeOptions{});
  PhotonDistribution ps = sambe_marginal(sambe, 0);
  CHECK(pf.total_variation(ps) < 0.5 / alpha[0]);
}

TEST_CASE("matter decoherence tracks the coherence-integral envelope") {
  // alpha^2 = 400; the sigma_y oscillation amplitude decays like the
  // Gaussian overlap of the two drifting conditional distributions
  const JCParams params = JCParams::fig_preset();
  RealVector alpha(2);
  alpha << 20.0, 20.0;
  const double g = 0.5 / alpha[0];
  DrivenSystem sys = jc_rotating_system(params);
  Vector seed = Vector::Zero(2);
  seed[0] = 1.0;
  FloquetDecomposition dec = floquet_decompose(sys, params.phases(), seed);
  dec.gradients = quasienergy_gradient(sys, params.phases(), dec);
  const Vector matter =
      (dec.modes.front().col(0) + dec.modes.front().col(1)) /
      std::sqrt(2.0);

  // sample sigma_y over one dressed period around two anchor times and
  // demodulate; the truncated-Fock oscillation has an O(1/alpha) phase slip
  // relative to the semiclassical one, so only the envelope is compared.
  // The sqrt(n) dispersion of the dressed splitting adds a dephasing factor
  // exp(-(2 dE/dN sigma_N t)^2 / 2) absent from the linearized model; for a
  // coherent state its rate equals the drift-overlap rate, so the 10%
  // window ends near t ~ 15 at alpha = 20.
  const double omega_osc = dec.quasienergies[1] - dec.quasienergies[0];
  const double period = 2.0 * pi / omega_osc;
  const std::vector<double> anchors = {2.0, 12.0};
  const int per_cluster = 12;
  RealVector times(anchors.size() * per_cluster);
  int idx = 0;
  for (double t0 : anchors)
    for (int i = 0; i < per_cluster; ++i)
      times[idx++] = t0 + period * i / per_cluster;
  FockJCOptions opts;
  opts.dt = 1.0;
  std::vector<double> sy;
  fock_jc_evolve_sampled(params, g, alpha, matter, times, opts,
                         [&](const FockJCState& st) {
                           Matrix rho = Matrix::Zero(2, 2);
                           const int ns = st.n_max + 1;
                           for (long s = 0; s < (long)ns * ns; ++s) {
                             const auto psi = st.amplitudes.segment(2 * s, 2);
                             rho += psi * psi.adjoint();
                           }
                           sy.push_back(
                               observable_expectation(rho, pauli_y()));
                         });
  auto demodulate = [&](int cluster) {
    double sc = 0.0, ss = 0.0;
    for (int i = 0; i < per_cluster; ++i) {
      const double t = times[cluster * per_cluster + i];
      const double v = sy[cluster * per_cluster + i];
      sc += v * std::cos(omega_osc * t);
      ss += v * std::sin(omega_osc * t);
    }
    return 2.0 * std::hypot(sc, ss) / per_cluster;
  };
  const double ratio_fock = demodulate(1) / demodulate(0);
  // Gaussian coherence-integral model at alpha^2 = 400 per mode
  auto model = [&](double t) {
    double c = 1.0;
    for (int k = 0; k < 2; ++k) {
      const double dn = t * (dec.gradients(0, k) - dec.gradients(1, k));
      c *= std::exp(-dn * dn / (8.0 * 400.0));
    }
    return c;
  };
  const double ratio_model = model(anchors[1]) / model(anchors[0]);
  CHECK(std::abs(ratio_fock - ratio_model) < 0.1 * ratio_model);
}

TEST_CASE("boundary-mass violation raises a numerics error") {
  DrivenSystem sys = jc_rotating_system(JCParams::fig_preset());
  GaussianPhotonState photons = jc_photons(10.0);
  SambeOptions opts;
  opts.window = 20;  // far too small for sigma = 10
  CHECK_THROWS_AS(sambe_evolve(sys, photons, plus_state(), 5.0, opts),
                  NumericsError);
}
