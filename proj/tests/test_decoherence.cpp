#include <doctest.h>

#include "prft/counting.hpp"
#include "prft/decoherence.hpp"
#include "prft/jaynescummings.hpp"

using namespace prft;

namespace {

GaussianPhotonState single_mode_state(double sigma, double phase = 0.0) {
  RealVector n(1), p(1);
  n << 0.0;
  p << phase;
  RealMatrix s(1, 1);
  s << sigma;
  return GaussianPhotonState(n, s, p);
}

DrivenSystem undriven_two_level(double eps) {
  std::vector<DriveMode> modes = {
      {0.0, 0.0, 0.0, DriveKind::Rotating, pauli_plus()}};
  return DrivenSystem(0.5 * eps * pauli_z(), modes, 1.0);
}

Vector plus_state() {
  Vector v(2);
  v << 1.0, 1.0;
  return v / v.norm();
}

}  // namespace

TEST_CASE("Kraus operators of the trivial channel are a_n times identity") {
  DrivenSystem sys = undriven_two_level(0.7);
  GaussianPhotonState photons = single_mode_state(9.0, 0.3);
  KrausSet set = kraus_operators(sys, photons, 0.0, {-60}, {121});
  CHECK(set.completeness_defect() < 1e-10);
  RealVector off(1);
  for (int n = -25; n <= 25; ++n) {
    off[0] = n;
    const Complex a = photons.amplitude(off);
    const Matrix expected = a * Matrix::Identity(2, 2);
    CHECK((set.at({n}) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("JC channel: completeness and conditional probabilities") {
  FigurePreset preset = figure_preset("fig2");
  DrivenSystem& sys = preset.system;
  GaussianPhotonState photons(RealVector::Zero(2),
                              10.0 * RealMatrix::Identity(2, 2),
                              preset.params.phases());
  const Vector matter = preset.matter_states.front().second;
  const double t = 60.0;
  const int w = 110;  // 8 sigma + drift(60) + margin
  KrausSet set = kraus_operators(sys, photons, t, {-w, -w},
                                 {2 * w + 1, 2 * w + 1});
  CHECK(set.completeness_defect() <= 1e-8);

  const Matrix rho0 = matter * matter.adjoint();
  PhotonDistribution joint = set.outcome_distribution(rho0);
  CHECK(joint.normalization_defect < 1e-8);
  CHECK(joint.p.minCoeff() >= 0.0);

  // marginals against the FFT of the exact Gaussian MGF
  GaussianMgfEvaluator exact(sys, photons, matter, t);
  for (int mode = 0; mode < 2; ++mode) {
    const MgfFunction mgf = [&](const RealVector& chi) {
      return exact.total(chi);
    };
    PhotonDistribution marginal = distribution_fft(
        mgf, mode, 2, t, 25.0, 100.0 + 500.0, FftOptions{512, 1e-9, 6});
    // collapse the joint Kraus distribution onto this mode
    PhotonDistribution collapsed;
    collapsed.lo = {joint.lo[mode]};
    collapsed.extent = {joint.extent[mode]};
    collapsed.p = RealVector::Zero(joint.extent[mode]);
    for (long i = 0; i < joint.size(); ++i) {
      const auto n = joint.offsets(i);
      collapsed.p[n[mode] - joint.lo[mode]] += joint.p[i];
    }
    CHECK(collapsed.total_variation(marginal) < 1e-5);
  }
}

TEST_CASE("coherence integral") {
  GaussianPhotonState photons = single_mode_state(12.0);
  PhotonDistribution init =
      gaussian_lattice_distribution(photons, {-150}, {301});
  SUBCASE("equal shifts give exactly 1") {
    RealVector d(1);
    d << 17.3;
    CHECK(coherence_integral(init, d, d) == 1.0);
  }
  SUBCASE("Gaussian closed form") {
    for (double a : {0.0, 3.7, 12.0}) {
      for (double b : {-5.2, 0.0, 9.9}) {
        RealVector da(1), db(1);
        da << a;
        db << b;
        const double expected =
            std::exp(-(a - b) * (a - b) / (8.0 * 144.0));
        CHECK(coherence_integral(init, da, db) ==
              doctest::Approx(expected).epsilon(2e-4));
      }
    }
  }
  SUBCASE("distant shifts decouple") {
    RealVector da(1), db(1);
    da << 75.0;
    db << -75.0;
    CHECK(coherence_integral(init, da, db) <= 1e-6);
  }
}

TEST_CASE("semiclassical reduced density matrix") {
  FigurePreset preset = figure_preset("fig2");
  DrivenSystem& sys = preset.system;
  const RealVector phibar = preset.params.phases();
  GaussianPhotonState photons(RealVector::Zero(2),
                              100.0 * RealMatrix::Identity(2, 2), phibar);

  SUBCASE("t = 0 reproduces the pure initial state") {
    const Vector matter = preset.matter_states.front().second;
    FloquetDecomposition dec = floquet_decompose(sys, phibar, matter);
    dec.gradients = quasienergy_gradient(sys, phibar, dec);
    const RealMatrix c = coherence_matrix_gaussian(dec, photons, 0.0);
    const Matrix rho = reduced_density_semiclassical(dec, c, 0.0);
    const Matrix expected = matter * matter.adjoint();
    CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-12);
    const auto checks = check_density_matrix(rho);
    CHECK(checks.hermiticity < 1e-10);
    CHECK(checks.trace_defect < 1e-10);
    CHECK(checks.min_eigenvalue > -1e-9);
  }

  SUBCASE("initial Floquet state keeps sigma_y constant") {
    Vector seed = Vector::Zero(2);
    seed[0] = 1.0;
    FloquetDecomposition dec = floquet_decompose(sys, phibar, seed);
    dec.gradients = quasienergy_gradient(sys, phibar, dec);
    const Vector floquet = dec.modes.front().col(0);
    FloquetDecomposition dec_f = floquet_decompose(sys, phibar, floquet);
    dec_f.gradients = dec.gradients;
    const RealMatrix c0 = coherence_matrix_gaussian(dec_f, photons, 0.0);
    const double ref = observable_expectation(
        reduced_density_semiclassical(dec_f, c0, 0.0), pauli_y());
    for (double t : {13.0, 77.0, 180.0}) {
      const RealMatrix c = coherence_matrix_gaussian(dec_f, photons, t);
      const double val = observable_expectation(
          reduced_density_semiclassical(dec_f, c, t), pauli_y());
      CHECK(std::abs(val - ref) < 1e-6);
    }
  }

  SUBCASE("superposition decoheres with the Gaussian envelope") {
    const Vector matter = preset.matter_states.front().second;
    FloquetDecomposition dec = floquet_decompose(sys, phibar, matter);
    dec.gradients = quasienergy_gradient(sys, phibar, dec);
    for (double t : {50.0, 150.0}) {
      const RealMatrix c = coherence_matrix_gaussian(dec, photons, t);
      double model = 1.0;
      for (int k = 0; k < 2; ++k) {
        const double dn = t * (dec.gradients(0, k) - dec.gradients(1, k));
        model *= std::exp(-dn * dn / (8.0 * 1e4));
      }
      CHECK(c(0, 1) == doctest::Approx(model).epsilon(1e-3));
      const Matrix rho = reduced_density_semiclassical(dec, c, t);
      const auto checks = check_density_matrix(rho);
      CHECK(checks.hermiticity < 1e-10);
      CHECK(checks.trace_defect < 1e-10);
      CHECK(checks.min_eigenvalue > -1e-9);
    }
  }
}

TEST_CASE("observable expectations") {
  SUBCASE("maximally mixed state with traceless observable") {
    const Matrix rho = 0.5 * Matrix::Identity(2, 2);
    CHECK(observable_expectation(rho, pauli_y()) == doctest::Approx(0.0));
  }
  SUBCASE("pure eigenstate returns the eigenvalue") {
    Vector up = Vector::Zero(2);
    up[0] = 1.0;
    const Matrix rho = up * up.adjoint();
    CHECK(observable_expectation(rho, pauli_z()) == doctest::Approx(1.0));
  }
  SUBCASE("matches the direct vector expectation") {
    const Vector psi = plus_state();
    const Matrix rho = psi * psi.adjoint();
    const Complex direct = psi.dot(pauli_y() * psi);
    CHECK(observable_expectation(rho, pauli_y()) ==
          doctest::Approx(direct.real()).epsilon(1e-12));
  }
  SUBCASE("non-Hermitian observables are rejected") {
    const Matrix rho = 0.5 * Matrix::Identity(2, 2);
    CHECK_THROWS_AS(observable_expectation(rho, pauli_plus()), SpecError);
  }
}

TEST_CASE("linearized-propagator channel approximates the exact one") {
  FigurePreset preset = figure_preset("fig3");
  DrivenSystem& sys = preset.system;
  GaussianPhotonState photons(RealVector::Zero(2),
                              10.0 * RealMatrix::Identity(2, 2),
                              preset.params.phases());
  const Vector matter = preset.matter_states.front().second;
  const double t = 30.0;
  const int w = 100;
  KrausOptions approx;
  approx.approximate_propagator = true;
  KrausSet exact = kraus_operators(sys, photons, t, {-w, -w},
                                   {2 * w + 1, 2 * w + 1});
  KrausSet lin = kraus_operators(sys, photons, t, {-w, -w},
                                 {2 * w + 1, 2 * w + 1}, approx);
  CHECK(lin.completeness_defect() < 1e-8);
  const Matrix rho0 = matter * matter.adjoint();
  PhotonDistribution pe = exact.outcome_distribution(rho0);
  PhotonDistribution pl = lin.outcome_distribution(rho0);
  // the linearization drops quasienergy curvature; agreement is O(t/sigma^2)
  CHECK(pe.total_variation(pl) < 0.1);
  // for a single Floquet state the linearized amplitudes are shifted copies
  // of a_n
  FloquetDecomposition dec = floquet_decompose(
      sys, preset.params.phases(), matter);
  dec.gradients = quasienergy_gradient(sys, preset.params.phases(), dec);
  const RealVector dn = t * dec.gradients.row(0).transpose();
  RealVector off(2);
  double worst = 0.0;
  for (int n1 = -20; n1 <= 20; n1 += 5)
    for (int n2 = -20; n2 <= 20; n2 += 5) {
      off << n1 - dn[0], n2 - dn[1];
      // compare against the nearest-sample Gaussian magnitude
      const double expected = std::abs(photons.amplitude(off));
      const double got = (lin.at({n1, n2}) * matter).norm();
      worst = std::max(worst, std::abs(got - expected));
    }
  CHECK(worst < 0.02);
}
