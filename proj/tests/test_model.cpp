#include <doctest.h>

#include <random>

#include "prft/jaynescummings.hpp"
#include "prft/model.hpp"

using namespace prft;

namespace {

DrivenSystem cosine_two_level(double eps, double omega, double amp) {
  Matrix hm = 0.5 * eps * pauli_z();
  std::vector<DriveMode> modes = {
      {omega, amp, 0.0, DriveKind::Cosine, pauli_x()}};
  return DrivenSystem(hm, modes);
}

// exhaustive rational search for the common period, independent of the
// continued-fraction route
double brute_force_period(const std::vector<double>& omegas) {
  double omega0 = omegas[0];
  for (double w : omegas) omega0 = std::min(omega0, w);
  for (int m = 1; m <= 100000; ++m) {
    const double tau = 2.0 * pi * m / omega0;
    bool ok = true;
    for (double w : omegas) {
      const double cycles = w * tau / (2.0 * pi);
      if (std::abs(cycles - std::round(cycles)) > 1e-9 * cycles) ok = false;
    }
    if (ok) return tau;
  }
  return -1.0;
}

}  // namespace

TEST_CASE("zero drive reproduces the matter Hamiltonian") {
  DrivenSystem sys = cosine_two_level(1.0, 3.0, 0.0);
  RealVector phi = RealVector::Zero(1);
  Matrix h = sys.hamiltonian(phi, 0.0);
  CHECK((h - 0.5 * pauli_z()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("JC preset matches the closed-form Rabi coupling") {
  const JCParams params = JCParams::fig_preset();
  DrivenSystem sys = jc_rotating_system(params);
  RealVector phi(2);
  phi << 0.0, 0.5 * pi;
  const Matrix h = sys.hamiltonian(phi, 0.0);
  const Complex rabi = params.omega1 * std::exp(Complex(0, phi[0])) +
                       params.omega2 * std::exp(Complex(0, phi[1]));
  Matrix expected(2, 2);
  expected << 0.5 * params.detuning(), 0.5 * rabi, 0.5 * std::conj(rabi),
      -0.5 * params.detuning();
  CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phase-time covariance of the drive") {
  DrivenSystem sys = cosine_two_level(0.7, 2.0, 1.3);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int it = 0; it < 50; ++it) {
    RealVector phi(1);
    phi << u(rng);
    const double t = u(rng), delta = u(rng);
    RealVector shifted = phi;
    shifted[0] += sys.modes()[0].frequency * delta;
    const Matrix a = sys.hamiltonian(phi, t);
    const Matrix b = sys.hamiltonian(shifted, t + delta);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Hamiltonian is Hermitian and periodic") {
  Matrix coupling(2, 2);
  coupling << 0.3, Complex(0.2, 0.7), 0.0, -0.1;
  Matrix hm = 0.4 * pauli_z() + 0.2 * pauli_x();
  std::vector<DriveMode> modes = {
      {2.0, 0.8, 0.3, DriveKind::Cosine, pauli_x()},
      {3.0, 0.5, -1.1, DriveKind::Rotating, coupling}};
  DrivenSystem sys(hm, modes);
  CHECK(sys.period() == doctest::Approx(2.0 * pi));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int it = 0; it < 40; ++it) {
    RealVector phi(2);
    phi << u(rng), u(rng);
    const double t = 5.0 * u(rng);
    const Matrix h = sys.hamiltonian(phi, t);
    CHECK(hermiticity_defect(h) < 1e-12);
    CHECK((h - sys.hamiltonian(phi, t + sys.period())).cwiseAbs().maxCoeff() <
          1e-12);
    RealVector phi2 = phi;
    phi2[0] += 2.0 * pi;
    CHECK((h - sys.hamiltonian(phi2, t)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("commensurate periods") {
  SUBCASE("single mode") {
    std::vector<DriveMode> m = {{1.7, 0.1, 0.0, DriveKind::Cosine, pauli_x()}};
    CHECK(commensurate_period(m) == doctest::Approx(2.0 * pi / 1.7));
  }
  SUBCASE("equal frequencies") {
    std::vector<DriveMode> m = {{2.5, 0.1, 0.0, DriveKind::Cosine, pauli_x()},
                                {2.5, 0.2, 0.0, DriveKind::Cosine, pauli_x()}};
    CHECK(commensurate_period(m) == doctest::Approx(2.0 * pi / 2.5));
  }
  SUBCASE("2:3 ratio against brute force") {
    std::vector<DriveMode> m = {{2.0, 0.1, 0.0, DriveKind::Cosine, pauli_x()},
                                {3.0, 0.2, 0.0, DriveKind::Cosine, pauli_x()}};
    const double expected = brute_force_period({2.0, 3.0});
    CHECK(expected == doctest::Approx(2.0 * pi));
    CHECK(commensurate_period(m) == doctest::Approx(expected));
  }
  SUBCASE("incommensurate frequencies rejected") {
    std::vector<DriveMode> m = {{1.0, 0.1, 0.0, DriveKind::Cosine, pauli_x()},
                                {std::sqrt(2.0), 0.2, 0.0, DriveKind::Cosine,
                                 pauli_x()}};
    CHECK_THROWS_AS(commensurate_period(m), SpecError);
  }
}

TEST_CASE("system validation") {
  Matrix bad = pauli_plus();  // not Hermitian
  std::vector<DriveMode> m = {{1.0, 1.0, 0.0, DriveKind::Cosine, bad}};
  CHECK_THROWS_AS(DrivenSystem(pauli_z(), m), SpecError);

  std::vector<DriveMode> neg = {{1.0, -1.0, 0.0, DriveKind::Cosine,
                                 pauli_x()}};
  CHECK_THROWS_AS(DrivenSystem(pauli_z(), neg), SpecError);

  // static system needs a reference period
  std::vector<DriveMode> stat = {{0.0, 1.0, 0.0, DriveKind::Rotating,
                                  pauli_plus()}};
  CHECK_THROWS_AS(DrivenSystem(pauli_z(), stat), SpecError);
  CHECK_NOTHROW(DrivenSystem(pauli_z(), stat, 1.0));

  // coupling dimension mismatch between modes and the matter Hamiltonian
  Matrix big = Matrix::Identity(3, 3);
  std::vector<DriveMode> mism = {{1.0, 1.0, 0.0, DriveKind::Cosine, big}};
  CHECK_THROWS_AS(DrivenSystem(pauli_z(), mism), SpecError);

  DrivenSystem sys(pauli_z(), {{1.0, 1.0, 0.0, DriveKind::Cosine, pauli_x()}});
  RealVector wrong(2);
  wrong << 0.0, 0.0;
  CHECK_THROWS_AS(sys.hamiltonian(wrong, 0.0), SpecError);
}

TEST_CASE("Gaussian photon state") {
  RealVector nbar(2), phases(2);
  nbar << 100.0, 0.0;
  phases << 0.2, 7.0;  // wraps
  SUBCASE("coherent preset has sigma^2 = nbar") {
    RealVector n2(2);
    n2 << 100.0, 25.0;
    GaussianPhotonState s = GaussianPhotonState::coherent(n2, phases);
    CHECK(s.sigma()(0, 0) == doctest::Approx(10.0));
    CHECK(s.sigma()(1, 1) == doctest::Approx(5.0));
    CHECK(s.mean_phases()[1] == doctest::Approx(wrap_angle(7.0)));
  }
  SUBCASE("positive definiteness enforced") {
    RealMatrix sigma = RealMatrix::Zero(2, 2);
    sigma(0, 0) = 1.0;  // second eigenvalue zero
    CHECK_THROWS_AS(GaussianPhotonState(nbar, sigma, phases), SpecError);
  }
  SUBCASE("lattice amplitudes are normalized") {
    RealMatrix sigma = RealMatrix::Identity(2, 2) * 4.0;
    GaussianPhotonState s(nbar, sigma, phases);
    double total = 0.0;
    RealVector off(2);
    for (int a = -30; a <= 30; ++a)
      for (int b = -30; b <= 30; ++b) {
        off << a, b;
        total += std::norm(s.amplitude(off));
      }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("phase amplitude is normalized over phase space") {
    RealVector n1(1), p1(1);
    n1 << 0.0;
    p1 << 0.0;
    RealMatrix sigma(1, 1);
    sigma << 6.0;
    GaussianPhotonState s(n1, sigma, p1);
    // trapezoid over [-pi, pi)
    const int g = 4096;
    double total = 0.0;
    RealVector phi(1);
    for (int j = 0; j < g; ++j) {
      phi << -pi + 2.0 * pi * j / g;
      total += std::norm(s.phase_amplitude(phi)) * (2.0 * pi / g);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}
