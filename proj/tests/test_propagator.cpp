#include <doctest.h>

#include <random>

#include "prft/jaynescummings.hpp"
#include "prft/propagator.hpp"

using namespace prft;

namespace {

DrivenSystem cosine_two_level(double eps, double omega, double amp,
                              double phase = 0.0) {
  Matrix hm = 0.5 * eps * pauli_z();
  std::vector<DriveMode> modes = {
      {omega, amp, phase, DriveKind::Cosine, pauli_x()}};
  return DrivenSystem(hm, modes);
}

RealVector linspace(double a, double b, int n) {
  RealVector g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("zero drive: diagonal free evolution") {
  const double eps = 0.8;
  DrivenSystem sys = cosine_two_level(eps, 2.0, 0.0);
  RealVector phi = RealVector::Zero(1);
  Propagator prop = evolve(sys, phi, linspace(0.0, 5.0, 11));
  for (Eigen::Index i = 0; i < prop.time_grid.size(); ++i) {
    const double t = prop.time_grid[i];
    Matrix expected(2, 2);
    expected << std::exp(Complex(0, -0.5 * eps * t)), 0.0, 0.0,
        std::exp(Complex(0, 0.5 * eps * t));
    CHECK((prop.unitaries[i] - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("unitarity and identity at t = 0") {
  DrivenSystem sys = cosine_two_level(1.0, 2.0, 0.9, 0.4);
  RealVector phi(1);
  phi << 0.7;
  Propagator prop = evolve(sys, phi, linspace(0.0, 12.0, 25));
  CHECK((prop.unitaries[0] - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(prop.max_unitarity_defect() < 1e-9);
}

TEST_CASE("Magnus step is 4th order") {
  DrivenSystem sys = cosine_two_level(1.0, 3.0, 1.5);
  RealVector phi(1);
  phi << 0.3;
  // reference: very fine integration to t = 1
  RealVector grid(2);
  grid << 0.0, 1.0;
  EvolveOptions tight;
  tight.tolerance = 1e-13;
  const Matrix ref = evolve(sys, phi, grid, tight).unitaries.back();

  auto coarse_error = [&](int steps) {
    static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    Matrix u = Matrix::Identity(2, 2);
    const double dt = 1.0 / steps;
    for (int i = 0; i < steps; ++i) {
      const double t = i * dt;
      u = magnus_step(sys.hamiltonian(phi, t + c1 * dt),
                      sys.hamiltonian(phi, t + c2 * dt), dt) *
          u;
    }
    return (u - ref).cwiseAbs().maxCoeff();
  };
  const double e8 = coarse_error(8);
  const double e16 = coarse_error(16);
  const double order = std::log2(e8 / e16);
  CHECK(order > 3.7);
}

TEST_CASE("composition over a split interval") {
  DrivenSystem sys = cosine_two_level(0.9, 2.0, 1.1, -0.2);
  RealVector phi(1);
  phi << 0.5;
  const double t1 = 1.25, t2 = 3.5;
  RealVector grid(3);
  grid << 0.0, t1, t2;
  Propagator prop = evolve(sys, phi, grid);
  // segment propagator from an independent solve: H_phi(t1 + s) =
  // H_{phi - omega t1}(s)
  RealVector shifted = phi;
  shifted[0] -= sys.modes()[0].frequency * t1;
  const Matrix useg = propagate_to(sys, shifted, t2 - t1);
  const Matrix composed = useg * prop.unitaries[1];
  CHECK((composed - prop.unitaries[2]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rotating drive reproduces the closed-form Rabi rotation") {
  // lab-frame JC drive: U_phi(t) = e^{-i omega t sigma_z / 2} e^{-i H_rot t}
  JCParams params = JCParams::fig_preset();
  params.omega = 2.0;
  params.epsilon = params.omega + 0.05;
  DrivenSystem sys = jc_lab_system(params);
  RealVector phi(2);
  phi << 0.4, 1.9;
  const DressedFrame frame = dressed_frame(params, phi);
  for (double t : {0.7, 2.3, 9.1}) {
    const Matrix u = propagate_to(sys, phi, t);
    const Matrix w = expm_hermitian(0.5 * params.omega * pauli_z(), t);
    const Matrix hrot = frame.energy * frame.sigma;
    const Matrix expected = w * expm_hermitian(hrot, t);
    CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("static systems take the closed-form path") {
  DrivenSystem sys = jc_rotating_system(JCParams::fig_preset());
  RealVector phi = sys.mean_phases();
  Propagator prop = evolve(sys, phi, linspace(0.0, 50.0, 6));
  CHECK(prop.max_unitarity_defect() < 1e-12);
  // group property holds exactly for a static Hamiltonian
  const Matrix u1 = prop.unitaries[1];
  CHECK((u1 * u1 - prop.unitaries[2]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("grid validation") {
  DrivenSystem sys = cosine_two_level(1.0, 2.0, 0.5);
  RealVector phi = RealVector::Zero(1);
  RealVector bad(2);
  bad << 0.5, 1.0;
  CHECK_THROWS_AS(evolve(sys, phi, bad), SpecError);
  RealVector nonmono(3);
  nonmono << 0.0, 1.0, 1.0;
  CHECK_THROWS_AS(evolve(sys, phi, nonmono), SpecError);
}

TEST_CASE("random driven systems stay unitary") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 5; ++it) {
    Matrix hm(2, 2);
    const double a = u(rng), b = u(rng), c = u(rng);
    hm << a, Complex(b, c), Complex(b, -c), -a;
    std::vector<DriveMode> modes = {
        {1.0, std::abs(u(rng)) + 0.2, u(rng), DriveKind::Cosine, pauli_x()},
        {2.0, std::abs(u(rng)), u(rng), DriveKind::Rotating, pauli_plus()}};
    DrivenSystem sys(hm, modes);
    RealVector phi(2);
    phi << u(rng), u(rng);
    Propagator prop = evolve(sys, phi, linspace(0.0, 7.0, 8));
    CHECK(prop.max_unitarity_defect() < 1e-9);
  }
}
