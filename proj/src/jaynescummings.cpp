#include "prft/jaynescummings.hpp"

#include <cmath>

#include "prft/floquet.hpp"

namespace prft {

JCParams JCParams::fig_preset() {
  JCParams p;
  p.epsilon = 0.05;  // rotating frame: only the detuning enters
  p.omega = 0.0;
  p.omega1 = 1.0;
  p.omega2 = 1.0;
  p.phase1 = 0.0;
  p.phase2 = 0.5 * pi;
  return p;
}

DressedFrame dressed_frame(const JCParams& params, const RealVector& phases) {
  if (phases.size() != 2) throw SpecError("dressed_frame: need two phases");
  const Complex rabi = params.omega1 * std::exp(Complex(0.0, phases[0])) +
                       params.omega2 * std::exp(Complex(0.0, phases[1]));
  const double delta = params.detuning();
  const double mod = std::abs(rabi);
  const double scale =
      std::abs(params.omega1) + std::abs(params.omega2) + std::abs(delta);
  if (std::hypot(delta, mod) < 1e-12 * std::max(scale, 1e-300))
    throw SpecError("dressed_frame: degenerate point (detuning = Omega = 0)");
  DressedFrame f;
  f.rabi = rabi;
  f.energy = 0.5 * std::hypot(delta, mod);
  f.theta = std::atan2(mod, delta);
  f.azimuth = std::arg(rabi);
  // sigma = H_rot / E with H_rot = (delta/2) sigma_z + (Omega/2) sigma_+ +
  // h.c.; equivalently cos(theta) sigma_z + sin(theta) (cos(azimuth) sigma_x
  // - sin(azimuth) sigma_y). The sign of the sigma_y component follows from
  // sigma_+ carrying e^{+i arg Omega}.
  Matrix h(2, 2);
  h << 0.5 * delta, 0.5 * rabi, 0.5 * std::conj(rabi), -0.5 * delta;
  f.sigma = h / f.energy;
  return f;
}

Complex jc_mgf_analytic(const JCParams& params, const Vector& matter_state,
                        const RealVector& chi, double t) {
  return jc_mgf_analytic(params, matter_state, chi, t, params.phases());
}

Complex jc_mgf_analytic(const JCParams& params, const Vector& matter_state,
                        const RealVector& chi, double t,
                        const RealVector& phibar) {
  if (chi.size() != 2) throw SpecError("jc_mgf_analytic: need two fields");
  if (matter_state.size() != 2 ||
      std::abs(matter_state.squaredNorm() - 1.0) > 1e-10)
    throw SpecError("jc_mgf_analytic: matter state must be a normalized "
                    "two-level state");
  const DressedFrame minus = dressed_frame(params, phibar - 0.5 * chi);
  const DressedFrame plus = dressed_frame(params, phibar + 0.5 * chi);
  const double cm = std::cos(minus.energy * t), sm = std::sin(minus.energy * t);
  const double cp = std::cos(plus.energy * t), sp = std::sin(plus.energy * t);
  const Complex prod =
      matter_state.dot(minus.sigma * (plus.sigma * matter_state));
  const Complex em = matter_state.dot(minus.sigma * matter_state);
  const Complex ep = matter_state.dot(plus.sigma * matter_state);
  // <U+_{-}(t) U_{+}(t)> = <e^{i E- sigma- t} e^{-i E+ sigma+ t}>; the frame
  // rotation W(t) is phase-independent and cancels.
  return Complex(cm * cp, 0.0) + sm * sp * prod +
         iunit * (sm * cp * em - cm * sp * ep);
}

DrivenSystem jc_rotating_system(const JCParams& params,
                                double reference_period) {
  Matrix hm = 0.5 * params.detuning() * pauli_z();
  std::vector<DriveMode> modes(2);
  modes[0] = {0.0, params.omega1, params.phase1, DriveKind::Rotating,
              pauli_plus()};
  modes[1] = {0.0, params.omega2, params.phase2, DriveKind::Rotating,
              pauli_plus()};
  return DrivenSystem(std::move(hm), std::move(modes), reference_period);
}

DrivenSystem jc_lab_system(const JCParams& params) {
  if (params.omega <= 0.0)
    throw SpecError("jc_lab_system: needs omega > 0");
  Matrix hm = 0.5 * params.epsilon * pauli_z();
  std::vector<DriveMode> modes(2);
  modes[0] = {params.omega, params.omega1, params.phase1, DriveKind::Rotating,
              pauli_plus()};
  modes[1] = {params.omega, params.omega2, params.phase2, DriveKind::Rotating,
              pauli_plus()};
  return DrivenSystem(std::move(hm), std::move(modes));
}

namespace {

GaussianPhotonState photons_with_sigma(const JCParams& params, double s1,
                                       double s2) {
  RealVector nbar = RealVector::Zero(2);
  RealMatrix sigma = RealMatrix::Zero(2, 2);
  sigma(0, 0) = s1;
  sigma(1, 1) = s2;
  return GaussianPhotonState(nbar, sigma, params.phases());
}

}  // namespace

FigurePreset figure_preset(const std::string& name) {
  const JCParams params = JCParams::fig_preset();
  DrivenSystem sys = jc_rotating_system(params);
  Vector ground = Vector::Zero(2);
  ground[0] = 1.0;
  FloquetDecomposition dec =
      floquet_decompose(sys, params.phases(), ground);
  const Vector u1 = dec.modes.front().col(0);
  const Vector u2 = dec.modes.front().col(1);

  auto superposition = [&](double c1, double c2) {
    Vector s = c1 * u1 + c2 * u2;
    s /= s.norm();
    return s;
  };

  if (name == "fig2") {
    FigurePreset p{name,
                   params,
                   sys,
                   photons_with_sigma(params, 100.0, 100.0),
                   {{"superposition", superposition(0.93, 0.38)}},
                   {1e2, 1e3, 1e4},
                   200.0,
                   201,
                   1e-3};
    return p;
  }
  if (name == "fig3") {
    FigurePreset p{name,
                   params,
                   sys,
                   photons_with_sigma(params, 100.0, 100.0),
                   {{"floquet", u1}},
                   {1e2, 1e3, 1e4},
                   200.0,
                   51,
                   0.05};
    return p;
  }
  if (name == "fig4") {
    FigurePreset p{name,
                   params,
                   sys,
                   photons_with_sigma(params, 100.0, 100.0),
                   {{"floquet", u1},
                    {"balanced", superposition(1.0, 1.0)},
                    {"superposition", superposition(0.93, 0.38)}},
                   {1e4},
                   200.0,
                   101,
                   1e-3};
    return p;
  }
  throw SpecError("figure_preset: unknown name '" + name +
                  "' (expected fig2, fig3 or fig4)");
}

}  // namespace prft
