#pragma once

#include <string>
#include <vector>

#include "prft/model.hpp"

namespace prft {

/// Two-mode Jaynes-Cummings parameters. Energies in units of the drive
/// amplitude scale; detuning = epsilon - omega is the only combination the
/// rotating frame sees.
struct JCParams {
  double epsilon = 0.0;   // level splitting
  double omega = 0.0;     // mode frequency (both modes)
  double omega1 = 1.0;    // drive amplitude Omega_1
  double omega2 = 1.0;    // drive amplitude Omega_2
  double phase1 = 0.0;
  double phase2 = 0.5 * pi;

  double detuning() const { return epsilon - omega; }
  RealVector phases() const {
    RealVector p(2);
    p << phase1, phase2;
    return p;
  }

  /// Fig. 2 parameters: Omega_1 = Omega_2 = 1, detuning 0.05, phases
  /// (0, pi/2), rotating-frame convention (omega = 0).
  static JCParams fig_preset();
};

/// Dressed two-level frame at phases phi: the static rotating-frame
/// Hamiltonian is E * sigma with sigma^2 = 1.
struct DressedFrame {
  Complex rabi;       // Omega(phi) = sum_k Omega_k e^{i phi_k}
  double energy;      // E_phi = 1/2 sqrt(detuning^2 + |Omega|^2)
  double theta;       // tan(theta) = |Omega| / detuning
  double azimuth;     // arg Omega(phi)
  Matrix sigma;       // Hermitian, traceless, sigma^2 = 1
};

DressedFrame dressed_frame(const JCParams& params, const RealVector& phases);

/// Closed-form dynamical MGF of the two-mode JC model, evaluated from the
/// dressed frames at phibar +- chi/2. `phibar` defaults to params.phases().
Complex jc_mgf_analytic(const JCParams& params, const Vector& matter_state,
                        const RealVector& chi, double t);
Complex jc_mgf_analytic(const JCParams& params, const Vector& matter_state,
                        const RealVector& chi, double t,
                        const RealVector& phibar);

/// The JC drive as a DrivenSystem in the frame co-rotating with the modes:
/// H(phi) = (detuning/2) sigma_z + 1/2 (Omega(phi) sigma_+ + h.c.), static
/// but phase-dressed. Floquet modes are constant in this frame, matching the
/// closed forms above. `reference_period` only sets grid densities.
DrivenSystem jc_rotating_system(const JCParams& params,
                                double reference_period = 0.5 * pi);

/// Same model in the lab frame (finite omega); exercises the genuine
/// monodromy path. Quasienergies shift by -omega/2 modulo the zone.
DrivenSystem jc_lab_system(const JCParams& params);

/// A fully populated figure run: system, photonic state, matter states,
/// default time window.
struct FigurePreset {
  std::string name;
  JCParams params;
  DrivenSystem system;
  GaussianPhotonState photons;
  std::vector<std::pair<std::string, Vector>> matter_states;
  std::vector<double> sigma2_sweep;  // initial variances for error scans
  double t_max = 200.0;
  int t_points = 201;
  double fd_step = 1e-3;
};

/// name in {fig2, fig3, fig4}.
FigurePreset figure_preset(const std::string& name);

}  // namespace prft
