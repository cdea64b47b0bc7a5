#pragma once

#include "catqec/core.hpp"

#include <cmath>

namespace catqec {

// Hamiltonian, coherence and timing constants. Angular frequencies are in
// rad/us, times in us, rates in 1/us. Frequencies omega_* are carried for
// completeness only; everything is propagated in the rotating frame.
struct SystemParams {
  double omega_s = kTwoPi * 8305.6;
  double omega_a = kTwoPi * 6281.5;
  double omega_r = kTwoPi * 9314.9;

  double chi_sa = kTwoPi * 1.97;
  double chi_ra = kTwoPi * 1.0;
  double chi_sr = kTwoPi * 0.002;
  double K_s = kTwoPi * 0.0045;
  double K_r = kTwoPi * 0.0005;
  double K_a = kTwoPi * 297.0;

  double tau_s = 250.0;
  double kappa_s = 1.0 / 250.0;
  double T2_s = 330.0;
  double n_th_s = 0.02;

  double T1 = 35.0;
  double T2 = 12.0;
  double n_th_a = 0.04;
  double Gamma_up = 0.04 / 35.0;

  double M_gg = 0.993;
  double M_ee = 0.993;
  double tau_meas = 0.4;
  double T_FB = 0.332;
  double p_d = 0.001;
  double n_readout = 70.0;

  // Parity-measurement fidelity table (photon number, fidelity), linearly
  // interpolated and clamped at the ends.
  double parity_fid_n0 = 0.985;
  double parity_fid_n2 = 0.981;
  double parity_fid_n3 = 0.977;
  // P(g | parity matches protocol) = F + asym, P(e | mismatch) = F - asym.
  double parity_asymmetry = 0.006;

  // Depolarizing probability per encode or decode pulse.
  double cat_pulse_infidelity = 0.04;
  double fock_pulse_infidelity = 0.02;

  double parity_map_time() const { return kPi / chi_sa; }
  double step_overhead() const { return parity_map_time() + tau_meas + T_FB; }
  double T_phi() const { return 1.0 / (1.0 / T2 - 1.0 / (2.0 * T1)); }
  double nbar_at(double nbar0, double t) const { return nbar0 * std::exp(-kappa_s * t); }
  double parity_fidelity(double nbar) const;

  // Sets kappa_s from tau_s and Gamma_up from n_th_a / T1.
  void sync_derived();
  // Throws Error(config) naming the offending field.
  void validate() const;
};

}  // namespace catqec
