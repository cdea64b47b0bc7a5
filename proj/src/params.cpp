#include "catqec/params.hpp"

#include <algorithm>
#include <string>

namespace catqec {

namespace {

void positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::config, std::string(key) + " must be positive and finite", key);
  }
}

void non_negative(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::config, std::string(key) + " must be non-negative and finite", key);
  }
}

void probability(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::config, std::string(key) + " must lie in [0, 1]", key);
  }
}

}  // namespace

double SystemParams::parity_fidelity(double nbar) const {
  if (nbar <= 0.0) return parity_fid_n0;
  if (nbar <= 2.0) return parity_fid_n0 + (parity_fid_n2 - parity_fid_n0) * nbar / 2.0;
  if (nbar <= 3.0) return parity_fid_n2 + (parity_fid_n3 - parity_fid_n2) * (nbar - 2.0);
  return parity_fid_n3;
}

void SystemParams::sync_derived() {
  kappa_s = 1.0 / tau_s;
  Gamma_up = n_th_a / T1;
}

void SystemParams::validate() const {
  non_negative(chi_sa, "chi_sa");
  positive(chi_sa, "chi_sa");
  non_negative(chi_ra, "chi_ra");
  non_negative(chi_sr, "chi_sr");
  non_negative(K_s, "K_s");
  non_negative(K_r, "K_r");
  non_negative(K_a, "K_a");
  positive(tau_s, "tau_s");
  non_negative(kappa_s, "kappa_s");
  positive(T2_s, "T2_s");
  non_negative(n_th_s, "n_th_s");
  positive(T1, "T1");
  positive(T2, "T2");
  if (T2 > 2.0 * T1 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::config, "T2 must not exceed 2*T1", "T2");
  }
  non_negative(n_th_a, "n_th_a");
  non_negative(Gamma_up, "Gamma_up");
  probability(M_gg, "M_gg");
  probability(M_ee, "M_ee");
  positive(tau_meas, "tau_meas");
  non_negative(T_FB, "T_FB");
  probability(p_d, "p_d");
  non_negative(n_readout, "n_readout");
  probability(parity_fid_n0, "parity_fid_n0");
  probability(parity_fid_n2, "parity_fid_n2");
  probability(parity_fid_n3, "parity_fid_n3");
  const double lo = std::min({parity_fid_n0, parity_fid_n2, parity_fid_n3});
  const double hi = std::max({parity_fid_n0, parity_fid_n2, parity_fid_n3});
  if (lo - parity_asymmetry < 0.0 || hi + parity_asymmetry > 1.0) {
    throw Error(ErrorKind::config, "parity_asymmetry pushes a fidelity outside [0, 1]",
                "parity_asymmetry");
  }
  probability(cat_pulse_infidelity, "cat_pulse_infidelity");
  probability(fock_pulse_infidelity, "fock_pulse_infidelity");
}

}  // namespace catqec
