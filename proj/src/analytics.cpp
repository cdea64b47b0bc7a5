#include "catqec/analytics.hpp"

#include "catqec/fock.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

namespace catqec::analytics {

namespace {

double eq_u(double f0, double r) { return std::log(f0) + std::log1p(1.0 / r) - 1.0 / (1.0 + r); }

void check_probability(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, std::string(key) + " must lie in [0, 1]", key);
  }
}

}  // namespace

StepFidelities step_fidelities(const SystemParams& p, StepFidelityOptions opt) {
  const double T2 = opt.T2_override > 0.0 ? opt.T2_override : p.T2;
  double Td = T2;
  if (opt.dephasing == Dephasing::Tphi) {
    const double inv = 1.0 / T2 - 1.0 / (2.0 * p.T1);
    Td = inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
  }
  const double deph = std::isinf(Td) ? 1.0 : std::exp(-kPi / (p.chi_sa * Td));
  const double mgg = opt.include_readout ? p.M_gg : 1.0;
  const double mee = opt.include_readout ? p.M_ee : 1.0;
  const double t1f = std::isinf(p.T1) ? 1.0 : std::exp(-(p.tau_meas + p.T_FB) / p.T1);
  return {deph * mgg, deph * mee * t1f};
}

double solve_r(double f0) {
  if (f0 == 1.0) return std::numeric_limits<double>::infinity();
  if (!(f0 > 0.5 && f0 < 1.0)) {
    throw Error(ErrorKind::no_root, "optimal-cadence equation needs 0.5 < f0 <= 1", "f0");
  }
  double lo = 1e-3, hi = 1e9;
  double flo = eq_u(f0, lo), fhi = eq_u(f0, hi);
  if (flo * fhi > 0.0) {
    throw Error(ErrorKind::no_root, "optimal-cadence equation has no bracketed root", "f0");
  }
  // eq_u decreases in r
  for (int it = 0; it < 400 && (hi - lo) > 1e-12 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = eq_u(f0, mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double optimal_lambda(StepFidelities f) { return f.f0 / (solve_r(f.f0) * f.f1); }

double optimal_steps_real(double T, double nbar0, double kappa, StepFidelities f) {
  return solve_r(f.f0) * (f.f1 / f.f0) * nbar0 * (1.0 - std::exp(-kappa * T));
}

std::vector<double> equal_lambda_schedule(double T, int S, double kappa) {
  if (S < 0) throw Error(ErrorKind::invalid_argument, "S must be >= 0", "S");
  if (T < 0.0) throw Error(ErrorKind::invalid_argument, "T must be >= 0", "T");
  std::vector<double> t_k;
  if (S == 0) return t_k;
  if (kappa <= 0.0) return std::vector<double>(S, T / S);
  const double total = 1.0 - std::exp(-kappa * T);
  double prev = 0.0;
  for (int j = 1; j <= S; ++j) {
    const double b = (j == S) ? T : -std::log1p(-total * j / S) / kappa;
    t_k.push_back(b - prev);
    prev = b;
  }
  return t_k;
}

std::vector<double> schedule_boundaries(const std::vector<double>& t_k) {
  std::vector<double> b{0.0};
  for (double t : t_k) b.push_back(b.back() + t);
  return b;
}

std::vector<double> step_lambdas(double nbar0, double kappa, const std::vector<double>& t_k) {
  std::vector<double> lam;
  double start = 0.0;
  for (double t : t_k) {
    lam.push_back(nbar0 * std::exp(-kappa * start) * -std::expm1(-kappa * t));
    start += t;
  }
  return lam;
}

double transmission_fidelity(StepFidelities f, double nbar0, double kappa,
                             const std::vector<double>& t_k) {
  double F = 1.0;
  for (double lam : step_lambdas(nbar0, kappa, t_k)) F *= (f.f0 + f.f1 * lam) * std::exp(-lam);
  return F;
}

double gaussian_decode_average(double s, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::invalid_argument, "sigma must be positive", "sigma");
  if (s <= 0.0) return 1.0;
  // weight exp(-x^2/(2 s^2)) on the real line
  const double b = 1.0 / (2.0 * s * s);
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> w(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, 64, 0.0, b, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!w) throw Error(ErrorKind::non_convergence, "Gauss-Hermite workspace allocation failed");
  const double* x = gsl_integration_fixed_nodes(w.get());
  const double* wt = gsl_integration_fixed_weights(w.get());
  double acc = 0.0;
  for (std::size_t i = 0; i < gsl_integration_fixed_n(w.get()); ++i) {
    acc += wt[i] * std::exp(-x[i] * x[i] / (2.0 * sigma * sigma));
  }
  return acc / (std::sqrt(2.0 * kPi) * s);
}

double encode_decode_fidelity(double T, double nbar0, const SystemParams& p,
                              catcode::DecoderKind kind) {
  const double pp = p.cat_pulse_infidelity;
  const double pulse = (1.0 - pp) * (1.0 - pp) + (1.0 - (1.0 - pp) * (1.0 - pp)) / 4.0;
  const int dim = fock::safe_dim(nbar0);
  const cplx alpha_t = std::sqrt(nbar0) * std::exp(-p.kappa_s * T / 2.0);
  const double lam = nbar0 * -std::expm1(-p.kappa_s * T);
  const double p_even = 0.5 * (1.0 + std::exp(-2.0 * lam));
  double f = p_even * catcode::decode_process_fidelity(alpha_t, 1, dim, kind);
  if (p_even < 1.0) f += (1.0 - p_even) * catcode::decode_process_fidelity(alpha_t, -1, dim, kind);
  return pulse * f;
}

double kerr_angle_variance(StepFidelities f, double nbar0, const SystemParams& p,
                           const std::vector<double>& t_k) {
  const std::vector<double> lam = step_lambdas(nbar0, p.kappa_s, t_k);
  double s2 = 0.0;
  for (std::size_t k = 0; k < t_k.size(); ++k) {
    const double w = f.f1 * lam[k] / (f.f0 + f.f1 * lam[k]);
    const double a = p.K_s * t_k[k];
    s2 += w * a * a / 12.0;
  }
  return s2;
}

FidelityComponents total_fidelity(double T, double nbar0, const std::vector<double>& t_k,
                                  const SystemParams& p, const TotalFidelityOptions& opt) {
  if (T < 0.0) throw Error(ErrorKind::invalid_argument, "T must be >= 0", "T");
  double sum = 0.0;
  for (double t : t_k) {
    if (t < 0.0) throw Error(ErrorKind::invalid_argument, "step durations must be >= 0", "t_k");
    sum += t;
  }
  if (!t_k.empty() && std::abs(sum - T) > 1e-9 * std::max(1.0, T)) {
    throw Error(ErrorKind::invalid_argument, "step durations must sum to T", "t_k");
  }
  const StepFidelities f = step_fidelities(p, opt.step);
  FidelityComponents c;
  c.F_gamma_up = std::exp(-T * p.Gamma_up);
  c.F_ED = encode_decode_fidelity(T, nbar0, p, opt.ed_decoder);
  // without monitoring any loss goes uncorrected
  c.F_T = t_k.empty() ? std::exp(nbar0 * std::expm1(-p.kappa_s * T))
                      : transmission_fidelity(f, nbar0, p.kappa_s, t_k);
  c.F_KD = gaussian_decode_average(std::sqrt(kerr_angle_variance(f, nbar0, p, t_k)), opt.kerr_sigma);
  return c;
}

namespace {

CadenceSolution make_solution(double T, double nbar0, int S, double S_real, const SystemParams& p,
                              const TotalFidelityOptions& opt) {
  CadenceSolution s;
  s.T = T;
  s.nbar0 = nbar0;
  s.S = S;
  s.S_real = S_real;
  s.t_k = equal_lambda_schedule(T, S, p.kappa_s);
  s.lambda_per_step = S > 0 ? nbar0 * -std::expm1(-p.kappa_s * T) / S : 0.0;
  s.mean_wait = S > 0 ? T / S - p.step_overhead() : T;
  s.components = total_fidelity(T, nbar0, s.t_k, p, opt);
  return s;
}

}  // namespace

CadenceSolution optimize_cadence(double T, double nbar0, const SystemParams& p,
                                 const TotalFidelityOptions& opt) {
  if (T < 0.0) throw Error(ErrorKind::invalid_argument, "T must be >= 0", "T");
  const StepFidelities f = step_fidelities(p, opt.step);
  const double s_real = optimal_steps_real(T, nbar0, p.kappa_s, f);
  int S = 0;
  if (T > 0.0) {
    const double fl = std::floor(s_real);
    S = static_cast<int>(s_real - fl > 0.5 ? fl + 1.0 : fl);
    S = std::max(S, 1);
  }
  return make_solution(T, nbar0, S, s_real, p, opt);
}

CadenceSolution optimize_cadence_full(double T, double nbar0, const SystemParams& p,
                                      const TotalFidelityOptions& opt, int S_max) {
  if (T < 0.0) throw Error(ErrorKind::invalid_argument, "T must be >= 0", "T");
  const StepFidelities f = step_fidelities(p, opt.step);
  const double s_real = optimal_steps_real(T, nbar0, p.kappa_s, f);
  // F_ED and F_gamma_up do not depend on S
  int best = 0;
  double best_val = -1.0;
  const int top = T > 0.0 ? S_max : 0;
  for (int S = 0; S <= top; ++S) {
    const std::vector<double> t_k = equal_lambda_schedule(T, S, p.kappa_s);
    if (S > 0 && T / S <= p.step_overhead()) break;
    const double F_T = S == 0 ? std::exp(nbar0 * std::expm1(-p.kappa_s * T))
                              : transmission_fidelity(f, nbar0, p.kappa_s, t_k);
    const double val = F_T *
                       gaussian_decode_average(std::sqrt(kerr_angle_variance(f, nbar0, p, t_k)),
                                               opt.kerr_sigma);
    if (val > best_val) {
      best_val = val;
      best = S;
    }
  }
  return make_solution(T, nbar0, best, s_real, p, opt);
}

double gain(StepFidelities f) {
  if (f.f0 == 1.0 && f.f1 == 1.0) return std::numeric_limits<double>::infinity();
  if (f.f0 == 1.0) return 1.0 / (1.0 - f.f1);
  const double r = solve_r(f.f0);
  return 1.0 / (1.0 - (f.f1 / f.f0) * r / (1.0 + r));
}

double gain(const SystemParams& p, StepFidelityOptions opt) { return gain(step_fidelities(p, opt)); }

double break_even_ratio(double G, double nbar0) { return 2.0 * G / (3.0 * nbar0); }

double fock_lifetime(const SystemParams& p) { return 3.0 / (1.0 / p.tau_s + 2.0 / p.T2_s); }

LossBudget loss_budget(const SystemParams& p, double t_M, double nbar, double tau_ref,
                       double fast_limit, double kerr_sigma) {
  if (!(t_M > 0.0) || !std::isfinite(t_M)) {
    throw Error(ErrorKind::invalid_argument, "t_M must be positive", "t_M");
  }
  LossBudget b;
  b.t_M = t_M;
  b.nbar = nbar;
  b.regime = t_M <= fast_limit ? BudgetRegime::fast : BudgetRegime::slow;
  const double x = nbar * p.kappa_s * t_M;

  b.p_double = 0.5 * x * x * std::exp(-x);
  b.G_double = t_M / (b.p_double * tau_ref);

  // rate-limited, t_M cancels
  b.p_up_s = t_M * p.n_th_s * nbar / p.tau_s;
  b.G_up_s = t_M / (b.p_up_s * tau_ref);

  if (b.regime == BudgetRegime::fast) {
    // missed jump: the error goes unrecorded for two measurement intervals
    const double tau_j = 1.0 / (nbar * p.kappa_s);
    b.p_readout = 2.0 * t_M / tau_j;
    b.G_readout = tau_j / (b.p_readout * tau_ref);
  } else {
    b.p_readout = 0.5 * kPi / (p.chi_sa * p.T2);
    b.G_readout = t_M / (b.p_readout * tau_ref);
  }

  if (b.regime == BudgetRegime::fast) {
    const double q = p.Gamma_up * t_M;
    b.p_up_a = q * q;
  } else {
    b.p_up_a = p.Gamma_up * t_M;
  }
  b.G_up_a = t_M / (b.p_up_a * tau_ref);

  // uniform frame error on +-K t_M/2 around the midpoint estimate
  const double half = 0.5 * p.K_s * t_M;
  double mean_keep = 1.0;
  if (half > 0.0) {
    const double z = half / (std::sqrt(2.0) * kerr_sigma);
    mean_keep = std::sqrt(kPi) / (2.0 * z) * std::erf(z);
  }
  b.p_kerr = -std::expm1(-x) * (1.0 - mean_keep);
  b.G_kerr = b.p_kerr > 0.0 ? t_M / (b.p_kerr * tau_ref) : std::numeric_limits<double>::infinity();

  const double p_map = kPi / (p.chi_sa * 2.0 * p.T1);
  b.p_fp = p_map + x * p.tau_meas / p.T1 + p.Gamma_up * t_M;
  b.G_fp = t_M / (b.p_fp * tau_ref);
  return b;
}

const RecordEntry& ConfidenceTable::at(const std::string& bits) const {
  for (const auto& r : records) {
    if (r.bits == bits) return r;
  }
  throw Error(ErrorKind::invalid_argument, "record " + bits + " not in table", "bits");
}

std::vector<double> bayes_no_jump_probabilities(double nbar0, double t_w, int S, double tau_s) {
  std::vector<double> p;
  for (int k = 1; k <= S; ++k) {
    const double t = (k - 1) * t_w;
    p.push_back(std::exp(-nbar0 * std::exp(-t / tau_s) * t_w / tau_s));
  }
  return p;
}

namespace {

std::string bits_of(unsigned mask, int S) {
  std::string s(S, '0');
  for (int k = 0; k < S; ++k) {
    if (mask & (1u << (S - 1 - k))) s[k] = '1';
  }
  return s;
}

void finish_table(ConfidenceTable& t, const std::vector<double>& no_jump, double p_g0,
                  double p_e1, int S) {
  const double a = no_jump.empty() ? 1.0 : no_jump.front();
  const double pg = p_g0 * a + (1.0 - p_e1) * (1.0 - a);
  t.p0_given_g = pg > 0.0 ? p_g0 * a / pg : 0.0;
  t.p1_given_e = pg < 1.0 ? p_e1 * (1.0 - a) / (1.0 - pg) : 0.0;
  t.by_error_count.assign(S + 1, 0.0);
  for (const auto& r : t.records) {
    t.by_error_count[std::count(r.bits.begin(), r.bits.end(), '1')] += r.probability;
  }
}

void check_inputs(const std::vector<double>& no_jump, double p_g0, double p_e1) {
  check_probability(p_g0, "p_g0");
  check_probability(p_e1, "p_e1");
  for (double v : no_jump) check_probability(v, "no_jump");
  if (no_jump.size() > 20) throw Error(ErrorKind::invalid_argument, "at most 20 steps", "S");
}

}  // namespace

ConfidenceTable bayes_records(const std::vector<double>& no_jump, double p_g0, double p_e1) {
  check_inputs(no_jump, p_g0, p_e1);
  const int S = static_cast<int>(no_jump.size());
  ConfidenceTable t;
  for (unsigned mask = 0; mask < (1u << S); ++mask) {
    const std::string bits = bits_of(mask, S);
    // forward pass over the mismatch state m (true parity xor protocol
    // expectation before the outcome); the success path is tracked separately
    double alpha[2] = {1.0, 0.0};
    double success = 1.0;
    for (int k = 0; k < S; ++k) {
      const int b = bits[k] - '0';
      const double pj[2] = {no_jump[k], 1.0 - no_jump[k]};
      const double po_match = b == 0 ? p_g0 : 1.0 - p_g0;
      const double po_mis = b == 1 ? p_e1 : 1.0 - p_e1;
      double next[2] = {0.0, 0.0};
      for (int m = 0; m < 2; ++m) {
        for (int j = 0; j < 2; ++j) {
          const int mm = m ^ j;
          const double w = alpha[m] * pj[j] * (mm ? po_mis : po_match);
          // the protocol flips on e
          next[mm ^ b] += w;
        }
      }
      // success path: jump iff bit, so the mismatch before the outcome equals b
      success *= pj[b] * (b ? po_mis : po_match);
      alpha[0] = next[0];
      alpha[1] = next[1];
    }
    const double total = alpha[0] + alpha[1];
    t.records.push_back({bits, total, total > 0.0 ? success / total : 0.0});
  }
  finish_table(t, no_jump, p_g0, p_e1, S);
  return t;
}

ConfidenceTable bayes_records(double nbar0, double t_w, int S, double p_g0, double p_e1,
                              double tau_s) {
  if (S < 1) throw Error(ErrorKind::invalid_argument, "S must be >= 1", "S");
  return bayes_records(bayes_no_jump_probabilities(nbar0, t_w, S, tau_s), p_g0, p_e1);
}

ConfidenceTable bayes_records_bruteforce(const std::vector<double>& no_jump, double p_g0,
                                         double p_e1) {
  check_inputs(no_jump, p_g0, p_e1);
  const int S = static_cast<int>(no_jump.size());
  ConfidenceTable t;
  for (unsigned bmask = 0; bmask < (1u << S); ++bmask) {
    const std::string bits = bits_of(bmask, S);
    double total = 0.0, success = 0.0;
    for (unsigned jmask = 0; jmask < (1u << S); ++jmask) {
      const std::string jumps = bits_of(jmask, S);
      double p = 1.0;
      int parity = 0, expect = 0;
      for (int k = 0; k < S; ++k) {
        const int j = jumps[k] - '0';
        const int b = bits[k] - '0';
        p *= j ? 1.0 - no_jump[k] : no_jump[k];
        parity ^= j;
        if (parity != expect) p *= b ? p_e1 : 1.0 - p_e1;
        else p *= b ? 1.0 - p_g0 : p_g0;
        expect ^= b;
      }
      total += p;
      if (jmask == bmask) success += p;
    }
    t.records.push_back({bits, total, total > 0.0 ? success / total : 0.0});
  }
  finish_table(t, no_jump, p_g0, p_e1, S);
  return t;
}

bool postselect_accepts(const std::vector<int>& bits) {
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == 1 && (k + 1 == bits.size() || bits[k + 1] != 0)) return false;
  }
  return true;
}

PostselectResult postselect(const std::vector<std::vector<int>>& records) {
  PostselectResult r;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (postselect_accepts(records[i])) r.accepted.push_back(i);
  }
  r.acceptance = records.empty() ? 0.0 : double(r.accepted.size()) / records.size();
  return r;
}

void write_budget_csv(std::ostream& os, const std::vector<LossBudget>& rows) {
  os << "t_M,nbar,regime,G_double,G_up_s,G_readout,G_up_a,G_kerr,G_fp\n";
  os.precision(8);
  for (const auto& b : rows) {
    os << b.t_M << ',' << b.nbar << ',' << (b.regime == BudgetRegime::fast ? "fast" : "slow") << ','
       << b.G_double << ',' << b.G_up_s << ',' << b.G_readout << ',' << b.G_up_a << ','
       << b.G_kerr << ',' << b.G_fp << '\n';
  }
}

void write_confidence_csv(std::ostream& os, const ConfidenceTable& table) {
  // sorted by conditional success, cumulative probability alongside
  std::vector<RecordEntry> rows = table.records;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RecordEntry& a, const RecordEntry& b) { return a.success > b.success; });
  os << "record,probability,success,cumulative_probability,cumulative_success\n";
  os.precision(10);
  double cp = 0.0, cs = 0.0;
  for (const auto& r : rows) {
    cp += r.probability;
    cs += r.probability * r.success;
    os << r.bits << ',' << r.probability << ',' << r.success << ',' << cp << ','
       << (cp > 0.0 ? cs / cp : 0.0) << '\n';
  }
}

void write_cadence_csv(std::ostream& os, const std::vector<CadenceSolution>& rows) {
  os << "T,S,t_w,predicted_F,F_gamma_up,F_ED,F_T,F_KD\n";
  os.precision(10);
  for (const auto& s : rows) {
    os << s.T << ',' << s.S << ',' << s.mean_wait << ',' << s.predicted_F() << ','
       << s.components.F_gamma_up << ',' << s.components.F_ED << ',' << s.components.F_T << ','
       << s.components.F_KD << '\n';
  }
}

}  // namespace catqec::analytics
