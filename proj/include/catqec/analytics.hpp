#pragma once

#include "catqec/catcode.hpp"
#include "catqec/params.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace catqec::analytics {

struct StepFidelities {
  double f0 = 1.0;  // success probability of a step without a jump
  double f1 = 1.0;  // success probability of a step with one jump
};

enum class Dephasing { T2, Tphi };

struct StepFidelityOptions {
  Dephasing dephasing = Dephasing::T2;
  bool include_readout = true;  // multiply by M_gg / M_ee
  // Overrides params.T2 when positive.
  double T2_override = 0.0;
};

// f0 = exp(-pi/(chi_sa T)) M_gg, f1 = exp(-pi/(chi_sa T)) M_ee exp(-(tau_meas+T_FB)/T1)
// with T = T2 or T_phi.
StepFidelities step_fidelities(const SystemParams& p, StepFidelityOptions opt = {});

// Positive root r of log(f0) + log(1 + 1/r) - 1/(1 + r) = 0, bisection on
// [1e-3, 1e9]. Throws no_root when f0 is outside (0.5, 1) or no sign change.
// Returns +infinity for f0 == 1.
double solve_r(double f0);

// Expected jump number per step at the optimum, f0 / (r f1).
double optimal_lambda(StepFidelities f);

// Continuous optimum r (f1/f0) nbar0 (1 - exp(-kappa T)).
double optimal_steps_real(double T, double nbar0, double kappa, StepFidelities f);

// Step durations with equal expected jump number; boundaries at
// -ln(1 - (j/S)(1 - exp(-kappa T)))/kappa. Empty for S == 0.
std::vector<double> equal_lambda_schedule(double T, int S, double kappa);

// Cumulative boundaries {0, t_1, t_1 + t_2, ...}.
std::vector<double> schedule_boundaries(const std::vector<double>& t_k);

// lambda_k = nbar(start of step k) (1 - exp(-kappa t_k)).
std::vector<double> step_lambdas(double nbar0, double kappa, const std::vector<double>& t_k);

// prod_k (f0 + f1 lambda_k) exp(-lambda_k). total_fidelity uses exp(-lambda)
// over the whole interval when there are no steps.
double transmission_fidelity(StepFidelities f, double nbar0, double kappa,
                             const std::vector<double>& t_k);

// E_{theta ~ N(0, s^2)}[exp(-theta^2 / (2 sigma^2))] by 64-point Gauss-Hermite.
double gaussian_decode_average(double s, double sigma);

struct TotalFidelityOptions {
  StepFidelityOptions step;
  double kerr_sigma = 24.0 * kPi / 180.0;  // decode sensitivity to frame error
  catcode::DecoderKind ed_decoder = catcode::DecoderKind::unitary;
};

struct FidelityComponents {
  double F_gamma_up = 1.0;
  double F_ED = 1.0;
  double F_T = 1.0;
  double F_KD = 1.0;
  double total() const { return F_gamma_up * F_ED * F_T * F_KD; }
};

// Pulse factor times parity-weighted decode process fidelity at time T.
double encode_decode_fidelity(double T, double nbar0, const SystemParams& p,
                              catcode::DecoderKind kind = catcode::DecoderKind::unitary);

// Kerr-angle variance sum_k w_k (K_s t_k)^2 / 12 with
// w_k = f1 lambda_k / (f0 + f1 lambda_k).
double kerr_angle_variance(StepFidelities f, double nbar0, const SystemParams& p,
                           const std::vector<double>& t_k);

FidelityComponents total_fidelity(double T, double nbar0, const std::vector<double>& t_k,
                                  const SystemParams& p, const TotalFidelityOptions& opt = {});

struct CadenceSolution {
  double T = 0.0;
  double nbar0 = 0.0;
  int S = 0;
  double S_real = 0.0;
  std::vector<double> t_k;
  double lambda_per_step = 0.0;
  double mean_wait = 0.0;  // T/S - step overhead
  FidelityComponents components;
  double predicted_F() const { return components.total(); }
};

// Closed-form optimum: S = round(S_real), ties toward fewer steps, S >= 1 for
// T > 0; equal-lambda schedule.
CadenceSolution optimize_cadence(double T, double nbar0, const SystemParams& p,
                                 const TotalFidelityOptions& opt = {});
// Maximizes the full product F over S = 0..S_max with equal-lambda schedules.
CadenceSolution optimize_cadence_full(double T, double nbar0, const SystemParams& p,
                                      const TotalFidelityOptions& opt = {}, int S_max = 50);

// 1 / (1 - (f1/f0) r/(1+r)); +infinity when f0 == f1 == 1.
double gain(StepFidelities f);
double gain(const SystemParams& p, StepFidelityOptions opt = {});
double break_even_ratio(double G, double nbar0);

// 3 / (1/tau_s + 2/T2_s).
double fock_lifetime(const SystemParams& p);
inline constexpr double kFockReferenceLifetime = 290.0;

enum class BudgetRegime { fast, slow };

struct LossBudget {
  double t_M = 0.0;
  double nbar = 2.0;
  BudgetRegime regime = BudgetRegime::fast;
  double p_double = 0.0, p_up_s = 0.0, p_readout = 0.0, p_up_a = 0.0, p_kerr = 0.0, p_fp = 0.0;
  double G_double = 0.0, G_up_s = 0.0, G_readout = 0.0, G_up_a = 0.0, G_kerr = 0.0, G_fp = 0.0;
};

// Per-channel multiplicative gains over the Fock reference lifetime. t_M up
// to `fast_limit` uses the frequent-measurement expressions for readout,
// preparation and Kerr, above it the trusted-syndrome ones.
LossBudget loss_budget(const SystemParams& p, double t_M, double nbar = 2.0,
                       double tau_ref = kFockReferenceLifetime, double fast_limit = 2.0,
                       double kerr_sigma = 24.0 * kPi / 180.0);

struct RecordEntry {
  std::string bits;  // time order, '0' = g, '1' = e
  double probability = 0.0;
  double success = 0.0;  // P(hidden jumps equal the record | record)
};

struct ConfidenceTable {
  std::vector<RecordEntry> records;  // lexicographic bit order
  double p0_given_g = 0.0;  // first step, P(no jump | g)
  double p1_given_e = 0.0;  // first step, P(jump | e)
  // Probability of records with k ones.
  std::vector<double> by_error_count;
  const RecordEntry& at(const std::string& bits) const;
};

// Per-step no-jump probabilities exp(-nbar0 exp(-t/tau) t_w/tau), t = (k-1) t_w.
std::vector<double> bayes_no_jump_probabilities(double nbar0, double t_w, int S, double tau_s);

// Hidden-Markov forward model with at most one jump per step. p_g0 is
// P(g | parity matches protocol), p_e1 is P(e | mismatch).
ConfidenceTable bayes_records(const std::vector<double>& no_jump, double p_g0, double p_e1);
ConfidenceTable bayes_records(double nbar0, double t_w, int S, double p_g0, double p_e1,
                              double tau_s = 250.0);
// Direct enumeration over all 4^S (jump, outcome) sequences.
ConfidenceTable bayes_records_bruteforce(const std::vector<double>& no_jump, double p_g0,
                                         double p_e1);

// Every 1 must be followed by a 0.
bool postselect_accepts(const std::vector<int>& bits);
struct PostselectResult {
  std::vector<std::size_t> accepted;  // indices into the input
  double acceptance = 0.0;
};
PostselectResult postselect(const std::vector<std::vector<int>>& records);

void write_budget_csv(std::ostream& os, const std::vector<LossBudget>& rows);
void write_confidence_csv(std::ostream& os, const ConfidenceTable& table);
void write_cadence_csv(std::ostream& os, const std::vector<CadenceSolution>& rows);

}  // namespace catqec::analytics
