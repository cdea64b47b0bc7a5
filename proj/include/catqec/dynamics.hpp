#pragma once

#include "catqec/core.hpp"
#include "catqec/params.hpp"

#include <iosfwd>
#include <vector>

namespace catqec::dynamics {

// Collapse operator sqrt(rate) * op.
struct CollapseChannel {
  Operator op;
  double rate = 0.0;
};

struct LindbladModel {
  Operator hamiltonian;  // rad/us, rotating frame
  std::vector<CollapseChannel> channels;

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
  // Throws on negative rates or mismatched dimensions.
  void validate() const;
};

struct ResonatorModelOptions {
  bool kerr = true;
  bool thermal = true;
};

// Storage resonator: H = (K_s/2) a^dag^2 a^2, L- = sqrt(kappa(1+n_th)) a,
// L+ = sqrt(kappa n_th) a^dag. With this sign exp(-iHt) equals kerr_unitary.
LindbladModel resonator_model(const SystemParams& p, int dim, ResonatorModelOptions opt = {});

// Fixed-step RK4. `max_step` <= 0 selects
// 0.01 * min(1/Gamma_max, 2pi/||H||_max), with Gamma_max the largest decay rate
// out of any Fock level. Throws integrator if the trace drifts by more than 1e-8.
DensityMatrix evolve_master(const DensityMatrix& rho, const LindbladModel& model, double t,
                            double max_step = 0.0);

struct JumpEvent {
  double time = 0.0;
  int channel = 0;
};

struct TrajectoryResult {
  StateVector final_state;
  std::vector<JumpEvent> jumps;
  std::uint64_t rng_seed = 0;
};

// Jump unraveling with norm-threshold sampling. The no-jump propagator of the
// effective non-Hermitian generator is applied exactly (diagonal case or
// eigendecomposition, falling back to expm); jump times are located by
// bisection on the norm. Throws truncation_leakage if the top two Fock
// levels carry more than `edge_threshold` at the end.
TrajectoryResult evolve_trajectory(const StateVector& psi, const LindbladModel& model, double t,
                                   std::uint64_t seed, double edge_threshold = 1e-6);

// Same, consuming an existing stream. Jump times are reported relative to
// `t0`, i.e. at t0 + offset.
StateVector evolve_trajectory(const StateVector& psi, const LindbladModel& model, double t0,
                              double t, Rng& rng, std::vector<JumpEvent>& jumps,
                              double edge_threshold = 1e-6);

// Ensemble of trajectories seeded by (master, index); parallel over threads
// with per-index storage.
std::vector<TrajectoryResult> trajectory_ensemble(const StateVector& psi,
                                                  const LindbladModel& model, double t,
                                                  std::uint64_t master_seed, std::size_t count,
                                                  int threads = 1);

DensityMatrix ensemble_average(const std::vector<TrajectoryResult>& runs);

// diag(exp(-i (K/2) t n(n-1))).
Operator kerr_unitary(double K, double t, int dim);
StateVector apply_kerr(const StateVector& psi, double K, double t);

// Poisson pmf of the jump count over [0, t] for pure loss from nbar0,
// truncated where the remaining tail falls below 1e-16.
std::vector<double> jump_count_pmf(double nbar0, double kappa, double t);
double jump_mean(double nbar0, double kappa, double t);
// Probability of two jumps within t_M at fixed nbar.
double double_jump_probability(double nbar, double kappa, double t_M);

// One JSON object per line: {"seed":..,"jump_times":[..],"channels":[..]}.
void write_trajectory_records(std::ostream& os, const std::vector<TrajectoryResult>& runs);
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<JumpEvent> jumps;
};
std::vector<TrajectoryRecord> read_trajectory_records(std::istream& is);

}  // namespace catqec::dynamics
