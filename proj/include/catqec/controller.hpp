#pragma once

#include "catqec/catcode.hpp"
#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"
#include "catqec/params.hpp"

#include <cmath>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace catqec::controller {

struct AncillaModel {
  double T1 = 35.0;
  double T2 = 12.0;
  double Gamma_up = 0.04 / 35.0;
  double M_gg = 0.993;
  double M_ee = 0.993;
  double parity_map_time = 0.0;
  double tau_meas = 0.4;
  double T_FB = 0.332;
  double fid_n0 = 0.985, fid_n2 = 0.981, fid_n3 = 0.977;
  double asymmetry = 0.006;
  double p_d = 0.001;
  double chi_sa = kTwoPi * 1.97;
  double chi_sr = kTwoPi * 0.002;
  double n_readout = 70.0;

  static AncillaModel from(const SystemParams& p);
  // T1, T2 -> infinity, M = 1, fidelities 1, no excitation or demolition.
  static AncillaModel perfect();

  double parity_fidelity(double nbar) const;
  double p_match_g(double nbar) const { return parity_fidelity(nbar) + asymmetry; }
  double p_mismatch_e(double nbar) const { return parity_fidelity(nbar) - asymmetry; }
  // Ancilla decay during the mapping that propagates into the resonator.
  double p_forward_propagation() const;
  double p_readout_decay() const;
  double measurement_rotation() const { return n_readout * chi_sr * tau_meas; }
  double measurement_rotation_sd() const { return std::sqrt(n_readout) * chi_sr * tau_meas; }
  double step_overhead() const { return parity_map_time + tau_meas + T_FB; }
  void validate() const;
};

struct AncillaState {
  bool excited = false;
  double time_in_e = 0.0;
};

struct ParityProtocol {
  bool maps_even_to_g = true;
  void flip() { maps_even_to_g = !maps_even_to_g; }
};

struct MeasurementRecord {
  std::vector<int> bits;
  std::vector<double> step_times;  // end time of each step
  std::vector<bool> protocol_signs;  // maps_even_to_g used at each step
  int error_count = 0;
  // Time the ancilla spent in e because of syndrome flips.
  double ancilla_time_in_e = 0.0;

  std::string bit_string() const;
  std::vector<int> jump_step_indices() const;  // 1-based steps with a 1
};

class Plant {
 public:
  virtual ~Plant() = default;
  virtual void prepare(const catcode::LogicalQubit& q) = 0;
  // Evolves for dt, sampling photon jumps.
  virtual void advance(double dt, Rng& rng) = 0;
  virtual int parity() const = 0;
  virtual double time() const = 0;
  virtual double nbar() const = 0;
  // Unknown rotation of the resonator phase space.
  virtual void dephase(Rng& rng) = 0;
  // Known phase-space rotation exp(-i theta n) (added to the frame).
  virtual void rotate(double theta) = 0;
  // Instantaneous photon loss at the current time.
  virtual void jump() = 0;
  virtual int jump_count() const = 0;
  virtual const std::vector<double>& jump_times() const = 0;
  // Decodes with the given parity and frame estimate.
  virtual catcode::DecodeResult decode(int parity, double frame_estimate) const = 0;
};

// CodewordState with Poisson jump sampling on the decaying photon number.
class PhenomenologicalPlant : public Plant {
 public:
  explicit PhenomenologicalPlant(const catcode::CatCodeParams& params);
  void prepare(const catcode::LogicalQubit& q) override;
  void advance(double dt, Rng& rng) override;
  int parity() const override { return state_.parity; }
  double time() const override { return state_.elapsed; }
  double nbar() const override;
  void dephase(Rng& rng) override;
  void rotate(double theta) override;
  void jump() override;
  int jump_count() const override { return state_.error_count; }
  const std::vector<double>& jump_times() const override { return state_.jump_times; }
  catcode::DecodeResult decode(int parity, double frame_estimate) const override;

  const catcode::CodewordState& state() const { return state_; }

 private:
  catcode::CatCodeParams params_;
  catcode::CodewordState state_;
  catcode::LogicalQubit qubit_;
};

// Explicit state vector evolved by jump trajectories of the resonator model.
class FullHilbertPlant : public Plant {
 public:
  FullHilbertPlant(const catcode::CatCodeParams& params, const dynamics::LindbladModel& model);
  void prepare(const catcode::LogicalQubit& q) override;
  void advance(double dt, Rng& rng) override;
  int parity() const override;
  double time() const override { return time_; }
  double nbar() const override;
  void dephase(Rng& rng) override;
  void rotate(double theta) override;
  void jump() override;
  int jump_count() const override { return static_cast<int>(times_.size()); }
  const std::vector<double>& jump_times() const override { return times_; }
  catcode::DecodeResult decode(int parity, double frame_estimate) const override;

  const StateVector& state() const { return psi_; }

 private:
  catcode::CatCodeParams params_;
  dynamics::LindbladModel model_;
  fock::Ladder ops_;
  StateVector psi_;
  double time_ = 0.0;
  std::vector<double> times_;
  std::vector<dynamics::JumpEvent> events_;
};

enum class Outcome { g = 0, e = 1 };

// One syndrome measurement at the current plant time. Consumes, in order:
// outcome draw, forward-propagation draw, measurement-rotation normal,
// demolition draw. A pre-excited ancilla inverts the outcome.
Outcome parity_measure(Plant& plant, AncillaState& ancilla, const AncillaModel& model,
                       const ParityProtocol& protocol, Rng& rng);

// Measure-and-pi loop until two consecutive g readings. Returns the number
// of pi pulses applied.
int ancilla_reset(AncillaState& ancilla, const AncillaModel& model, Rng& rng);

struct MonitorConfig {
  std::vector<double> t_k;  // step durations; the wait is t_k - overhead
};

// Per step: advance by t_k, ancilla excitation with p = 1 - exp(-Gamma_up t_k)
// (inverts the next outcome, dephases the plant), parity_measure, on e flip
// the protocol, reset, and sample the readout T1 event (dephases the plant).
MeasurementRecord adaptive_monitor(Plant& plant, AncillaState& ancilla, const AncillaModel& model,
                                   const MonitorConfig& config, Rng& rng);

enum class PlantKind { phenomenological, full };
PlantKind parse_plant_kind(const std::string& s);
const char* to_string(PlantKind k);

struct CycleOptions {
  double encode_infidelity = 0.04;
  double decode_infidelity = 0.04;
  // Frame estimate from the record; false decodes with zero frame.
  bool kerr_correction = true;
  bool software_correction = true;
  // Decode with a fixed parity (+1 / -1) instead of the record parity; 0 = record.
  int force_decode_parity = 0;
};

struct CycleResult {
  Qubit2 rho;
  Eigen::Vector3d bloch;
  MeasurementRecord record;
  bool depolarized = false;
  int true_jumps = 0;
  double leakage = 0.0;
};

// reset -> encode (+pulse infidelity) -> adaptive_monitor -> frame estimate
// -> decode by record parity (+pulse infidelity) -> Z rotation by
// -(errors mod 4) pi/2. Total time is the sum of config.t_k, or `idle` when
// there are no steps.
CycleResult run_qec_cycle(const catcode::LogicalQubit& q, const MonitorConfig& config,
                          PlantKind kind, const SystemParams& params,
                          const catcode::CatCodeParams& code, Rng& rng,
                          const CycleOptions& options = {}, double idle = 0.0);

// Variant with an explicit ancilla model (perfect-hardware checks).
CycleResult run_qec_cycle(const catcode::LogicalQubit& q, const MonitorConfig& config,
                          PlantKind kind, const AncillaModel& ancilla, const SystemParams& params,
                          const catcode::CatCodeParams& code, Rng& rng,
                          const CycleOptions& options = {}, double idle = 0.0);

// Line-delimited JSON record log.
struct RecordLogEntry {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<int> bits;
  std::vector<double> step_times;
  Eigen::Vector3d bloch = Eigen::Vector3d::Zero();
  std::string confidence;  // "accepted" or "rejected" by post-selection
};
void write_record_log(std::ostream& os, const std::vector<RecordLogEntry>& entries);
std::vector<RecordLogEntry> read_record_log(std::istream& is);

// Flat key = value file. '#' starts a comment. Keys must be in `allowed`,
// otherwise Error(config) naming the key is thrown. Duplicate keys are errors.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& is, const std::vector<std::string>& allowed);
double parse_double(const KeyValues& kv, const std::string& key, double fallback);
int parse_int(const KeyValues& kv, const std::string& key, int fallback);
std::vector<double> parse_double_list(const std::string& key, const std::string& value);

// Keys accepted for SystemParams, with frequencies given in MHz (x 2 pi) for
// the chi_*, K_* and omega_* entries.
const std::vector<std::string>& system_param_keys();
void apply_system_params(const KeyValues& kv, SystemParams& p);
// (key, value in config units) for every system key.
std::vector<std::pair<std::string, double>> system_param_values(const SystemParams& p);

}  // namespace catqec::controller
