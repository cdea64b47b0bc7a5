#pragma once

#include "catqec/analytics.hpp"
#include "catqec/controller.hpp"
#include "catqec/tomography.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace catqec::harness {

inline constexpr const char* kVersion = "catqec 1.0.0";
inline constexpr const char* kOutputDirEnv = "CATQEC_OUTPUT_DIR";

enum class CadenceMode { full, closed_form, fixed_spacing };

struct ExperimentConfig {
  SystemParams system;
  double nbar0 = 2.0;
  controller::PlantKind plant = controller::PlantKind::phenomenological;
  catcode::DecoderKind decoder = catcode::DecoderKind::gram;
  CadenceMode cadence = CadenceMode::full;
  double spacing = 20.0;  // step length for fixed_spacing
  int shots = 10000;      // per cardinal per time point
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::vector<double> cat_times;       // default 9 points over [0, 110]
  std::vector<double> fock_times;      // default 9 points over [0, 300]
  std::vector<double> transmon_times;  // default 9 points over [0, 60]
  bool write_records = false;
  std::string output_dir;

  void validate() const;
  // Flat key = value snapshot (system params in config units).
  std::vector<std::pair<std::string, std::string>> snapshot() const;
};

std::vector<double> linspace(double a, double b, int n);
ExperimentConfig default_experiment();
// Keys beyond the system parameters: nbar0, plant, decoder, cadence,
// spacing, shots, seed, threads, cat_times, fock_times, transmon_times,
// write_records, output_dir.
const std::vector<std::string>& experiment_keys();
ExperimentConfig load_experiment_config(std::istream& is);

struct CurvePoint {
  double t = 0.0;
  int steps = 0;
  double F = 0.0;       // process fidelity chi_00
  double sigma = 0.0;   // standard error of F
  double acceptance = 1.0;
  std::array<Eigen::Vector3d, 6> bloch{};  // in all_cardinals() order
  tomography::ChiMatrix chi = tomography::ChiMatrix::Zero();
};

struct SchemeCurve {
  std::string name;
  std::vector<CurvePoint> points;
  std::optional<tomography::DecayFit> fit;
  std::optional<tomography::DecayFit> model_fit;  // uncorrected-cat law

  std::vector<double> times() const;
  std::vector<double> fidelities() const;
  std::vector<double> sigmas() const;
};

struct RunArchive {
  std::string version = kVersion;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::vector<SchemeCurve> schemes;  // transmon, fock, uncorrected, corrected, postselected
  std::vector<controller::RecordLogEntry> records;  // corrected cat, when requested

  const SchemeCurve& scheme(const std::string& name) const;
};

// Process fidelity and its standard error from per-cardinal Bloch means and
// per-component variances of the mean.
struct CardinalEstimate {
  std::array<Eigen::Vector3d, 6> mean{};
  std::array<Eigen::Vector3d, 6> var_of_mean{};
};
CurvePoint curve_point(double t, const CardinalEstimate& e);
tomography::CardinalBloch to_cardinal_bloch(const std::array<Eigen::Vector3d, 6>& b);

// Exact channels for the two baselines.
tomography::Kraus fock_channel(double t, const SystemParams& p);
tomography::Kraus transmon_channel(double t, const SystemParams& p);

// Steps used by the corrected cat at storage time T.
std::vector<double> corrected_schedule(double T, const ExperimentConfig& cfg);

// Full lifetime comparison. Requires cfg.seed. Per-shot seeds are derived from
// (seed, global shot index) so the result does not depend on cfg.threads.
RunArchive run_lifetime_sweep(const ExperimentConfig& cfg);

std::string archive_to_json(const RunArchive& a);
void write_archive(const RunArchive& a, const std::string& dir);

}  // namespace catqec::harness
