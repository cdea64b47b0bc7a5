#include "catqec/controller.hpp"

#include "catqec/fock.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace catqec::controller {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Qubit2 z_rotation(int k) {
  // diag(1, (-i)^k)
  static const cplx phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  Qubit2 r = Qubit2::Zero();
  r(0, 0) = 1.0;
  r(1, 1) = phases[((k % 4) + 4) % 4];
  return r;
}

Qubit2 depolarize(const Qubit2& rho, double p) {
  return (1.0 - p) * rho + 0.5 * p * Qubit2::Identity();
}

catcode::DecodeResult mixed_result(double leakage) {
  catcode::DecodeResult r;
  r.leakage = leakage;
  r.leakage_exceeded = true;
  r.rho = 0.5 * Qubit2::Identity();
  return r;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

AncillaModel AncillaModel::from(const SystemParams& p) {
  AncillaModel a;
  a.T1 = p.T1;
  a.T2 = p.T2;
  a.Gamma_up = p.Gamma_up;
  a.M_gg = p.M_gg;
  a.M_ee = p.M_ee;
  a.parity_map_time = p.parity_map_time();
  a.tau_meas = p.tau_meas;
  a.T_FB = p.T_FB;
  a.fid_n0 = p.parity_fid_n0;
  a.fid_n2 = p.parity_fid_n2;
  a.fid_n3 = p.parity_fid_n3;
  a.asymmetry = p.parity_asymmetry;
  a.p_d = p.p_d;
  a.chi_sa = p.chi_sa;
  a.chi_sr = p.chi_sr;
  a.n_readout = p.n_readout;
  return a;
}

AncillaModel AncillaModel::perfect() {
  AncillaModel a;
  a.T1 = kInf;
  a.T2 = kInf;
  a.Gamma_up = 0.0;
  a.M_gg = a.M_ee = 1.0;
  a.fid_n0 = a.fid_n2 = a.fid_n3 = 1.0;
  a.asymmetry = 0.0;
  a.p_d = 0.0;
  a.chi_sr = 0.0;
  a.parity_map_time = kPi / a.chi_sa;
  return a;
}

double AncillaModel::parity_fidelity(double nbar) const {
  if (nbar <= 0.0) return fid_n0;
  if (nbar <= 2.0) return fid_n0 + (fid_n2 - fid_n0) * nbar / 2.0;
  if (nbar <= 3.0) return fid_n2 + (fid_n3 - fid_n2) * (nbar - 2.0);
  return fid_n3;
}

double AncillaModel::p_forward_propagation() const {
  return std::isinf(T1) ? 0.0 : kPi / (chi_sa * 2.0 * T1);
}

double AncillaModel::p_readout_decay() const {
  return std::isinf(T1) ? 0.0 : -std::expm1(-(tau_meas + T_FB) / T1);
}

void AncillaModel::validate() const {
  auto prob = [](double v, const char* key) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::config, std::string(key) + " must lie in [0, 1]", key);
    }
  };
  prob(M_gg, "M_gg");
  prob(M_ee, "M_ee");
  prob(p_d, "p_d");
  for (double n : {0.0, 2.0, 3.0}) {
    prob(p_match_g(n), "parity_asymmetry");
    prob(p_mismatch_e(n), "parity_asymmetry");
  }
  if (!(T1 > 0.0)) throw Error(ErrorKind::config, "T1 must be positive", "T1");
  if (!(T2 > 0.0)) throw Error(ErrorKind::config, "T2 must be positive", "T2");
  if (!(Gamma_up >= 0.0)) throw Error(ErrorKind::config, "Gamma_up must be >= 0", "Gamma_up");
}

std::string MeasurementRecord::bit_string() const {
  std::string s;
  for (int b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<int> MeasurementRecord::jump_step_indices() const {
  std::vector<int> idx;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k]) idx.push_back(static_cast<int>(k) + 1);
  }
  return idx;
}

// ---------------------------------------------------------------------------

PhenomenologicalPlant::PhenomenologicalPlant(const catcode::CatCodeParams& params)
    : params_(params) {
  params_.validate();
  state_ = catcode::initial_codeword(params_);
}

void PhenomenologicalPlant::prepare(const catcode::LogicalQubit& q) {
  qubit_ = q;
  state_ = catcode::initial_codeword(params_);
}

double PhenomenologicalPlant::nbar() const {
  return params_.nbar0 * std::exp(-params_.kappa_s * state_.elapsed);
}

void PhenomenologicalPlant::advance(double dt, Rng& rng) {
  if (dt < 0.0) throw Error(ErrorKind::invalid_argument, "dt must be >= 0", "dt");
  const double k = params_.kappa_s;
  const double s = state_.elapsed;
  const double e = s + dt;
  const double es = std::exp(-k * s), ee = std::exp(-k * e);
  const int n = rng.poisson(params_.nbar0 * (es - ee));
  std::vector<double> times;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    times.push_back(-std::log(es - u * (es - ee)) / k);
  }
  std::sort(times.begin(), times.end());
  for (double t : times) state_ = catcode::apply_logical_jump(state_, std::clamp(t, s, e), params_.K_s);
  // thermal photon gain leaves the code space
  const double nbar_mid = params_.nbar0 * std::exp(-k * 0.5 * (s + e));
  if (params_.n_th > 0.0 && rng.poisson(k * params_.n_th * (nbar_mid + 1.0) * dt) > 0) {
    state_.parity = -state_.parity;
    state_.dephased = true;
  }
  state_ = catcode::advance_to(state_, e);
}

void PhenomenologicalPlant::dephase(Rng& rng) {
  (void)rng.uniform();  // same stream usage as the full plant
  state_.dephased = true;
}

void PhenomenologicalPlant::rotate(double theta) { state_.frame_angle += theta; }

void PhenomenologicalPlant::jump() {
  state_ = catcode::apply_logical_jump(state_, state_.elapsed, params_.K_s);
}

catcode::DecodeResult PhenomenologicalPlant::decode(int parity, double frame_estimate) const {
  if (state_.dephased) return mixed_result(1.0);
  if (parity != state_.parity) return mixed_result(1.0);
  const StateVector psi = catcode::codeword_state(qubit_, state_, params_);
  catcode::CodewordState s = catcode::initial_codeword(params_);
  s.elapsed = state_.elapsed;
  s.parity = parity;
  s.frame_angle = frame_estimate;
  return catcode::decode_ideal(psi, s, params_);
}

// ---------------------------------------------------------------------------

FullHilbertPlant::FullHilbertPlant(const catcode::CatCodeParams& params,
                                   const dynamics::LindbladModel& model)
    : params_(params), model_(model), ops_(fock::ladder_ops(params.resolved_dim())) {
  params_.validate();
  model_.validate();
  if (model_.dim() != params_.resolved_dim()) {
    throw Error(ErrorKind::dim_mismatch, "model and code dimensions differ", "dim");
  }
}

void FullHilbertPlant::prepare(const catcode::LogicalQubit& q) {
  psi_ = catcode::encode_ideal(q, params_);
  time_ = 0.0;
  times_.clear();
  events_.clear();
}

void FullHilbertPlant::advance(double dt, Rng& rng) {
  const std::size_t before = events_.size();
  psi_ = dynamics::evolve_trajectory(psi_, model_, time_, dt, rng, events_);
  for (std::size_t i = before; i < events_.size(); ++i) times_.push_back(events_[i].time);
  time_ += dt;
}

int FullHilbertPlant::parity() const {
  return fock::expectation(ops_.parity, psi_).real() >= 0.0 ? 1 : -1;
}

double FullHilbertPlant::nbar() const { return fock::mean_photon_number(psi_); }

void FullHilbertPlant::dephase(Rng& rng) { psi_ = fock::rotate(psi_, kTwoPi * rng.uniform()); }

void FullHilbertPlant::rotate(double theta) { psi_ = fock::rotate(psi_, -theta); }

void FullHilbertPlant::jump() {
  StateVector next = ops_.a * psi_;
  const double n = next.norm();
  if (n < 1e-300) return;  // vacuum has nothing to lose
  psi_ = next / n;
  times_.push_back(time_);
}

catcode::DecodeResult FullHilbertPlant::decode(int parity, double frame_estimate) const {
  catcode::CodewordState s = catcode::initial_codeword(params_);
  s.elapsed = time_;
  s.parity = parity;
  s.frame_angle = frame_estimate;
  return catcode::decode_ideal(psi_, s, params_);
}

// ---------------------------------------------------------------------------

Outcome parity_measure(Plant& plant, AncillaState& ancilla, const AncillaModel& model,
                       const ParityProtocol& protocol, Rng& rng) {
  const double nbar = plant.nbar();
  const bool expect_g = (plant.parity() == 1) == protocol.maps_even_to_g;
  const double u = rng.uniform();
  Outcome out;
  if (expect_g) out = u < model.p_match_g(nbar) ? Outcome::g : Outcome::e;
  else out = u < model.p_mismatch_e(nbar) ? Outcome::e : Outcome::g;
  if (ancilla.excited) out = out == Outcome::g ? Outcome::e : Outcome::g;

  if (rng.bernoulli(model.p_forward_propagation())) plant.dephase(rng);
  plant.rotate(model.measurement_rotation() + model.measurement_rotation_sd() * rng.normal());
  if (rng.bernoulli(model.p_d)) plant.jump();

  ancilla.excited = out == Outcome::e;
  return out;
}

int ancilla_reset(AncillaState& ancilla, const AncillaModel& model, Rng& rng) {
  int pulses = 0;
  int consecutive_g = 0;
  for (int iter = 0; consecutive_g < 2 && iter < 1000; ++iter) {
    const bool read_e = ancilla.excited ? rng.bernoulli(model.M_ee) : !rng.bernoulli(model.M_gg);
    if (read_e) {
      consecutive_g = 0;
      ancilla.excited = !ancilla.excited;
      ++pulses;
    } else {
      ++consecutive_g;
    }
  }
  return pulses;
}

MeasurementRecord adaptive_monitor(Plant& plant, AncillaState& ancilla, const AncillaModel& model,
                                   const MonitorConfig& config, Rng& rng) {
  MeasurementRecord rec;
  ParityProtocol protocol;
  for (double t_k : config.t_k) {
    if (t_k < 0.0) throw Error(ErrorKind::invalid_argument, "step durations must be >= 0", "t_k");
    plant.advance(t_k, rng);
    if (rng.bernoulli(-std::expm1(-model.Gamma_up * t_k))) {
      ancilla.excited = true;
      plant.dephase(rng);
    }
    rec.protocol_signs.push_back(protocol.maps_even_to_g);
    const Outcome out = parity_measure(plant, ancilla, model, protocol, rng);
    rec.bits.push_back(static_cast<int>(out));
    rec.step_times.push_back(plant.time());
    if (out == Outcome::e) {
      protocol.flip();
      ++rec.error_count;
      rec.ancilla_time_in_e += model.tau_meas + model.T_FB;
      ancilla_reset(ancilla, model, rng);
      if (rng.bernoulli(model.p_readout_decay())) plant.dephase(rng);
    }
  }
  return rec;
}

PlantKind parse_plant_kind(const std::string& s) {
  if (s == "phenomenological" || s == "phen") return PlantKind::phenomenological;
  if (s == "full") return PlantKind::full;
  throw Error(ErrorKind::config, "unknown plant kind '" + s + "'", "plant");
}

const char* to_string(PlantKind k) {
  return k == PlantKind::full ? "full" : "phenomenological";
}

CycleResult run_qec_cycle(const catcode::LogicalQubit& q, const MonitorConfig& config,
                          PlantKind kind, const SystemParams& params,
                          const catcode::CatCodeParams& code, Rng& rng,
                          const CycleOptions& options, double idle) {
  return run_qec_cycle(q, config, kind, AncillaModel::from(params), params, code, rng, options,
                       idle);
}

CycleResult run_qec_cycle(const catcode::LogicalQubit& q, const MonitorConfig& config,
                          PlantKind kind, const AncillaModel& ancilla_model,
                          const SystemParams& params, const catcode::CatCodeParams& code,
                          Rng& rng, const CycleOptions& options, double idle) {
  ancilla_model.validate();
  code.validate();
  if (idle < 0.0) throw Error(ErrorKind::invalid_argument, "idle time must be >= 0", "idle");

  catcode::LogicalQubit input = q;
  if (rng.bernoulli(options.encode_infidelity)) {
    input = rng.bernoulli(0.5) ? catcode::LogicalQubit{1.0, 0.0} : catcode::LogicalQubit{0.0, 1.0};
  }

  std::unique_ptr<Plant> plant;
  if (kind == PlantKind::full) {
    dynamics::ResonatorModelOptions ro;
    ro.thermal = code.n_th > 0.0;
    SystemParams sp = params;
    sp.kappa_s = code.kappa_s;
    sp.K_s = code.K_s;
    sp.n_th_s = code.n_th;
    plant = std::make_unique<FullHilbertPlant>(code,
                                               dynamics::resonator_model(sp, code.resolved_dim(), ro));
  } else {
    plant = std::make_unique<PhenomenologicalPlant>(code);
  }
  plant->prepare(input);

  AncillaState ancilla;
  ancilla_reset(ancilla, ancilla_model, rng);

  CycleResult res;
  res.record = adaptive_monitor(*plant, ancilla, ancilla_model, config, rng);
  if (config.t_k.empty() && idle > 0.0) {
    plant->advance(idle, rng);
    if (rng.bernoulli(-std::expm1(-ancilla_model.Gamma_up * idle))) plant->dephase(rng);
  }

  double frame = 0.0;
  if (options.kerr_correction && !res.record.bits.empty()) {
    std::vector<double> bounds{0.0};
    for (double t : config.t_k) bounds.push_back(bounds.back() + t);
    frame = catcode::kerr_frame_estimate(res.record.jump_step_indices(), bounds, code.K_s);
    frame += ancilla_model.measurement_rotation() * static_cast<double>(res.record.bits.size());
  }
  const int parity = options.force_decode_parity != 0 ? options.force_decode_parity
                                                      : (res.record.error_count % 2 == 0 ? 1 : -1);
  const catcode::DecodeResult dr = plant->decode(parity, frame);
  res.depolarized = dr.leakage_exceeded;
  res.leakage = dr.leakage;
  res.true_jumps = plant->jump_count();

  Qubit2 rho = dr.rho;
  if (options.software_correction) {
    const Qubit2 r = z_rotation(res.record.error_count);
    rho = r * rho * r.adjoint();
  }
  rho = depolarize(rho, options.decode_infidelity);
  res.rho = rho;
  res.bloch = catcode::bloch_of(rho);
  return res;
}

// ---------------------------------------------------------------------------

void write_record_log(std::ostream& os, const std::vector<RecordLogEntry>& entries) {
  for (const auto& e : entries) {
    nlohmann::json j;
    j["run"] = e.run_index;
    j["seed"] = e.seed;
    j["bits"] = e.bits;
    j["step_times"] = e.step_times;
    j["bloch"] = {e.bloch.x(), e.bloch.y(), e.bloch.z()};
    j["confidence"] = e.confidence;
    os << j.dump() << '\n';
  }
}

std::vector<RecordLogEntry> read_record_log(std::istream& is) {
  std::vector<RecordLogEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RecordLogEntry e;
      e.run_index = j.at("run").get<std::size_t>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.bits = j.at("bits").get<std::vector<int>>();
      e.step_times = j.at("step_times").get<std::vector<double>>();
      const auto b = j.at("bloch").get<std::vector<double>>();
      if (b.size() != 3) throw std::runtime_error("bloch needs 3 components");
      e.bloch = {b[0], b[1], b[2]};
      e.confidence = j.at("confidence").get<std::string>();
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(ErrorKind::io,
                  "bad record on line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

KeyValues parse_key_values(std::istream& is, const std::vector<std::string>& allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(lineno) + " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!ok.count(key)) throw Error(ErrorKind::config, "unknown config key '" + key + "'", key);
    if (kv.count(key)) throw Error(ErrorKind::config, "duplicate config key '" + key + "'", key);
    if (value.empty()) throw Error(ErrorKind::config, "empty value for '" + key + "'", key);
    kv[key] = value;
  }
  return kv;
}

double parse_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "value for '" + key + "' is not a number", key);
  }
}

int parse_int(const KeyValues& kv, const std::string& key, int fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "value for '" + key + "' is not an integer", key);
  }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "value list for '" + key + "' has a bad entry '" + item + "'",
                  key);
    }
  }
  return out;
}

namespace {

struct ParamField {
  const char* key;
  double SystemParams::*member;
  double scale;
};

const std::vector<ParamField>& param_fields() {
  static const std::vector<ParamField> f = {
      {"omega_s", &SystemParams::omega_s, kTwoPi},
      {"omega_a", &SystemParams::omega_a, kTwoPi},
      {"omega_r", &SystemParams::omega_r, kTwoPi},
      {"chi_sa", &SystemParams::chi_sa, kTwoPi},
      {"chi_ra", &SystemParams::chi_ra, kTwoPi},
      {"chi_sr", &SystemParams::chi_sr, kTwoPi},
      {"K_s", &SystemParams::K_s, kTwoPi},
      {"K_r", &SystemParams::K_r, kTwoPi},
      {"K_a", &SystemParams::K_a, kTwoPi},
      {"tau_s", &SystemParams::tau_s, 1.0},
      {"T2_s", &SystemParams::T2_s, 1.0},
      {"n_th_s", &SystemParams::n_th_s, 1.0},
      {"T1", &SystemParams::T1, 1.0},
      {"T2", &SystemParams::T2, 1.0},
      {"n_th_a", &SystemParams::n_th_a, 1.0},
      {"M_gg", &SystemParams::M_gg, 1.0},
      {"M_ee", &SystemParams::M_ee, 1.0},
      {"tau_meas", &SystemParams::tau_meas, 1.0},
      {"T_FB", &SystemParams::T_FB, 1.0},
      {"p_d", &SystemParams::p_d, 1.0},
      {"n_readout", &SystemParams::n_readout, 1.0},
      {"parity_fid_n0", &SystemParams::parity_fid_n0, 1.0},
      {"parity_fid_n2", &SystemParams::parity_fid_n2, 1.0},
      {"parity_fid_n3", &SystemParams::parity_fid_n3, 1.0},
      {"parity_asymmetry", &SystemParams::parity_asymmetry, 1.0},
      {"cat_pulse_infidelity", &SystemParams::cat_pulse_infidelity, 1.0},
      {"fock_pulse_infidelity", &SystemParams::fock_pulse_infidelity, 1.0},
  };
  return f;
}

}  // namespace

const std::vector<std::string>& system_param_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : param_fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

void apply_system_params(const KeyValues& kv, SystemParams& p) {
  for (const auto& f : param_fields()) {
    if (kv.count(f.key)) p.*(f.member) = parse_double(kv, f.key, 0.0) * f.scale;
  }
  p.sync_derived();
  p.validate();
}

std::vector<std::pair<std::string, double>> system_param_values(const SystemParams& p) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& f : param_fields()) out.emplace_back(f.key, p.*(f.member) / f.scale);
  return out;
}

}  // namespace catqec::controller
