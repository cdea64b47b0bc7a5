#include "catqec/harness.hpp"

#include <json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

namespace catqec::harness {

namespace {

using catcode::Cardinal;
using catcode::LogicalQubit;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

void check_times(const std::vector<double>& t, const char* key) {
  if (t.size() < 4) {
    throw Error(ErrorKind::config, std::string(key) + " needs at least 4 time points", key);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || (i > 0 && !(t[i] > t[i - 1]))) {
      throw Error(ErrorKind::config, std::string(key) + " must be non-negative and increasing", key);
    }
  }
}

const char* cadence_name(CadenceMode m) {
  switch (m) {
    case CadenceMode::full: return "full";
    case CadenceMode::closed_form: return "closed";
    case CadenceMode::fixed_spacing: return "spacing";
  }
  return "?";
}

std::optional<tomography::DecayFit> try_fit(const SchemeCurve& c, tomography::DecayModel m,
                                            double nbar0) {
  try {
    return tomography::fit_decay(c.times(), c.fidelities(), m, nbar0);
  } catch (const Error&) {
    return std::nullopt;
  }
}

nlohmann::json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

nlohmann::json fit_json(const tomography::DecayFit& f) { return nlohmann::json::parse(tomography::fit_to_json(f)); }

}  // namespace

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return v;
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.cat_times = linspace(0.0, 110.0, 9);
  c.fock_times = linspace(0.0, 300.0, 9);
  c.transmon_times = linspace(0.0, 60.0, 9);
  return c;
}

void ExperimentConfig::validate() const {
  system.validate();
  if (!(nbar0 > 0.0)) throw Error(ErrorKind::config, "nbar0 must be positive", "nbar0");
  if (shots < 1) throw Error(ErrorKind::config, "shots must be >= 1", "shots");
  if (threads < 1) throw Error(ErrorKind::config, "threads must be >= 1", "threads");
  if (cadence == CadenceMode::fixed_spacing && !(spacing > system.step_overhead())) {
    throw Error(ErrorKind::config, "spacing must exceed the step overhead", "spacing");
  }
  check_times(cat_times, "cat_times");
  check_times(fock_times, "fock_times");
  check_times(transmon_times, "transmon_times");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::snapshot() const {
  std::vector<std::pair<std::string, std::string>> s;
  for (const auto& [k, v] : controller::system_param_values(system)) s.emplace_back(k, format_double(v));
  s.emplace_back("nbar0", format_double(nbar0));
  s.emplace_back("plant", controller::to_string(plant));
  s.emplace_back("decoder", decoder == catcode::DecoderKind::gram ? "gram" : "unitary");
  s.emplace_back("cadence", cadence_name(cadence));
  s.emplace_back("spacing", format_double(spacing));
  s.emplace_back("shots", std::to_string(shots));
  if (seed) s.emplace_back("seed", std::to_string(*seed));
  s.emplace_back("cat_times", join(cat_times));
  s.emplace_back("fock_times", join(fock_times));
  s.emplace_back("transmon_times", join(transmon_times));
  s.emplace_back("write_records", write_records ? "true" : "false");
  return s;
}

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> k = {
      "nbar0",     "plant",          "decoder",       "cadence",     "spacing",
      "shots",     "seed",           "threads",       "cat_times",   "fock_times",
      "transmon_times", "write_records", "output_dir"};
  return k;
}

ExperimentConfig load_experiment_config(std::istream& is) {
  std::vector<std::string> allowed = controller::system_param_keys();
  allowed.insert(allowed.end(), experiment_keys().begin(), experiment_keys().end());
  const controller::KeyValues kv = controller::parse_key_values(is, allowed);

  ExperimentConfig c = default_experiment();
  controller::apply_system_params(kv, c.system);
  c.nbar0 = controller::parse_double(kv, "nbar0", c.nbar0);
  if (kv.count("plant")) c.plant = controller::parse_plant_kind(kv.at("plant"));
  if (kv.count("decoder")) {
    const std::string& d = kv.at("decoder");
    if (d == "gram") c.decoder = catcode::DecoderKind::gram;
    else if (d == "unitary") c.decoder = catcode::DecoderKind::unitary;
    else throw Error(ErrorKind::config, "decoder must be gram or unitary", "decoder");
  }
  if (kv.count("cadence")) {
    const std::string& m = kv.at("cadence");
    if (m == "full") c.cadence = CadenceMode::full;
    else if (m == "closed") c.cadence = CadenceMode::closed_form;
    else if (m == "spacing") c.cadence = CadenceMode::fixed_spacing;
    else throw Error(ErrorKind::config, "cadence must be full, closed or spacing", "cadence");
  }
  c.spacing = controller::parse_double(kv, "spacing", c.spacing);
  c.shots = controller::parse_int(kv, "shots", c.shots);
  c.threads = controller::parse_int(kv, "threads", c.threads);
  if (kv.count("seed")) {
    try {
      const std::string& v = kv.at("seed");
      // stoull silently wraps a leading minus
      if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0]))) throw std::invalid_argument("sign");
      std::size_t pos = 0;
      c.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, "seed must be a non-negative integer", "seed");
    }
  }
  if (kv.count("cat_times")) c.cat_times = controller::parse_double_list("cat_times", kv.at("cat_times"));
  if (kv.count("fock_times")) c.fock_times = controller::parse_double_list("fock_times", kv.at("fock_times"));
  if (kv.count("transmon_times")) {
    c.transmon_times = controller::parse_double_list("transmon_times", kv.at("transmon_times"));
  }
  if (kv.count("write_records")) {
    const std::string& w = kv.at("write_records");
    if (w != "true" && w != "false") {
      throw Error(ErrorKind::config, "write_records must be true or false", "write_records");
    }
    c.write_records = w == "true";
  }
  if (kv.count("output_dir")) c.output_dir = kv.at("output_dir");
  c.validate();
  return c;
}

std::vector<double> SchemeCurve::times() const {
  std::vector<double> v;
  for (const auto& p : points) v.push_back(p.t);
  return v;
}

std::vector<double> SchemeCurve::fidelities() const {
  std::vector<double> v;
  for (const auto& p : points) v.push_back(p.F);
  return v;
}

std::vector<double> SchemeCurve::sigmas() const {
  std::vector<double> v;
  for (const auto& p : points) v.push_back(p.sigma);
  return v;
}

const SchemeCurve& RunArchive::scheme(const std::string& name) const {
  for (const auto& s : schemes) {
    if (s.name == name) return s;
  }
  throw Error(ErrorKind::invalid_argument, "no scheme named " + name, "scheme");
}

tomography::CardinalBloch to_cardinal_bloch(const std::array<Eigen::Vector3d, 6>& b) {
  // all_cardinals() order: +x, -x, +y, -y, +z, -z
  tomography::CardinalBloch d;
  d.plus_x = b[0];
  d.minus_x = b[1];
  d.plus_y = b[2];
  d.minus_y = b[3];
  d.plus_z = b[4];
  d.minus_z = b[5];
  return d;
}

CurvePoint curve_point(double t, const CardinalEstimate& e) {
  CurvePoint p;
  p.t = t;
  p.bloch = e.mean;
  const auto& m = e.mean;
  p.F = 0.25 * (1.0 + 0.5 * (m[0].x() - m[1].x()) + 0.5 * (m[2].y() - m[3].y()) +
                0.5 * (m[4].z() - m[5].z()));
  const auto& v = e.var_of_mean;
  p.sigma = std::sqrt(v[0].x() + v[1].x() + v[2].y() + v[3].y() + v[4].z() + v[5].z()) / 8.0;
  tomography::ChiOptions opt;
  opt.clip = true;
  p.chi = tomography::chi_from_cardinals(to_cardinal_bloch(m), opt);
  return p;
}

tomography::Kraus fock_channel(double t, const SystemParams& p) {
  // relaxation from GAD, remaining coherence loss to reach T2_s
  const double extra = 1.0 / p.T2_s - 0.5 / p.tau_s;
  return tomography::compose(tomography::amplitude_damping_channel(t, p.tau_s, p.n_th_s),
                             tomography::dephasing_channel(std::exp(-std::max(0.0, extra) * t)));
}

tomography::Kraus transmon_channel(double t, const SystemParams& p) {
  const double extra = 1.0 / p.T2 - 0.5 / p.T1;
  return tomography::compose(tomography::amplitude_damping_channel(t, p.T1, p.n_th_a),
                             tomography::dephasing_channel(std::exp(-std::max(0.0, extra) * t)));
}

std::vector<double> corrected_schedule(double T, const ExperimentConfig& cfg) {
  if (T <= 0.0) return {};
  switch (cfg.cadence) {
    case CadenceMode::full:
      return analytics::optimize_cadence_full(T, cfg.nbar0, cfg.system).t_k;
    case CadenceMode::closed_form:
      return analytics::optimize_cadence(T, cfg.nbar0, cfg.system).t_k;
    case CadenceMode::fixed_spacing: {
      const int S = static_cast<int>(std::lround(T / cfg.spacing));
      return analytics::equal_lambda_schedule(T, S, cfg.system.kappa_s);
    }
  }
  return {};
}

namespace {

SchemeCurve baseline(const std::string& name, const std::vector<double>& times,
                     const std::function<tomography::Kraus(double)>& channel, double pulse) {
  SchemeCurve c;
  c.name = name;
  const tomography::Kraus depol = {
      std::sqrt(1.0 - 0.75 * pulse) * Qubit2::Identity(),
      std::sqrt(pulse / 4.0) * (Qubit2() << 0, 1, 1, 0).finished(),
      std::sqrt(pulse / 4.0) * (Qubit2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      std::sqrt(pulse / 4.0) * (Qubit2() << 1, 0, 0, -1).finished()};
  for (double t : times) {
    const tomography::Kraus k = tomography::compose(tomography::compose(depol, channel(t)), depol);
    CardinalEstimate e;
    for (std::size_t i = 0; i < 6; ++i) {
      const LogicalQubit q = LogicalQubit::cardinal(catcode::all_cardinals()[i]);
      e.mean[i] = tomography::bloch_from_density(tomography::apply_kraus(k, q.density()));
      e.var_of_mean[i].setZero();
    }
    c.points.push_back(curve_point(t, e));
  }
  return c;
}

struct ShotResult {
  Eigen::Vector3d bloch;
  bool accepted = true;
  std::vector<int> bits;
  std::vector<double> step_times;
  std::uint64_t seed = 0;
};

}  // namespace

RunArchive run_lifetime_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.seed) throw Error(ErrorKind::config, "a seed is required for archived runs", "seed");
  const std::uint64_t master = *cfg.seed;

  RunArchive a;
  a.config = cfg.snapshot();
  a.seed = master;

  const SystemParams& p = cfg.system;
  a.schemes.push_back(baseline("transmon", cfg.transmon_times,
                               [&](double t) { return transmon_channel(t, p); }, 0.0));
  a.schemes.push_back(baseline("fock", cfg.fock_times, [&](double t) { return fock_channel(t, p); },
                               p.fock_pulse_infidelity));

  catcode::CatCodeParams code = catcode::CatCodeParams::from(p, cfg.nbar0);
  code.decoder = cfg.decoder;
  const controller::AncillaModel anc = controller::AncillaModel::from(p);
  const std::size_t shots = static_cast<std::size_t>(cfg.shots);
  const std::size_t npts = cfg.cat_times.size();

  SchemeCurve unc{"uncorrected", {}, {}, {}};
  SchemeCurve cor{"corrected", {}, {}, {}};
  SchemeCurve post{"postselected", {}, {}, {}};

  std::vector<ShotResult> results(shots);
  for (int scheme = 0; scheme < 2; ++scheme) {
    const bool corrected = scheme == 1;
    for (std::size_t ip = 0; ip < npts; ++ip) {
      const double T = cfg.cat_times[ip];
      controller::MonitorConfig mc;
      if (corrected) mc.t_k = corrected_schedule(T, cfg);
      controller::CycleOptions opt;
      opt.encode_infidelity = p.cat_pulse_infidelity;
      opt.decode_infidelity = p.cat_pulse_infidelity;
      if (!corrected) opt.force_decode_parity = 1;

      CardinalEstimate all, acc;
      std::size_t accepted_total = 0;
      for (std::size_t ic = 0; ic < 6; ++ic) {
        const LogicalQubit q = LogicalQubit::cardinal(catcode::all_cardinals()[ic]);
        const std::uint64_t base = ((scheme * npts + ip) * 6 + ic) * shots;
        parallel_for(shots, cfg.threads, [&](std::size_t i) {
          const std::uint64_t s = Rng::derive_seed(master, base + i);
          Rng rng(s);
          const controller::CycleResult r = controller::run_qec_cycle(
              q, mc, cfg.plant, anc, p, code, rng, opt, corrected ? 0.0 : T);
          ShotResult& out = results[i];
          out.bloch = r.bloch;
          out.accepted = analytics::postselect_accepts(r.record.bits);
          out.seed = s;
          if (corrected && cfg.write_records) {
            out.bits = r.record.bits;
            out.step_times = r.record.step_times;
          }
        });
        // fixed-order reduction
        Eigen::Vector3d s1 = Eigen::Vector3d::Zero(), s2 = Eigen::Vector3d::Zero();
        Eigen::Vector3d a1 = Eigen::Vector3d::Zero(), a2 = Eigen::Vector3d::Zero();
        std::size_t na = 0;
        for (std::size_t i = 0; i < shots; ++i) {
          const ShotResult& r = results[i];
          s1 += r.bloch;
          s2 += r.bloch.cwiseProduct(r.bloch);
          if (r.accepted) {
            a1 += r.bloch;
            a2 += r.bloch.cwiseProduct(r.bloch);
            ++na;
          }
          if (corrected && cfg.write_records) {
            controller::RecordLogEntry e;
            e.run_index = base + i;
            e.seed = r.seed;
            e.bits = r.bits;
            e.step_times = r.step_times;
            e.bloch = r.bloch;
            e.confidence = r.accepted ? "accepted" : "rejected";
            a.records.push_back(std::move(e));
          }
        }
        const double n = static_cast<double>(shots);
        all.mean[ic] = s1 / n;
        all.var_of_mean[ic] = (s2 / n - all.mean[ic].cwiseProduct(all.mean[ic])).cwiseMax(0.0) / n;
        if (na > 0) {
          const double m = static_cast<double>(na);
          acc.mean[ic] = a1 / m;
          acc.var_of_mean[ic] = (a2 / m - acc.mean[ic].cwiseProduct(acc.mean[ic])).cwiseMax(0.0) / m;
        } else {
          acc.mean[ic].setZero();
          acc.var_of_mean[ic].setZero();
        }
        accepted_total += na;
      }
      CurvePoint pt = curve_point(T, all);
      pt.steps = static_cast<int>(mc.t_k.size());
      if (corrected) {
        cor.points.push_back(pt);
        CurvePoint pp = curve_point(T, acc);
        pp.steps = pt.steps;
        pp.acceptance = static_cast<double>(accepted_total) / (6.0 * shots);
        post.points.push_back(pp);
      } else {
        unc.points.push_back(pt);
      }
    }
  }
  a.schemes.push_back(std::move(unc));
  a.schemes.push_back(std::move(cor));
  a.schemes.push_back(std::move(post));

  for (auto& s : a.schemes) {
    s.fit = try_fit(s, tomography::DecayModel::single_exponential, 0.0);
    if (s.name == "uncorrected") s.model_fit = try_fit(s, tomography::DecayModel::uncorrected_cat, cfg.nbar0);
  }
  return a;
}

std::string archive_to_json(const RunArchive& a) {
  nlohmann::ordered_json j;
  j["version"] = a.version;
  j["seed"] = a.seed;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : a.config) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::ordered_json schemes = nlohmann::ordered_json::array();
  for (const auto& s : a.schemes) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : s.points) {
      nlohmann::ordered_json jp;
      jp["t"] = p.t;
      jp["steps"] = p.steps;
      jp["F"] = p.F;
      jp["sigma_F"] = p.sigma;
      jp["acceptance"] = p.acceptance;
      nlohmann::ordered_json b;
      for (std::size_t i = 0; i < 6; ++i) b[catcode::to_string(catcode::all_cardinals()[i])] = vec_json(p.bloch[i]);
      jp["bloch"] = b;
      jp["chi"] = nlohmann::json::parse(tomography::chi_to_json(p.chi))["chi"];
      pts.push_back(jp);
    }
    js["points"] = pts;
    if (s.fit) js["fit"] = fit_json(*s.fit);
    if (s.model_fit) js["model_fit"] = fit_json(*s.model_fit);
    schemes.push_back(js);
  }
  j["schemes"] = schemes;
  return j.dump(2);
}

void write_archive(const RunArchive& a, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message(), "out");
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw Error(ErrorKind::io, "cannot write " + (fs::path(dir) / name).string(), "out");
    return f;
  };
  {
    auto f = open("archive.json");
    f << archive_to_json(a) << '\n';
  }
  for (const auto& s : a.schemes) {
    auto f = open("decay_" + s.name + ".csv");
    tomography::write_decay_csv(f, s.times(), s.fidelities(), s.sigmas());
  }
  if (!a.records.empty()) {
    auto f = open("records.jsonl");
    controller::write_record_log(f, a.records);
  }
}

}  // namespace catqec::harness
