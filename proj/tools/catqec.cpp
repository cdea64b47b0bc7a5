// catqec command-line front end.
#include "catqec/analytics.hpp"
#include "catqec/fock.hpp"
#include "catqec/harness.hpp"
#include "catqec/tomography.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace catqec;

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& key) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << '\n';
  return kind == "usage" ? 2 : 1;
}

std::string default_output_dir() {
  const char* env = std::getenv(harness::kOutputDirEnv);
  return env && *env ? env : "catqec_out";
}

// Output sink: a file when `path` is non-empty, stdout otherwise.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path, "out");
  write(f);
}

harness::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return harness::default_experiment();
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read config " + path, "config");
  return harness::load_experiment_config(f);
}

Eigen::Vector3d read_vec(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::invalid_argument, std::string("missing ") + key, key);
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw Error(ErrorKind::invalid_argument, std::string(key) + " must be [x, y, z]", key);
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

tomography::CardinalBloch read_cardinals(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::io, "cannot read " + path, "bloch");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("invalid JSON: ") + e.what(), "bloch");
  }
  tomography::CardinalBloch d;
  d.plus_x = read_vec(j, "+x");
  d.plus_y = read_vec(j, "+y");
  d.plus_z = read_vec(j, "+z");
  d.minus_z = read_vec(j, "-z");
  if (j.contains("-x")) d.minus_x = read_vec(j, "-x");
  if (j.contains("-y")) d.minus_y = read_vec(j, "-y");
  return d;
}

StateVector build_state(const std::string& kind, double re, double im, int n, int dim) {
  const cplx alpha(re, im);
  if (kind == "vacuum") return fock::fock_state(0, dim);
  if (kind == "fock") {
    if (n < 0 || n >= dim) throw Error(ErrorKind::invalid_argument, "n must lie in [0, dim)", "n");
    return fock::fock_state(n, dim);
  }
  if (kind == "coherent") return fock::coherent_state(alpha, dim);
  if (kind == "cat-even") return fock::cat_state(alpha, 1, dim);
  if (kind == "cat-odd") return fock::cat_state(alpha, -1, dim);
  throw Error(ErrorKind::invalid_argument,
              "state must be vacuum, fock, coherent, cat-even or cat-odd", "state");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cat-code error-correction simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string(harness::kVersion));
  app.require_subcommand(1);

  // run-qec
  auto* run = app.add_subcommand("run-qec", "Lifetime sweep of all storage schemes");
  std::string run_config, run_out, run_plant;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_shots, run_threads;
  bool run_records = false;
  run->add_option("-c,--config", run_config, "key = value config file");
  run->add_option("--seed", run_seed, "master seed (required)");
  run->add_option("--shots", run_shots, "shots per cardinal per time point");
  run->add_option("--threads", run_threads, "worker threads");
  run->add_option("--plant", run_plant, "phenomenological or full");
  run->add_flag("--records", run_records, "write records.jsonl");
  run->add_option("-o,--out", run_out, "output directory");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Cadence optimization over storage times");
  double t_min = 10.0, t_max = 110.0, t_step = 10.0, opt_nbar0 = 2.0;
  std::string opt_config, opt_out, opt_method = "full";
  opt->add_option("--t-min", t_min);
  opt->add_option("--t-max", t_max);
  opt->add_option("--t-step", t_step);
  opt->add_option("--nbar0", opt_nbar0);
  opt->add_option("--method", opt_method, "full or closed");
  opt->add_option("-c,--config", opt_config);
  opt->add_option("-o,--out", opt_out, "CSV path (stdout if omitted)");

  // bayes
  auto* bayes = app.add_subcommand("bayes", "Record probabilities and confidences");
  int b_steps = 2;
  double b_nbar0 = 3.0, b_tw = 13.8, b_tau = 250.0, b_pg = 0.983, b_pe = 0.971;
  std::string b_out;
  bayes->add_option("-S,--steps", b_steps);
  bayes->add_option("--nbar0", b_nbar0);
  bayes->add_option("--t-w", b_tw);
  bayes->add_option("--tau-s", b_tau);
  bayes->add_option("--p-g", b_pg, "P(g | no error)");
  bayes->add_option("--p-e", b_pe, "P(e | error)");
  bayes->add_option("-o,--out", b_out);

  // budget
  auto* budget = app.add_subcommand("budget", "Per-channel loss budget");
  std::vector<double> b_tm = {1.0, 20.0};
  double bud_nbar = 2.0;
  std::string bud_config, bud_out;
  budget->add_option("--t-M", b_tm, "step times")->delimiter(',');
  budget->add_option("--nbar", bud_nbar);
  budget->add_option("-c,--config", bud_config);
  budget->add_option("-o,--out", bud_out);

  // wigner
  auto* wig = app.add_subcommand("wigner", "Wigner function on a square grid");
  std::string w_state = "cat-even", w_out;
  double w_re = 2.0, w_im = 0.0, w_extent = 3.0;
  int w_n = 0, w_points = 61, w_dim = 0;
  wig->add_option("--state", w_state, "vacuum, fock, coherent, cat-even, cat-odd");
  wig->add_option("--alpha-re", w_re);
  wig->add_option("--alpha-im", w_im);
  wig->add_option("-n", w_n, "Fock level");
  wig->add_option("--extent", w_extent);
  wig->add_option("--points", w_points);
  wig->add_option("--dim", w_dim, "Hilbert dimension (auto if 0)");
  wig->add_option("-o,--out", w_out);

  // tomo
  auto* tomo = app.add_subcommand("tomo", "Process matrix from cardinal data or decay fit");
  std::string t_bloch, t_decay, t_model = "exp", t_out;
  bool t_clip = false, t_frame = false;
  double t_nbar0 = 2.0;
  tomo->add_option("--bloch", t_bloch, "JSON with +x,+y,+z,-z (and optionally -x,-y) outputs");
  tomo->add_option("--decay", t_decay, "t,F,sigma_F CSV to fit");
  tomo->add_option("--model", t_model, "exp or cat");
  tomo->add_option("--nbar0", t_nbar0);
  tomo->add_flag("--clip", t_clip, "project onto physical chi");
  tomo->add_flag("--frame", t_frame, "optimize the output frame");
  tomo->add_option("-o,--out", t_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), "");
  }

  try {
    if (*run) {
      harness::ExperimentConfig cfg = load_config(run_config);
      if (run_seed) cfg.seed = run_seed;
      if (!cfg.seed) throw Error(ErrorKind::config, "--seed is required for run-qec", "seed");
      if (run_shots) cfg.shots = *run_shots;
      if (run_threads) cfg.threads = *run_threads;
      if (!run_plant.empty()) cfg.plant = controller::parse_plant_kind(run_plant);
      if (run_records) cfg.write_records = true;
      const std::string dir = !run_out.empty() ? run_out
                              : !cfg.output_dir.empty() ? cfg.output_dir
                                                        : default_output_dir();
      const harness::RunArchive a = harness::run_lifetime_sweep(cfg);
      harness::write_archive(a, dir);
      nlohmann::ordered_json summary;
      summary["output_dir"] = dir;
      for (const auto& s : a.schemes) {
        if (s.fit) summary["tau"][s.name] = s.fit->tau;
      }
      std::cout << summary.dump() << '\n';
    } else if (*opt) {
      if (!(t_step > 0.0)) throw Error(ErrorKind::invalid_argument, "t-step must be positive", "t-step");
      if (!(t_min > 0.0) || t_max < t_min) {
        throw Error(ErrorKind::invalid_argument, "empty or non-positive T range", "t-min");
      }
      if (opt_method != "full" && opt_method != "closed") {
        throw Error(ErrorKind::invalid_argument, "method must be full or closed", "method");
      }
      const SystemParams p = load_config(opt_config).system;
      std::vector<analytics::CadenceSolution> rows;
      for (double T = t_min; T <= t_max + 1e-9 * t_max; T += t_step) {
        rows.push_back(opt_method == "full" ? analytics::optimize_cadence_full(T, opt_nbar0, p)
                                            : analytics::optimize_cadence(T, opt_nbar0, p));
      }
      emit(opt_out, [&](std::ostream& os) { analytics::write_cadence_csv(os, rows); });
    } else if (*bayes) {
      if (b_steps < 1 || b_steps > 12) {
        throw Error(ErrorKind::invalid_argument, "steps must lie in [1, 12]", "steps");
      }
      const auto table = analytics::bayes_records(b_nbar0, b_tw, b_steps, b_pg, b_pe, b_tau);
      emit(b_out, [&](std::ostream& os) { analytics::write_confidence_csv(os, table); });
    } else if (*budget) {
      const SystemParams p = load_config(bud_config).system;
      std::vector<analytics::LossBudget> rows;
      for (double t : b_tm) rows.push_back(analytics::loss_budget(p, t, bud_nbar));
      emit(bud_out, [&](std::ostream& os) { analytics::write_budget_csv(os, rows); });
    } else if (*wig) {
      const double nb = std::norm(cplx(w_re, w_im));
      // auto dim covers the grid corners; an explicit --dim is checked as given
      const int grid_dim = static_cast<int>(std::ceil(8.0 * w_extent * w_extent));
      const int dim = w_dim > 0 ? w_dim : std::max({fock::safe_dim(nb), w_n + 1, grid_dim});
      const StateVector psi = build_state(w_state, w_re, w_im, w_n, dim);
      const auto grid = fock::square_grid(w_extent, w_points);
      const auto W = fock::wigner(psi, grid);
      emit(w_out, [&](std::ostream& os) { fock::write_wigner_csv(os, grid, W); });
    } else if (*tomo) {
      if (t_bloch.empty() == t_decay.empty()) {
        throw Error(ErrorKind::invalid_argument, "give exactly one of --bloch or --decay", "bloch");
      }
      if (!t_bloch.empty()) {
        const auto data = read_cardinals(t_bloch);
        if (t_frame) {
          const auto fr = tomography::frame_optimize(data);
          nlohmann::ordered_json j = nlohmann::ordered_json::parse(tomography::chi_to_json(fr.chi));
          j["frame_angles_deg"] = {fr.angles.x() * 180.0 / kPi, fr.angles.y() * 180.0 / kPi,
                                   fr.angles.z() * 180.0 / kPi};
          emit(t_out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
        } else {
          tomography::ChiOptions o;
          o.clip = t_clip;
          const auto chi = tomography::chi_from_cardinals(data, o);
          emit(t_out, [&](std::ostream& os) { os << tomography::chi_to_json(chi) << '\n'; });
        }
      } else {
        std::ifstream f(t_decay);
        if (!f) throw Error(ErrorKind::io, "cannot read " + t_decay, "decay");
        std::vector<double> t, F, s;
        tomography::read_decay_csv(f, t, F, s);
        tomography::DecayModel m;
        if (t_model == "exp") m = tomography::DecayModel::single_exponential;
        else if (t_model == "cat") m = tomography::DecayModel::uncorrected_cat;
        else throw Error(ErrorKind::invalid_argument, "model must be exp or cat", "model");
        const auto fit = tomography::fit_decay(t, F, m, t_nbar0);
        emit(t_out, [&](std::ostream& os) { os << tomography::fit_to_json(fit) << '\n'; });
      }
    }
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), e.key());
  } catch (const std::exception& e) {
    return fail("internal", e.what(), "");
  }
  return 0;
}
