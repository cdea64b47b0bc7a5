#include "catqec/analytics.hpp"
#include "catqec/catcode.hpp"
#include "catqec/controller.hpp"
#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"
#include "catqec/harness.hpp"
#include "catqec/tomography.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace catqec;

namespace {

// Config-unit dict (MHz for frequencies) -> key = value text.
std::string to_config_text(const py::dict& d) {
  std::ostringstream os;
  for (const auto& [k, v] : d) {
    os << py::str(k).cast<std::string>() << " = ";
    if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      bool first = true;
      for (const auto& x : v) {
        os << (first ? "" : ", ") << py::str(x).cast<std::string>();
        first = false;
      }
    } else if (py::isinstance<py::bool_>(v)) {
      os << (v.cast<bool>() ? "true" : "false");
    } else {
      os << py::str(v).cast<std::string>();
    }
    os << "\n";
  }
  return os.str();
}

SystemParams system_params(const std::optional<py::dict>& d) {
  SystemParams p;
  if (!d) return p;
  std::istringstream is(to_config_text(*d));
  controller::apply_system_params(controller::parse_key_values(is, controller::system_param_keys()), p);
  return p;
}

py::dict system_values(const SystemParams& p) {
  py::dict out;
  for (const auto& [k, v] : controller::system_param_values(p)) out[py::str(k)] = v;
  return out;
}

py::dict budget_dict(const analytics::LossBudget& b) {
  py::dict d;
  d["t_M"] = b.t_M;
  d["nbar"] = b.nbar;
  d["regime"] = b.regime == analytics::BudgetRegime::fast ? "fast" : "slow";
  d["G_double"] = b.G_double;
  d["G_up_s"] = b.G_up_s;
  d["G_readout"] = b.G_readout;
  d["G_up_a"] = b.G_up_a;
  d["G_kerr"] = b.G_kerr;
  d["G_fp"] = b.G_fp;
  return d;
}

tomography::CardinalBloch cardinal_bloch(const py::dict& d) {
  auto vec = [&](const char* k) { return d[k].cast<Eigen::Vector3d>(); };
  tomography::CardinalBloch b;
  b.plus_x = vec("+x");
  b.plus_y = vec("+y");
  b.plus_z = vec("+z");
  b.minus_z = vec("-z");
  if (d.contains("-x")) b.minus_x = vec("-x");
  if (d.contains("-y")) b.minus_y = vec("-y");
  return b;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cat-code error-correction simulator core";
  m.attr("__version__") = harness::kVersion;

  static py::exception<Error> exc(m, "CatqecError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(exc.ptr())(py::str(e.what()));
      err.attr("kind") = to_string(e.kind());
      err.attr("key") = e.key();
      PyErr_SetObject(exc.ptr(), err.ptr());
    }
  });

  m.def("default_params", [] { return system_values(SystemParams{}); },
        "Default system parameters in config units");
  m.def("params", [](const py::dict& d) { return system_values(system_params(d)); }, py::arg("values"),
        "Validate and complete a parameter dict");

  // Fock space
  m.def("safe_dim", &fock::safe_dim, py::arg("nbar"), py::arg("floor") = 20,
        py::arg("threshold") = fock::kDefaultTailThreshold);
  m.def("coherent_state", [](cplx a, int dim) { return fock::coherent_state(a, dim); }, py::arg("alpha"),
        py::arg("dim"));
  m.def("cat_state", [](cplx a, int sign, int dim) { return fock::cat_state(a, sign, dim); },
        py::arg("alpha"), py::arg("parity"), py::arg("dim"));
  m.def("wigner",
        [](const StateVector& psi, const std::vector<cplx>& points) { return fock::wigner(psi, points); },
        py::arg("psi"), py::arg("points"));
  m.def("square_grid", &fock::square_grid, py::arg("extent"), py::arg("points"));

  // Dynamics
  m.def("jump_count_pmf", &dynamics::jump_count_pmf, py::arg("nbar0"), py::arg("kappa"), py::arg("t"));
  m.def("evolve_master",
        [](const StateVector& psi, double t, std::optional<py::dict> params, bool kerr, bool thermal) {
          const auto model = dynamics::resonator_model(system_params(params), static_cast<int>(psi.size()),
                                                       {kerr, thermal});
          return dynamics::evolve_master(fock::to_density(psi), model, t);
        },
        py::arg("psi"), py::arg("t"), py::arg("params") = py::none(), py::arg("kerr") = true,
        py::arg("thermal") = true);
  m.def("trajectory_jump_times",
        [](const StateVector& psi, double t, std::uint64_t seed, std::size_t n,
           std::optional<py::dict> params, int threads) {
          const auto model = dynamics::resonator_model(system_params(params), static_cast<int>(psi.size()));
          std::vector<std::vector<double>> out;
          for (const auto& r : dynamics::trajectory_ensemble(psi, model, t, seed, n, threads)) {
            std::vector<double> times;
            for (const auto& j : r.jumps) times.push_back(j.time);
            out.push_back(std::move(times));
          }
          return out;
        },
        py::arg("psi"), py::arg("t"), py::arg("seed"), py::arg("n"), py::arg("params") = py::none(),
        py::arg("threads") = 1);

  // Cat code
  m.def("basis_overlaps", &catcode::basis_overlaps, py::arg("alpha"));

  // Analytics
  m.def("step_fidelities",
        [](std::optional<py::dict> params, double T2_override, bool include_readout) {
          analytics::StepFidelityOptions o;
          o.T2_override = T2_override;
          o.include_readout = include_readout;
          const auto f = analytics::step_fidelities(system_params(params), o);
          return std::make_pair(f.f0, f.f1);
        },
        py::arg("params") = py::none(), py::arg("T2_override") = 0.0, py::arg("include_readout") = true);
  m.def("solve_r", &analytics::solve_r, py::arg("f0"));
  m.def("gain", [](double f0, double f1) { return analytics::gain(analytics::StepFidelities{f0, f1}); },
        py::arg("f0"), py::arg("f1"));
  m.def("equal_lambda_schedule", &analytics::equal_lambda_schedule, py::arg("T"), py::arg("S"),
        py::arg("kappa"));
  m.def("optimize_cadence",
        [](double T, double nbar0, std::optional<py::dict> params, const std::string& method) {
          const SystemParams p = system_params(params);
          analytics::CadenceSolution s;
          if (method == "full") {
            s = analytics::optimize_cadence_full(T, nbar0, p);
          } else if (method == "closed") {
            s = analytics::optimize_cadence(T, nbar0, p);
          } else {
            throw Error(ErrorKind::invalid_argument, "method must be full or closed", "method");
          }
          py::dict d;
          d["T"] = s.T;
          d["S"] = s.S;
          d["S_real"] = s.S_real;
          d["t_k"] = s.t_k;
          d["t_w"] = s.mean_wait;
          d["predicted_F"] = s.predicted_F();
          d["F_gamma_up"] = s.components.F_gamma_up;
          d["F_ED"] = s.components.F_ED;
          d["F_T"] = s.components.F_T;
          d["F_KD"] = s.components.F_KD;
          return d;
        },
        py::arg("T"), py::arg("nbar0") = 2.0, py::arg("params") = py::none(), py::arg("method") = "full");
  m.def("bayes_records",
        [](double nbar0, double t_w, int S, double p_g0, double p_e1, double tau_s) {
          const auto t = analytics::bayes_records(nbar0, t_w, S, p_g0, p_e1, tau_s);
          py::dict d;
          d["p0_given_g"] = t.p0_given_g;
          d["p1_given_e"] = t.p1_given_e;
          d["by_error_count"] = t.by_error_count;
          py::dict recs;
          for (const auto& r : t.records) recs[py::str(r.bits)] = std::make_pair(r.probability, r.success);
          d["records"] = recs;
          return d;
        },
        py::arg("nbar0"), py::arg("t_w"), py::arg("S"), py::arg("p_g0"), py::arg("p_e1"),
        py::arg("tau_s") = 250.0);
  m.def("loss_budget",
        [](double t_M, double nbar, std::optional<py::dict> params) {
          return budget_dict(analytics::loss_budget(system_params(params), t_M, nbar));
        },
        py::arg("t_M"), py::arg("nbar") = 2.0, py::arg("params") = py::none());
  m.def("postselect_accepts", &analytics::postselect_accepts, py::arg("bits"));

  // Tomography
  m.def("process_matrix",
        [](const py::dict& bloch, bool clip) {
          tomography::ChiOptions o;
          o.clip = clip;
          return tomography::chi_from_cardinals(cardinal_bloch(bloch), o);
        },
        py::arg("bloch"), py::arg("clip") = false,
        "Process matrix in the {I, X, -iY, Z} basis from cardinal output Bloch vectors");
  m.def("fit_decay",
        [](const std::vector<double>& t, const std::vector<double>& F, const std::string& model,
           double nbar0) {
          if (model != "exp" && model != "cat") {
            throw Error(ErrorKind::invalid_argument, "model must be exp or cat", "model");
          }
          const auto fit = tomography::fit_decay(t, F,
                                                 model == "exp" ? tomography::DecayModel::single_exponential
                                                                : tomography::DecayModel::uncorrected_cat,
                                                 nbar0);
          py::dict d;
          d["A"] = fit.A;
          d["tau"] = fit.tau;
          d["A_err"] = fit.A_err;
          d["tau_err"] = fit.tau_err;
          d["rss"] = fit.rss;
          return d;
        },
        py::arg("t"), py::arg("F"), py::arg("model") = "exp", py::arg("nbar0") = 0.0);

  // Harness
  m.def("run_lifetime_sweep",
        [](const py::dict& config) {
          std::istringstream is(to_config_text(config));
          const auto cfg = harness::load_experiment_config(is);
          harness::RunArchive a;
          {
            py::gil_scoped_release release;
            a = harness::run_lifetime_sweep(cfg);
          }
          return harness::archive_to_json(a);
        },
        py::arg("config"), "Lifetime sweep; returns the archive as a JSON string");
}
