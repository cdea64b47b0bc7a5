#include "catqec/dynamics.hpp"

#include "catqec/fock.hpp"

#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace catqec::dynamics {

namespace {

double max_row_sum(const Operator& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

bool is_diagonal(const Operator& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (i != j && std::abs(m(i, j)) > 1e-14 * scale) return false;
    }
  }
  return true;
}

// exp(-i H_eff tau) with H_eff = H - (i/2) sum rate op^dag op.
class NoJumpPropagator {
 public:
  explicit NoJumpPropagator(const LindbladModel& model) {
    const int dim = model.dim();
    Operator heff = model.hamiltonian;
    for (const auto& c : model.channels) {
      heff -= cplx(0.0, 0.5 * c.rate) * (c.op.adjoint() * c.op);
    }
    if (is_diagonal(heff)) {
      mode_ = Mode::diagonal;
      diag_ = heff.diagonal();
      return;
    }
    Eigen::ComplexEigenSolver<Operator> es(heff);
    if (es.info() == Eigen::Success) {
      v_ = es.eigenvectors();
      vinv_ = v_.inverse();
      const double cond = max_row_sum(v_) * max_row_sum(vinv_);
      if (std::isfinite(cond) && cond < 1e8) {
        mode_ = Mode::eigen;
        diag_ = es.eigenvalues();
        return;
      }
    }
    mode_ = Mode::expm;
    heff_ = heff;
    (void)dim;
  }

  // Prepares coefficients for repeated application to the same vector.
  void load(const StateVector& psi) {
    psi_ = psi;
    if (mode_ == Mode::eigen) coeff_ = vinv_ * psi;
  }

  StateVector apply(double tau) const {
    switch (mode_) {
      case Mode::diagonal: {
        StateVector out(psi_.size());
        for (int n = 0; n < psi_.size(); ++n) out(n) = std::exp(cplx(0.0, -tau) * diag_(n)) * psi_(n);
        return out;
      }
      case Mode::eigen: {
        Eigen::VectorXcd c(coeff_.size());
        for (int n = 0; n < coeff_.size(); ++n) c(n) = std::exp(cplx(0.0, -tau) * diag_(n)) * coeff_(n);
        return v_ * c;
      }
      case Mode::expm:
      default: {
        const Operator u = (cplx(0.0, -tau) * heff_).exp();
        return u * psi_;
      }
    }
  }

 private:
  enum class Mode { diagonal, eigen, expm };
  Mode mode_ = Mode::diagonal;
  Eigen::VectorXcd diag_;
  Operator v_, vinv_, heff_;
  StateVector psi_;
  Eigen::VectorXcd coeff_;
};

}  // namespace

void LindbladModel::validate() const {
  if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() < 1) {
    throw Error(ErrorKind::dim_mismatch, "Hamiltonian must be square and non-empty");
  }
  for (std::size_t k = 0; k < channels.size(); ++k) {
    const auto& c = channels[k];
    if (c.op.rows() != hamiltonian.rows() || c.op.cols() != hamiltonian.cols()) {
      throw Error(ErrorKind::dim_mismatch,
                  "collapse operator " + std::to_string(k) + " has the wrong dimension");
    }
    if (!(c.rate >= 0.0) || !std::isfinite(c.rate)) {
      throw Error(ErrorKind::invalid_argument,
                  "collapse rate " + std::to_string(k) + " must be non-negative", "rate");
    }
  }
}

LindbladModel resonator_model(const SystemParams& p, int dim, ResonatorModelOptions opt) {
  const fock::Ladder l = fock::ladder_ops(dim);
  LindbladModel m;
  m.hamiltonian = Operator::Zero(dim, dim);
  if (opt.kerr) {
    for (int n = 0; n < dim; ++n) m.hamiltonian(n, n) = 0.5 * p.K_s * n * (n - 1.0);
  }
  const double nth = opt.thermal ? p.n_th_s : 0.0;
  m.channels.push_back({l.a, p.kappa_s * (1.0 + nth)});
  if (nth > 0.0) m.channels.push_back({l.adag, p.kappa_s * nth});
  return m;
}

DensityMatrix evolve_master(const DensityMatrix& rho0, const LindbladModel& model, double t,
                            double max_step) {
  model.validate();
  if (t < 0.0) throw Error(ErrorKind::invalid_argument, "evolution time must be >= 0", "t");
  if (rho0.rows() != model.dim()) {
    throw Error(ErrorKind::dim_mismatch, "density matrix and model dimensions differ");
  }
  if (t == 0.0) return rho0;

  const Operator& h = model.hamiltonian;
  std::vector<Operator> ops;
  Operator jsum = Operator::Zero(model.dim(), model.dim());
  for (const auto& c : model.channels) {
    if (c.rate == 0.0) continue;
    ops.push_back(std::sqrt(c.rate) * c.op);
    jsum += ops.back().adjoint() * ops.back();
  }

  double dt = max_step;
  if (dt <= 0.0) {
    const double gmax = max_row_sum(jsum);
    const double hmax = max_row_sum(h);
    dt = t;
    if (gmax > 0.0) dt = std::min(dt, 0.01 / gmax);
    if (hmax > 0.0) dt = std::min(dt, 0.01 * kTwoPi / hmax);
  }
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(t / dt - 1e-12)));
  const double h_step = t / steps;

  const cplx mi(0.0, -1.0);
  auto rhs = [&](const DensityMatrix& r) {
    DensityMatrix out = mi * (h * r - r * h) - 0.5 * (jsum * r + r * jsum);
    for (const auto& a : ops) out.noalias() += a * r * a.adjoint();
    return out;
  };

  DensityMatrix rho = rho0;
  const cplx tr0 = rho.trace();
  for (long s = 0; s < steps; ++s) {
    const DensityMatrix k1 = rhs(rho);
    const DensityMatrix k2 = rhs(rho + 0.5 * h_step * k1);
    const DensityMatrix k3 = rhs(rho + 0.5 * h_step * k2);
    const DensityMatrix k4 = rhs(rho + h_step * k3);
    rho += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (std::abs(rho.trace() - tr0) > 1e-8) {
    std::ostringstream msg;
    msg << "trace drifted by " << std::abs(rho.trace() - tr0) << " over " << steps << " steps";
    throw Error(ErrorKind::integrator, msg.str());
  }
  return 0.5 * (rho + rho.adjoint());
}

StateVector evolve_trajectory(const StateVector& psi0, const LindbladModel& model, double t0,
                              double t, Rng& rng, std::vector<JumpEvent>& jumps,
                              double edge_threshold) {
  if (t < 0.0) throw Error(ErrorKind::invalid_argument, "evolution time must be >= 0", "t");
  if (psi0.size() != model.dim()) {
    throw Error(ErrorKind::dim_mismatch, "state and model dimensions differ");
  }
  StateVector psi = psi0 / psi0.norm();
  NoJumpPropagator prop(model);
  double elapsed = 0.0;
  const double tol = 1e-10 * std::max(1.0, t);

  while (elapsed < t) {
    const double remaining = t - elapsed;
    const double threshold = rng.uniform();
    prop.load(psi);
    StateVector phi = prop.apply(remaining);
    const double n_end = phi.squaredNorm();
    if (n_end > threshold) {
      psi = phi / std::sqrt(n_end);
      break;
    }
    // norm decreases monotonically, bisect for the crossing
    double lo = 0.0, hi = remaining;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (prop.apply(mid).squaredNorm() > threshold) lo = mid;
      else hi = mid;
    }
    const double tau = 0.5 * (lo + hi);
    phi = prop.apply(tau);

    std::vector<double> weights(model.channels.size());
    double total = 0.0;
    for (std::size_t k = 0; k < model.channels.size(); ++k) {
      const auto& c = model.channels[k];
      weights[k] = c.rate * (c.op * phi).squaredNorm();
      total += weights[k];
    }
    elapsed += tau;
    if (total <= 0.0) {
      psi = phi / phi.norm();
      continue;
    }
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < weights.size() && u >= weights[pick]) {
      u -= weights[pick];
      ++pick;
    }
    StateVector next = model.channels[pick].op * phi;
    psi = next / next.norm();
    jumps.push_back({t0 + elapsed, static_cast<int>(pick)});
  }

  if (fock::tail_mass(psi) > edge_threshold) {
    throw Error(ErrorKind::truncation_leakage,
                "trajectory population reached the top two Fock levels", "dim");
  }
  return psi;
}

TrajectoryResult evolve_trajectory(const StateVector& psi, const LindbladModel& model, double t,
                                   std::uint64_t seed, double edge_threshold) {
  model.validate();
  Rng rng(seed);
  TrajectoryResult r;
  r.rng_seed = seed;
  r.final_state = evolve_trajectory(psi, model, 0.0, t, rng, r.jumps, edge_threshold);
  return r;
}

std::vector<TrajectoryResult> trajectory_ensemble(const StateVector& psi,
                                                  const LindbladModel& model, double t,
                                                  std::uint64_t master_seed, std::size_t count,
                                                  int threads) {
  model.validate();
  std::vector<TrajectoryResult> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    out[i] = evolve_trajectory(psi, model, t, Rng::derive_seed(master_seed, i));
  });
  return out;
}

DensityMatrix ensemble_average(const std::vector<TrajectoryResult>& runs) {
  if (runs.empty()) throw Error(ErrorKind::invalid_argument, "empty ensemble");
  const int dim = static_cast<int>(runs.front().final_state.size());
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  for (const auto& r : runs) rho.noalias() += r.final_state * r.final_state.adjoint();
  return rho / static_cast<double>(runs.size());
}

Operator kerr_unitary(double K, double t, int dim) {
  Operator u = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) u(n, n) = std::polar(1.0, -0.5 * K * t * n * (n - 1.0));
  return u;
}

StateVector apply_kerr(const StateVector& psi, double K, double t) {
  StateVector out(psi.size());
  for (int n = 0; n < psi.size(); ++n) out(n) = psi(n) * std::polar(1.0, -0.5 * K * t * n * (n - 1.0));
  return out;
}

double jump_mean(double nbar0, double kappa, double t) {
  return nbar0 * (1.0 - std::exp(-kappa * t));
}

std::vector<double> jump_count_pmf(double nbar0, double kappa, double t) {
  if (nbar0 < 0.0) throw Error(ErrorKind::invalid_argument, "nbar0 must be >= 0", "nbar0");
  const double lam = jump_mean(nbar0, kappa, t);
  std::vector<double> pmf;
  double p = std::exp(-lam);
  double cdf = 0.0;
  for (int k = 0; k < 1000; ++k) {
    if (k > 0) p *= lam / k;
    pmf.push_back(p);
    cdf += p;
    if (k >= lam && 1.0 - cdf < 1e-16) break;
  }
  return pmf;
}

double double_jump_probability(double nbar, double kappa, double t_M) {
  const double x = nbar * kappa * t_M;
  return 0.5 * x * x * std::exp(-x);
}

void write_trajectory_records(std::ostream& os, const std::vector<TrajectoryResult>& runs) {
  for (const auto& r : runs) {
    nlohmann::json j;
    j["seed"] = r.rng_seed;
    std::vector<double> times;
    std::vector<int> chans;
    for (const auto& e : r.jumps) {
      times.push_back(e.time);
      chans.push_back(e.channel);
    }
    j["jump_times"] = times;
    j["channels"] = chans;
    os << j.dump() << '\n';
  }
}

std::vector<TrajectoryRecord> read_trajectory_records(std::istream& is) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrajectoryRecord r;
      r.seed = j.at("seed").get<std::uint64_t>();
      const auto times = j.at("jump_times").get<std::vector<double>>();
      const auto chans = j.at("channels").get<std::vector<int>>();
      if (times.size() != chans.size()) throw std::runtime_error("length mismatch");
      for (std::size_t i = 0; i < times.size(); ++i) r.jumps.push_back({times[i], chans[i]});
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::io, "bad trajectory record on line " + std::to_string(lineno) + ": " +
                                     e.what());
    }
  }
  return out;
}

}  // namespace catqec::dynamics
