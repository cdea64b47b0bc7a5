#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace catqec;
using doctest::Approx;

namespace {

dynamics::LindbladModel pure_loss(int dim, double kappa) {
  SystemParams p;
  p.kappa_s = kappa;
  p.n_th_s = 0.0;
  return dynamics::resonator_model(p, dim, {false, false});
}

}  // namespace

TEST_CASE("resonator model structure") {
  SystemParams p;
  const auto m = dynamics::resonator_model(p, 12);
  CHECK(m.dim() == 12);
  REQUIRE(m.channels.size() == 2);
  CHECK(m.channels[0].rate == Approx(p.kappa_s * (1 + p.n_th_s)));
  CHECK(m.channels[1].rate == Approx(p.kappa_s * p.n_th_s));
  // H = (K/2) n (n - 1)
  CHECK(m.hamiltonian(3, 3).real() == Approx(p.K_s / 2 * 6));
  const auto lossy = pure_loss(12, 0.01);
  CHECK(lossy.channels.size() == 1);
  CHECK(lossy.hamiltonian.norm() == 0.0);
}

TEST_CASE("invalid models are rejected") {
  auto m = pure_loss(8, 0.01);
  m.channels[0].rate = -1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  auto m2 = pure_loss(8, 0.01);
  m2.channels[0].op = Operator::Zero(5, 5);
  CHECK_THROWS_AS(m2.validate(), Error);
}

TEST_CASE("master equation keeps coherent states coherent under loss") {
  const int dim = 30;
  const double kappa = 1.0 / 250.0, t = 100.0;
  const cplx a0(1.3, 0.4);
  const auto rho = dynamics::evolve_master(fock::to_density(fock::coherent_state(a0, dim)),
                                           pure_loss(dim, kappa), t);
  const StateVector expected = fock::coherent_state(a0 * std::exp(-kappa * t / 2), dim);
  CHECK(fock::fidelity(rho, expected) >= 1.0 - 1e-6);
  CHECK(rho.trace().real() == Approx(1.0).epsilon(1e-10));
  CHECK(fock::mean_photon_number(rho) / (std::norm(a0) * std::exp(-kappa * t)) ==
        Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Kerr-only master equation equals the Kerr unitary") {
  const int dim = 16;
  SystemParams p;
  p.kappa_s = 0.0;
  p.n_th_s = 0.0;
  const auto m = dynamics::resonator_model(p, dim, {true, false});
  const StateVector psi = fock::coherent_state(cplx(1.0, 0.2), dim);
  const double t = 30.0;
  const auto rho = dynamics::evolve_master(fock::to_density(psi), m, t);
  CHECK(fock::fidelity(rho, dynamics::apply_kerr(psi, p.K_s, t)) == Approx(1.0).epsilon(1e-8));
  CHECK((dynamics::apply_kerr(psi, p.K_s, t) - dynamics::kerr_unitary(p.K_s, t, dim) * psi).norm() <
        1e-14);
}

TEST_CASE("thermal steady state population") {
  const int dim = 10;
  SystemParams p;
  p.kappa_s = 0.5;
  p.n_th_s = 0.1;
  const auto m = dynamics::resonator_model(p, dim, {false, true});
  const auto rho = dynamics::evolve_master(fock::to_density(fock::fock_state(0, dim)), m, 40.0);
  CHECK(fock::mean_photon_number(rho) == Approx(0.1).epsilon(1e-6));
}

TEST_CASE("jump count statistics") {
  const auto pmf = dynamics::jump_count_pmf(2.0, 1.0 / 250.0, 100.0);
  CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == Approx(1.0).epsilon(1e-14));
  CHECK(pmf[0] == Approx(0.5171822728371434).epsilon(1e-12));
  CHECK(pmf[1] == Approx(0.34100925580026575).epsilon(1e-12));
  CHECK(pmf[2] == Approx(0.1124239157536525).epsilon(1e-12));
  CHECK(dynamics::jump_mean(2.0, 1.0 / 250.0, 100.0) == Approx(0.6593599079287213).epsilon(1e-14));
  CHECK(dynamics::double_jump_probability(2.0, 1.0 / 250.0, 20.0) ==
        Approx(0.010907440498767506).epsilon(1e-14));
}

TEST_CASE("trajectory jump counts follow the Poisson law") {
  const int dim = 20;
  const double kappa = 1.0 / 50.0, t = 40.0;
  const auto m = pure_loss(dim, kappa);
  const StateVector psi = fock::coherent_state(cplx(std::sqrt(2.0), 0), dim);
  const std::size_t n = 4000;
  const auto runs = dynamics::trajectory_ensemble(psi, m, t, 11, n);
  double mean = 0;
  for (const auto& r : runs) mean += static_cast<double>(r.jumps.size());
  mean /= n;
  const double lam = dynamics::jump_mean(2.0, kappa, t);
  // Poisson standard error sqrt(lam / n)
  CHECK(std::abs(mean - lam) < 4.0 * std::sqrt(lam / n));
  for (const auto& r : runs) {
    for (const auto& j : r.jumps) {
      CHECK(j.time >= 0.0);
      CHECK(j.time <= t);
    }
  }
}

TEST_CASE("trajectory ensemble approaches the master equation") {
  const int dim = 20;
  const auto m = pure_loss(dim, 1.0 / 250.0);
  const StateVector psi = fock::cat_state(cplx(std::sqrt(2.0), 0), 1, dim);
  const auto runs = dynamics::trajectory_ensemble(psi, m, 100.0, 5, 3000, 2);
  const auto avg = dynamics::ensemble_average(runs);
  const auto rho = dynamics::evolve_master(fock::to_density(psi), m, 100.0);
  CHECK(fock::trace_distance(avg, rho) < 0.03);
}

TEST_CASE("trajectories are independent of the thread count") {
  const int dim = 20;
  SystemParams p;
  const auto m = dynamics::resonator_model(p, dim);
  const StateVector psi = fock::cat_state(cplx(1.4, 0), 1, dim);
  const auto a = dynamics::trajectory_ensemble(psi, m, 80.0, 99, 64, 1);
  const auto b = dynamics::trajectory_ensemble(psi, m, 80.0, 99, 64, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rng_seed == b[i].rng_seed);
    CHECK(a[i].jumps.size() == b[i].jumps.size());
    CHECK((a[i].final_state - b[i].final_state).norm() == 0.0);
  }
}

TEST_CASE("trajectory leakage at the truncation edge throws") {
  const int dim = 12;
  SystemParams p;
  p.kappa_s = 0.5;
  p.n_th_s = 50.0;  // heating drives population to the top levels
  const auto m = dynamics::resonator_model(p, dim, {false, true});
  const StateVector psi = fock::fock_state(8, dim);
  bool threw = false;
  for (std::uint64_t s = 0; s < 20 && !threw; ++s) {
    try {
      dynamics::evolve_trajectory(psi, m, 20.0, s);
    } catch (const Error& e) {
      threw = e.kind() == ErrorKind::truncation_leakage;
    }
  }
  CHECK(threw);
}

TEST_CASE("trajectory records round trip") {
  const int dim = 20;
  const auto m = pure_loss(dim, 1.0 / 30.0);
  const auto runs = dynamics::trajectory_ensemble(fock::coherent_state(cplx(1.5, 0), dim), m, 50.0,
                                                  3, 10);
  std::stringstream ss;
  dynamics::write_trajectory_records(ss, runs);
  const auto back = dynamics::read_trajectory_records(ss);
  REQUIRE(back.size() == runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CHECK(back[i].seed == runs[i].rng_seed);
    REQUIRE(back[i].jumps.size() == runs[i].jumps.size());
    for (std::size_t k = 0; k < back[i].jumps.size(); ++k) {
      CHECK(back[i].jumps[k].time == runs[i].jumps[k].time);
      CHECK(back[i].jumps[k].channel == runs[i].jumps[k].channel);
    }
  }
  CHECK(ss.str().find("\"jump_times\"") != std::string::npos);
}
