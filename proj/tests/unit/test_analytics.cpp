#include "catqec/analytics.hpp"
#include "catqec/dynamics.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace catqec;
using namespace catqec::analytics;
using doctest::Approx;

TEST_CASE("step fidelities from hardware parameters") {
  SystemParams p;
  const StepFidelities f = step_fidelities(p);
  CHECK(f.f0 == Approx(0.9722180123274549).epsilon(1e-12));
  CHECK(f.f1 == Approx(0.9520959200913953).epsilon(1e-12));
  StepFidelityOptions o;
  o.T2_override = 13.0;
  o.include_readout = false;
  const StepFidelities g = step_fidelities(p, o);
  CHECK(g.f0 == Approx(0.9806657280752922).epsilon(1e-12));
  CHECK(g.f1 == Approx(0.960368792631941).epsilon(1e-12));
  o.dephasing = Dephasing::Tphi;
  CHECK(step_fidelities(p, o).f0 > g.f0);
}

TEST_CASE("solve_r matches an independent root finder") {
  CHECK(solve_r(0.95) == Approx(2.4837345240229785).epsilon(1e-9));
  CHECK(solve_r(0.99) == Approx(6.398787307278143).epsilon(1e-9));
  CHECK(std::isinf(solve_r(1.0)));
  CHECK_THROWS_AS(solve_r(0.3), Error);
  CHECK_THROWS_AS(solve_r(1.2), Error);
}

TEST_CASE("gain and break-even") {
  SystemParams p;
  StepFidelityOptions o;
  o.T2_override = 13.0;
  o.include_readout = false;
  const double G = gain(p, o);
  CHECK(G == Approx(4.9583458006926024).epsilon(1e-8));
  CHECK(break_even_ratio(G, 2.0) == Approx(1.652781933564201).epsilon(1e-8));
  CHECK(std::isinf(gain(StepFidelities{1.0, 1.0})));
  CHECK(fock_lifetime(p) == Approx(3.0 / (1.0 / 250.0 + 2.0 / 330.0)));
}

TEST_CASE("r asymptotics: 1 - f0 ~ 1/(2 r^2)") {
  // the leading-order law degrades toward f0 = 0.9
  CHECK((1.0 - 0.9) * 2.0 * std::pow(solve_r(0.9), 2) == Approx(0.4825129646454198).epsilon(1e-8));
  for (double f0 = 0.91; f0 < 0.9991; f0 += 0.0045) {
    const double r = solve_r(f0);
    const double ratio = (1.0 - f0) * 2.0 * r * r;
    CHECK(ratio > 0.5);
    CHECK(ratio < 1.5);
  }
}

TEST_CASE("equal-lambda schedules") {
  const double kappa = 1.0 / 250.0, T = 110.0;
  const auto t_k = equal_lambda_schedule(T, 5, kappa);
  REQUIRE(t_k.size() == 5);
  CHECK(std::accumulate(t_k.begin(), t_k.end(), 0.0) == Approx(T).epsilon(1e-12));
  const auto lam = step_lambdas(2.0, kappa, t_k);
  for (double l : lam) CHECK(l == Approx(lam[0]).epsilon(1e-12));
  // later steps are longer as the photon number decays
  for (std::size_t k = 1; k < t_k.size(); ++k) CHECK(t_k[k] > t_k[k - 1]);
  CHECK(equal_lambda_schedule(T, 0, kappa).empty());
  CHECK(schedule_boundaries(t_k).back() == Approx(T));
  CHECK_THROWS_AS(equal_lambda_schedule(T, -1, kappa), Error);
}

TEST_CASE("equal-lambda schedules are local maxima of the transmission fidelity") {
  const StepFidelities f{0.975, 0.95};
  const double kappa = 1.0 / 250.0;
  for (double T : {40.0, 110.0, 250.0}) {
    for (int S : {2, 4, 7}) {
      const auto t_k = equal_lambda_schedule(T, S, kappa);
      const double best = transmission_fidelity(f, 2.0, kappa, t_k);
      for (int k = 0; k + 1 < S; ++k) {
        for (double eps : {-0.01, 0.01}) {
          auto q = t_k;
          q[k] *= 1.0 + eps;
          q[k + 1] -= t_k[k] * eps;
          CHECK(transmission_fidelity(f, 2.0, kappa, q) <= best + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("closed-form step count matches brute force") {
  Rng rng(2024);
  const double kappa = 1.0 / 250.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double f0 = 0.9 + 0.095 * rng.uniform();
    const StepFidelities f{f0, f0 * (0.95 + 0.05 * rng.uniform())};
    const double nbar0 = 1.0 + 3.0 * rng.uniform();
    const double T = 20.0 + 280.0 * rng.uniform();
    int best = 1;
    double best_val = -1.0;
    for (int S = 1; S <= 50; ++S) {
      const double v = transmission_fidelity(f, nbar0, kappa, equal_lambda_schedule(T, S, kappa));
      if (v > best_val) {
        best_val = v;
        best = S;
      }
    }
    const double s = optimal_steps_real(T, nbar0, kappa, f);
    const int lo = std::max(1, static_cast<int>(std::floor(s)));
    const int hi = std::max(1, static_cast<int>(std::ceil(s)));
    CHECK((best == lo || best == hi));
  }
}

TEST_CASE("closed-form cadence rounding") {
  SystemParams p;
  const auto sol = optimize_cadence(110.0, 2.0, p);
  CHECK(sol.S >= 1);
  CHECK(std::abs(sol.S - sol.S_real) <= 0.5 + 1e-12);
  CHECK(optimize_cadence(0.0, 2.0, p).S == 0);
  CHECK(optimize_cadence(1.0, 2.0, p).S == 1);
  const auto full = optimize_cadence_full(110.0, 2.0, p);
  CHECK(full.predicted_F() >= sol.predicted_F() - 1e-12);
  // monotone step count in T
  int prev = 0;
  for (double T = 10.0; T <= 300.0; T += 10.0) {
    const int S = optimize_cadence(T, 2.0, p).S;
    CHECK(S >= prev);
    prev = S;
  }
}

TEST_CASE("Gauss-Hermite decode average") {
  const double sigma = 24.0 * kPi / 180.0;
  CHECK(gaussian_decode_average(0.3, sigma) == Approx(0.8129977877368875).epsilon(1e-12));
  for (double s : {0.01, 0.1, 0.5, 1.0}) {
    CHECK(gaussian_decode_average(s, sigma) ==
          Approx(1.0 / std::sqrt(1.0 + s * s / (sigma * sigma))).epsilon(1e-8));
  }
  CHECK(gaussian_decode_average(0.0, sigma) == 1.0);
  CHECK_THROWS_AS(gaussian_decode_average(0.1, 0.0), Error);
}

TEST_CASE("total fidelity components") {
  SystemParams p;
  const auto t_k = equal_lambda_schedule(60.0, 3, p.kappa_s);
  const auto c = total_fidelity(60.0, 2.0, t_k, p);
  CHECK(c.F_gamma_up == Approx(std::exp(-60.0 * p.Gamma_up)));
  CHECK(c.F_ED < 0.96 * 0.96 + 0.1);
  CHECK(c.F_T < 1.0);
  CHECK(c.F_KD < 1.0);
  CHECK(c.total() == Approx(c.F_gamma_up * c.F_ED * c.F_T * c.F_KD));
  CHECK_THROWS_AS(total_fidelity(60.0, 2.0, {10.0, 10.0}, p), Error);
  // no steps: only the no-loss branch survives
  const auto none = total_fidelity(60.0, 2.0, {}, p);
  CHECK(none.F_T == Approx(std::exp(-dynamics::jump_mean(2.0, p.kappa_s, 60.0))));
}

TEST_CASE("loss budget matches the independent oracle") {
  SystemParams p;
  const LossBudget fast = loss_budget(p, 1.0);
  CHECK(fast.regime == BudgetRegime::fast);
  CHECK(fast.G_double == Approx(108.62414714485705).epsilon(1e-9));
  CHECK(fast.G_up_s == Approx(21.551724137931036).epsilon(1e-9));
  CHECK(fast.G_readout == Approx(26.939655172413794).epsilon(1e-9));
  CHECK(fast.G_up_a == Approx(2640.086206896551).epsilon(1e-9));
  CHECK(fast.G_kerr == Approx(2279.953189949008).epsilon(1e-9));
  CHECK(fast.G_fp == Approx(0.7095069610916468).epsilon(1e-9));
  CHECK(fast.G_fp <= 1.0);
  const LossBudget slow = loss_budget(p, 20.0);
  CHECK(slow.regime == BudgetRegime::slow);
  CHECK(slow.G_double == Approx(6.322795641119667).epsilon(1e-9));
  CHECK(slow.G_readout == Approx(6.521379310344827).epsilon(1e-9));
  CHECK(slow.G_up_a == Approx(3.0172413793103443).epsilon(1e-9));
  CHECK(slow.G_kerr == Approx(6.567941952122256).epsilon(1e-9));
  CHECK(slow.G_fp == Approx(2.4359516074100975).epsilon(1e-9));
  CHECK_THROWS_AS(loss_budget(p, -1.0), Error);
}

TEST_CASE("Bayesian records match the enumeration oracle") {
  const auto t = bayes_records(3.0, 13.8, 2, 0.983, 0.971, 250.0);
  CHECK(t.p0_given_g == Approx(0.9947148281097713).epsilon(1e-12));
  CHECK(t.p1_given_e == Approx(0.9114020546611407).epsilon(1e-12));
  CHECK(t.at("00").probability == Approx(0.704297757422714).epsilon(1e-12));
  CHECK(t.at("01").probability == Approx(0.1331076474921289).epsilon(1e-12));
  CHECK(t.at("10").probability == Approx(0.12757556336843134).epsilon(1e-12));
  CHECK(t.at("11").probability == Approx(0.03501903171672578).epsilon(1e-12));
  CHECK(t.at("00").success == Approx(0.9939733810027799).epsilon(1e-12));
  CHECK(t.at("01").success == Approx(0.8813607941976406).epsilon(1e-12));
  CHECK(t.at("10").success == Approx(0.9762146508968054).epsilon(1e-12));
  CHECK(t.at("11").success == Approx(0.5959836678118853).epsilon(1e-12));
  CHECK(t.by_error_count.size() == 3);
  CHECK_THROWS_AS(t.at("111"), Error);
}

TEST_CASE("forward model equals brute-force enumeration") {
  Rng rng(8);
  for (int S = 1; S <= 6; ++S) {
    std::vector<double> nj(S);
    for (double& v : nj) v = 0.7 + 0.3 * rng.uniform();
    const double pg = 0.9 + 0.1 * rng.uniform(), pe = 0.9 + 0.1 * rng.uniform();
    const auto a = bayes_records(nj, pg, pe);
    const auto b = bayes_records_bruteforce(nj, pg, pe);
    REQUIRE(a.records.size() == b.records.size());
    double total = 0.0;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].bits == b.records[i].bits);
      CHECK(a.records[i].probability == Approx(b.records[i].probability).epsilon(1e-13));
      CHECK(a.records[i].success == Approx(b.records[i].success).epsilon(1e-12));
      total += a.records[i].probability;
    }
    CHECK(total == Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("four-step records") {
  const auto t = bayes_records(2.0, 15.0, 4, 0.98, 0.97, 250.0);
  double total = 0.0;
  for (const auto& r : t.records) total += r.probability;
  CHECK(total == Approx(1.0).epsilon(1e-13));
  CHECK(t.at("1010").success == Approx(0.8888350552338253).epsilon(1e-12));
  CHECK(t.at("0001").success == Approx(0.8127233541770894).epsilon(1e-12));
  CHECK(t.at("1010").success > t.at("0001").success);
}

TEST_CASE("post-selection rule") {
  CHECK(postselect_accepts({}));
  CHECK(postselect_accepts({0, 0}));
  CHECK(postselect_accepts({1, 0}));
  CHECK(postselect_accepts({1, 0, 1, 0}));
  CHECK_FALSE(postselect_accepts({0, 1}));
  CHECK_FALSE(postselect_accepts({1, 1, 0}));
  const auto r = postselect({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(r.accepted == std::vector<std::size_t>{0, 2});
  CHECK(r.acceptance == Approx(0.5));
}

TEST_CASE("CSV writers") {
  SystemParams p;
  std::ostringstream b, c, k;
  write_budget_csv(b, {loss_budget(p, 1.0)});
  CHECK(b.str().rfind("t_M,", 0) == 0);
  write_confidence_csv(c, bayes_records(3.0, 13.8, 2, 0.983, 0.971));
  CHECK(c.str().rfind("record,probability,success", 0) == 0);
  write_cadence_csv(k, {optimize_cadence(50.0, 2.0, p)});
  CHECK(k.str().rfind("T,S,t_w,predicted_F", 0) == 0);
}
