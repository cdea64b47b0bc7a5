#include "catqec/tomography.hpp"

#include <doctest.h>

#include <sstream>

using namespace catqec;
using namespace catqec::tomography;
using doctest::Approx;

namespace {

Kraus depolarizing(double p) {
  const auto& e = chi_basis();
  return {std::sqrt(1 - 0.75 * p) * e[0], std::sqrt(p / 4) * e[1], std::sqrt(p / 4) * e[2],
          std::sqrt(p / 4) * e[3]};
}

bool is_psd(const ChiMatrix& chi, double tol) {
  Eigen::SelfAdjointEigenSolver<ChiMatrix> es(chi);
  return es.eigenvalues().minCoeff() > -tol;
}

CardinalBloch rotated(const CardinalBloch& d, const Eigen::Matrix3d& r) {
  CardinalBloch o = d;
  o.plus_x = r * d.plus_x;
  o.plus_y = r * d.plus_y;
  o.plus_z = r * d.plus_z;
  o.minus_z = r * d.minus_z;
  o.minus_x = r * *d.minus_x;
  o.minus_y = r * *d.minus_y;
  return o;
}

}  // namespace

TEST_CASE("Bloch vectors from outcome counts") {
  const auto b = bloch_from_outcomes({75, 25}, {50, 50}, {10, 90});
  CHECK(b.x == Approx(0.5));
  CHECK(b.y == Approx(0.0));
  CHECK(b.z == Approx(-0.8));
  CHECK_THROWS_AS(bloch_from_outcomes({0, 0}, {1, 1}, {1, 1}), Error);
  const Eigen::Vector3d r(0.3, -0.4, 0.5);
  CHECK((bloch_from_density(density_from_bloch(r)) - r).norm() < 1e-15);
}

TEST_CASE("identity channel has chi_00 = 1") {
  const ChiMatrix chi = chi_from_kraus({Qubit2::Identity()});
  CHECK(process_fidelity(chi) == Approx(1.0).epsilon(1e-14));
  CHECK(chi.trace().real() == Approx(1.0));
  CHECK(scaled_fidelity(1.0) == 1.0);
  CHECK(scaled_fidelity(0.25) == 0.0);
}

TEST_CASE("depolarizing channel") {
  for (double p : {0.0, 0.1, 0.5, 1.0}) {
    const ChiMatrix chi = chi_from_kraus(depolarizing(p));
    CHECK(process_fidelity(chi) == Approx(1 - 0.75 * p).epsilon(1e-12));
    const ChiMatrix rec = chi_from_cardinals(cardinal_outputs(depolarizing(p)));
    CHECK((rec - chi).norm() < 1e-12);
  }
}

TEST_CASE("cardinal inversion reproduces a generalized amplitude damping channel") {
  for (double n_th : {0.0, 0.05, 0.3}) {
    const Kraus k = compose(amplitude_damping_channel(40.0, 100.0, n_th), dephasing_channel(0.8));
    const ChiMatrix direct = chi_from_kraus(k);
    const CardinalBloch data = cardinal_outputs(k);
    const ChiMatrix rec = chi_from_cardinals(data);
    CHECK((rec - direct).norm() < 1e-12);
    CHECK(is_psd(rec, 1e-12));
    CHECK(rec.trace().real() == Approx(1.0));
    CHECK(chi00_closed_form(data) == Approx(process_fidelity(rec)).epsilon(1e-12));
    // the channel reproduces its own action on an arbitrary state
    const Qubit2 rho = density_from_bloch({0.2, 0.5, -0.6});
    CHECK((apply_chi(rec, rho) - apply_kraus(k, rho)).norm() < 1e-12);
  }
}

TEST_CASE("four- and six-input reconstructions agree on exact data") {
  const Kraus k = compose(amplitude_damping_channel(25.0, 60.0, 0.1), dephasing_channel(0.7));
  CardinalBloch six = cardinal_outputs(k);
  CardinalBloch four = six;
  four.minus_x.reset();
  four.minus_y.reset();
  CHECK((chi_from_cardinals(four) - chi_from_cardinals(six)).norm() < 1e-12);
}

TEST_CASE("amplitude damping fixed point and limits") {
  const Kraus k = amplitude_damping_channel(1e6, 10.0, 0.2);
  const Qubit2 out = apply_kraus(k, density_from_bloch({0, 0, 1}));
  CHECK(bloch_from_density(out).z() == Approx(1 - 2 * 0.2).epsilon(1e-12));
  const Kraus id = amplitude_damping_channel(0.0, 10.0, 0.2);
  CHECK(process_fidelity(chi_from_kraus(id)) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(amplitude_damping_channel(-1.0, 10.0, 0.0), Error);
  CHECK_THROWS_AS(amplitude_damping_channel(1.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(dephasing_channel(1.5), Error);
}

TEST_CASE("unphysical data is rejected unless clipping is requested") {
  CardinalBloch d = cardinal_outputs({Qubit2::Identity()});
  // Bloch vectors longer than 1 in x and y but perfect z: not completely positive
  d.plus_x = {1.2, 0, 0};
  d.plus_y = {0, 1.2, 0};
  try {
    chi_from_cardinals(d);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unphysical_input);
  }
  ChiOptions opt;
  opt.clip = true;
  const ChiMatrix chi = chi_from_cardinals(d, opt);
  CHECK(is_psd(chi, 1e-12));
  CHECK(chi.trace().real() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frame optimization recovers a small output rotation") {
  const Kraus k = compose(amplitude_damping_channel(30.0, 100.0, 0.0), dephasing_channel(0.9));
  const CardinalBloch ideal = cardinal_outputs(k);
  const double deg = kPi / 180.0;
  const Eigen::Matrix3d r0 = rotation_matrix(5 * deg, -3 * deg, 2 * deg);
  const CardinalBloch tilted = rotated(ideal, r0.transpose());
  const FrameResult f = frame_optimize(tilted);
  CHECK((f.rotation - r0).norm() < 1e-5);
  CHECK(f.fidelity == Approx(process_fidelity(chi_from_kraus(k))).epsilon(1e-9));
  CHECK(f.fidelity > process_fidelity(chi_from_cardinals(tilted)));
  CardinalBloch partial = tilted;
  partial.minus_x.reset();
  CHECK_THROWS_AS(frame_optimize(partial), Error);
}

TEST_CASE("isotropy deviation") {
  CHECK(isotropy_deviation({{1, 0, 0}, {0, 0.5, 0}}) == Approx(0.25));
  CHECK(isotropy_deviation({}) == 0.0);
}

TEST_CASE("single-exponential fit recovers synthetic parameters") {
  std::vector<double> t, F;
  Rng rng(4);
  for (int i = 0; i <= 12; ++i) {
    t.push_back(25.0 * i);
    F.push_back(0.25 + 0.7 * std::exp(-t.back() / 180.0) + 1e-3 * rng.normal());
  }
  const DecayFit fit = fit_decay(t, F);
  CHECK(fit.A == Approx(0.7).epsilon(0.01));
  CHECK(fit.tau == Approx(180.0).epsilon(0.01));
  CHECK(fit.tau_err > 0.0);
  CHECK(std::abs(fit.tau - 180.0) < 5 * fit.tau_err);
  CHECK(evaluate_decay(fit, 0.0) == Approx(0.25 + fit.A));
}

TEST_CASE("uncorrected cat model fit recovers synthetic parameters") {
  std::vector<double> t, F;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(12.0 * i);
    F.push_back(0.25 + 0.72 * std::exp(-2.0 * (1 - std::exp(-t.back() / 250.0))));
  }
  const DecayFit fit = fit_decay(t, F, DecayModel::uncorrected_cat, 2.0);
  CHECK(fit.A == Approx(0.72).epsilon(1e-6));
  CHECK(fit.tau == Approx(250.0).epsilon(1e-6));
  CHECK(fit.rss < 1e-20);
  CHECK(fit.nbar0 == 2.0);
  CHECK_THROWS_AS(fit_decay(t, F, DecayModel::uncorrected_cat, 0.0), Error);
  CHECK_THROWS_AS(fit_decay({1, 2, 3}, {0.9, 0.8, 0.7}), Error);
}

TEST_CASE("process matrix JSON round trip") {
  const ChiMatrix chi = chi_from_kraus(compose(amplitude_damping_channel(10, 50, 0.1),
                                               dephasing_channel(0.6)));
  const std::string js = chi_to_json(chi);
  CHECK(js.find("\"chi\"") != std::string::npos);
  CHECK((chi_from_json(js) - chi).norm() == 0.0);
  CHECK_THROWS_AS(chi_from_json("{\"chi\": [[1]]}"), Error);
  DecayFit fit;
  fit.A = 0.7;
  fit.tau = 300;
  CHECK(fit_to_json(fit).find("\"tau\"") != std::string::npos);
}

TEST_CASE("decay table round trip") {
  const std::vector<double> t = {0, 10, 20.5}, F = {0.95, 0.9, 0.8125}, s = {0.01, 0.02, 0.03};
  std::stringstream ss;
  write_decay_csv(ss, t, F, s);
  CHECK(ss.str().rfind("t,F,sigma_F\n", 0) == 0);
  std::vector<double> t2, F2, s2;
  read_decay_csv(ss, t2, F2, s2);
  CHECK(t2 == t);
  CHECK(F2 == F);
  CHECK(s2 == s);
  std::istringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_decay_csv(bad, t2, F2, s2), Error);
}
