#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"

#include <doctest.h>

#include <sstream>

using namespace catqec;
using doctest::Approx;

TEST_CASE("safe_dim matches Poisson tail oracle") {
  CHECK(fock::safe_dim(2.0) == 20);
  CHECK(fock::safe_dim(3.0) == 21);
  CHECK(fock::safe_dim(8.0) == 33);
  CHECK(fock::safe_dim(20.0) == 55);
}

TEST_CASE("coherent states: norm, mean photon number, overlap law") {
  const int dim = 40;
  const cplx a(1.2, -0.7), b(-0.3, 0.9);
  const StateVector pa = fock::coherent_state(a, dim);
  const StateVector pb = fock::coherent_state(b, dim);
  CHECK(pa.norm() == Approx(1.0).epsilon(1e-14));
  CHECK(fock::mean_photon_number(pa) == Approx(std::norm(a)).epsilon(1e-9));
  CHECK(fock::fidelity(pa, pb) == Approx(std::exp(-std::norm(a - b))).epsilon(1e-9));
  // a|alpha> = alpha|alpha> away from the edge
  const fock::Ladder l = fock::ladder_ops(dim);
  CHECK((l.a * pa - a * pa).norm() < 1e-6);
}

TEST_CASE("coherent state beyond truncation throws") {
  CHECK_THROWS_AS(fock::coherent_state(cplx(4.0, 0.0), 10), Error);
  try {
    fock::coherent_state(cplx(4.0, 0.0), 10);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::truncation_leakage);
  }
}

TEST_CASE("cat states are parity eigenstates") {
  const int dim = 30;
  const fock::Ladder l = fock::ladder_ops(dim);
  for (double r : {0.5, 1.0, 1.7, 2.2}) {
    const StateVector even = fock::cat_state(cplx(r, 0.3), 1, dim);
    const StateVector odd = fock::cat_state(cplx(r, 0.3), -1, dim);
    CHECK(fock::expectation(l.parity, even).real() == Approx(1.0).epsilon(1e-12));
    CHECK(fock::expectation(l.parity, odd).real() == Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(even.dot(odd)) < 1e-12);
    // photon loss maps even to odd cat of the same alpha
    StateVector lost = l.a * even;
    lost.normalize();
    CHECK(fock::fidelity(lost, odd) == Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("ladder and parity identities") {
  const int dim = 16;
  const fock::Ladder l = fock::ladder_ops(dim);
  const Operator comm = l.a * l.adag - l.adag * l.a;
  for (int n = 0; n < dim - 1; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
  CHECK((l.adag * l.a - l.n).norm() < 1e-12);
  CHECK((l.parity * l.parity - Operator::Identity(dim, dim)).norm() < 1e-14);
  CHECK((l.parity * l.a + l.a * l.parity).norm() < 1e-14);
  CHECK((fock::rotation(kPi, dim) - l.parity).norm() < 1e-12);
  const StateVector psi = fock::coherent_state(cplx(0.8, 0.1), dim);
  CHECK((fock::rotate(psi, 0.7) - fock::rotation(0.7, dim) * psi).norm() < 1e-14);
}

TEST_CASE("displacement of vacuum is a coherent state") {
  const int dim = 30;
  const cplx a(1.1, 0.6);
  const StateVector d = fock::displacement(a, dim) * fock::fock_state(0, dim);
  CHECK(fock::fidelity(d, fock::coherent_state(a, dim)) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Kerr commutation a U = U exp(-i K t n) a") {
  const int dim = 24;
  const double K = kTwoPi * 0.0045, t = 37.0;
  const fock::Ladder l = fock::ladder_ops(dim);
  const Operator U = dynamics::kerr_unitary(K, t, dim);
  const Operator lhs = l.a * U;
  const Operator rhs = U * fock::rotation(-K * t, dim) * l.a;
  // the top row/column touches the truncation edge
  const Operator diff = (lhs - rhs).topLeftCorner(dim - 1, dim - 1);
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Wigner endpoint values") {
  const std::vector<cplx> origin = {cplx(0.0, 0.0)};
  const int dim = 30;
  CHECK(fock::wigner(fock::fock_state(0, dim), origin)[0] == Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(fock::wigner(fock::cat_state(cplx(1.5, 0), -1, dim), origin)[0] ==
        Approx(-2.0 / kPi).epsilon(1e-10));
  CHECK(fock::wigner(fock::cat_state(cplx(1.5, 0), 1, dim), origin)[0] ==
        Approx(2.0 / kPi).epsilon(1e-10));
  CHECK(fock::wigner(fock::fock_state(1, dim), origin)[0] == Approx(-2.0 / kPi).epsilon(1e-12));
}

TEST_CASE("Wigner of a coherent state is a Gaussian") {
  const int dim = 40;
  const StateVector psi = fock::coherent_state(cplx(1.0, 0.5), dim);
  const auto w = fock::wigner(psi, {cplx(0.3, -0.2)});
  CHECK(w[0] == Approx(0.08967325586281265).epsilon(1e-9));
  // pure and mixed overloads agree
  const auto wr = fock::wigner(fock::to_density(psi), {cplx(0.3, -0.2)});
  CHECK(wr[0] == Approx(w[0]).epsilon(1e-12));
}

TEST_CASE("even cat fringes alternate sign along the imaginary axis") {
  const double a = 2.0;
  const int dim = 40;
  const StateVector psi = fock::cat_state(cplx(a, 0), 1, dim);
  // closed form for N(|a> + |-a>) at beta = i y
  const double n2 = 1.0 / (2.0 * (1.0 + std::exp(-2 * a * a)));
  for (double y : {kPi / (4 * a), 2 * kPi / (4 * a), 3 * kPi / (4 * a), kPi / (8 * a)}) {
    const double w = fock::wigner(psi, {cplx(0.0, y)})[0];
    const double expected = 2.0 / kPi * n2 *
                            (2.0 * std::exp(-2 * (a * a + y * y)) +
                             2.0 * std::exp(-2 * y * y) * std::cos(4 * a * y));
    CHECK(w == Approx(expected).epsilon(1e-10));
  }
  CHECK(fock::wigner(psi, {cplx(0.0, kPi / (4 * a))})[0] < 0.0);
  CHECK(fock::wigner(psi, {cplx(0.0, 2 * kPi / (4 * a))})[0] > 0.0);
}

TEST_CASE("Wigner grid outside the truncation disk is rejected") {
  const StateVector psi = fock::fock_state(0, 12);
  CHECK_THROWS_AS(fock::wigner(psi, fock::square_grid(3.0, 5)), Error);
}

TEST_CASE("Wigner CSV layout") {
  const auto grid = fock::square_grid(1.0, 3);
  REQUIRE(grid.size() == 9);
  CHECK(grid[1] == cplx(0.0, -1.0));
  const auto w = fock::wigner(fock::fock_state(0, 20), grid);
  std::ostringstream os;
  fock::write_wigner_csv(os, grid, w);
  CHECK(os.str().rfind("re,im,W\n", 0) == 0);
  double sum = 0;
  for (double v : w) sum += v;
  CHECK(sum > 0.0);
}

TEST_CASE("trace distance and fidelity basics") {
  const int dim = 10;
  const DensityMatrix r0 = fock::to_density(fock::fock_state(0, dim));
  const DensityMatrix r1 = fock::to_density(fock::fock_state(1, dim));
  CHECK(fock::trace_distance(r0, r1) == Approx(1.0));
  CHECK(fock::trace_distance(r0, r0) == Approx(0.0));
  const DensityMatrix mix = 0.5 * (r0 + r1);
  CHECK(fock::fidelity(mix, fock::fock_state(0, dim)) == Approx(0.5));
}
