#include "catqec/catcode.hpp"
#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"

#include <doctest.h>

using namespace catqec;
using namespace catqec::catcode;
using doctest::Approx;

namespace {

LogicalQubit random_qubit(Rng& rng) {
  return LogicalQubit::normalized(cplx(rng.normal(), rng.normal()), cplx(rng.normal(), rng.normal()));
}

// |<a|b>|^2 for logical qubits.
double overlap2(const LogicalQubit& a, const LogicalQubit& b) {
  return std::norm(std::conj(a.c0) * b.c0 + std::conj(a.c1) * b.c1);
}

}  // namespace

TEST_CASE("cardinal states have unit Bloch vectors on the axes") {
  const Eigen::Vector3d px = LogicalQubit::cardinal(Cardinal::plus_x).bloch();
  const Eigen::Vector3d my = LogicalQubit::cardinal(Cardinal::minus_y).bloch();
  const Eigen::Vector3d mz = LogicalQubit::cardinal(Cardinal::minus_z).bloch();
  CHECK((px - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  CHECK((my - Eigen::Vector3d(0, -1, 0)).norm() < 1e-15);
  CHECK((mz - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
  CHECK_THROWS_AS(LogicalQubit::normalized(0.0, 0.0), Error);
  CHECK(std::string(to_string(Cardinal::plus_y)) == "+y");
}

TEST_CASE("basis overlaps match the closed-form oracle") {
  const auto [e1, o1] = basis_overlaps(1.0);
  CHECK(e1 == Approx(0.12260167396019014).epsilon(1e-12));
  CHECK(o1 == Approx(0.5126888153212551).epsilon(1e-12));
  const auto [e2, o2] = basis_overlaps(2.0);
  CHECK(e2 == Approx(0.0005729211566549727).epsilon(1e-12));
  CHECK(o2 == Approx(0.0007690607989745972).epsilon(1e-12));
}

TEST_CASE("overlap law agrees with numerical cat states") {
  const int dim = 40;
  for (double a : {0.7, 1.0, 1.3, 1.5, 2.0, 2.5}) {
    const auto [even, odd] = basis_overlaps(a);
    const StateVector e0 = fock::cat_state(cplx(a, 0), 1, dim);
    const StateVector e1 = fock::cat_state(cplx(0, a), 1, dim);
    const StateVector o0 = fock::cat_state(cplx(a, 0), -1, dim);
    const StateVector o1 = fock::cat_state(cplx(0, a), -1, dim);
    CHECK(std::norm(e0.dot(e1)) == Approx(even).epsilon(1e-10));
    CHECK(std::norm(o0.dot(o1)) == Approx(odd).epsilon(1e-10));
  }
}

TEST_CASE("encode then decode is the identity on the code space") {
  CatCodeParams p;
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const LogicalQubit q = random_qubit(rng);
    const DecodeResult r = decode_ideal(encode_ideal(q, p), initial_codeword(p), p);
    CHECK(r.leakage < 1e-12);
    CHECK(overlap2(q, r.qubit) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("photon loss acts as the tracked logical jump, including Kerr") {
  CatCodeParams p;
  p.nbar0 = 3.0;
  const int dim = p.resolved_dim();
  const fock::Ladder l = fock::ladder_ops(dim);
  Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const LogicalQubit q = random_qubit(rng);
    CodewordState s = initial_codeword(p);
    for (double t : {7.0, 23.5, 61.0}) {
      s = advance_to(s, t);
      const StateVector before = codeword_state(q, s, p);
      StateVector lost = l.a * before;
      lost.normalize();
      s = apply_logical_jump(s, t, p.K_s);
      CHECK(fock::fidelity(lost, codeword_state(q, s, p)) == Approx(1.0).epsilon(1e-10));
    }
    CHECK(s.error_count == 3);
    CHECK(s.parity == -1);
    CHECK(s.jump_times.size() == 3);
  }
}

TEST_CASE("no-jump evolution under pure loss shrinks the codewords") {
  CatCodeParams p;
  p.K_s = 0.0;
  const LogicalQubit q = LogicalQubit::cardinal(Cardinal::plus_y);
  const double t = 40.0;
  // no-jump propagator exp(-kappa t n / 2)
  StateVector psi = encode_ideal(q, p);
  for (int n = 0; n < psi.size(); ++n) psi(n) *= std::exp(-0.5 * p.kappa_s * t * n);
  psi.normalize();
  const CodewordState s = advance_to(initial_codeword(p), t);
  CHECK(fock::fidelity(psi, codeword_state(q, s, p)) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("decode recovers the qubit up to the i^k phase after jumps") {
  CatCodeParams p;
  const LogicalQubit q = LogicalQubit::cardinal(Cardinal::plus_x);
  CodewordState s = initial_codeword(p);
  s = apply_logical_jump(s, 12.0, p.K_s);
  s = apply_logical_jump(s, 30.0, p.K_s);
  s = advance_to(s, 50.0);
  const DecodeResult r = decode_ideal(codeword_state(q, s, p), s, p);
  CHECK(r.leakage < 1e-10);
  // two jumps: c1 picks up i^2 = -1, so +x reads as -x
  CHECK(r.qubit.bloch().x() == Approx(-1.0).epsilon(1e-10));
  // unitary decoder agrees where the codewords are nearly orthogonal
  const DecodeResult u = decode_unitary(codeword_state(q, s, p), s, p);
  CHECK(u.qubit.bloch().x() == Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("wrong parity or frame shows up as leakage") {
  CatCodeParams p;
  const LogicalQubit q = LogicalQubit::cardinal(Cardinal::plus_z);
  CodewordState s = initial_codeword(p);
  const StateVector psi = codeword_state(q, s, p);
  CodewordState wrong = s;
  wrong.parity = -1;
  const DecodeResult r = decode_ideal(psi, wrong, p);
  CHECK(r.leakage == Approx(1.0).epsilon(1e-10));
  CHECK(r.leakage_exceeded);
  CHECK((r.rho - 0.5 * Qubit2::Identity()).norm() < 1e-12);

  CodewordState tilted = s;
  tilted.frame_angle = 0.3;
  const DecodeResult t = decode_ideal(psi, tilted, p);
  CHECK(t.leakage > 0.01);
  CHECK(t.rho.trace().real() == Approx(1.0));
}

TEST_CASE("Kerr frame estimates") {
  const double K = 0.1;
  CHECK(kerr_frame_estimate({1, 3}, 10.0, K) == Approx(K * (5.0 + 25.0)));
  CHECK(kerr_frame_estimate({2}, std::vector<double>{0.0, 10.0, 30.0}, K) == Approx(K * 20.0));
  CHECK_THROWS_AS(kerr_frame_estimate({0}, 10.0, K), Error);
  CHECK_THROWS_AS(kerr_frame_estimate({3}, std::vector<double>{0.0, 10.0, 30.0}, K), Error);
}

TEST_CASE("decode process fidelity") {
  const int dim = 30;
  CHECK(decode_process_fidelity(cplx(1.5, 0), 1, dim, DecoderKind::gram) == Approx(1.0).epsilon(1e-12));
  const double big = decode_process_fidelity(cplx(2.0, 0), 1, dim, DecoderKind::unitary);
  const double small = decode_process_fidelity(cplx(0.8, 0), 1, dim, DecoderKind::unitary);
  CHECK(big > 0.999);
  CHECK(small < big);
  CHECK(small > 0.25);
}

TEST_CASE("code parameter validation") {
  CatCodeParams p;
  p.dim = 1;
  CHECK_THROWS_AS(p.validate(), Error);
  CatCodeParams q;
  q.nbar0 = 10.0;
  q.dim = 20;
  CHECK_THROWS_AS(q.validate(), Error);
  CatCodeParams r;
  CHECK(r.resolved_dim() == fock::safe_dim(2.0));
  CatCodeParams::from(SystemParams{}, 3.0).validate();
}

TEST_CASE("frame offset loss is quadratic at small angles") {
  CatCodeParams p;
  p.nbar0 = 2.0;
  const CodewordState s = initial_codeword(p);
  auto loss = [&](double theta) {
    double worst = 0.0;
    for (auto c : all_cardinals()) {
      const LogicalQubit q = LogicalQubit::cardinal(c);
      CodewordState off = s;
      off.frame_angle = theta;
      const DecodeResult r = decode_ideal(codeword_state(q, s, p), off, p);
      const Eigen::Vector3d b = bloch_of(r.rho);
      worst = std::max(worst, 0.5 * (1.0 - q.bloch().dot(b)));
    }
    return worst;
  };
  const double deg = kPi / 180.0;
  const double l1 = loss(1 * deg), l2 = loss(2 * deg);
  CHECK(l1 > 0.0);
  CHECK(l2 / l1 == Approx(4.0).epsilon(0.02));
  CHECK(loss(-2 * deg) == Approx(l2).epsilon(0.02));
}
