#include "catqec/catcode.hpp"

#include "catqec/dynamics.hpp"
#include "catqec/fock.hpp"

#include <cmath>

namespace catqec::catcode {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

cplx ipow(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

StateVector remove_frame(const StateVector& psi, const CodewordState& s, double K_s) {
  StateVector out = dynamics::apply_kerr(psi, -K_s, s.elapsed);
  return fock::rotate(out, s.frame_angle);
}

}  // namespace

const std::array<Cardinal, 6>& all_cardinals() {
  static const std::array<Cardinal, 6> c = {Cardinal::plus_x,  Cardinal::minus_x,
                                            Cardinal::plus_y,  Cardinal::minus_y,
                                            Cardinal::plus_z,  Cardinal::minus_z};
  return c;
}

const char* to_string(Cardinal c) {
  switch (c) {
    case Cardinal::plus_x: return "+x";
    case Cardinal::minus_x: return "-x";
    case Cardinal::plus_y: return "+y";
    case Cardinal::minus_y: return "-y";
    case Cardinal::plus_z: return "+z";
    case Cardinal::minus_z: return "-z";
  }
  return "?";
}

LogicalQubit LogicalQubit::normalized(cplx c0, cplx c1) {
  const double n = std::sqrt(std::norm(c0) + std::norm(c1));
  if (n < 1e-300) throw Error(ErrorKind::invalid_argument, "logical qubit has zero norm", "qubit");
  return {c0 / n, c1 / n};
}

LogicalQubit LogicalQubit::cardinal(Cardinal c) {
  switch (c) {
    case Cardinal::plus_x: return {kInvSqrt2, kInvSqrt2};
    case Cardinal::minus_x: return {kInvSqrt2, -kInvSqrt2};
    case Cardinal::plus_y: return {kInvSqrt2, cplx(0.0, kInvSqrt2)};
    case Cardinal::minus_y: return {kInvSqrt2, cplx(0.0, -kInvSqrt2)};
    case Cardinal::plus_z: return {1.0, 0.0};
    case Cardinal::minus_z: return {0.0, 1.0};
  }
  return {};
}

Qubit2 LogicalQubit::density() const {
  Eigen::Vector2cd v(c0, c1);
  return v * v.adjoint();
}

Eigen::Vector3d LogicalQubit::bloch() const { return bloch_of(density()); }

Eigen::Vector3d bloch_of(const Qubit2& rho) {
  return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

CatCodeParams CatCodeParams::from(const SystemParams& p, double nbar0) {
  CatCodeParams c;
  c.nbar0 = nbar0;
  c.kappa_s = p.kappa_s;
  c.K_s = p.K_s;
  c.n_th = p.n_th_s;
  return c;
}

int CatCodeParams::resolved_dim() const {
  return dim > 0 ? dim : fock::safe_dim(nbar0, 20, leakage_threshold);
}

void CatCodeParams::validate() const {
  if (!(nbar0 > 0.0) || !std::isfinite(nbar0)) {
    throw Error(ErrorKind::config, "nbar0 must be positive", "nbar0");
  }
  if (!(kappa_s >= 0.0)) throw Error(ErrorKind::config, "kappa_s must be >= 0", "kappa_s");
  if (!std::isfinite(K_s)) throw Error(ErrorKind::config, "K_s must be finite", "K_s");
  if (!(n_th >= 0.0)) throw Error(ErrorKind::config, "n_th must be >= 0", "n_th");
  if (dim < 0 || dim == 1) throw Error(ErrorKind::config, "dim must be 0 (auto) or >= 2", "dim");
  if (!(leakage_bound > 0.0 && leakage_bound <= 1.0)) {
    throw Error(ErrorKind::config, "leakage_bound must lie in (0, 1]", "leakage_bound");
  }
  if (dim > 0 && nbar0 > dim / 4.0) {
    throw Error(ErrorKind::truncation_leakage, "nbar0 exceeds dim/4", "dim");
  }
}

cplx CodewordState::alpha(double kappa) const { return alpha0 * std::exp(-kappa * elapsed / 2.0); }

CodewordState initial_codeword(const CatCodeParams& params) {
  CodewordState s;
  s.alpha0 = std::sqrt(params.nbar0);
  return s;
}

StateVector encode_ideal(const LogicalQubit& q, const CatCodeParams& params) {
  const int dim = params.resolved_dim();
  const cplx a = std::sqrt(params.nbar0);
  const StateVector b0 = fock::cat_state(a, 1, dim, params.leakage_threshold);
  const StateVector b1 = fock::cat_state(cplx(0.0, 1.0) * a, 1, dim, params.leakage_threshold);
  StateVector psi = q.c0 * b0 + q.c1 * b1;
  return psi / psi.norm();
}

CodewordState apply_logical_jump(CodewordState s, double t_jump, double K_s) {
  if (t_jump < s.elapsed - 1e-12) {
    throw Error(ErrorKind::invalid_argument, "jump time precedes the tracked time", "t_jump");
  }
  s.elapsed = t_jump;
  s.parity = -s.parity;
  s.error_count += 1;
  s.jump_times.push_back(t_jump);
  s.frame_angle = wrap_angle(s.frame_angle + K_s * t_jump);
  return s;
}

CodewordState advance_to(CodewordState s, double t) {
  if (t < s.elapsed - 1e-12) throw Error(ErrorKind::invalid_argument, "time runs backwards", "t");
  s.elapsed = t;
  return s;
}

StateVector codeword_state(const LogicalQubit& q, const CodewordState& s,
                           const CatCodeParams& params) {
  const int dim = params.resolved_dim();
  const cplx a = s.alpha(params.kappa_s);
  const StateVector b0 = fock::cat_state(a, s.parity, dim, params.leakage_threshold);
  const StateVector b1 = fock::cat_state(cplx(0.0, 1.0) * a, s.parity, dim, params.leakage_threshold);
  StateVector psi = q.c0 * b0 + ipow(s.error_count) * q.c1 * b1;
  psi /= psi.norm();
  psi = fock::rotate(psi, -s.frame_angle);
  return dynamics::apply_kerr(psi, params.K_s, s.elapsed);
}

CatDecoder::CatDecoder(cplx alpha_t, int parity, int dim, DecoderKind kind, double leakage_bound,
                       double tail_threshold)
    : kind_(kind), bound_(leakage_bound), ill_(std::norm(alpha_t) < 1.0) {
  b0_ = fock::cat_state(alpha_t, parity, dim, tail_threshold);
  b1_ = fock::cat_state(cplx(0.0, 1.0) * alpha_t, parity, dim, tail_threshold);
  Eigen::Matrix2cd g;
  g << b0_.dot(b0_), b0_.dot(b1_), b1_.dot(b0_), b1_.dot(b1_);
  gram_inv_ = g.inverse();
  // G^{-1/2} through the Hermitian eigendecomposition
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(g);
  const Eigen::Vector2d w = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::Matrix2cd g_inv_half = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::MatrixXcd b(dim, 2);
  b.col(0) = b0_;
  b.col(1) = b1_;
  lowdin_ = b * g_inv_half;
}

DecodeResult CatDecoder::decode(const StateVector& psi_in) const {
  if (psi_in.size() != b0_.size()) {
    throw Error(ErrorKind::dim_mismatch, "state and decoder dimensions differ");
  }
  const StateVector psi = psi_in / psi_in.norm();
  DecodeResult r;
  r.ill_conditioned = ill_;
  Eigen::Vector2cd c;
  if (kind_ == DecoderKind::gram) {
    const Eigen::Vector2cd v(b0_.dot(psi), b1_.dot(psi));
    c = gram_inv_ * v;
    const StateVector proj = c(0) * b0_ + c(1) * b1_;
    r.leakage = std::max(0.0, 1.0 - proj.squaredNorm());
  } else {
    c = lowdin_.adjoint() * psi;
    r.leakage = std::max(0.0, 1.0 - c.squaredNorm());
  }
  const double cn = c.norm();
  if (cn > 1e-300) {
    r.qubit = {c(0) / cn, c(1) / cn};
  }
  r.leakage = std::min(1.0, r.leakage);
  r.leakage_exceeded = r.leakage > bound_ || cn <= 1e-300;
  if (r.leakage_exceeded) {
    r.rho = 0.5 * Qubit2::Identity();
  } else {
    r.rho = (1.0 - r.leakage) * r.qubit.density() + 0.5 * r.leakage * Qubit2::Identity();
  }
  return r;
}

DecodeResult decode_ideal(const StateVector& psi, const CodewordState& s,
                          const CatCodeParams& params) {
  const int dim = params.resolved_dim();
  if (psi.size() != dim) throw Error(ErrorKind::dim_mismatch, "state dimension differs from params");
  const CatDecoder dec(s.alpha(params.kappa_s), s.parity, dim, params.decoder,
                       params.leakage_bound, params.leakage_threshold);
  return dec.decode(remove_frame(psi, s, params.K_s));
}

DecodeResult decode_unitary(const StateVector& psi, const CodewordState& s,
                            const CatCodeParams& params) {
  CatCodeParams p = params;
  p.decoder = DecoderKind::unitary;
  return decode_ideal(psi, s, p);
}

std::pair<double, double> basis_overlaps(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be positive", "alpha");
  const double a2 = alpha * alpha;
  const double e = std::exp(-a2);
  const double even = 2.0 * e * std::cos(a2) / (1.0 + e * e);
  const double odd = 2.0 * e * std::sin(a2) / (1.0 - e * e);
  return {even * even, odd * odd};
}

double kerr_frame_estimate(const std::vector<int>& idx, double t_w, double K_s) {
  double s = 0.0;
  for (int j : idx) {
    if (j < 1) throw Error(ErrorKind::invalid_argument, "step indices are 1-based", "jump_step_indices");
    s += K_s * (j - 0.5) * t_w;
  }
  return s;
}

double kerr_frame_estimate(const std::vector<int>& idx, const std::vector<double>& boundaries,
                           double K_s) {
  double s = 0.0;
  for (int j : idx) {
    if (j < 1 || j >= static_cast<int>(boundaries.size())) {
      throw Error(ErrorKind::invalid_argument, "step index outside the schedule", "jump_step_indices");
    }
    s += K_s * 0.5 * (boundaries[j - 1] + boundaries[j]);
  }
  return s;
}

double decode_process_fidelity(cplx alpha_t, int parity, int dim, DecoderKind kind) {
  const CatDecoder dec(alpha_t, parity, dim, kind, 1.0);
  double favg = 0.0;
  for (Cardinal c : all_cardinals()) {
    const LogicalQubit q = LogicalQubit::cardinal(c);
    StateVector psi = q.c0 * dec.basis0() + q.c1 * dec.basis1();
    const DecodeResult r = dec.decode(psi);
    const Eigen::Vector2cd v(q.c0, q.c1);
    favg += std::real(v.dot(r.rho * v));
  }
  favg /= 6.0;
  return (3.0 * favg - 1.0) / 2.0;
}

}  // namespace catqec::catcode
