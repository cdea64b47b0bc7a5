#pragma once

#include "catqec/core.hpp"
#include "catqec/params.hpp"

#include <array>
#include <vector>

namespace catqec::catcode {

enum class Cardinal { plus_x, minus_x, plus_y, minus_y, plus_z, minus_z };

const std::array<Cardinal, 6>& all_cardinals();
const char* to_string(Cardinal c);

struct LogicalQubit {
  cplx c0{1.0, 0.0};
  cplx c1{0.0, 0.0};

  // Normalizes (c0, c1); throws invalid_argument for the zero vector.
  static LogicalQubit normalized(cplx c0, cplx c1);
  static LogicalQubit cardinal(Cardinal c);

  Qubit2 density() const;
  Eigen::Vector3d bloch() const;
};

Eigen::Vector3d bloch_of(const Qubit2& rho);

enum class DecoderKind {
  gram,     // projection with explicit 2x2 Gram inversion
  unitary,  // Lowdin-orthonormalized codewords mapped to |0>, |1>
};

struct CatCodeParams {
  double nbar0 = 2.0;
  double kappa_s = 1.0 / 250.0;
  double K_s = kTwoPi * 0.0045;
  double n_th = 0.02;  // storage thermal population (plants only)
  int dim = 0;  // 0 selects fock::safe_dim(nbar0)
  double leakage_threshold = 1e-9;  // tail-mass bound for constructed states
  double leakage_bound = 0.5;       // decode flags leakage_exceeded above this
  DecoderKind decoder = DecoderKind::gram;

  static CatCodeParams from(const SystemParams& p, double nbar0);
  int resolved_dim() const;
  void validate() const;
};

// Phenomenological tracker. Physical state convention:
//   psi = kerr_unitary(K_s, elapsed) * exp(-i frame_angle n) *
//         (c0 C^p_{alpha(t)} + i^error_count c1 C^p_{i alpha(t)})
// with alpha(t) = alpha0 exp(-kappa elapsed / 2).
struct CodewordState {
  cplx alpha0{1.0, 0.0};
  double elapsed = 0.0;
  int parity = 1;
  int error_count = 0;
  double frame_angle = 0.0;
  std::vector<double> jump_times;
  bool dephased = false;

  cplx alpha(double kappa) const;
};

CodewordState initial_codeword(const CatCodeParams& params);

// c0 C+_alpha + c1 C+_{i alpha}, normalized.
StateVector encode_ideal(const LogicalQubit& q, const CatCodeParams& params);

// Parity flip, error_count + 1, jump time appended, frame_angle += K_s t_jump.
CodewordState apply_logical_jump(CodewordState s, double t_jump, double K_s);

// Advances elapsed time to `t` without a jump.
CodewordState advance_to(CodewordState s, double t);

// Physical state vector represented by (q, s) under the convention above.
StateVector codeword_state(const LogicalQubit& q, const CodewordState& s,
                           const CatCodeParams& params);

struct DecodeResult {
  LogicalQubit qubit;
  double leakage = 0.0;
  bool leakage_exceeded = false;
  bool ill_conditioned = false;  // |alpha(t)|^2 < 1
  // (1 - L)|q><q| + L I/2, or I/2 when leakage_exceeded.
  Qubit2 rho;
};

// Decoder for a fixed codeword amplitude and parity. Precomputes the basis so
// repeated decodes at the same time point are cheap.
class CatDecoder {
 public:
  CatDecoder(cplx alpha_t, int parity, int dim, DecoderKind kind, double leakage_bound = 0.5,
             double tail_threshold = 1e-9);

  // `psi` must already be in the codeword frame (Kerr and frame removed).
  DecodeResult decode(const StateVector& psi) const;

  const StateVector& basis0() const { return b0_; }
  const StateVector& basis1() const { return b1_; }

 private:
  StateVector b0_, b1_;
  Eigen::Matrix2cd gram_inv_;
  Eigen::MatrixXcd lowdin_;  // dim x 2 orthonormal frame
  DecoderKind kind_;
  double bound_;
  bool ill_;
};

// Inverts kerr_unitary(K_s, s.elapsed) and the frame rotation, then projects
// onto span{C^p_{alpha(t)}, C^p_{i alpha(t)}} with p = s.parity. Uses
// params.decoder (Gram by default).
DecodeResult decode_ideal(const StateVector& psi, const CodewordState& s,
                          const CatCodeParams& params);
// Same with the unitary decoder regardless of params.decoder.
DecodeResult decode_unitary(const StateVector& psi, const CodewordState& s,
                            const CatCodeParams& params);

// (even overlap^2, odd overlap^2) for real alpha > 0:
// |<C+_a|C+_ia>|^2 and |<C-_a|C-_ia>|^2.
std::pair<double, double> basis_overlaps(double alpha);

// sum over 1-based step indices j of K_s (j - 1/2) t_w.
double kerr_frame_estimate(const std::vector<int>& jump_step_indices, double t_w, double K_s);
// General schedule: step j spans [boundaries[j-1], boundaries[j]]; each
// flagged step contributes K_s times its midpoint.
double kerr_frame_estimate(const std::vector<int>& jump_step_indices,
                           const std::vector<double>& boundaries, double K_s);

// Process fidelity of the no-Kerr encode/decode round trip at amplitude
// alpha_t and a given parity (codewords assumed exactly in the code space).
double decode_process_fidelity(cplx alpha_t, int parity, int dim, DecoderKind kind);

}  // namespace catqec::catcode
