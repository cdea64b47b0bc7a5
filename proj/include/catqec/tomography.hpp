#pragma once

#include "catqec/core.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace catqec::tomography {

using ChiMatrix = Eigen::Matrix4cd;
using Kraus = std::vector<Qubit2>;

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
  Eigen::Vector3d vec() const { return {x, y, z}; }
  double length() const { return vec().norm(); }
};

struct AxisCounts {
  long plus = 0;
  long minus = 0;
};

// r_i = (n+ - n-)/(n+ + n-). Throws invalid_argument on an empty axis.
BlochVector bloch_from_outcomes(AxisCounts x, AxisCounts y, AxisCounts z);

Qubit2 density_from_bloch(const Eigen::Vector3d& r);
Eigen::Vector3d bloch_from_density(const Qubit2& rho);

// Output Bloch vectors for the cardinal inputs. -x and -y are optional; when
// present the x and y data are symmetrized.
struct CardinalBloch {
  Eigen::Vector3d plus_x = Eigen::Vector3d::Zero();
  Eigen::Vector3d plus_y = Eigen::Vector3d::Zero();
  Eigen::Vector3d plus_z = Eigen::Vector3d::Zero();
  Eigen::Vector3d minus_z = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> minus_x;
  std::optional<Eigen::Vector3d> minus_y;
};

// Operator basis {I, X, -iY, Z}.
const std::array<Qubit2, 4>& chi_basis();

struct ChiOptions {
  bool clip = false;        // project onto PSD instead of throwing
  double psd_tolerance = 1e-6;
};

// Standard single-qubit process inversion. Throws unphysical_input when an
// eigenvalue is below -psd_tolerance and clipping is off.
ChiMatrix chi_from_cardinals(const CardinalBloch& data, const ChiOptions& opt = {});

// Closed form for chi_00 from the +x, +y, +z, -z data.
double chi00_closed_form(const CardinalBloch& data);

double process_fidelity(const ChiMatrix& chi);
double scaled_fidelity(double process_fidelity);

Qubit2 apply_chi(const ChiMatrix& chi, const Qubit2& rho);
Qubit2 apply_kraus(const Kraus& k, const Qubit2& rho);
CardinalBloch cardinal_outputs(const Kraus& k);
ChiMatrix chi_from_kraus(const Kraus& k);

// Generalized amplitude damping with f = 1 - exp(-t/t0); |0> is the ground
// state (+z) and n_th the excited population of the fixed point.
Kraus amplitude_damping_channel(double t, double t0, double n_th);
// Pure dephasing that multiplies coherences by `coherence`.
Kraus dephasing_channel(double coherence);
// Composition b after a.
Kraus compose(const Kraus& a, const Kraus& b);

Eigen::Matrix3d rotation_matrix(double a, double b, double c);  // Rz(a) Ry(b) Rx(c)

struct FrameResult {
  Eigen::Vector3d angles = Eigen::Vector3d::Zero();  // radians (z, y, x)
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  ChiMatrix chi = ChiMatrix::Zero();
  double fidelity = 0.0;
  int iterations = 0;
};

// Single global rotation of the output frame maximizing chi_00, Nelder-Mead
// over three Euler angles clamped to +-bound. Needs all six inputs.
FrameResult frame_optimize(const CardinalBloch& data, double bound = 15.0 * kPi / 180.0);

// max over inputs of | |r| - mean |r| |.
double isotropy_deviation(const std::vector<Eigen::Vector3d>& outputs);

enum class DecayModel { single_exponential, uncorrected_cat };

struct DecayFit {
  DecayModel model = DecayModel::single_exponential;
  double A = 0.0;
  double tau = 0.0;
  double A_err = 0.0;
  double tau_err = 0.0;
  double nbar0 = 0.0;  // uncorrected_cat only
  double rss = 0.0;
  int iterations = 0;
};

// F = 0.25 + A exp(-t/tau), or F = 0.25 + A exp(-nbar0 (1 - exp(-t/tau))).
// Unweighted least squares, errors from the Jacobian at the optimum.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& F,
                   DecayModel model = DecayModel::single_exponential, double nbar0 = 0.0);
double evaluate_decay(const DecayFit& fit, double t);

std::string chi_to_json(const ChiMatrix& chi);
ChiMatrix chi_from_json(const std::string& text);
std::string fit_to_json(const DecayFit& fit);
void write_decay_csv(std::ostream& os, const std::vector<double>& t, const std::vector<double>& F,
                     const std::vector<double>& sigma);
// Reads a t,F,sigma_F table (header required).
void read_decay_csv(std::istream& is, std::vector<double>& t, std::vector<double>& F,
                    std::vector<double>& sigma);

}  // namespace catqec::tomography
