#include "catqec/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <ostream>
#include <sstream>

namespace catqec::fock {

namespace {

void require_dim(int dim, int min = 1) {
  if (dim < min) {
    throw Error(ErrorKind::invalid_argument, "dimension must be at least " + std::to_string(min),
                "dim");
  }
}

void require_safe_point(cplx beta, int dim) {
  if (std::norm(beta) > dim / 4.0 + 1e-12) {
    std::ostringstream msg;
    msg << "|alpha|^2 = " << std::norm(beta) << " exceeds the truncation-safe bound dim/4 = "
        << dim / 4.0;
    throw Error(ErrorKind::truncation_leakage, msg.str(), "alpha");
  }
}

// D(-beta) psi = e^{-|beta|^2/2} e^{-beta a^dag} e^{beta^* a} psi evaluated in
// a space padded by `pad` levels. e^{beta^* a} is exact on the truncated
// input because a is nilpotent there.
Eigen::VectorXcd displace_padded(const StateVector& psi, cplx beta, int pad) {
  const int dim = static_cast<int>(psi.size());
  const int big = dim + pad;
  const cplx bc = std::conj(beta);

  Eigen::VectorXcd u = psi;
  Eigen::VectorXcd term = psi;
  for (int k = 1; k < dim; ++k) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(dim);
    for (int n = 0; n + 1 < dim; ++n) next(n) = std::sqrt(double(n + 1)) * term(n + 1);
    term = next * (bc / double(k));
    u += term;
  }

  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(big);
  w.head(dim) = u;
  Eigen::VectorXcd t = w;
  for (int k = 1; k < big; ++k) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(big);
    for (int n = 1; n < big; ++n) next(n) = std::sqrt(double(n)) * t(n - 1);
    t = next * (-beta / double(k));
    w += t;
    if (t.squaredNorm() < 1e-34 * w.squaredNorm()) break;
  }
  return w * std::exp(-std::norm(beta) / 2.0);
}

double displaced_parity(const StateVector& psi, cplx beta) {
  const Eigen::VectorXcd phi = displace_padded(psi, beta, 40);
  double s = 0.0;
  for (int m = 0; m < phi.size(); ++m) s += (m % 2 == 0 ? 1.0 : -1.0) * std::norm(phi(m));
  return s;
}

}  // namespace

double tail_mass(const StateVector& psi, int levels) {
  const int dim = static_cast<int>(psi.size());
  double s = 0.0;
  for (int n = std::max(0, dim - levels); n < dim; ++n) s += std::norm(psi(n));
  return s;
}

int safe_dim(double nbar, int floor, double threshold) {
  // log-space Poisson pmf
  for (int dim = std::max(floor, 2);; ++dim) {
    double tail = 0.0;
    for (int n = dim - 2; n < dim; ++n) {
      tail += std::exp(-nbar + n * std::log(std::max(nbar, 1e-300)) - std::lgamma(n + 1.0));
    }
    if (nbar == 0.0 || tail < threshold) return dim;
  }
}

StateVector fock_state(int n, int dim) {
  require_dim(dim);
  if (n < 0 || n >= dim) {
    throw Error(ErrorKind::invalid_argument, "Fock index out of range", "n");
  }
  StateVector v = StateVector::Zero(dim);
  v(n) = 1.0;
  return v;
}

StateVector coherent_state(cplx alpha, int dim, double tail_threshold) {
  require_dim(dim);
  StateVector v(dim);
  v(0) = std::exp(-std::norm(alpha) / 2.0);
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  // tail of the untruncated state: the top two retained levels plus the
  // missing mass beyond the truncation
  const double kept = v.squaredNorm();
  const double tail = tail_mass(v) + std::max(0.0, 1.0 - kept);
  if (tail > tail_threshold) {
    std::ostringstream msg;
    msg << "coherent state |alpha|^2 = " << std::norm(alpha) << " leaks " << tail
        << " onto the truncation edge of dim " << dim;
    throw Error(ErrorKind::truncation_leakage, msg.str(), "dim");
  }
  return v / std::sqrt(kept);
}

StateVector cat_state(cplx alpha, int parity_sign, int dim, double tail_threshold) {
  if (parity_sign != 1 && parity_sign != -1) {
    throw Error(ErrorKind::invalid_argument, "parity_sign must be +1 or -1", "parity_sign");
  }
  StateVector plus = coherent_state(alpha, dim, tail_threshold);
  // |-alpha> differs only by the sign of odd components
  StateVector v = plus;
  for (int n = 0; n < dim; ++n) {
    const double s = (n % 2 == 0) ? 1.0 : -1.0;
    v(n) = plus(n) * (1.0 + parity_sign * s);
  }
  const double norm = v.norm();
  if (norm < 1e-300) {
    throw Error(ErrorKind::invalid_argument, "odd cat with alpha = 0 is undefined", "alpha");
  }
  return v / norm;
}

Ladder ladder_ops(int dim) {
  require_dim(dim, 2);
  Ladder l;
  l.a = Operator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) l.a(n - 1, n) = std::sqrt(double(n));
  l.adag = l.a.adjoint();
  l.n = Operator::Zero(dim, dim);
  l.parity = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    l.n(n, n) = double(n);
    l.parity(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  }
  return l;
}

Operator displacement(cplx alpha, int dim) {
  require_dim(dim);
  require_safe_point(alpha, dim);
  const int big = dim + 40;
  const Ladder l = ladder_ops(big);
  const Operator gen = alpha * l.adag - std::conj(alpha) * l.a;
  const Operator full = gen.exp();
  return full.topLeftCorner(dim, dim);
}

Operator rotation(double theta, int dim) {
  require_dim(dim);
  Operator r = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) r(n, n) = std::polar(1.0, theta * n);
  return r;
}

StateVector rotate(const StateVector& psi, double theta) {
  StateVector out(psi.size());
  for (int n = 0; n < psi.size(); ++n) out(n) = psi(n) * std::polar(1.0, theta * n);
  return out;
}

cplx expectation(const Operator& op, const StateVector& psi) {
  if (op.rows() != psi.size() || op.cols() != psi.size()) {
    throw Error(ErrorKind::dim_mismatch, "operator and state dimensions differ");
  }
  return psi.dot(op * psi);
}

cplx expectation(const Operator& op, const DensityMatrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
    throw Error(ErrorKind::dim_mismatch, "operator and density matrix dimensions differ");
  }
  return (rho * op).trace();
}

DensityMatrix to_density(const StateVector& psi) { return psi * psi.adjoint(); }

double fidelity(const StateVector& psi, const StateVector& phi) {
  if (psi.size() != phi.size()) throw Error(ErrorKind::dim_mismatch, "state dimensions differ");
  return std::norm(psi.dot(phi));
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.rows() != psi.size()) throw Error(ErrorKind::dim_mismatch, "state dimensions differ");
  return std::real(psi.dot(rho * psi));
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.rows() != sigma.rows()) throw Error(ErrorKind::dim_mismatch, "dimensions differ");
  const DensityMatrix d = rho - sigma;
  const DensityMatrix h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double mean_photon_number(const StateVector& psi) {
  double s = 0.0;
  for (int n = 0; n < psi.size(); ++n) s += n * std::norm(psi(n));
  return s / psi.squaredNorm();
}

double mean_photon_number(const DensityMatrix& rho) {
  double s = 0.0;
  for (int n = 0; n < rho.rows(); ++n) s += n * std::real(rho(n, n));
  return s / std::real(rho.trace());
}

std::vector<double> wigner(const StateVector& psi, const std::vector<cplx>& grid) {
  const int dim = static_cast<int>(psi.size());
  std::vector<double> out;
  out.reserve(grid.size());
  const StateVector unit = psi / psi.norm();
  for (cplx beta : grid) {
    require_safe_point(beta, dim);
    out.push_back(2.0 / kPi * displaced_parity(unit, beta));
  }
  return out;
}

std::vector<double> wigner(const DensityMatrix& rho, const std::vector<cplx>& grid) {
  const int dim = static_cast<int>(rho.rows());
  const DensityMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(h);
  const double tr = es.eigenvalues().sum();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) require_safe_point(grid[g], dim);
  for (int j = 0; j < dim; ++j) {
    const double p = es.eigenvalues()(j) / tr;
    if (std::abs(p) < 1e-15) continue;
    const StateVector v = es.eigenvectors().col(j);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out[g] += p * 2.0 / kPi * displaced_parity(v, grid[g]);
    }
  }
  return out;
}

std::vector<cplx> square_grid(double extent, int points) {
  if (points < 2) throw Error(ErrorKind::invalid_argument, "grid needs at least 2 points", "points");
  std::vector<cplx> g;
  g.reserve(static_cast<std::size_t>(points) * points);
  const double step = 2.0 * extent / (points - 1);
  for (int j = 0; j < points; ++j) {
    for (int i = 0; i < points; ++i) g.emplace_back(-extent + i * step, -extent + j * step);
  }
  return g;
}

void write_wigner_csv(std::ostream& os, const std::vector<cplx>& grid,
                      const std::vector<double>& values) {
  if (grid.size() != values.size()) {
    throw Error(ErrorKind::dim_mismatch, "grid and values have different lengths");
  }
  os << "re,im,W\n";
  os.precision(12);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid[i].real() << ',' << grid[i].imag() << ',' << values[i] << '\n';
  }
}

}  // namespace catqec::fock
