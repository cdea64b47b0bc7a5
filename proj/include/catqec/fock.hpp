#pragma once

#include "catqec/core.hpp"

#include <iosfwd>
#include <vector>

namespace catqec::fock {

inline constexpr double kDefaultTailThreshold = 1e-9;

// Tail mass sum_{n >= dim - levels} |c_n|^2.
double tail_mass(const StateVector& psi, int levels = 2);

// Smallest dimension >= floor such that a Poisson(nbar) distribution puts
// less than `threshold` on the top two levels.
int safe_dim(double nbar, int floor = 20, double threshold = kDefaultTailThreshold);

StateVector fock_state(int n, int dim);

// |alpha> truncated to `dim` levels and renormalized.
// Throws truncation_leakage if the untruncated tail mass on the top two
// levels exceeds `tail_threshold`.
StateVector coherent_state(cplx alpha, int dim, double tail_threshold = kDefaultTailThreshold);

// N(|alpha> + s|-alpha>) with s = parity_sign (+1 or -1).
StateVector cat_state(cplx alpha, int parity_sign, int dim,
                      double tail_threshold = kDefaultTailThreshold);

struct Ladder {
  Operator a;
  Operator adag;
  Operator n;
  Operator parity;
};

Ladder ladder_ops(int dim);

// D(alpha) = exp(alpha a^dag - alpha^* a). The exponential is taken in a
// padded space and cropped, so it is unitary away from the truncation edge.
Operator displacement(cplx alpha, int dim);

// exp(i theta n) as a diagonal operator.
Operator rotation(double theta, int dim);
// exp(i theta n) psi without building the operator.
StateVector rotate(const StateVector& psi, double theta);

cplx expectation(const Operator& op, const StateVector& psi);
cplx expectation(const Operator& op, const DensityMatrix& rho);

DensityMatrix to_density(const StateVector& psi);
double fidelity(const StateVector& psi, const StateVector& phi);
double fidelity(const DensityMatrix& rho, const StateVector& psi);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

double mean_photon_number(const StateVector& psi);
double mean_photon_number(const DensityMatrix& rho);

// W(beta) = (2/pi) <D(beta) P D(beta)^dag>. Grid points must satisfy
// |beta|^2 <= dim/4, otherwise truncation_leakage is thrown.
std::vector<double> wigner(const StateVector& psi, const std::vector<cplx>& grid);
std::vector<double> wigner(const DensityMatrix& rho, const std::vector<cplx>& grid);

// Square grid [-extent, extent]^2 with `points` samples per axis, row-major
// with the real part varying fastest.
std::vector<cplx> square_grid(double extent, int points);

void write_wigner_csv(std::ostream& os, const std::vector<cplx>& grid,
                      const std::vector<double>& values);

}  // namespace catqec::fock
