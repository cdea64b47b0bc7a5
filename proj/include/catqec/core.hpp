#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace catqec {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using Operator = Eigen::MatrixXcd;
using Qubit2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Machine-readable failure categories. The CLI turns these into JSON on stderr.
enum class ErrorKind {
  truncation_leakage,
  dim_mismatch,
  integrator,
  leakage_exceeded,
  no_root,
  non_convergence,
  unphysical_input,
  invalid_argument,
  config,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string key = {})
      : std::runtime_error(message), kind_(kind), key_(std::move(key)) {}
  ErrorKind kind() const { return kind_; }
  // Offending config key or argument name, empty if not applicable.
  const std::string& key() const { return key_; }

 private:
  ErrorKind kind_;
  std::string key_;
};

// Deterministic random stream. Uniform and normal draws are computed here
// rather than through <random> distributions so sequences do not depend on
// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  // Independent stream for (master seed, index).
  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_seed(master, index));
  }
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1], safe for logarithms.
  double uniform_open() { return 1.0 - uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal();
  int poisson(double mean);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Runs body(i) for i in [0, n) on up to `threads` workers with a static
// contiguous partition. Callers write results by index, so output does not
// depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace catqec
