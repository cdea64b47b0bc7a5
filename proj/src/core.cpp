#include "catqec/core.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace catqec {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::truncation_leakage: return "truncation-leakage";
    case ErrorKind::dim_mismatch: return "dim-mismatch";
    case ErrorKind::integrator: return "integrator-step-failure";
    case ErrorKind::leakage_exceeded: return "leakage-exceeded";
    case ErrorKind::no_root: return "no-root";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::unphysical_input: return "unphysical-input";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over a mix of both words
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

int Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 50.0) {
    // not reached by the physics here; normal approximation keeps it total
    return std::max(0, static_cast<int>(std::lround(mean + std::sqrt(mean) * normal())));
  }
  // inversion by sequential search
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u >= cdf && k < 1000) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace catqec
