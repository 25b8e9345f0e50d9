#pragma once

// Shared vocabulary for the green_ssl library: matrix aliases, the error
// hierarchy, the portable random number generator and a small parallel_for.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace green_ssl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Class ids are dense and 1-based: 1..class_count.
using ClassId = int;

/// Largest problem size for which an n x n matrix is ever materialized.
inline constexpr Index kMaxDenseSize = 4096;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a valid result.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A dense n x n intermediate would exceed kMaxDenseSize.
class OutOfMemoryGuard : public NumericError {
 public:
  using NumericError::NumericError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

inline void guard_dense(Index n, const char* what) {
  if (n > kMaxDenseSize) {
    throw OutOfMemoryGuard(std::string(what) + ": n = " + std::to_string(n) +
                           " exceeds the dense limit of " +
                           std::to_string(kMaxDenseSize) + " samples (OM)");
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Seedable generator with a platform-independent output stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// derived draws are implemented here: uniform integers by rejection on the
/// raw 64-bit output, uniform reals from the top 53 bits, and normals by the
/// Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ConfigError("uniform_index: empty range");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// Uniform real in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; derives independent sub-seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

/// Worker count: GREEN_SSL_THREADS if set to a positive integer, otherwise
/// the hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("GREEN_SSL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index
/// must only write state owned by that index, so results do not depend on
/// the worker count.
template <typename Body>
void parallel_for(Index n, Body&& body) {
  const auto workers =
      static_cast<Index>(std::min<Index>(thread_count(), std::max<Index>(n, 1)));
  if (workers <= 1 || n < 64) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &body, &slot = failures[w]] {
      try {
        for (Index i = begin; i < end; ++i) body(i);
      } catch (...) {
        slot = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // Lowest chunk wins so the reported error does not depend on scheduling.
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace green_ssl
