#ifndef FACTORLAB_COMMON_H_
#define FACTORLAB_COMMON_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace factorlab {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double NaN() {
  return std::numeric_limits<double>::quiet_NaN();
}

inline bool IsMissing(double value) {
  return std::isnan(value);
}

inline bool IsFinite(double value) {
  return std::isfinite(value);
}

// Splitmix64. Used to derive independent seeds from (seed, stream indices)
// so that thread count and evaluation order cannot change results.
inline std::uint64_t MixSeed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a) {
  return MixSeed(MixSeed(seed) ^ a);
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b) {
  return MixSeed(DeriveSeed(seed, a) ^ MixSeed(b + 0x51ull));
}

// Global worker cap honored by ParallelFor. 0 means hardware concurrency.
void SetMaxThreads(int threads);
int MaxThreads();

// Runs fn(i) for i in [0, n). Work is partitioned statically so outputs
// written to pre-sized slots are identical for any thread count.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace factorlab

#endif  // FACTORLAB_COMMON_H_
