#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavfl {

/// Failure categories surfaced through the C API as distinct status codes.
enum class ErrorKind {
  kConfig,      // malformed or invalid scenario configuration
  kInfeasible,  // optimizer found no design passing the sampled constraints
  kArgument,    // precondition violated by a caller
  kNumeric,     // an iterative routine failed to converge
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Decision variables of the joint power/scheduling/speed design.
struct DesignVector {
  std::vector<double> p;  // follower transmit powers [W]
  double p_leader = 0.0;  // [W]
  double beta = 0.5;      // uplink share of the round time
  double v = 0.0;         // swarm forward speed [m/s]

  bool operator==(const DesignVector&) const = default;
};

/// splitmix64 finalizer; used to derive independent per-task seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

}  // namespace uavfl
