#pragma once

#include <cstdint>

namespace wbary {

/// Purpose tags mixed into every keyed stream so that independent consumers
/// (block selection, sampling, delays, evaluation, ...) never share draws.
enum class StreamDomain : std::uint64_t {
  block_select = 1,
  oracle = 2,
  sampling = 3,
  delay = 4,
  activation = 5,
  eval = 6,
  preset = 7,
  topology = 8,
  delay_schedule = 9,
  diagnostics = 10,
};

/// Counter-based random stream. The state is a 64-bit counter advanced by
/// the splitmix64 increment; outputs are the splitmix64 finalizer of the
/// state. Streams are cheap to create, so callers derive a fresh stream per
/// (seed, domain, node, iteration) key instead of sharing one generator.
/// Results therefore do not depend on evaluation order or threading.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  static RngStream keyed(std::uint64_t seed, StreamDomain domain, std::uint64_t a = 0,
                         std::uint64_t b = 0, std::uint64_t c = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();

  /// Uniform integer in [0, n), unbiased. n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace wbary
