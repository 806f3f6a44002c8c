#include "wbary/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wbary {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream RngStream::keyed(std::uint64_t seed, StreamDomain domain, std::uint64_t a,
                           std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h + static_cast<std::uint64_t>(domain) * kGolden);
  h = mix64(h + a + kGolden);
  h = mix64(h + b + 2 * kGolden);
  h = mix64(h + c + 3 * kGolden);
  return RngStream(h);
}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

}  // namespace wbary
