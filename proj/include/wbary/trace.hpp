#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wbary {

struct TraceRow {
  double virtual_time_s = 0.0;
  std::int64_t global_iter = 0;
  std::string algorithm;
  std::string topology;
  std::uint64_t seed = 0;
  double dual_objective = 0.0;
  double consensus_distance = 0.0;

  bool operator==(const TraceRow&) const = default;
};

struct Trace {
  std::vector<TraceRow> rows;

  bool operator==(const Trace&) const = default;
};

inline constexpr std::array<std::string_view, 7> kTraceColumns = {
    "virtual_time_s", "global_iter", "algorithm", "topology", "seed", "dual_objective", "consensus_distance"};

/// Header plus one row per snapshot; reals use 17 significant digits.
void emit_csv(const Trace& trace, std::ostream& out);
void emit_csv(const Trace& trace, const std::filesystem::path& destination);

/// Inverse of emit_csv. Throws FormatError on schema mismatch.
Trace parse_csv(std::istream& in);
Trace read_csv(const std::filesystem::path& source);

}  // namespace wbary
