#include "wbary/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wbary/errors.hpp"

namespace wbary {

namespace {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw FormatError("trace csv line " + std::to_string(line_no) + ": bad real '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s, std::size_t line_no) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("trace csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

void emit_csv(const Trace& trace, std::ostream& out) {
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) out << (c ? "," : "") << kTraceColumns[c];
  out << '\n';
  for (const auto& r : trace.rows) {
    out << format_real(r.virtual_time_s) << ',' << r.global_iter << ',' << r.algorithm << ','
        << r.topology << ',' << r.seed << ',' << format_real(r.dual_objective) << ','
        << format_real(r.consensus_distance) << '\n';
  }
}

void emit_csv(const Trace& trace, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + destination.string() + "' for writing");
  emit_csv(trace, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + destination.string() + "' failed");
}

Trace parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trace csv: missing header");
  const auto header = split(line);
  if (header.size() != kTraceColumns.size())
    throw FormatError("trace csv: expected " + std::to_string(kTraceColumns.size()) + " columns");
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != kTraceColumns[c])
      throw FormatError("trace csv: column " + std::to_string(c) + " should be '" +
                        std::string(kTraceColumns[c]) + "', found '" + header[c] + "'");
  Trace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kTraceColumns.size())
      throw FormatError("trace csv line " + std::to_string(line_no) + ": wrong field count");
    TraceRow r;
    r.virtual_time_s = parse_real(f[0], line_no);
    r.global_iter = parse_int<std::int64_t>(f[1], line_no);
    r.algorithm = f[2];
    r.topology = f[3];
    r.seed = parse_int<std::uint64_t>(f[4], line_no);
    r.dual_objective = parse_real(f[5], line_no);
    r.consensus_distance = parse_real(f[6], line_no);
    trace.rows.push_back(std::move(r));
  }
  return trace;
}

Trace read_csv(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + source.string() + "'");
  return parse_csv(in);
}

}  // namespace wbary
