#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace peeropt {

/// FNV-1a over the bytes of a string; used to tag output files with the
/// configuration that produced them.
std::uint64_t fnv1a64(std::string_view data);

/// 16 lowercase hex digits of fnv1a64.
std::string hash_hex(std::string_view data);

/// Shortest decimal representation that round-trips a double through
/// strtod; integers print without an exponent or trailing ".0".
std::string format_double(double v);

/// Column-oriented CSV writer with deterministic, locale-independent output:
/// one comment block, one header line, rows formatted with round-trip
/// precision.  Writing is byte-stable across runs for identical inputs.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  /// Comment lines are emitted before the header, prefixed with "# ".
  void add_comment(std::string line);
  void add_row(const std::vector<double>& row);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<double>> rows_;
};

/// One time point per line, "%.17g"-style round-trip text; used to persist
/// adapted grids for later runs.
void write_grid_file(const std::string& path, const std::vector<double>& t);
std::vector<double> read_grid_file(const std::string& path);

}  // namespace peeropt
