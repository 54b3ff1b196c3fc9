#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sglab {

/// Time series of monitored functionals. Rows are monotone in t (first column).
/// Wall-clock time is kept out of the CSV so identical runs give identical files.
struct RunRecord {
  std::vector<std::pair<std::string, std::string>> config;  // echoed settings
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string status = "ok";  // "ok" or "aborted(<reason>)"
  double wall_seconds = 0.0;

  RunRecord() = default;
  explicit RunRecord(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add_row(std::vector<double> row);
  /// Column by name; InvalidArgument if absent.
  std::vector<double> column(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  bool ok() const { return status == "ok"; }
  void abort(const std::string& reason) { status = "aborted(" + reason + ")"; }

  /// "# sglab-record v1" header, config echo and status as comments, then the
  /// column header and one row per step with 17 significant digits.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
  /// Wall clock and other non-reproducible data.
  void write_meta(const std::string& path) const;
};

std::string format_double(double x);

}  // namespace sglab
