#include "sglab/record.hpp"

#include <cstdio>
#include <fstream>

#include "sglab/error.hpp"

namespace sglab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void RunRecord::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error(ErrorCode::InvalidArgument, "RunRecord: row width mismatch");
  if (!rows.empty() && row[0] < rows.back()[0]) throw Error(ErrorCode::InvalidArgument, "RunRecord: rows must be monotone in t");
  rows.push_back(std::move(row));
}

std::size_t RunRecord::index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorCode::InvalidArgument, "RunRecord: no column " + name);
}

std::vector<double> RunRecord::column(const std::string& name) const {
  const std::size_t c = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string RunRecord::to_csv() const {
  std::string s = "# sglab-record v1\n";
  for (const auto& [k, v] : config) s += "# " + k + "=" + v + "\n";
  s += "# status=" + status + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) s += ',';
    s += columns[i];
  }
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += format_double(r[i]);
    }
    s += '\n';
  }
  return s;
}

void RunRecord::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << to_csv();
}

void RunRecord::write_meta(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "status=" << status << "\nwall_seconds=" << format_double(wall_seconds) << "\nrows=" << rows.size() << "\n";
}

}  // namespace sglab
