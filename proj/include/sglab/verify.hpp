#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sglab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values behind the verdict
  double seconds = 0.0;
};

struct VerifyOptions {
  bool full = false;          // acceptance sizes; quick uses reduced grids and counts
  double ma_tol = 1e-10;      // tolerance handed to the Monge-Ampere solves of criteria 1 and 2
  std::uint64_t seed = 20240611;
  int threads = 1;            // eps sweep concurrency (criteria 13, 14)
  std::string out_dir;        // when set, the rate plot and sweep table are written here
  std::vector<int> only;      // empty: all criteria
};

struct VerifyReport {
  std::vector<CriterionResult> results;
  bool all_passed() const;
  /// One line per criterion: "[PASS] 3 name: detail (1.2 s)".
  std::string summary() const;
};

int criterion_count();
CriterionResult verify_criterion(int id, const VerifyOptions& opt = {});
/// Runs the criteria in order. Criteria 13 and 14 share one sweep.
VerifyReport verify_suite(const VerifyOptions& opt = {});

}  // namespace sglab
