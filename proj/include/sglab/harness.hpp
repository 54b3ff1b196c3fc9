#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sglab/error.hpp"
#include "sglab/record.hpp"

namespace sglab {

/// Validated experiment description. Text form: whitespace- or newline-separated
/// key=value pairs, '#' starts a comment.
struct RunConfig {
  std::string kind;  // sg-grid | sg-particles | euler | converge | ot | uniqueness | weak-measure
  int n = 64;
  double dt = 0.01;
  double T = 1.0;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  double tol = 1e-10;       // Monge-Ampere residual target
  std::uint64_t seed = 0;
  std::string out = "sglab-out";
  int threads = 1;
  int snapshot_every = 0;   // 0 disables field snapshots
  int particles = 32;
  double delta = 1e-3;      // twin-run perturbation size
  std::string initial;      // initial-condition name; empty picks the kind's default
  double amplitude = 0.3;
  double cfl = 1.0;
  bool well_prepared = true;
  int monitor_every = 1;
  bool plot = true;
};

/// Keys accepted by parse_config, in canonical order.
const std::vector<std::string>& config_keys();

/// SyntaxError (with the line number) for malformed tokens, unknown or repeated
/// keys; InvalidValue (with the key name) for values that do not parse or
/// violate a constraint; UsageError for an unrecognized kind.
RunConfig parse_config(const std::string& text);

/// Sets one key from its text value, then validates the whole config.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// For every key k, the variable SGLAB_<K> (upper case, '-' as '_') overrides
/// the value when present. `getenv` defaults to std::getenv.
void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& getenv = {});

void validate_config(const RunConfig& cfg);

/// Canonical key=value text; parse_config(to_text(c)) reproduces c.
std::string config_to_text(const RunConfig& cfg);

struct RunOutcome {
  RunRecord record;
  bool assertions_ok = true;
  std::vector<std::string> failed_assertions;
  std::vector<std::string> files;  // artifacts written, relative to cfg.out
  int exit_code = 0;               // 0 iff status ok and every assertion passed
};

/// Dispatches on cfg.kind, writes record.csv, meta.txt, config.txt, snapshots
/// and plots under cfg.out. Module errors end the run with an aborted record
/// and a nonzero exit code instead of propagating.
RunOutcome run_experiment(const RunConfig& cfg);

/// 0 ok, 2 usage/config errors, 3 numerical failures, 4 failed assertions, 5 I/O.
int exit_code_for(ErrorCode code);
constexpr int kExitAssertion = 4;

}  // namespace sglab
