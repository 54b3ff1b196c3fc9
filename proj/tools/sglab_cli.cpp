// sglab command-line front end.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sglab/error.hpp"
#include "sglab/harness.hpp"
#include "sglab/verify.hpp"

namespace {

struct Globals {
  std::string config_file, out, eps;
  std::uint64_t seed = 0;
  int threads = 0, n = 0, snapshot_every = -1;
  double dt = 0, T = -1, tol = 0;
  std::vector<std::string> sets;
  bool no_plot = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw sglab::Error(sglab::ErrorCode::IoError, "cannot read config file " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// defaults < config file < SGLAB_* environment < command-line flags
sglab::RunConfig build_config(const Globals& g, const std::string& kind, const CLI::App& app) {
  sglab::RunConfig c;
  if (!g.config_file.empty()) {
    // the file may omit kind; the subcommand supplies it
    std::string text = read_file(g.config_file);
    if (text.find("kind=") == std::string::npos && !kind.empty()) text = "kind=" + kind + "\n" + text;
    c = sglab::parse_config(text);
  }
  // plain sg-run keeps a file's kind=sg-particles
  const bool keep = kind == "sg-grid" && c.kind == "sg-particles";
  if (!kind.empty() && !keep) c.kind = kind;
  if (c.kind.empty()) throw sglab::Error(sglab::ErrorCode::UsageError, "no experiment kind given");
  sglab::apply_env_overrides(c);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--out")) c.out = g.out;
  if (given("--seed")) c.seed = g.seed;
  if (given("--threads")) c.threads = g.threads;
  if (given("--n")) c.n = g.n;
  if (given("--dt")) c.dt = g.dt;
  if (given("--T")) c.T = g.T;
  if (given("--tol")) c.tol = g.tol;
  if (given("--snapshot-every")) c.snapshot_every = g.snapshot_every;
  if (given("--eps")) sglab::set_config_value(c, "eps", g.eps);
  if (g.no_plot) c.plot = false;
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw sglab::Error(sglab::ErrorCode::UsageError, "--set expects key=value, got " + kv);
    sglab::set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  sglab::validate_config(c);
  return c;
}

int report(const sglab::RunOutcome& o, const sglab::RunConfig& c) {
  std::cout << "status: " << o.record.status << "\n";
  for (const auto& a : o.failed_assertions) std::cout << "assertion failed: " << a << "\n";
  std::cout << "output: " << c.out << " (" << o.files.size() << " files)\n";
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-geostrophic dual-variable laboratory"};
  app.require_subcommand(1);
  Globals g;
  auto add_globals = [&](CLI::App* sc) {
    sc->add_option("--config", g.config_file, "key=value config file");
    sc->add_option("--out", g.out, "output directory");
    sc->add_option("--seed", g.seed, "random seed");
    sc->add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    sc->add_option("--n", g.n, "grid resolution");
    sc->add_option("--dt", g.dt, "time step");
    sc->add_option("--T", g.T, "final time");
    sc->add_option("--tol", g.tol, "Monge-Ampere tolerance");
    sc->add_option("--eps", g.eps, "comma-separated decreasing eps list");
    sc->add_option("--snapshot-every", g.snapshot_every, "write field snapshots every k steps");
    sc->add_option("--set", g.sets, "override any config key (key=value)")->take_all();
    sc->add_flag("--no-plot", g.no_plot, "skip plot files");
  };

  bool particles = false;
  auto* sg = app.add_subcommand("sg-run", "semi-geostrophic run (grid, or particles with --particles)");
  sg->add_flag("--particles", particles, "use the particle discretization");
  auto* eu = app.add_subcommand("euler-run", "2-D Euler reference run");
  auto* cv = app.add_subcommand("converge", "eps -> 0 sweep against Euler");
  auto* ot = app.add_subcommand("ot", "optimal map and displacement interpolation");
  auto* un = app.add_subcommand("uniqueness", "twin-run stability experiment");
  auto* wm = app.add_subcommand("weak-measure", "particle run with weak-form residuals");
  auto* rn = app.add_subcommand("run", "run the experiment named by kind= in the config");
  for (auto* sc : {sg, eu, cv, ot, un, wm, rn}) add_globals(sc);

  std::string level = "quick", verify_out;
  double ma_tol = 1e-10;
  std::vector<int> only;
  std::uint64_t vseed = 20240611;
  int vthreads = 1;
  auto* vf = app.add_subcommand("verify", "run the acceptance battery");
  vf->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  vf->add_option("--ma-tol", ma_tol, "Monge-Ampere tolerance for criteria 1-2 (fault injection)")
      ->check(CLI::PositiveNumber);
  vf->add_option("--only", only, "criterion ids to run")->delimiter(',');
  vf->add_option("--seed", vseed, "random seed");
  vf->add_option("--threads", vthreads, "sweep threads")->check(CLI::PositiveNumber);
  vf->add_option("--out", verify_out, "directory for the sweep table and plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*vf) {
      sglab::VerifyOptions o;
      o.full = level == "full";
      o.ma_tol = ma_tol;
      o.only = only;
      o.seed = vseed;
      o.threads = vthreads;
      o.out_dir = verify_out;
      for (int id : only)
        if (id < 1 || id > sglab::criterion_count())
          throw sglab::Error(sglab::ErrorCode::UsageError, "no criterion " + std::to_string(id));
      const auto rep = sglab::verify_suite(o);
      std::cout << rep.summary();
      return rep.all_passed() ? 0 : sglab::kExitAssertion;
    }
    std::string kind;
    CLI::App* sc = sg;
    if (*sg) kind = particles ? "sg-particles" : "sg-grid";
    else if (*eu) sc = eu, kind = "euler";
    else if (*cv) sc = cv, kind = "converge";
    else if (*ot) sc = ot, kind = "ot";
    else if (*un) sc = un, kind = "uniqueness";
    else if (*wm) sc = wm, kind = "weak-measure";
    else sc = rn;
    const sglab::RunConfig c = build_config(g, kind, *sc);
    return report(sglab::run_experiment(c), c);
  } catch (const sglab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sglab::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
