#include "sglab/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sglab/convergence.hpp"
#include "sglab/euler2d.hpp"
#include "sglab/fields.hpp"
#include "sglab/plot.hpp"
#include "sglab/sg_dual.hpp"
#include "sglab/transport.hpp"

namespace sglab {

namespace fs = std::filesystem;

namespace {

const double kTwoPi = 6.283185307179586;

const std::vector<std::string> kKinds = {"sg-grid", "sg-particles", "euler", "converge", "ot", "uniqueness", "weak-measure"};

Error invalid(const std::string& key, const std::string& why) {
  return Error(ErrorCode::InvalidValue, "invalid value for " + key + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
  const char* b = v.c_str();
  char* e = nullptr;
  const double x = std::strtod(b, &e);
  if (v.empty() || e != b + v.size() || !std::isfinite(x)) throw invalid(key, "'" + v + "' is not a finite number");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const char* b = v.c_str();
  char* e = nullptr;
  errno = 0;
  const long long x = std::strtoll(b, &e, 10);
  if (v.empty() || e != b + v.size() || errno != 0) throw invalid(key, "'" + v + "' is not an integer");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -(1LL << 31) || x >= (1LL << 31)) throw invalid(key, "out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw invalid(key, "'" + v + "' is not a boolean");
}

void assign(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "kind") c.kind = v;
  else if (key == "n") c.n = to_int(key, v);
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "T") c.T = to_double(key, v);
  else if (key == "eps") {
    c.eps.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) c.eps.push_back(to_double(key, item));
    if (c.eps.empty()) throw invalid(key, "empty list");
  } else if (key == "tol") c.tol = to_double(key, v);
  else if (key == "seed") {
    if (v.empty() || v[0] == '-') throw invalid(key, "'" + v + "' is not an unsigned integer");
    const char* b = v.c_str();
    char* e = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(b, &e, 10);
    if (e != b + v.size() || errno != 0) throw invalid(key, "'" + v + "' is not an unsigned integer");
    c.seed = x;
  } else if (key == "out") c.out = v;
  else if (key == "threads") c.threads = to_int(key, v);
  else if (key == "snapshot_every") c.snapshot_every = to_int(key, v);
  else if (key == "particles") c.particles = to_int(key, v);
  else if (key == "delta") c.delta = to_double(key, v);
  else if (key == "initial") c.initial = v;
  else if (key == "amplitude") c.amplitude = to_double(key, v);
  else if (key == "cfl") c.cfl = to_double(key, v);
  else if (key == "well_prepared") c.well_prepared = to_bool(key, v);
  else if (key == "monitor_every") c.monitor_every = to_int(key, v);
  else if (key == "plot") c.plot = to_bool(key, v);
  else throw Error(ErrorCode::SyntaxError, "unknown key '" + key + "'");
}

std::string join_eps(const std::vector<double>& e) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + format_double(e[i]);
  return s;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"kind",      "n",           "dt",   "T",         "eps",           "tol",
                                                "seed",      "out",         "threads", "snapshot_every", "particles",
                                                "delta",     "initial",     "amplitude", "cfl",    "well_prepared",
                                                "monitor_every", "plot"};
  return keys;
}

void validate_config(const RunConfig& c) {
  if (std::find(kKinds.begin(), kKinds.end(), c.kind) == kKinds.end())
    throw Error(ErrorCode::UsageError, c.kind.empty() ? "missing kind" : "unknown kind '" + c.kind + "'");
  if (c.n < 16) throw invalid("n", "must be >= 16");
  if (!(c.dt > 0)) throw invalid("dt", "must be > 0");
  if (!(c.T >= 0)) throw invalid("T", "must be >= 0");
  if (!(c.tol > 0)) throw invalid("tol", "must be > 0");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (!(c.eps[i] > 0)) throw invalid("eps", "entries must be > 0");
    if (i > 0 && !(c.eps[i] < c.eps[i - 1])) throw invalid("eps", "list must be decreasing");
  }
  if (c.threads < 1) throw invalid("threads", "must be >= 1");
  if (c.snapshot_every < 0) throw invalid("snapshot_every", "must be >= 0");
  if (c.particles < 1) throw invalid("particles", "must be >= 1");
  if (!(c.delta >= 0)) throw invalid("delta", "must be >= 0");
  if (!(c.cfl > 0)) throw invalid("cfl", "must be > 0");
  if (c.monitor_every < 1) throw invalid("monitor_every", "must be >= 1");
  if (c.out.empty()) throw invalid("out", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream toks(line);
    std::string tok;
    while (toks >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": expected key=value, got '" + tok + "'");
      const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
      if (!seen.insert(key).second)
        throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": repeated key '" + key + "'");
      try {
        assign(c, key, value);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SyntaxError)
          throw Error(ErrorCode::SyntaxError, "line " + std::to_string(lineno) + ": " + e.what());
        throw;
      }
    }
  }
  validate_config(c);
  return c;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  assign(cfg, key, value);
  validate_config(cfg);
}

void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& getenv) {
  for (const auto& k : config_keys()) {
    std::string var = "SGLAB_";
    for (char ch : k) var += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const char* v = getenv ? getenv(var.c_str()) : std::getenv(var.c_str());
    if (v) assign(cfg, k, v);
  }
  validate_config(cfg);
}

std::string config_to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "kind=" << c.kind << "\nn=" << c.n << "\ndt=" << format_double(c.dt) << "\nT=" << format_double(c.T)
    << "\neps=" << join_eps(c.eps) << "\ntol=" << format_double(c.tol) << "\nseed=" << c.seed << "\nout=" << c.out
    << "\nthreads=" << c.threads << "\nsnapshot_every=" << c.snapshot_every << "\nparticles=" << c.particles
    << "\ndelta=" << format_double(c.delta) << "\n";
  if (!c.initial.empty()) o << "initial=" << c.initial << "\n";
  o << "amplitude=" << format_double(c.amplitude) << "\ncfl=" << format_double(c.cfl)
    << "\nwell_prepared=" << (c.well_prepared ? 1 : 0) << "\nmonitor_every=" << c.monitor_every
    << "\nplot=" << (c.plot ? 1 : 0) << "\n";
  return o.str();
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UsageError:
    case ErrorCode::SyntaxError:
    case ErrorCode::InvalidValue:
      return 2;
    case ErrorCode::IoError:
      return 5;
    default:
      return 3;
  }
}

// ------------------------------------------------------------------ runs

namespace {

struct Context {
  const RunConfig& cfg;
  RunOutcome& out;
  fs::path dir;

  void assertion(bool ok, const std::string& what) {
    if (!ok) {
      out.assertions_ok = false;
      out.failed_assertions.push_back(what);
    }
  }
  std::string file(const std::string& rel) {
    out.files.push_back(rel);
    return (dir / rel).string();
  }
  void snapshot(const GridField& f, const std::string& stem, int step) {
    if (cfg.snapshot_every <= 0 || step % cfg.snapshot_every != 0) return;
    fs::create_directories(dir / "snapshots");
    write_field_csv(file("snapshots/" + stem + "_" + std::to_string(step) + ".csv"), f, stem);
  }
  // Plots are derived artifacts: failures are noted, never fatal.
  void plot(const std::string& name, const RunRecord& r, const std::vector<std::string>& cols, const std::string& title,
            bool logy = false) {
    if (!cfg.plot || r.rows.empty()) return;
    try {
      std::vector<PlotSeries> s;
      const auto x = r.column(r.columns.front());
      for (const auto& c : cols) s.push_back({c, x, r.column(c), false});
      write_svg_plot(file(name), s, {title, r.columns.front(), "", false, logy, 640, 420});
    } catch (const Error& e) {
      out.record.config.emplace_back("plot_error", e.what());
    }
  }
};

GridField sg_initial(const RunConfig& c) {
  const std::string name = c.initial.empty() ? "bump" : c.initial;
  const double A = c.amplitude;
  GridField f;
  if (name == "rest") f = GridField(2, c.n, 1.0);
  else if (name == "bump")
    f = GridField::sample(2, c.n, [A](const Point& x) {
      return 1.0 + A * std::exp(-norm2(x - Point(0.4, 0.55)) / 0.02);
    });
  else if (name == "holder")
    f = GridField::sample(2, c.n, [A](const Point& x) {
      auto sq = [](double s) { return std::copysign(std::sqrt(std::abs(s)), s); };
      return 1.0 + A * sq(std::sin(kTwoPi * x[0])) * sq(std::sin(kTwoPi * x[1]));
    });
  else if (name == "modes")
    f = GridField::sample(2, c.n, [A](const Point& x) {
      return 1.0 + A * (std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]) + 0.5 * std::cos(kTwoPi * (x[0] + 2 * x[1])));
    });
  else
    throw invalid("initial", "'" + name + "' is not one of rest, bump, holder, modes");
  if (!(f.min() > 0)) throw invalid("amplitude", "initial density is not positive");
  f *= 1.0 / f.mean();
  return f;
}

GridField vorticity_initial(const RunConfig& c, const std::string& fallback) {
  const std::string name = c.initial.empty() ? fallback : c.initial;
  const double A = c.amplitude;
  GridField w;
  if (name == "rest") w = GridField(2, c.n);
  else if (name == "shear") w = GridField::sample(2, c.n, [A](const Point& x) { return A * std::sin(kTwoPi * x[1]); });
  else if (name == "eigenmode")
    w = GridField::sample(2, c.n, [A](const Point& x) { return A * std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
  else if (name == "modes")
    w = GridField::sample(2, c.n, [A](const Point& x) {
      return A * (std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]) + 0.5 * std::cos(kTwoPi * (x[0] + 2 * x[1])));
    });
  else
    throw invalid("initial", "'" + name + "' is not one of rest, shear, eigenmode, modes");
  w += -w.mean();
  return w;
}

ParticleCloud random_cloud(const RunConfig& c) {
  std::mt19937_64 g(c.seed);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  std::vector<Point> p;
  for (int i = 0; i < c.particles; ++i) p.emplace_back(u(g), u(g));
  return ParticleCloud::uniform(p, false);
}

int steps_for(const RunConfig& c) {
  const long long k = std::llround(c.T / c.dt);
  if (std::abs(static_cast<double>(k) * c.dt - c.T) > 1e-9 * std::max(1.0, c.T)) throw invalid("T", "must be a multiple of dt");
  return static_cast<int>(k);
}

void run_sg_grid(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  GridRunOptions o;
  o.step.ma.tol = c.tol;
  o.step.cfl = c.cfl;
  o.monitor_every = c.monitor_every;
  o.seed = c.seed;
  o.on_step = [&](const SGStateGrid& s, int k) { ctx.snapshot(s.rho, "rho", k); };
  steps_for(c);
  GridRun run = run_grid(sg_initial(c), c.T, c.dt, o);
  ctx.out.record = run.record;
  ctx.assertion(run.bound_held, "Dini growth bound");
  ctx.plot("density.svg", run.record, {"rho_min", "rho_max"}, "Density extrema");
  ctx.plot("dini.svg", run.record, {"C_t", "dini_bound"}, "Dini bound and C_t");
}

void run_sg_particles(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  steps_for(c);
  ParticleTrajectory tr = run_particles(random_cloud(c), Domain::centered_box(2), c.T, c.dt);
  ctx.out.record = particle_record(tr);
  for (std::size_t k = 0; k < tr.states.size(); ++k)
    if (c.snapshot_every > 0 && k % static_cast<std::size_t>(c.snapshot_every) == 0) {
      fs::create_directories(ctx.dir / "snapshots");
      write_cloud_csv(ctx.file("snapshots/cloud_" + std::to_string(k) + ".csv"), tr.states[k].cloud);
    }
  SupportReport s = support_radius_check(tr, 5 * c.dt);
  ctx.assertion(s.holds, "support radius bound");
  ctx.plot("support.svg", ctx.out.record, {"max_radius", "bound"}, "Support radius");
}

void run_euler(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int steps = steps_for(c);
  EulerOptions o;
  o.cfl = c.cfl;
  EulerState s = init_euler(vorticity_initial(c, "modes"));
  RunRecord rec({"t", "energy", "enstrophy", "omega_min", "omega_max"});
  const double e0 = kinetic_energy(s);
  double drift = 0.0;
  auto enstrophy = [](const GridField& w) {
    std::vector<double> v(w.size());
    for (std::size_t q = 0; q < v.size(); ++q) v[q] = w[q] * w[q];
    return pairwise_sum(v) / static_cast<double>(v.size());
  };
  for (int k = 0;; ++k) {
    s.t = k * c.dt;
    const double e = kinetic_energy(s);
    drift = std::max(drift, e0 > 0 ? std::abs(e - e0) / e0 : std::abs(e));
    rec.add_row({s.t, e, enstrophy(s.omega), s.omega.min(), s.omega.max()});
    ctx.snapshot(s.omega, "omega", k);
    if (k == steps) break;
    s = euler_step(s, c.dt, o);
  }
  ctx.out.record = rec;
  ctx.out.record.config.emplace_back("energy_drift", format_double(drift));
  ctx.assertion(drift <= 1e-3, "energy drift <= 1e-3");
  ctx.plot("energy.svg", rec, {"energy", "enstrophy"}, "Energy and enstrophy");
}

void run_converge(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  SweepOptions o;
  o.n = c.n;
  o.T = c.T;
  o.dt = c.dt;
  o.eps_opt.tol = c.tol;
  o.eps_opt.cfl = c.cfl;
  o.well_prepared = c.well_prepared;
  o.threads = c.threads;
  steps_for(c);
  SweepReport rep = eps_sweep(vorticity_initial(c, "modes"), c.eps, o);
  StrongReport strong = strong_expansion_monitor(rep, c.tol);
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    RunRecord r = rep.runs[i].record;
    r.write_csv(ctx.file("run_eps" + std::to_string(i) + ".csv"));
  }
  ctx.out.record = rep.table;
  ctx.out.record.config.emplace_back("exponent", format_double(rep.exponent));
  ctx.out.record.config.emplace_back("rho1_variation", format_double(strong.variation));
  ctx.out.record.config.emplace_back("elliptic_c", format_double(strong.elliptic_c));
  for (const auto& r : rep.runs)
    if (!r.record.ok()) ctx.out.record.abort("eps=" + format_double(r.eps) + " " + r.record.status);
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const std::string e = "eps=" + format_double(rep.runs[i].eps) + ": ";
    ctx.assertion(rep.envelope_ok[i], e + "H envelope");
    ctx.assertion(rep.q_ok[i], e + "|Q| <= C eps");
    ctx.assertion(rep.delta_ok[i], e + "|Delta| <= C (eps^(2/3) + H)");
    ctx.assertion(rep.energy_ok[i], e + "energy drift <= 1e-3");
  }
  if (c.eps.size() >= 2) {
    ctx.assertion(rep.exponent >= 0.6, "rate exponent >= 0.6");
    ctx.assertion(strong.ok, "strong expansion monitor");
  }
  if (c.plot) {
    try {
      std::vector<PlotSeries> curves;
      PlotSeries pts{"H(T)", {}, {}, true};
      for (const auto& r : rep.runs) {
        if (!r.record.ok()) continue;
        curves.push_back({"eps = " + format_double(r.eps), r.record.column("t"), r.record.column("H"), false});
        pts.x.push_back(r.eps);
        pts.y.push_back(r.HT);
      }
      write_svg_plot(ctx.file("modulated_energy.svg"), curves, {"Modulated energy H(t)", "t", "H", false, true, 640, 420});
      write_svg_plot(ctx.file("rate.svg"), {pts}, {"H(T) against eps", "eps", "H(T)", true, true, 640, 420});
    } catch (const Error& e) {
      ctx.out.record.config.emplace_back("plot_error", e.what());
    }
  }
}

void run_ot(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const double A = c.amplitude;
  std::mt19937_64 g(c.seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const double p1 = u(g), p2 = u(g);
  auto dens = [&](double ph, double s) {
    GridField f = GridField::sample(2, c.n, [&](const Point& x) {
      return 1.0 + A * std::sin(kTwoPi * x[0] + ph) * std::cos(kTwoPi * x[1]) + s * A * std::cos(kTwoPi * (x[0] + x[1]) + ph);
    });
    if (!(f.min() > 0)) throw invalid("amplitude", "densities must stay positive");
    f *= 1.0 / f.mean();
    return f;
  };
  GridField r1 = dens(p1, 0.5), r2 = dens(p2, -0.4);
  MAOptions ma;
  ma.tol = c.tol;
  OptimalMap m = optimal_map(r1, r2, ma);
  const double lo = std::min(r1.min(), r2.min()), hi = std::max(r1.max(), r2.max());
  RunRecord rec({"theta", "rho_max", "rho_min", "det_min", "det_floor"});
  bool convex = true, det_ok = true;
  for (int k = 0; k <= 8; ++k) {
    const double th = 1.0 + k / 8.0;
    GridField rt = interpolant_density(r1, m, th);
    const double dmin = interpolant_determinant(m, th).min();
    const double floor = lo / hi - 10.0 / c.n;
    rec.add_row({th, rt.max(), rt.min(), dmin, floor});
    if (rt.max() > hi * 1.02) convex = false;
    if (dmin < floor) det_ok = false;
    ctx.snapshot(rt, "rho_theta", k);
  }
  ctx.out.record = rec;
  ctx.out.record.config.emplace_back("w2_squared", format_double(m.w2_squared));
  ctx.out.record.config.emplace_back("map_residual", format_double(m.residual));
  ctx.assertion(convex, "displacement convexity");
  ctx.assertion(det_ok, "interpolant determinant bound");
  ctx.plot("interpolation.svg", rec, {"rho_max", "rho_min", "det_min"}, "Displacement interpolation");
}

void run_uniqueness(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int n = c.n;
  VectorField D0(2, n, 2), delta(2, n, 2);
  const double A = c.amplitude * 0.0133;  // keeps I + D^2 of the base potential well inside convexity
  for (std::size_t q = 0; q < D0.comp[0].size(); ++q) {
    const Point x = D0.comp[0].node(q);
    D0.set(q, Point(A * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]), A * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1])));
    delta.set(q, Point(1.0, 0.5) * (c.delta * std::exp(-norm2(x - Point(0.5, 0.5)) / 0.02)));
  }
  UniquenessOptions o;
  o.T = c.T;
  o.dt = c.dt;
  o.ma.tol = c.tol;
  steps_for(c);
  UniquenessReport r = twin_run_uniqueness(D0, delta, o);
  ctx.out.record = r.record;
  ctx.out.record.config.emplace_back("c_hat", format_double(r.c_hat));
  ctx.assertion(r.envelope_held, "Gronwall envelope");
  ctx.plot("distance.svg", r.record, {"distance", "envelope"}, "Twin-run distance", true);
}

void run_weak_measure(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  steps_for(c);
  ParticleTrajectory tr = run_particles(random_cloud(c), Domain::centered_box(2), c.T, c.dt);
  ctx.out.record = particle_record(tr);
  struct Named {
    std::string name;
    TestFunction f;
  };
  std::vector<Named> fns = {
      {"one", {[](double, const Point&) { return 1.0; }, [](double, const Point&) { return 0.0; },
               [](double, const Point&) { return Point(0.0, 0.0); }}},
      {"x1", {[](double, const Point& x) { return x[0]; }, [](double, const Point&) { return 0.0; },
              [](double, const Point&) { return Point(1.0, 0.0); }}},
      {"x2", {[](double, const Point& x) { return x[1]; }, [](double, const Point&) { return 0.0; },
              [](double, const Point&) { return Point(0.0, 1.0); }}},
      {"wave", {[](double t, const Point& x) { return std::sin(3 * x[0] + t) * std::cos(2 * x[1]); },
                [](double t, const Point& x) { return std::cos(3 * x[0] + t) * std::cos(2 * x[1]); },
                [](double t, const Point& x) {
                  return Point(3 * std::cos(3 * x[0] + t) * std::cos(2 * x[1]), -2 * std::sin(3 * x[0] + t) * std::sin(2 * x[1]));
                }}}};
  std::ofstream f(ctx.file("weak_residuals.csv"));
  if (!f) throw Error(ErrorCode::IoError, "cannot write weak_residuals.csv");
  f << "# sglab-record v1\nfunction,residual\n";
  for (const auto& nf : fns) {
    const double r = weak_residual(tr, nf.f);
    f << nf.name << "," << format_double(r) << "\n";
    if (nf.name == "one") ctx.assertion(r == 0.0, "weak residual of phi = 1 is exactly 0");
  }
  ctx.plot("support.svg", ctx.out.record, {"max_radius", "bound"}, "Support radius");
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg) {
  validate_config(cfg);
  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{cfg, out, fs::path(cfg.out)};
  try {
    fs::create_directories(ctx.dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoError, std::string("cannot create output directory: ") + e.what());
  }
  ErrorCode failure = ErrorCode::InvalidArgument;
  bool failed = false;
  try {
    if (cfg.kind == "sg-grid") run_sg_grid(ctx);
    else if (cfg.kind == "sg-particles") run_sg_particles(ctx);
    else if (cfg.kind == "euler") run_euler(ctx);
    else if (cfg.kind == "converge") run_converge(ctx);
    else if (cfg.kind == "ot") run_ot(ctx);
    else if (cfg.kind == "uniqueness") run_uniqueness(ctx);
    else run_weak_measure(ctx);
  } catch (const Error& e) {
    failed = true;
    failure = e.code();
    out.record.abort(std::string(to_string(e.code())) + ": " + e.what());
  }
  std::vector<std::pair<std::string, std::string>> echo = {{"kind", cfg.kind}, {"seed", std::to_string(cfg.seed)}};
  for (auto& kv : out.record.config)
    if (kv.first != "kind") echo.push_back(kv);
  out.record.config = echo;
  out.record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream f(ctx.file("config.txt"));
    if (!f) throw Error(ErrorCode::IoError, "cannot write config.txt");
    f << config_to_text(cfg);
  }
  out.record.write_csv(ctx.file("record.csv"));
  out.record.write_meta(ctx.file("meta.txt"));
  if (failed) out.exit_code = exit_code_for(failure);
  else if (!out.record.ok()) out.exit_code = 3;
  else if (!out.assertions_ok) out.exit_code = kExitAssertion;
  return out;
}

}  // namespace sglab
