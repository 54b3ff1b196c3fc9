#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sglab/euler2d.hpp"
#include "sglab/harness.hpp"
#include "sglab/monge_ampere.hpp"
#include "sglab/transport.hpp"
#include "sglab/verify.hpp"

namespace py = pybind11;
using namespace sglab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridField to_field(const Array& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw Error(ErrorCode::DimensionError, "expected a 2-D or 3-D array");
  const auto n = a.shape(0);
  for (py::ssize_t k = 1; k < a.ndim(); ++k)
    if (a.shape(k) != n) throw Error(ErrorCode::DimensionError, "grid arrays must be n x n (x n)");
  GridField f(static_cast<int>(a.ndim()), static_cast<int>(n));
  std::copy(a.data(), a.data() + a.size(), f.data());
  return f;
}

Array to_array(const GridField& f) {
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(f.dim()), f.n());
  Array a(shape);
  std::copy(f.data(), f.data() + f.size(), a.mutable_data());
  return a;
}

ParticleCloud to_cloud(const Array& a, bool periodic) {
  if (a.ndim() != 2 || (a.shape(1) != 2 && a.shape(1) != 3))
    throw Error(ErrorCode::DimensionError, "expected an (m, 2) or (m, 3) point array");
  std::vector<Point> pts;
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    pts.push_back(a.shape(1) == 2 ? Point(r(i, 0), r(i, 1)) : Point(r(i, 0), r(i, 1), r(i, 2)));
  return ParticleCloud::uniform(pts, periodic);
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["status"] = r.status;
  d["columns"] = r.columns;
  d["rows"] = r.rows;
  d["config"] = r.config;
  d["csv"] = r.to_csv();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semi-geostrophic dual-variable laboratory";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = e.what();
      switch (e.code()) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidValue:
        case ErrorCode::InvalidDensity:
        case ErrorCode::InvalidPoint:
        case ErrorCode::MeanNotZero:
        case ErrorCode::DimensionError:
        case ErrorCode::SyntaxError:
        case ErrorCode::UsageError:
          PyErr_SetString(PyExc_ValueError, msg.c_str());
          break;
        case ErrorCode::IoError:
          PyErr_SetString(PyExc_OSError, msg.c_str());
          break;
        default:
          PyErr_SetString(PyExc_RuntimeError, msg.c_str());
      }
    }
  });

  m.def(
      "solve_ma",
      [](const Array& rho, double tol) {
        MAOptions o;
        o.tol = tol;
        py::gil_scoped_release nogil;
        MASolution s = solve_ma_periodic(to_field(rho), o);
        py::gil_scoped_acquire gil;
        py::dict d;
        d["p"] = to_array(s.potential.p);
        d["residual"] = s.residual;
        d["newton_iterations"] = s.newton_iterations;
        return d;
      },
      py::arg("rho"), py::arg("tol") = 1e-10,
      "Periodic part p of the convex potential with det_h(I + D^2 p) = rho.");
  m.def(
      "ma_determinant", [](const Array& p) { return to_array(ma_determinant(to_field(p))); }, py::arg("p"));
  m.def(
      "poisson_solve", [](const Array& rho) { return to_array(poisson_solve_periodic(to_field(rho))); }, py::arg("rho"),
      "Zero-mean periodic solution of Laplace(psi) = rho.");
  m.def(
      "w2_torus",
      [](const Array& a, const Array& b) { return w2_torus(to_cloud(a, true), to_cloud(b, true)); }, py::arg("a"),
      py::arg("b"), "W2 distance between uniform clouds on the torus.");
  m.def(
      "assignment_cost",
      [](const Array& a, const Array& b) {
        TransportPlan p = exact_assignment(to_cloud(a, false), to_cloud(b, false));
        return py::make_tuple(p.cost, p.assignment);
      },
      py::arg("a"), py::arg("b"), "Optimal assignment (cost, target index per source).");
  m.def(
      "euler_run",
      [](const Array& omega, double dt, int steps) {
        EulerState s = init_euler(to_field(omega));
        std::vector<double> energy{kinetic_energy(s)};
        {
          py::gil_scoped_release nogil;
          for (int k = 0; k < steps; ++k) {
            s = euler_step(s, dt);
            energy.push_back(kinetic_energy(s));
          }
        }
        return py::make_tuple(to_array(s.omega), energy);
      },
      py::arg("omega"), py::arg("dt"), py::arg("steps"), "Final vorticity and the kinetic energy per step.");

  m.def(
      "parse_config", [](const std::string& text) { return config_to_text(parse_config(text)); }, py::arg("text"),
      "Validates a key=value config and returns it in canonical form with defaults filled.");
  m.def(
      "run",
      [](const std::string& text) {
        const RunConfig c = parse_config(text);
        RunOutcome o;
        {
          py::gil_scoped_release nogil;
          o = run_experiment(c);
        }
        py::dict d = record_dict(o.record);
        d["exit_code"] = o.exit_code;
        d["assertions_ok"] = o.assertions_ok;
        d["failed_assertions"] = o.failed_assertions;
        d["files"] = o.files;
        return d;
      },
      py::arg("config"), "Runs an experiment described by key=value text.");
  m.def(
      "verify",
      [](std::vector<int> only, bool full, double ma_tol) {
        VerifyOptions o;
        o.only = std::move(only);
        o.full = full;
        o.ma_tol = ma_tol;
        VerifyReport r;
        {
          py::gil_scoped_release nogil;
          r = verify_suite(o);
        }
        py::list out;
        for (const auto& c : r.results) {
          py::dict d;
          d["id"] = c.id;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["detail"] = c.detail;
          d["seconds"] = c.seconds;
          out.append(d);
        }
        return out;
      },
      py::arg("only") = std::vector<int>{}, py::arg("full") = false, py::arg("ma_tol") = 1e-10);
  m.attr("criterion_count") = criterion_count();
}
