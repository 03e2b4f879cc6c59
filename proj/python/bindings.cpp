#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "dualad/cli.hpp"
#include "dualad/encoder.hpp"
#include "dualad/error.hpp"
#include "dualad/geom.hpp"
#include "dualad/metrics.hpp"
#include "dualad/planners.hpp"
#include "dualad/reasoner.hpp"
#include "dualad/scenario.hpp"
#include "dualad/sim.hpp"

namespace py = pybind11;
using namespace dualad;

namespace {

py::dict card_to_dict(const ScoreCard& c) {
  py::dict d;
  d["scenario_id"] = c.scenario_id;
  d["score"] = c.score;
  d["collision"] = c.collision;
  d["progress_ratio"] = c.progress_ratio;
  d["speed_compliance"] = c.speed_compliance;
  d["comfort"] = c.comfort;
  d["min_ttc"] = c.min_ttc;
  d["reasoner_failures"] = c.reasoner_failures;
  d["failed"] = c.failed;
  return d;
}

py::dict simulate_file(const std::filesystem::path& scenario, const std::string& planner, const std::string& reasoner,
                       const std::string& mode) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.planner = planner_kind_from_string(planner);
  cfg.reasoner = reasoner_kind_from_string(reasoner);
  if (cfg.reasoner == ReasonerKind::remote || cfg.reasoner == ReasonerKind::replay) {
    throw ConfigError("reasoner", "only none and mock are available from Python");
  }
  cfg.mode = sim_mode_from_string(mode);
  cfg.sim.mode = cfg.mode;
  cfg.validate();
  const Scenario sc = load_scenario(scenario);
  RunOutcome out;
  {
    py::gil_scoped_release release;
    out = simulate(sc, cfg, cfg.mode, {});
  }
  py::dict d = card_to_dict(out.card);
  d["trace_hash"] = out.trace.hash();
  d["trace"] = out.trace.serialize();
  const auto t = out.trace.first_collision_time();
  d["first_collision_time"] = t ? py::cast(*t) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rule-based planners with a reasoner speed cap.";

  static py::exception<Error> base(m, "DualadError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<FrenetPose>(m, "FrenetPose")
      .def(py::init<double, double, double>(), py::arg("s") = 0.0, py::arg("d") = 0.0, py::arg("theta") = 0.0)
      .def_readwrite("s", &FrenetPose::s)
      .def_readwrite("d", &FrenetPose::d)
      .def_readwrite("theta", &FrenetPose::theta)
      .def("__repr__", [](const FrenetPose& f) {
        std::ostringstream ss;
        ss << "FrenetPose(s=" << f.s << ", d=" << f.d << ", theta=" << f.theta << ")";
        return ss.str();
      });

  py::class_<CartesianPose>(m, "CartesianPose")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("theta") = 0.0)
      .def_readwrite("x", &CartesianPose::x)
      .def_readwrite("y", &CartesianPose::y)
      .def_readwrite("theta", &CartesianPose::theta)
      .def("__repr__", [](const CartesianPose& c) {
        std::ostringstream ss;
        ss << "CartesianPose(x=" << c.x << ", y=" << c.y << ", theta=" << c.theta << ")";
        return ss.str();
      });

  py::class_<ReferencePath>(m, "ReferencePath")
      .def(py::init([](const std::vector<std::pair<double, double>>& pts) {
             std::vector<Point2> p;
             p.reserve(pts.size());
             for (const auto& [x, y] : pts) p.push_back({x, y});
             return ReferencePath(std::move(p));
           }),
           py::arg("points"))
      .def_property_readonly("length", &ReferencePath::length)
      .def("curvature_at", &ReferencePath::curvature_at, py::arg("s"));

  m.def("to_frenet", &to_frenet, py::arg("path"), py::arg("pose"), py::arg("ego_s") = 0.0);
  m.def("to_cartesian", &to_cartesian, py::arg("path"), py::arg("pose"), py::arg("ego_s") = 0.0);
  m.def("wrap_angle", &wrap_angle, py::arg("theta"));

  m.def("describe_longitudinal", [](double s) { return describe_longitudinal(s); }, py::arg("s"));
  m.def("describe_lateral", [](double d) { return describe_lateral(d); }, py::arg("d"));
  m.def("normalize_orientation", &normalize_orientation, py::arg("theta"));
  m.def(
      "describe_orientation", [](double o, double d, double speed) { return describe_orientation(o, d, speed); },
      py::arg("o_norm"), py::arg("d"), py::arg("speed"));
  m.def(
      "render_agent",
      [](const std::string& id, const FrenetPose& fp, double width, double length, double speed) {
        return render_agent(id, fp, width, length, speed);
      },
      py::arg("agent_id"), py::arg("pose"), py::arg("width"), py::arg("length"), py::arg("speed"));

  m.def(
      "idm_accel",
      [](double v, double gap, double a, double v0, double s_star, double delta) {
        IdmParams p;
        p.a = a;
        p.v0 = v0;
        p.s_star = s_star;
        p.delta = delta;
        p.validate();
        return idm_accel(v, gap, p);
      },
      py::arg("v"), py::arg("gap") = std::numeric_limits<double>::infinity(), py::arg("a") = 1.5,
      py::arg("v0") = 15.0, py::arg("s_star") = 10.0, py::arg("delta") = 4.0);

  m.def(
      "arbitrate",
      [](double v_rule, double suggestion) {
        ReasonerDecision d;
        d.suggested_speed = suggestion;
        return arbitrate(v_rule, d);
      },
      py::arg("v_rule"), py::arg("suggestion"));
  m.def(
      "parse_reply",
      [](const std::string& content) -> py::object {
        const auto d = parse_reply(content);
        if (!d) return py::none();
        py::dict out;
        out["speed"] = d->suggested_speed;
        out["rationale"] = d->rationale;
        out["clamped"] = d->clamped;
        return out;
      },
      py::arg("content"));

  m.def(
      "select_worst_k",
      [](std::vector<std::pair<std::string, double>> results, std::size_t k) {
        return select_worst_k(std::move(results), k).scenario_ids;
      },
      py::arg("results"), py::arg("k"));

  m.def("simulate", &simulate_file, py::arg("scenario"), py::arg("planner") = "idm", py::arg("reasoner") = "none",
        py::arg("mode") = "non_reactive",
        "Runs one scenario file closed loop and returns its score card, trace and trace hash.");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"dualad"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
