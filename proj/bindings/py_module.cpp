#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dispatchsim/commands.hpp"
#include "dispatchsim/config_file.hpp"
#include "dispatchsim/oracle.hpp"
#include "dispatchsim/trace_io.hpp"

namespace py = pybind11;
using namespace dispatchsim;

PYBIND11_MODULE(dispatchsim, m) {
  m.doc() =
      "Distributed economic dispatch for an energy-router-coupled microgrid: "
      "consensus protocols, centralized optimum, scenario simulation.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<NoRootError>(m, "NoRootError", PyExc_RuntimeError);
  py::register_exception<AmbiguousRootError>(m, "AmbiguousRootError",
                                             PyExc_RuntimeError);

  py::class_<GeneratorParams>(m, "GeneratorParams")
      .def(py::init<>())
      .def_readwrite("alpha", &GeneratorParams::alpha)
      .def_readwrite("beta", &GeneratorParams::beta)
      .def_readwrite("gamma", &GeneratorParams::gamma)
      .def_readwrite("p_min", &GeneratorParams::p_min)
      .def_readwrite("p_max", &GeneratorParams::p_max)
      .def_readwrite("loss_factor", &GeneratorParams::loss_factor)
      .def_readwrite("demand", &GeneratorParams::demand)
      .def("validate", &GeneratorParams::validate, py::arg("bus_index") = -1);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("generators", &SystemParams::generators)
      .def_readwrite("price_lambda0", &SystemParams::price_lambda0)
      .def("size", &SystemParams::size)
      .def("validate", &SystemParams::validate)
      .def("isolated_feasibility_warning",
           &SystemParams::isolated_feasibility_warning);

  m.def("cost", &cost, py::arg("gen"), py::arg("p"),
        "Generation cost of one bus at power p.");
  m.def("line_loss", &line_loss, py::arg("gen"), py::arg("p"),
        "Connection-line loss of one bus at power p.");
  m.def("project_power", &project_power, py::arg("gen"), py::arg("lambda_"),
        "Limit-clamped optimal power response to a price.");
  m.def("bus_mismatch", &bus_mismatch, py::arg("gen"), py::arg("p"),
        "demand + loss - generation at one bus.");

  py::class_<GridGraph>(m, "GridGraph")
      .def(py::init<>())
      .def_readwrite("icu_adjacency", &GridGraph::icu_adjacency)
      .def_readwrite("er_to_icu", &GridGraph::er_to_icu)
      .def_readwrite("icu_to_er", &GridGraph::icu_to_er)
      .def("n_icus", &GridGraph::n_icus)
      .def("validate", &GridGraph::validate)
      .def("is_undirected", &GridGraph::is_undirected, py::arg("tol") = 0.0);

  py::class_<StepSizeBounds>(m, "StepSizeBounds")
      .def_readonly("eps_max", &StepSizeBounds::eps_max)
      .def_readonly("mu_max", &StepSizeBounds::mu_max);
  m.def("step_size_bounds", &step_size_bounds, py::arg("graph"));

  py::enum_<AbsorptionKind>(m, "AbsorptionKind")
      .value("Reporters", AbsorptionKind::Reporters)
      .value("Bidirectional", AbsorptionKind::Bidirectional);
  py::class_<SpectralCheck>(m, "SpectralCheck")
      .def_readonly("radius", &SpectralCheck::radius)
      .def_readonly("stable", &SpectralCheck::stable);
  m.def("absorption_spectral_check", &absorption_spectral_check, py::arg("graph"),
        py::arg("mu"), py::arg("kind"),
        "Spectral radius of the absorbed mismatch-consensus iteration.");
  m.def("check_spanning_tree_from_er", &check_spanning_tree_from_er);
  m.def("check_paths_to_er", &check_paths_to_er);
  m.def("check_bidirectional_er_neighbor", &check_bidirectional_er_neighbor);

  py::class_<DispatchSolution>(m, "DispatchSolution")
      .def_readonly("lambda_star", &DispatchSolution::lambda_star)
      .def_readonly("p_star", &DispatchSolution::p_star)
      .def_readonly("p_mg_star", &DispatchSolution::p_mg_star)
      .def_readonly("active_upper", &DispatchSolution::active_upper)
      .def_readonly("active_lower", &DispatchSolution::active_lower)
      .def_readonly("total_loss", &DispatchSolution::total_loss)
      .def_readonly("total_cost", &DispatchSolution::total_cost);
  m.def("solve_grid_connected", &solve_grid_connected, py::arg("system"),
        "Centralized optimum at the broadcast price; the ER covers the rest.");
  m.def("solve_isolated", &solve_isolated, py::arg("system"),
        "Centralized islanded optimum via bisection on the balance residual.");

  py::class_<KktCheck>(m, "KktCheck")
      .def_readonly("name", &KktCheck::name)
      .def_readonly("pass_", &KktCheck::pass)
      .def_readonly("worst", &KktCheck::worst)
      .def_readonly("detail", &KktCheck::detail);
  py::class_<KktReport>(m, "KktReport")
      .def_readonly("pass_", &KktReport::pass)
      .def_readonly("checks", &KktReport::checks);
  m.def("verify_kkt", &verify_kkt, py::arg("system"), py::arg("solution"),
        py::arg("isolated"), "First-order optimality audit of a solution.");

  py::enum_<Protocol>(m, "Protocol")
      .value("GridConnected", Protocol::GridConnected)
      .value("Integrated", Protocol::Integrated);
  py::enum_<EventKind>(m, "EventKind")
      .value("SetMode", EventKind::SetMode)
      .value("OutageDg", EventKind::OutageDg)
      .value("ReconnectDg", EventKind::ReconnectDg)
      .value("SetPrice", EventKind::SetPrice)
      .value("SetDemand", EventKind::SetDemand);

  py::class_<Event>(m, "Event")
      .def(py::init<>())
      .def_readwrite("round", &Event::round)
      .def_readwrite("kind", &Event::kind)
      .def_readwrite("bus", &Event::bus)
      .def_readwrite("value", &Event::value);

  py::class_<SigmaSchedule>(m, "SigmaSchedule")
      .def(py::init<>())
      .def_readwrite("scale", &SigmaSchedule::scale)
      .def_readwrite("exponent", &SigmaSchedule::exponent)
      .def("__call__", &SigmaSchedule::operator())
      .def("validate", &SigmaSchedule::validate);

  py::class_<ProtocolConfig>(m, "ProtocolConfig")
      .def(py::init<>())
      .def_readwrite("eps", &ProtocolConfig::eps)
      .def_readwrite("mu", &ProtocolConfig::mu)
      .def_readwrite("sigma", &ProtocolConfig::sigma);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("system", &ScenarioConfig::system)
      .def_readwrite("graph", &ScenarioConfig::graph)
      .def_readwrite("protocol", &ScenarioConfig::protocol)
      .def_readwrite("protocol_cfg", &ScenarioConfig::protocol_cfg)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_readwrite("events", &ScenarioConfig::events)
      .def_readwrite("initial_lambda", &ScenarioConfig::initial_lambda)
      .def_readwrite("initial_mode", &ScenarioConfig::initial_mode);

  py::class_<AgentState>(m, "AgentState")
      .def_readonly("lambda_i", &AgentState::lambda_i)
      .def_readonly("p_i", &AgentState::p_i)
      .def_readonly("mismatch_est", &AgentState::mismatch_est)
      .def_readonly("y_i", &AgentState::y_i)
      .def_readonly("p_mi", &AgentState::p_mi);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("round", &TraceRecord::round)
      .def_readonly("agents", &TraceRecord::agents)
      .def_readonly("p_mg", &TraceRecord::p_mg)
      .def_readonly("mode", &TraceRecord::mode)
      .def_readonly("price", &TraceRecord::price)
      .def_readonly("total_supply", &TraceRecord::total_supply)
      .def_readonly("total_demand", &TraceRecord::total_demand)
      .def_readonly("total_loss", &TraceRecord::total_loss)
      .def_readonly("est_total_mismatch", &TraceRecord::est_total_mismatch)
      .def_readonly("real_total_mismatch", &TraceRecord::real_total_mismatch)
      .def_readonly("events", &TraceRecord::events);

  py::class_<SimulationTrace>(m, "SimulationTrace")
      .def_readonly("n_icus", &SimulationTrace::n_icus)
      .def_readonly("protocol", &SimulationTrace::protocol)
      .def_readonly("records", &SimulationTrace::records);

  py::class_<ValidationItem>(m, "ValidationItem")
      .def_readonly("name", &ValidationItem::name)
      .def_readonly("pass_", &ValidationItem::pass)
      .def_readonly("hard", &ValidationItem::hard)
      .def_readonly("detail", &ValidationItem::detail);
  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("ok", &ValidationReport::ok)
      .def_readonly("items", &ValidationReport::items);

  m.def("parse_scenario_text", &parse_scenario_text, py::arg("text"),
        py::arg("source_name") = "<string>");
  m.def("parse_scenario_file", &parse_scenario_file, py::arg("path"));
  m.def("validate", &validate, py::arg("config"));
  m.def("run", &run, py::arg("config"),
        "Simulate the configured protocol for horizon rounds.");
  m.def("effective_system", &effective_system, py::arg("config"),
        py::arg("at_round"),
        "Plant parameters after replaying every event up to at_round.");

  py::class_<ConvergenceTolerances>(m, "ConvergenceTolerances")
      .def(py::init<>())
      .def_readwrite("lambda_step", &ConvergenceTolerances::lambda_step)
      .def_readwrite("mismatch_abs", &ConvergenceTolerances::mismatch_abs)
      .def_readwrite("er_step", &ConvergenceTolerances::er_step)
      .def_readwrite("window", &ConvergenceTolerances::window);
  m.def("detect_convergence", &detect_convergence, py::arg("trace"),
        py::arg("at_round"), py::arg("tol") = ConvergenceTolerances{});
  m.def("first_converged_round", &first_converged_round, py::arg("trace"),
        py::arg("tol") = ConvergenceTolerances{});

  m.def("trace_to_csv", &trace_to_csv, py::arg("trace"));
  m.def("trace_to_json", &trace_to_json, py::arg("trace"));
  m.def("trace_to_long_csv", &trace_to_long_csv, py::arg("trace"));
  m.def(
      "build_summary_json",
      [](const ScenarioConfig& cfg, const SimulationTrace& trace,
         bool oracle_check) {
        return build_summary(cfg, trace, oracle_check).dump();
      },
      py::arg("config"), py::arg("trace"), py::arg("oracle_check") = true,
      "Run summary as a JSON string (parse with json.loads).");

  py::class_<SweepEntry>(m, "SweepEntry")
      .def_readonly("value", &SweepEntry::value)
      .def_readonly("lambda_round", &SweepEntry::lambda_round)
      .def_readonly("pmg_round", &SweepEntry::pmg_round)
      .def_readonly("converged", &SweepEntry::converged);
  m.def("run_sweep", &run_sweep, py::arg("base"), py::arg("param"),
        py::arg("values"),
        "Rerun the scenario per value and measure settle rounds.");
}
