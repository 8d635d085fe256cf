// Python bindings for the simulator core: transforms, controllers, the
// closed-loop engine, equilibrium analysis and the state mapping hand-off.

#include "gridmode/config.hpp"
#include "gridmode/equilibrium.hpp"
#include "gridmode/mapping.hpp"
#include "gridmode/sim.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace gridmode;

namespace {

std::vector<double> trace_column(const Trace& tr, const std::string& name)
{
    static const std::map<std::string, double TraceSample::*> fields = {
        {"t", &TraceSample::t},           {"v_ca", &TraceSample::v_ca},
        {"v_cb", &TraceSample::v_cb},     {"i_ga", &TraceSample::i_ga},
        {"i_gb", &TraceSample::i_gb},     {"i_la", &TraceSample::i_la},
        {"i_lb", &TraceSample::i_lb},     {"v_cd", &TraceSample::v_cd},
        {"v_cq", &TraceSample::v_cq},     {"i_gd", &TraceSample::i_gd},
        {"i_gq", &TraceSample::i_gq},     {"i_ld", &TraceSample::i_ld},
        {"i_lq", &TraceSample::i_lq},     {"theta", &TraceSample::theta},
        {"omega", &TraceSample::omega},   {"p", &TraceSample::p},
        {"q", &TraceSample::q},           {"vi_d_cmd", &TraceSample::vi_d_cmd},
        {"vi_q_cmd", &TraceSample::vi_q_cmd},
    };
    std::vector<double> out;
    out.reserve(tr.samples.size());
    if (name == "mode") {
        for (const auto& s : tr.samples)
            out.push_back(static_cast<double>(s.mode));
        return out;
    }
    const auto it = fields.find(name);
    if (it == fields.end())
        throw std::invalid_argument("unknown trace column: " + name);
    for (const auto& s : tr.samples)
        out.push_back(s.*(it->second));
    return out;
}

} // namespace

PYBIND11_MODULE(gridmode, m)
{
    m.doc() = "Grid-following / grid-forming inverter simulator with state-mapping hand-offs";

    // frames
    py::class_<AlphaBetaPair>(m, "AlphaBetaPair")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
        .def_readwrite("a", &AlphaBetaPair::a)
        .def_readwrite("b", &AlphaBetaPair::b)
        .def("magnitude", &AlphaBetaPair::magnitude);
    py::class_<DqPair>(m, "DqPair")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("d"), py::arg("q"))
        .def_readwrite("d", &DqPair::d)
        .def_readwrite("q", &DqPair::q)
        .def("magnitude", &DqPair::magnitude);
    py::class_<PerUnitBase>(m, "PerUnitBase")
        .def_static("from_ratings", &PerUnitBase::from, py::arg("s_base_w"), py::arg("v_base_v"),
                    py::arg("omega_base_rad_s"))
        .def_readonly("s_base", &PerUnitBase::s_base)
        .def_readonly("v_base", &PerUnitBase::v_base)
        .def_readonly("i_base", &PerUnitBase::i_base)
        .def_readonly("z_base", &PerUnitBase::z_base)
        .def_readonly("omega_base", &PerUnitBase::omega_base);
    py::enum_<Quantity>(m, "Quantity")
        .value("Voltage", Quantity::Voltage)
        .value("Current", Quantity::Current)
        .value("Impedance", Quantity::Impedance)
        .value("Power", Quantity::Power)
        .value("Frequency", Quantity::Frequency);
    m.def("park", &park, py::arg("x"), py::arg("theta"));
    m.def("inverse_park", &inverse_park, py::arg("x"), py::arg("theta"));
    m.def("alphabeta_to_abc", &alphabeta_to_abc, py::arg("x"));
    m.def("to_per_unit", &to_per_unit, py::arg("value_si"), py::arg("base"), py::arg("kind"));
    m.def("from_per_unit", &from_per_unit, py::arg("value_pu"), py::arg("base"), py::arg("kind"));
    m.def("park_angle_wrap", &park_angle_wrap, py::arg("theta"));

    // plant
    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<>())
        .def_readwrite("l_f", &PlantParams::l_f)
        .def_readwrite("r_f", &PlantParams::r_f)
        .def_readwrite("c_f", &PlantParams::c_f)
        .def_readwrite("l_g", &PlantParams::l_g)
        .def_readwrite("r_g", &PlantParams::r_g)
        .def_readwrite("v_g_amp", &PlantParams::v_g_amp)
        .def_readwrite("omega_g", &PlantParams::omega_g)
        .def("validate", &PlantParams::validate);
    py::class_<PlantState>(m, "PlantState")
        .def(py::init<>())
        .def_readwrite("v_c", &PlantState::v_c)
        .def_readwrite("i_g", &PlantState::i_g)
        .def_readwrite("i_l", &PlantState::i_l);
    m.def("plant_derivative", &plant_derivative, py::arg("state"), py::arg("v_i"), py::arg("v_g"),
          py::arg("params"));
    m.def("grid_voltage", &grid_voltage, py::arg("t"), py::arg("params"));
    m.def("plant_stored_energy", &plant_stored_energy, py::arg("state"), py::arg("params"));
    m.def("plant_to_pu", &plant_to_pu, py::arg("state_si"), py::arg("base"));
    m.def("plant_from_pu", &plant_from_pu, py::arg("state_pu"), py::arg("base"));

    // control
    py::class_<PiGains>(m, "PiGains")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("kp"), py::arg("ki"))
        .def_readwrite("kp", &PiGains::kp)
        .def_readwrite("ki", &PiGains::ki);
    py::class_<PiState>(m, "PiState")
        .def(py::init<>())
        .def(py::init<double>(), py::arg("accum"))
        .def_readwrite("accum", &PiState::accum);
    py::class_<PiOutput>(m, "PiOutput")
        .def_readonly("y", &PiOutput::y)
        .def_readonly("state", &PiOutput::state);
    py::class_<PllState>(m, "PllState")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("theta"), py::arg("integ"))
        .def_readwrite("theta", &PllState::theta)
        .def_readwrite("integ", &PllState::integ);
    py::class_<SyncOutput>(m, "SyncOutput")
        .def_readonly("theta", &SyncOutput::theta)
        .def_readonly("omega", &SyncOutput::omega);
    py::class_<DroopState>(m, "DroopState")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("theta"), py::arg("p_filt"))
        .def_readwrite("theta", &DroopState::theta)
        .def_readwrite("p_filt", &DroopState::p_filt);
    py::class_<ControlParams>(m, "ControlParams")
        .def(py::init<>())
        .def_readwrite("pll", &ControlParams::pll)
        .def_readwrite("cur", &ControlParams::cur)
        .def_readwrite("volt", &ControlParams::volt)
        .def_readwrite("m_p", &ControlParams::m_p)
        .def_readwrite("p_ref", &ControlParams::p_ref)
        .def_readwrite("lpf_cutoff", &ControlParams::lpf_cutoff)
        .def_readwrite("omega_ref", &ControlParams::omega_ref)
        .def("validate", &ControlParams::validate);
    m.def("pi_step", &pi_step, py::arg("state"), py::arg("error"), py::arg("gains"), py::arg("dt"));
    m.def("pi_reinitialize", &pi_reinitialize, py::arg("y_prev"), py::arg("kp"), py::arg("error_now"));
    m.def("pll_step", &pll_step, py::arg("state"), py::arg("v_q_meas"), py::arg("gains"),
          py::arg("omega_ref"), py::arg("dt"));
    m.def("droop_step", &droop_step, py::arg("state"), py::arg("p_meas"), py::arg("params"),
          py::arg("dt"));
    m.def("instantaneous_power", &instantaneous_power, py::arg("v"), py::arg("i"));

    // modes
    py::enum_<Mode>(m, "Mode").value("Gfl", Mode::Gfl).value("Gfm", Mode::Gfm);
    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("plant", &SystemParams::plant)
        .def_readwrite("base", &SystemParams::base)
        .def_readwrite("ctrl", &SystemParams::ctrl);
    py::class_<GflState>(m, "GflState")
        .def(py::init<>())
        .def_readwrite("pll", &GflState::pll)
        .def_readwrite("cur_d", &GflState::cur_d)
        .def_readwrite("cur_q", &GflState::cur_q);
    py::class_<GfmState>(m, "GfmState")
        .def(py::init<>())
        .def_readwrite("droop", &GfmState::droop)
        .def_readwrite("volt_d", &GfmState::volt_d)
        .def_readwrite("volt_q", &GfmState::volt_q)
        .def_readwrite("cur_d", &GfmState::cur_d)
        .def_readwrite("cur_q", &GfmState::cur_q);
    py::class_<GflRefs>(m, "GflRefs")
        .def(py::init<>())
        .def(py::init<DqPair>(), py::arg("i_ref"))
        .def_readwrite("i_ref", &GflRefs::i_ref);
    py::class_<GfmRefs>(m, "GfmRefs")
        .def(py::init<>())
        .def(py::init<DqPair, double>(), py::arg("v_ref"), py::arg("p_ref"))
        .def_readwrite("v_ref", &GfmRefs::v_ref)
        .def_readwrite("p_ref", &GfmRefs::p_ref);
    py::class_<StepResult>(m, "StepResult")
        .def_readonly("v_i_cmd", &StepResult::v_i_cmd)
        .def_readonly("v_i_cmd_dq", &StepResult::v_i_cmd_dq)
        .def_readonly("omega", &StepResult::omega)
        .def_readonly("theta", &StepResult::theta)
        .def_readonly("p", &StepResult::p)
        .def_readonly("q", &StepResult::q);
    py::class_<GflIndependent>(m, "GflIndependent").def_readwrite("pll", &GflIndependent::pll);
    py::class_<GfmIndependent>(m, "GfmIndependent")
        .def_readwrite("droop", &GfmIndependent::droop)
        .def_readwrite("volt_d", &GfmIndependent::volt_d)
        .def_readwrite("volt_q", &GfmIndependent::volt_q);
    py::class_<CurrentLoopState>(m, "CurrentLoopState")
        .def_readwrite("d", &CurrentLoopState::d)
        .def_readwrite("q", &CurrentLoopState::q);
    py::class_<UnifiedState>(m, "UnifiedState")
        .def(py::init<>())
        .def_readwrite("mode", &UnifiedState::mode)
        .def_readwrite("x_c1", &UnifiedState::x_c1)
        .def_readwrite("x_c2", &UnifiedState::x_c2)
        .def_readwrite("x_phy", &UnifiedState::x_phy);
    m.def("gfl_step", &gfl_step, py::arg("state"), py::arg("meas_pu"), py::arg("refs"),
          py::arg("params"), py::arg("dt"));
    m.def("gfm_step", &gfm_step, py::arg("state"), py::arg("meas_pu"), py::arg("refs"),
          py::arg("params"), py::arg("dt"));
    m.def("partition", &partition, py::arg("mode"), py::arg("ctrl"), py::arg("phy"));
    m.def("assemble", &assemble, py::arg("unified"));

    // equilibrium
    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("mode", &Equilibrium::mode)
        .def_readonly("unified", &Equilibrium::unified)
        .def_readonly("residual_norm", &Equilibrium::residual_norm)
        .def_readonly("converged", &Equilibrium::converged)
        .def_readonly("stable", &Equilibrium::stable)
        .def_readonly("iterations", &Equilibrium::iterations)
        .def_readonly("eigenvalues", &Equilibrium::eigenvalues);
    py::class_<SettleResult>(m, "SettleResult")
        .def_readonly("state", &SettleResult::state)
        .def_readonly("settled", &SettleResult::settled)
        .def_readonly("t_end", &SettleResult::t_end)
        .def_readonly("derivative_norm", &SettleResult::derivative_norm);
    py::enum_<BasinClass>(m, "BasinClass")
        .value("Converged", BasinClass::Converged)
        .value("Diverged", BasinClass::Diverged)
        .value("Undecided", BasinClass::Undecided);
    py::class_<BasinPoint>(m, "BasinPoint")
        .def_readonly("offset", &BasinPoint::offset)
        .def_readonly("cls", &BasinPoint::cls)
        .def_readonly("settle_time", &BasinPoint::settle_time);
    py::class_<BasinMap>(m, "BasinMap")
        .def_readonly("mode", &BasinMap::mode)
        .def_readonly("points", &BasinMap::points);
    m.def("state_dimension", &state_dimension, py::arg("mode"));
    m.def("state_labels", &state_labels, py::arg("mode"));
    m.def("pack_state", &pack_state, py::arg("unified"));
    m.def("unpack_state", &unpack_state, py::arg("mode"), py::arg("x"));
    m.def("closed_loop_residual", &closed_loop_residual, py::arg("unified"), py::arg("refs"),
          py::arg("params"));
    m.def("sync_frame_rk4_step", &sync_frame_rk4_step, py::arg("unified"), py::arg("refs"),
          py::arg("params"), py::arg("dt"));
    m.def("default_equilibrium_guess", &default_equilibrium_guess, py::arg("mode"), py::arg("refs"),
          py::arg("params"));
    m.def("solve_equilibrium", &solve_equilibrium, py::arg("mode"), py::arg("refs"),
          py::arg("params"), py::arg("guess") = std::nullopt);
    m.def("settle_by_simulation", &settle_by_simulation, py::arg("mode"), py::arg("refs"),
          py::arg("params"), py::arg("t_max"), py::arg("tol"), py::arg("start") = std::nullopt);
    m.def("linearize", &linearize, py::arg("equilibrium"), py::arg("refs"), py::arg("params"));
    m.def("probe_basin", &probe_basin, py::arg("equilibrium"), py::arg("refs"), py::arg("params"),
          py::arg("offsets"), py::arg("t_max"), py::arg("tol") = 1e-6);
    m.def("basin_csv", &basin_csv, py::arg("map"));

    // mapping
    py::class_<MappingFlags>(m, "MappingFlags")
        .def(py::init<>())
        .def(py::init<bool, bool, bool>(), py::arg("use_sync"), py::arg("use_amplitude"),
             py::arg("use_full_mapping"))
        .def_readwrite("use_sync", &MappingFlags::use_sync)
        .def_readwrite("use_amplitude", &MappingFlags::use_amplitude)
        .def_readwrite("use_full_mapping", &MappingFlags::use_full_mapping)
        .def("sync_active", &MappingFlags::sync_active)
        .def("amplitude_active", &MappingFlags::amplitude_active);
    py::class_<MappingResult>(m, "MappingResult")
        .def(py::init<>())
        .def_readwrite("target", &MappingResult::target)
        .def_readwrite("theta0", &MappingResult::theta0)
        .def_readwrite("refs", &MappingResult::refs)
        .def_readwrite("cur_d", &MappingResult::cur_d)
        .def_readwrite("cur_q", &MappingResult::cur_q)
        .def_readwrite("volt_d", &MappingResult::volt_d)
        .def_readwrite("volt_q", &MappingResult::volt_q)
        .def_readwrite("p_filt_init", &MappingResult::p_filt_init);
    m.def("sync_offset", &sync_offset, py::arg("theta_source"), py::arg("theta_target_raw"));
    m.def("map_gfl_to_gfm", &map_gfl_to_gfm, py::arg("gfl"), py::arg("plant_pu"),
          py::arg("cmd_prev"), py::arg("params"), py::arg("target_raw_theta") = 0.0);
    m.def("map_gfm_to_gfl", &map_gfm_to_gfl, py::arg("gfm"), py::arg("plant_pu"),
          py::arg("cmd_prev"), py::arg("params"), py::arg("target_raw_pll"));
    m.def("apply_flags", &apply_flags, py::arg("full"), py::arg("flags"), py::arg("naive_defaults"));

    // sim
    py::enum_<Ordering>(m, "Ordering")
        .value("NoOrdering", Ordering::None)
        .value("SetpointBeforeSwitch", Ordering::SetpointBeforeSwitch)
        .value("SetpointAfterSwitch", Ordering::SetpointAfterSwitch);
    py::class_<SetpointChange>(m, "SetpointChange")
        .def(py::init<>())
        .def_readwrite("t", &SetpointChange::t)
        .def_readwrite("refs", &SetpointChange::refs);
    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("initial_mode", &Scenario::initial_mode)
        .def_readwrite("target_mode", &Scenario::target_mode)
        .def_readwrite("t_switch", &Scenario::t_switch)
        .def_readwrite("duration", &Scenario::duration)
        .def_readwrite("dt", &Scenario::dt)
        .def_readwrite("decimation", &Scenario::decimation)
        .def_readwrite("flags", &Scenario::flags)
        .def_readwrite("gfl_refs", &Scenario::gfl_refs)
        .def_readwrite("gfm_refs", &Scenario::gfm_refs)
        .def_readwrite("setpoints", &Scenario::setpoints)
        .def_readwrite("ordering", &Scenario::ordering)
        .def_readwrite("metrics_window", &Scenario::metrics_window)
        .def("validate", &Scenario::validate);
    py::class_<TraceSample>(m, "TraceSample")
        .def_readonly("t", &TraceSample::t)
        .def_readonly("v_cd", &TraceSample::v_cd)
        .def_readonly("v_cq", &TraceSample::v_cq)
        .def_readonly("i_gd", &TraceSample::i_gd)
        .def_readonly("i_gq", &TraceSample::i_gq)
        .def_readonly("theta", &TraceSample::theta)
        .def_readonly("omega", &TraceSample::omega)
        .def_readonly("p", &TraceSample::p)
        .def_readonly("q", &TraceSample::q)
        .def_readonly("mode", &TraceSample::mode);
    py::class_<MappingRecord>(m, "MappingRecord")
        .def_readonly("t", &MappingRecord::t)
        .def_readonly("full", &MappingRecord::full)
        .def_readonly("applied", &MappingRecord::applied);
    py::class_<Trace>(m, "Trace")
        .def_readonly("samples", &Trace::samples)
        .def_readonly("diverged", &Trace::diverged)
        .def_readonly("t_diverged", &Trace::t_diverged)
        .def_readonly("mapping", &Trace::mapping)
        .def("column", &trace_column, py::arg("name"))
        .def("__len__", [](const Trace& tr) { return tr.samples.size(); });
    py::class_<SignalMetrics>(m, "SignalMetrics")
        .def_readonly("max_deviation", &SignalMetrics::max_deviation)
        .def_readonly("settling_time", &SignalMetrics::settling_time)
        .def_readonly("overshoot_ratio", &SignalMetrics::overshoot_ratio);
    py::class_<TransientMetrics>(m, "TransientMetrics")
        .def_readonly("signals", &TransientMetrics::signals)
        .def_readonly("max_dev_v_c", &TransientMetrics::max_dev_v_c)
        .def_readonly("max_dev_i_g", &TransientMetrics::max_dev_i_g)
        .def_readonly("max_dev_i_l", &TransientMetrics::max_dev_i_l);
    py::class_<SimStart>(m, "SimStart")
        .def(py::init<>())
        .def(py::init<UnifiedState>(), py::arg("state"))
        .def_readwrite("state", &SimStart::state);
    m.def("run_scenario", &run_scenario, py::arg("scenario"), py::arg("params"),
          py::arg("start") = std::nullopt);
    m.def("transient_metrics", &transient_metrics, py::arg("trace"), py::arg("t_switch"),
          py::arg("window"));
    m.def("trace_csv", &trace_csv, py::arg("trace"));

    // config
    py::class_<OutputConfig>(m, "OutputConfig")
        .def_readwrite("dir", &OutputConfig::dir)
        .def_readwrite("decimation", &OutputConfig::decimation);
    py::class_<Thresholds>(m, "Thresholds")
        .def_readwrite("smooth_max_dev_pu", &Thresholds::smooth_max_dev_pu);
    py::class_<Limits>(m, "Limits")
        .def_readwrite("current_limit_pu", &Limits::current_limit_pu)
        .def_readwrite("v_ref_min_pu", &Limits::v_ref_min_pu)
        .def_readwrite("v_ref_max_pu", &Limits::v_ref_max_pu);
    py::class_<BasinConfig>(m, "BasinConfig")
        .def_readwrite("delta_span", &BasinConfig::delta_span)
        .def_readwrite("aux_span", &BasinConfig::aux_span)
        .def_readwrite("n_delta", &BasinConfig::n_delta)
        .def_readwrite("n_aux", &BasinConfig::n_aux)
        .def_readwrite("t_max", &BasinConfig::t_max);
    py::class_<SweepConfig>(m, "SweepConfig")
        .def_readwrite("t_switch", &SweepConfig::t_switch)
        .def_readwrite("duration", &SweepConfig::duration)
        .def_readwrite("metrics_window", &SweepConfig::metrics_window)
        .def_readwrite("gfl_refs", &SweepConfig::gfl_refs)
        .def_readwrite("gfm_refs", &SweepConfig::gfm_refs);
    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("params", &RunConfig::params)
        .def_readwrite("scenarios", &RunConfig::scenarios)
        .def_readwrite("output", &RunConfig::output)
        .def_readwrite("thresholds", &RunConfig::thresholds)
        .def_readwrite("limits", &RunConfig::limits)
        .def_readwrite("basin", &RunConfig::basin)
        .def_readwrite("sweep", &RunConfig::sweep);
    m.def("default_config", &default_config);
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("emit_config", &emit_config, py::arg("config"));
    m.def("sweep_scenarios", &sweep_scenarios, py::arg("config"));
}
