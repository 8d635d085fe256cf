#pragma once

#include "gridmode/equilibrium.hpp"
#include "gridmode/mapping.hpp"
#include "gridmode/modes.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gridmode {

enum class Ordering { None, SetpointBeforeSwitch, SetpointAfterSwitch };

const char* ordering_name(Ordering o);

/// Reference step applied at time t to the active controller; ignored with a
/// diagnostic flag if the active mode does not match the reference kind.
struct SetpointChange {
    double t = 0.0;
    ModeRefs refs;
};

struct Scenario {
    std::string name = "scenario";
    Mode initial_mode = Mode::Gfl;
    std::optional<Mode> target_mode; // empty: no mode switch scheduled
    double t_switch = 0.0;           // s, meaningful only with target_mode
    double duration = 0.5;           // s
    double dt = 1e-5;                // s
    int decimation = 10;             // record every decimation-th step
    MappingFlags flags;
    GflRefs gfl_refs;                // initial/naive references per mode
    GfmRefs gfm_refs;
    std::vector<SetpointChange> setpoints;
    Ordering ordering = Ordering::None;
    double metrics_window = 0.2;     // s, post-switch observation window

    void validate() const; // throws std::invalid_argument with a message
};

struct TraceSample {
    double t = 0.0;
    double v_ca = 0.0, v_cb = 0.0; // pu, stationary frame
    double i_ga = 0.0, i_gb = 0.0;
    double i_la = 0.0, i_lb = 0.0;
    double v_cd = 0.0, v_cq = 0.0; // pu, active controller frame
    double i_gd = 0.0, i_gq = 0.0;
    double i_ld = 0.0, i_lq = 0.0;
    double theta = 0.0;            // rad, active controller angle (wrapped)
    double omega = 0.0;            // rad/s
    double p = 0.0, q = 0.0;       // pu, at the capacitor with grid-side current
    double vi_d_cmd = 0.0, vi_q_cmd = 0.0; // pu, active frame
    int mode = 0;                  // 0 = GFL, 1 = GFM
};

/// Record of what the hand-off actually did, kept for reporting.
struct MappingRecord {
    double t = 0.0;
    MappingResult full;    // exact construction
    MappingResult applied; // after the ablation flags
};

struct Trace {
    std::vector<TraceSample> samples;
    bool diverged = false;
    double t_diverged = 0.0;
    std::optional<MappingRecord> mapping;
};

struct SignalMetrics {
    double max_deviation = 0.0;   // pu (rad/s for omega)
    double settling_time = 0.0;   // s after the switch; last exit of the band
    double overshoot_ratio = 0.0; // peak excess over the net change, 0 when none
};

struct TransientMetrics {
    std::map<std::string, SignalMetrics> signals; // per dq signal plus p, q, omega
    double max_dev_v_c = 0.0; // pu, vector deviation of (v_cd, v_cq)
    double max_dev_i_g = 0.0;
    double max_dev_i_l = 0.0;
};

/// Explicit start override; by default scenarios start at the solved
/// equilibrium of the initial mode.
struct SimStart {
    UnifiedState state; // per-unit synchronous frame, as produced by solve_equilibrium
};

struct SwitchOutcome {
    ControllerState ctrl;
    ModeRefs refs;
    MappingRecord record;
};

PlantState plant_to_pu(const PlantState& si, const PerUnitBase& base);
PlantState plant_from_pu(const PlantState& pu, const PerUnitBase& base);

/// Construct the target controller at the hand-off instant. Touches only
/// controller state: the physical states and the held command pass through.
SwitchOutcome switch_event(const PlantState& plant_pu, const ControllerState& source,
                           Mode target, const MappingFlags& flags, const ModeRefs& naive_refs,
                           const PllState& shadow_pll, const DqPair& cmd_prev,
                           const SystemParams& params, double t);

/// Fixed-step closed-loop run: RK4 on the plant with the controller command
/// held over each step, controllers advanced by forward Euler at the same dt.
/// Deterministic; two runs of the same scenario produce identical traces.
Trace run_scenario(const Scenario& sc, const SystemParams& params,
                   const std::optional<SimStart>& start = std::nullopt);

TransientMetrics transient_metrics(const Trace& tr, double t_switch, double window);

extern const char* const kTraceCsvHeader;

std::string trace_csv(const Trace& tr);

} // namespace gridmode
