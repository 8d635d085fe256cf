#pragma once

#include "gridmode/control.hpp"
#include "gridmode/plant.hpp"

#include <variant>

namespace gridmode {

enum class Mode { Gfl, Gfm };

const char* mode_name(Mode m);

/// Everything a closed loop needs: physical plant, per-unit scaling, gains.
struct SystemParams {
    PlantParams plant;
    PerUnitBase base;
    ControlParams ctrl;

    PlantParamsPu plant_pu() const { return PlantParamsPu::from(plant, base); }
};

/// Grid-following controller state: PLL plus the common current loop.
struct GflState {
    PllState pll;
    PiState cur_d;
    PiState cur_q;
};

/// Grid-forming controller state: droop, voltage loop, common current loop.
struct GfmState {
    DroopState droop;
    PiState volt_d;
    PiState volt_q;
    PiState cur_d;
    PiState cur_q;
};

struct GflRefs {
    DqPair i_ref; // pu, inverter-side current setpoint in the PLL frame
};

struct GfmRefs {
    DqPair v_ref = {1.0, 0.0}; // pu, capacitor voltage setpoint in the droop frame
    double p_ref = 0.0;        // pu, droop power setpoint
};

using ModeRefs = std::variant<GflRefs, GfmRefs>;

/// Mode-independent controller state for either loop.
using ControllerState = std::variant<GflState, GfmState>;

/// Independent controller states x_c1 of the active mode.
struct GflIndependent {
    PllState pll;
};
struct GfmIndependent {
    DroopState droop;
    PiState volt_d;
    PiState volt_q;
};

/// Common current-loop integrators x_c2, shared shape across modes.
struct CurrentLoopState {
    PiState d;
    PiState q;
};

/// Three-way partition of the full state: independent controller states,
/// common current loop, physical LCL states. Lossless against assemble().
struct UnifiedState {
    Mode mode = Mode::Gfl;
    std::variant<GflIndependent, GfmIndependent> x_c1;
    CurrentLoopState x_c2;
    PlantState x_phy;
};

struct StepResult {
    AlphaBetaPair v_i_cmd; // pu, stationary frame
    DqPair v_i_cmd_dq;     // pu, controller frame (before inverse Park)
    double omega = 0.0;    // rad/s
    double theta = 0.0;    // controller angle used for this step's measurements
    double p = 0.0;        // pu, measured at the capacitor with grid-side current
    double q = 0.0;        // pu
};

/// One forward-Euler controller step. Measurements are taken in per-unit in
/// the controller's own frame at the pre-step angle; the synchronizer is
/// advanced afterwards.
StepResult gfl_step(GflState& st, const PlantState& meas_pu, const GflRefs& refs,
                    const ControlParams& cp, double dt);

StepResult gfm_step(GfmState& st, const PlantState& meas_pu, const GfmRefs& refs,
                    const ControlParams& cp, double dt);

UnifiedState partition(Mode mode, const ControllerState& ctrl, const PlantState& phy);

/// Inverse of partition; returns the controller variant and physical state.
std::pair<ControllerState, PlantState> assemble(const UnifiedState& u);

} // namespace gridmode
