#pragma once

#include "gridmode/modes.hpp"

namespace gridmode {

/// Ablation switches for the hand-off controllers. use_full_mapping implies
/// both sub-controllers regardless of the individual flags.
struct MappingFlags {
    bool use_sync = false;
    bool use_amplitude = false;
    bool use_full_mapping = false;

    bool sync_active() const { return use_sync || use_full_mapping; }
    bool amplitude_active() const { return use_amplitude || use_full_mapping; }
};

/// Everything the target mode needs at the hand-off instant: the phase
/// injection for its synchronizer, its references, and the integrator
/// initializations that keep the inverter command continuous.
struct MappingResult {
    Mode target = Mode::Gfm;
    double theta0 = 0.0;     // rad, added to the target synchronizer's raw angle
    ModeRefs refs;           // GfmRefs for a GFM target, GflRefs for a GFL target
    PiState cur_d;           // current loop, pu voltage units
    PiState cur_q;
    PiState volt_d;          // voltage loop, pu current units (GFM target only)
    PiState volt_q;
    double p_filt_init = 0.0; // droop power filter seed (GFM target only)
};

/// Phase compensation: the injection that makes the target synchronizer's
/// angle equal the source angle at the hand-off instant.
double sync_offset(double theta_source, double theta_target_raw);

/// Hand-off construction for GFL -> GFM. Exact at a source equilibrium; the
/// command-continuity part holds anywhere. plant_pu is the measured physical
/// state in per-unit, cmd_prev the last source-frame dq voltage command, and
/// target_raw_theta the droop integrator's raw (pre-injection) angle.
MappingResult map_gfl_to_gfm(const GflState& gfl, const PlantState& plant_pu,
                             const DqPair& cmd_prev, const SystemParams& params,
                             double target_raw_theta = 0.0);

/// Hand-off construction for GFM -> GFL. target_raw_pll is the raw state of
/// the (already measurement-locked) PLL that will take over.
MappingResult map_gfm_to_gfl(const GfmState& gfm, const PlantState& plant_pu,
                             const DqPair& cmd_prev, const SystemParams& params,
                             const PllState& target_raw_pll);

/// Replace components of a full mapping with naive defaults according to the
/// ablation flags (sync keeps theta0; amplitude keeps references, integrator
/// initializations and the power-filter seed).
MappingResult apply_flags(const MappingResult& full, const MappingFlags& flags,
                          const MappingResult& naive_defaults);

} // namespace gridmode
