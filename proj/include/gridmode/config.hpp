#pragma once

#include "gridmode/sim.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gridmode {

struct OutputConfig {
    std::string dir = "out";
    int decimation = 10;
};

struct Thresholds {
    double smooth_max_dev_pu = 1e-3; // reported pass bound for mapped hand-offs
};

struct Limits {
    double current_limit_pu = 1.5;
    double v_ref_min_pu = 0.5;
    double v_ref_max_pu = 1.5;
};

struct BasinConfig {
    double delta_span = 6.0;  // rad, probed as +/- span/2 around the equilibrium
    double aux_span = 1.0;    // pu (GFM p_filt) or rad/s (GFL integrator)
    int n_delta = 21;
    int n_aux = 21;
    double t_max = 2.0;       // s
};

struct SweepConfig {
    // The ablation comparison lives in the regime where each hand-off
    // controller individually helps: a modest raw phase error at the switch
    // instant and an operating point with both active and reactive export.
    double t_switch = 0.30004; // s
    double duration = 0.8;     // s
    double metrics_window = 0.2;
    GflRefs gfl_refs{{0.55, 0.5}};
    GfmRefs gfm_refs{{1.0, 0.0}, 0.5};
};

struct RunConfig {
    SystemParams params;
    std::vector<Scenario> scenarios;
    OutputConfig output;
    Thresholds thresholds;
    Limits limits;
    BasinConfig basin;
    SweepConfig sweep;
};

/// Fully defaulted configuration: nameplate plant values, conventional
/// gains, and a single mapped GFL->GFM hand-off scenario.
RunConfig default_config();

/// Parse and validate a JSON configuration document. Unknown keys, type
/// mismatches and invariant violations throw std::invalid_argument with a
/// path-qualified message. SI and per-unit spellings are both accepted where
/// a key offers them (for example l_f_h vs l_f_pu).
RunConfig parse_config(const std::string& text);
RunConfig config_from_json(const nlohmann::json& doc);

/// Canonical JSON emission; parsing it back yields an identical RunConfig.
nlohmann::json config_to_json(const RunConfig& cfg);
std::string emit_config(const RunConfig& cfg);

/// Apply a dotted-path override of the form "control.p_ref_pu=0.8" to a raw
/// JSON document before parsing.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// The eight ablation scenarios (full / sync-only / amplitude-only / none,
/// both hand-off directions) built from the sweep block.
std::vector<Scenario> sweep_scenarios(const RunConfig& cfg);

} // namespace gridmode
