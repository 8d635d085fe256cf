#include "gridmode/mapping.hpp"

#include <stdexcept>

namespace gridmode {

double sync_offset(double theta_source, double theta_target_raw)
{
    return park_angle_wrap(theta_source - theta_target_raw);
}

MappingResult map_gfl_to_gfm(const GflState& gfl, const PlantState& plant_pu,
                             const DqPair& cmd_prev, const SystemParams& params,
                             double target_raw_theta)
{
    const double theta_src = gfl.pll.theta;

    // Measurements in the aligned target frame; with the injection applied
    // the droop angle equals theta_src, so every loop error starts at zero.
    const DqPair v_c = park(plant_pu.v_c, theta_src);
    const DqPair i_g = park(plant_pu.i_g, theta_src);
    const DqPair i_l = park(plant_pu.i_l, theta_src);
    const auto [p, q] = instantaneous_power(v_c, i_g);
    (void)q;

    MappingResult m;
    m.target = Mode::Gfm;
    m.theta0 = sync_offset(theta_src, target_raw_theta);
    m.refs = GfmRefs{v_c, p};
    m.p_filt_init = p;
    m.volt_d = pi_reinitialize(i_l.d, params.ctrl.volt.kp, 0.0);
    m.volt_q = pi_reinitialize(i_l.q, params.ctrl.volt.kp, 0.0);
    m.cur_d = pi_reinitialize(cmd_prev.d, params.ctrl.cur.kp, 0.0);
    m.cur_q = pi_reinitialize(cmd_prev.q, params.ctrl.cur.kp, 0.0);
    return m;
}

MappingResult map_gfm_to_gfl(const GfmState& gfm, const PlantState& plant_pu,
                             const DqPair& cmd_prev, const SystemParams& params,
                             const PllState& target_raw_pll)
{
    const double theta_src = gfm.droop.theta;
    const DqPair i_l = park(plant_pu.i_l, theta_src);

    MappingResult m;
    m.target = Mode::Gfl;
    m.theta0 = sync_offset(theta_src, target_raw_pll.theta);
    m.refs = GflRefs{i_l};
    m.cur_d = pi_reinitialize(cmd_prev.d, params.ctrl.cur.kp, 0.0);
    m.cur_q = pi_reinitialize(cmd_prev.q, params.ctrl.cur.kp, 0.0);
    return m;
}

MappingResult apply_flags(const MappingResult& full, const MappingFlags& flags,
                          const MappingResult& naive_defaults)
{
    if (full.target != naive_defaults.target)
        throw std::invalid_argument("mapping and naive defaults target different modes");

    MappingResult out = full;
    if (!flags.sync_active())
        out.theta0 = naive_defaults.theta0;
    if (!flags.amplitude_active()) {
        out.refs = naive_defaults.refs;
        out.cur_d = naive_defaults.cur_d;
        out.cur_q = naive_defaults.cur_q;
        out.volt_d = naive_defaults.volt_d;
        out.volt_q = naive_defaults.volt_q;
        out.p_filt_init = naive_defaults.p_filt_init;
    }
    return out;
}

} // namespace gridmode
