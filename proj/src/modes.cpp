#include "gridmode/modes.hpp"

#include <tuple>

namespace gridmode {

const char* mode_name(Mode m)
{
    return m == Mode::Gfl ? "gfl" : "gfm";
}

StepResult gfl_step(GflState& st, const PlantState& meas_pu, const GflRefs& refs,
                    const ControlParams& cp, double dt)
{
    const double theta = st.pll.theta;
    const DqPair v_c = park(meas_pu.v_c, theta);
    const DqPair i_g = park(meas_pu.i_g, theta);
    const DqPair i_l = park(meas_pu.i_l, theta);

    const auto sync = pll_step(st.pll, v_c.q, cp.pll, cp.omega_ref, dt);

    const PiOutput ud = pi_step(st.cur_d, refs.i_ref.d - i_l.d, cp.cur, dt);
    const PiOutput uq = pi_step(st.cur_q, refs.i_ref.q - i_l.q, cp.cur, dt);
    st.cur_d = ud.state;
    st.cur_q = uq.state;

    StepResult r;
    r.v_i_cmd_dq = {ud.y, uq.y};
    r.v_i_cmd = inverse_park(r.v_i_cmd_dq, theta);
    r.omega = sync.omega;
    r.theta = theta;
    std::tie(r.p, r.q) = instantaneous_power(v_c, i_g);
    return r;
}

StepResult gfm_step(GfmState& st, const PlantState& meas_pu, const GfmRefs& refs,
                    const ControlParams& cp, double dt)
{
    const double theta = st.droop.theta;
    const DqPair v_c = park(meas_pu.v_c, theta);
    const DqPair i_g = park(meas_pu.i_g, theta);
    const DqPair i_l = park(meas_pu.i_l, theta);

    const auto [p, q] = instantaneous_power(v_c, i_g);

    ControlParams cp_droop = cp;
    cp_droop.p_ref = refs.p_ref;
    const auto sync = droop_step(st.droop, p, cp_droop, dt);

    const PiOutput id = pi_step(st.volt_d, refs.v_ref.d - v_c.d, cp.volt, dt);
    const PiOutput iq = pi_step(st.volt_q, refs.v_ref.q - v_c.q, cp.volt, dt);
    st.volt_d = id.state;
    st.volt_q = iq.state;

    const PiOutput ud = pi_step(st.cur_d, id.y - i_l.d, cp.cur, dt);
    const PiOutput uq = pi_step(st.cur_q, iq.y - i_l.q, cp.cur, dt);
    st.cur_d = ud.state;
    st.cur_q = uq.state;

    StepResult r;
    r.v_i_cmd_dq = {ud.y, uq.y};
    r.v_i_cmd = inverse_park(r.v_i_cmd_dq, theta);
    r.omega = sync.omega;
    r.theta = theta;
    r.p = p;
    r.q = q;
    return r;
}

UnifiedState partition(Mode mode, const ControllerState& ctrl, const PlantState& phy)
{
    UnifiedState u;
    u.mode = mode;
    u.x_phy = phy;
    if (mode == Mode::Gfl) {
        const auto& g = std::get<GflState>(ctrl);
        u.x_c1 = GflIndependent{g.pll};
        u.x_c2 = {g.cur_d, g.cur_q};
    } else {
        const auto& g = std::get<GfmState>(ctrl);
        u.x_c1 = GfmIndependent{g.droop, g.volt_d, g.volt_q};
        u.x_c2 = {g.cur_d, g.cur_q};
    }
    return u;
}

std::pair<ControllerState, PlantState> assemble(const UnifiedState& u)
{
    if (u.mode == Mode::Gfl) {
        const auto& c1 = std::get<GflIndependent>(u.x_c1);
        GflState g;
        g.pll = c1.pll;
        g.cur_d = u.x_c2.d;
        g.cur_q = u.x_c2.q;
        return {g, u.x_phy};
    }
    const auto& c1 = std::get<GfmIndependent>(u.x_c1);
    GfmState g;
    g.droop = c1.droop;
    g.volt_d = c1.volt_d;
    g.volt_q = c1.volt_q;
    g.cur_d = u.x_c2.d;
    g.cur_q = u.x_c2.q;
    return {g, u.x_phy};
}

} // namespace gridmode
