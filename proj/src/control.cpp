#include "gridmode/control.hpp"

#include <stdexcept>

namespace gridmode {

void ControlParams::validate() const
{
    auto check_gains = [](const PiGains& g, const char* name) {
        if (g.kp < 0.0 || g.ki < 0.0 || (g.kp == 0.0 && g.ki == 0.0))
            throw std::invalid_argument(std::string(name) + ": kp/ki must be non-negative and not both zero");
    };
    check_gains(pll, "pll gains");
    check_gains(cur, "current loop gains");
    check_gains(volt, "voltage loop gains");
    if (!(m_p > 0.0))
        throw std::invalid_argument("droop slope m_p must be strictly positive");
    if (!(lpf_cutoff > 0.0))
        throw std::invalid_argument("power filter cutoff must be strictly positive");
    if (!(omega_ref > 0.0))
        throw std::invalid_argument("omega_ref must be strictly positive");
}

PiOutput pi_step(const PiState& st, double error, const PiGains& g, double dt)
{
    PiOutput out;
    out.y = g.kp * error + st.accum;
    out.state.accum = st.accum + g.ki * error * dt;
    return out;
}

PiState pi_reinitialize(double y_prev, double kp, double error_now)
{
    return PiState{y_prev - kp * error_now};
}

SyncOutput pll_step(PllState& st, double v_q_meas, const PiGains& g,
                    double omega_ref, double dt)
{
    st.integ += g.ki * v_q_meas * dt;
    const double omega = omega_ref + g.kp * v_q_meas + st.integ;
    st.theta = park_angle_wrap(st.theta + omega * dt);
    return {st.theta, omega};
}

SyncOutput droop_step(DroopState& st, double p_meas, const ControlParams& cp, double dt)
{
    st.p_filt += cp.lpf_cutoff * (p_meas - st.p_filt) * dt;
    const double omega = cp.omega_ref + cp.m_p * (cp.p_ref - st.p_filt);
    st.theta = park_angle_wrap(st.theta + omega * dt);
    return {st.theta, omega};
}

std::pair<double, double> instantaneous_power(const DqPair& v, const DqPair& i)
{
    return {v.d * i.d + v.q * i.q, v.q * i.d - v.d * i.q};
}

} // namespace gridmode
