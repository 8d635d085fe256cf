#pragma once

#include "gridmode/frames.hpp"

#include <utility>

namespace gridmode {

struct PiGains {
    double kp = 0.0;
    double ki = 0.0;
};

/// Integrator value with the re-initialization constant folded in, so the
/// controller output is simply kp*e + accum. accum is in output units.
struct PiState {
    double accum = 0.0;
};

struct PiOutput {
    double y = 0.0;
    PiState state;
};

/// SRF-PLL state. theta is kept wrapped in (-pi, pi]; integ holds the
/// ki*integral(v_q) accumulator in rad/s.
struct PllState {
    double theta = 0.0;
    double integ = 0.0;
};

struct SyncOutput {
    double theta = 0.0; // advanced and wrapped
    double omega = 0.0; // rad/s
};

/// P-omega droop state; p_filt is the low-pass-filtered power in pu.
struct DroopState {
    double theta = 0.0;
    double p_filt = 0.0;
};

struct ControlParams {
    PiGains pll;              // omega correction per pu v_q
    PiGains cur;              // pu voltage command per pu current error
    PiGains volt;             // pu current command per pu voltage error
    double m_p = 0.0;         // rad/s per pu power error
    double p_ref = 0.0;       // pu, droop power setpoint
    double lpf_cutoff = 0.0;  // rad/s
    double omega_ref = 0.0;   // rad/s

    void validate() const;
};

/// Forward-Euler positional PI. Output is computed before the integrator
/// update so that a state produced by pi_reinitialize reproduces the
/// previous output exactly on its first call.
PiOutput pi_step(const PiState& st, double error, const PiGains& g, double dt);

/// Integrator re-initialization for bumpless hand-off:
/// accum = y_prev - kp*error_now, so pi_step at error_now returns y_prev.
PiState pi_reinitialize(double y_prev, double kp, double error_now);

SyncOutput pll_step(PllState& st, double v_q_meas, const PiGains& g,
                    double omega_ref, double dt);

SyncOutput droop_step(DroopState& st, double p_meas, const ControlParams& cp, double dt);

/// Active/reactive power from dq pairs, amplitude-invariant per-unit form.
std::pair<double, double> instantaneous_power(const DqPair& v, const DqPair& i);

} // namespace gridmode
