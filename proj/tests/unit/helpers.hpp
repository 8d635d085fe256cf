#pragma once

#include "gridmode/modes.hpp"

#include <complex>
#include <numbers>
#include <random>

namespace gridmode::test {

/// Nameplate parameters used throughout the tests: 2 kW, 200 V line-to-line,
/// 50 Hz, LCL values from the bench inverter.
inline SystemParams make_params()
{
    SystemParams p;
    p.base = PerUnitBase::from(2000.0, 200.0 * std::numbers::sqrt2 / std::numbers::sqrt3,
                               2.0 * std::numbers::pi * 50.0);
    p.plant.l_f = 5e-3;
    p.plant.r_f = 0.05;
    p.plant.c_f = 30e-6;
    p.plant.l_g = 4e-3;
    p.plant.r_g = 0.4;
    p.plant.v_g_amp = p.base.v_base;
    p.plant.omega_g = p.base.omega_base;

    p.ctrl.pll = {0.7 * p.base.omega_base, 50.0 * p.base.omega_base};
    p.ctrl.cur = {1.0, 200.0};
    p.ctrl.volt = {0.5, 5000.0};
    p.ctrl.m_p = 0.01 * p.base.omega_base;
    p.ctrl.p_ref = 0.5;
    p.ctrl.lpf_cutoff = 2.0 * std::numbers::pi * 10.0;
    p.ctrl.omega_ref = p.base.omega_base;
    return p;
}

inline std::mt19937& rng()
{
    static std::mt19937 gen(0x5eed1234u);
    return gen;
}

inline double uniform(double lo, double hi)
{
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng());
}

/// Analytic phasor steady state of the grid-following loop, derived from the
/// requirement that every integrator input is zero: the inverter current in
/// the PLL frame equals the reference, the capacitor voltage is aligned with
/// the d axis, and the grid branch closes the circuit at unit grid voltage.
struct GflPhasorSolution {
    std::complex<double> v_c, i_g, i_l, v_cmd; // pu, PLL frame
    double delta = 0.0;                        // rad, PLL frame vs grid voltage
};

inline GflPhasorSolution gfl_phasor_equilibrium(const DqPair& i_ref, const SystemParams& sp)
{
    using C = std::complex<double>;
    const PlantParamsPu pu = sp.plant_pu();
    const double w = pu.omega_g;
    const C j{0.0, 1.0};
    const C z_g{pu.r_g, w * pu.l_g};
    const C z_f{pu.r_f, w * pu.l_f};
    const double b_c = w * pu.c_f;
    const C iref{i_ref.d, i_ref.q};

    // v_g = v*A - B with v real, |v_g| = g
    const C a = 1.0 + j * b_c * z_g;
    const C b = z_g * iref;
    const double g = pu.v_g;
    const double qa = std::norm(a);
    const double qb = (a * std::conj(b)).real();
    const double qc = std::norm(b) - g * g;
    const double v = (qb + std::sqrt(qb * qb - qa * qc)) / qa;

    GflPhasorSolution s;
    s.v_c = {v, 0.0};
    s.i_l = iref;
    s.i_g = iref - j * b_c * s.v_c;
    const C v_g = s.v_c - z_g * s.i_g;
    s.delta = -std::arg(v_g);
    s.v_cmd = s.v_c + z_f * s.i_l;
    return s;
}

/// Analytic phasor steady state of the grid-forming loop for a real-valued
/// voltage reference: capacitor voltage pinned to the reference in the droop
/// frame, active power pinned to the setpoint, grid branch closing the loop.
struct GfmPhasorSolution {
    std::complex<double> v_c, i_g, i_l, i_cmd, v_cmd; // pu, droop frame
    double delta = 0.0;
};

inline GfmPhasorSolution gfm_phasor_equilibrium(double v_ref_d, double p_ref,
                                                const SystemParams& sp)
{
    using C = std::complex<double>;
    const PlantParamsPu pu = sp.plant_pu();
    const double w = pu.omega_g;
    const C j{0.0, 1.0};
    const C z_g{pu.r_g, w * pu.l_g};
    const C z_f{pu.r_f, w * pu.l_f};
    const double b_c = w * pu.c_f;

    // |v_ref - z_g*(i_gd + j*i_gq)| = g with i_gd = p_ref/v_ref
    const double i_gd = p_ref / v_ref_d;
    const C base = C{v_ref_d, 0.0} - z_g * i_gd;
    const C step = -z_g * j; // coefficient of i_gq
    const double g = pu.v_g;
    const double qa = std::norm(step);
    const double qb = (step * std::conj(base)).real();
    const double qc = std::norm(base) - g * g;
    const double disc = std::sqrt(qb * qb - qa * qc);
    // the physical branch is the small-|i_gq| root
    const double r1 = (-qb + disc) / qa;
    const double r2 = (-qb - disc) / qa;
    const double i_gq = std::abs(r1) < std::abs(r2) ? r1 : r2;

    GfmPhasorSolution s;
    s.v_c = {v_ref_d, 0.0};
    s.i_g = {i_gd, i_gq};
    s.i_l = s.i_g + j * b_c * s.v_c;
    const C v_g = s.v_c - z_g * s.i_g;
    s.delta = -std::arg(v_g);
    s.i_cmd = s.i_l;
    s.v_cmd = s.v_c + z_f * s.i_l;
    return s;
}

} // namespace gridmode::test
