#pragma once

#include "gridmode/frames.hpp"

namespace gridmode {

/// LCL filter plus line impedance, SI units.
struct PlantParams {
    double l_f = 0.0;      // H, inverter-side inductor
    double r_f = 0.0;      // ohm, series resistance of l_f
    double c_f = 0.0;      // F, filter capacitor
    double l_g = 0.0;      // H, line inductor
    double r_g = 0.0;      // ohm, series resistance of l_g
    double v_g_amp = 0.0;  // V, grid phase-peak amplitude
    double omega_g = 0.0;  // rad/s, grid angular frequency

    void validate() const; // throws std::invalid_argument
};

/// Physical states shared by both control modes, stationary frame.
struct PlantState {
    AlphaBetaPair v_c; // capacitor voltage
    AlphaBetaPair i_g; // grid-side current
    AlphaBetaPair i_l; // inverter-side current
};

/// One-step scaling of the SI plant into per-unit. Inductances and the
/// capacitor become time constants (s); resistances become dimensionless.
struct PlantParamsPu {
    double l_f = 0.0; // s
    double r_f = 0.0; // pu
    double c_f = 0.0; // s
    double l_g = 0.0; // s
    double r_g = 0.0; // pu
    double v_g = 0.0; // pu
    double omega_g = 0.0; // rad/s

    static PlantParamsPu from(const PlantParams& p, const PerUnitBase& base);
};

PlantState plant_derivative(const PlantState& s, const AlphaBetaPair& v_i,
                            const AlphaBetaPair& v_g, const PlantParams& p);

/// Stiff-bus source: amplitude v_g_amp rotating at omega_g, zero phase at t = 0.
AlphaBetaPair grid_voltage(double t, const PlantParams& p);

/// Stored energy of the passive network, used by dissipation checks.
double plant_stored_energy(const PlantState& s, const PlantParams& p);

} // namespace gridmode
