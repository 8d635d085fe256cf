#pragma once

#include <array>
#include <cmath>

namespace gridmode {

/// Stationary-frame pair (alpha, beta). Units follow the context (V, A or pu).
struct AlphaBetaPair {
    double a = 0.0;
    double b = 0.0;

    double magnitude() const { return std::hypot(a, b); }
};

/// Rotating-frame pair (direct, quadrature).
struct DqPair {
    double d = 0.0;
    double q = 0.0;

    double magnitude() const { return std::hypot(d, q); }
};

/// Per-unit base set, amplitude-invariant convention: v_base is the rated
/// phase-peak voltage, so 1 pu on a dq axis equals rated phase amplitude.
/// i_base = (2/3)*s_base/v_base and z_base = v_base/i_base follow from it.
struct PerUnitBase {
    double s_base = 0.0;     // W, three-phase
    double v_base = 0.0;     // V, phase peak
    double i_base = 0.0;     // A, phase peak
    double z_base = 0.0;     // ohm
    double omega_base = 0.0; // rad/s

    static PerUnitBase from(double s_base_w, double v_base_v, double omega_base_rad_s);
};

enum class Quantity { Voltage, Current, Impedance, Power, Frequency };

double park_angle_wrap(double theta); // wraps into (-pi, pi]

DqPair park(const AlphaBetaPair& x, double theta);
AlphaBetaPair inverse_park(const DqPair& x, double theta);

/// Amplitude-invariant inverse Clarke; output phases sum to zero.
std::array<double, 3> alphabeta_to_abc(const AlphaBetaPair& x);

double to_per_unit(double value_si, const PerUnitBase& base, Quantity kind);
double from_per_unit(double value_pu, const PerUnitBase& base, Quantity kind);

} // namespace gridmode
