#include "gridmode/frames.hpp"

#include <numbers>
#include <stdexcept>

namespace gridmode {

PerUnitBase PerUnitBase::from(double s_base_w, double v_base_v, double omega_base_rad_s)
{
    if (s_base_w <= 0.0 || v_base_v <= 0.0 || omega_base_rad_s <= 0.0)
        throw std::invalid_argument("per-unit bases must be strictly positive");
    PerUnitBase b;
    b.s_base = s_base_w;
    b.v_base = v_base_v;
    b.i_base = (2.0 / 3.0) * s_base_w / v_base_v;
    b.z_base = v_base_v / b.i_base;
    b.omega_base = omega_base_rad_s;
    return b;
}

double park_angle_wrap(double theta)
{
    if (theta > -std::numbers::pi && theta <= std::numbers::pi)
        return theta; // already wrapped; keep the value bit-identical
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta + std::numbers::pi, two_pi);
    if (r <= 0.0)
        r += two_pi;
    return r - std::numbers::pi;
}

DqPair park(const AlphaBetaPair& x, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {x.a * c + x.b * s, -x.a * s + x.b * c};
}

AlphaBetaPair inverse_park(const DqPair& x, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {x.d * c - x.q * s, x.d * s + x.q * c};
}

std::array<double, 3> alphabeta_to_abc(const AlphaBetaPair& x)
{
    constexpr double half_sqrt3 = std::numbers::sqrt3 / 2.0;
    const double a = x.a;
    const double b = -0.5 * x.a + half_sqrt3 * x.b;
    // force an exact zero sum instead of recomputing the same expression
    const double c = -(a + b);
    return {a, b, c};
}

static double base_of(const PerUnitBase& base, Quantity kind)
{
    switch (kind) {
    case Quantity::Voltage: return base.v_base;
    case Quantity::Current: return base.i_base;
    case Quantity::Impedance: return base.z_base;
    case Quantity::Power: return base.s_base;
    case Quantity::Frequency: return base.omega_base;
    }
    throw std::invalid_argument("unknown per-unit quantity kind");
}

double to_per_unit(double value_si, const PerUnitBase& base, Quantity kind)
{
    return value_si / base_of(base, kind);
}

double from_per_unit(double value_pu, const PerUnitBase& base, Quantity kind)
{
    return value_pu * base_of(base, kind);
}

} // namespace gridmode
