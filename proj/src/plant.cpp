#include "gridmode/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmode {

void PlantParams::validate() const
{
    if (!(l_f > 0.0) || !(c_f > 0.0) || !(l_g > 0.0))
        throw std::invalid_argument("inductances and capacitance must be strictly positive");
    if (r_f < 0.0 || r_g < 0.0)
        throw std::invalid_argument("resistances must be non-negative");
    if (!(v_g_amp > 0.0) || !(omega_g > 0.0))
        throw std::invalid_argument("grid amplitude and frequency must be strictly positive");
}

PlantParamsPu PlantParamsPu::from(const PlantParams& p, const PerUnitBase& base)
{
    PlantParamsPu pu;
    pu.l_f = p.l_f / base.z_base;
    pu.r_f = p.r_f / base.z_base;
    pu.c_f = p.c_f * base.z_base;
    pu.l_g = p.l_g / base.z_base;
    pu.r_g = p.r_g / base.z_base;
    pu.v_g = p.v_g_amp / base.v_base;
    pu.omega_g = p.omega_g;
    return pu;
}

PlantState plant_derivative(const PlantState& s, const AlphaBetaPair& v_i,
                            const AlphaBetaPair& v_g, const PlantParams& p)
{
    PlantState d;
    d.v_c.a = (s.i_l.a - s.i_g.a) / p.c_f;
    d.v_c.b = (s.i_l.b - s.i_g.b) / p.c_f;
    d.i_g.a = (s.v_c.a - v_g.a - p.r_g * s.i_g.a) / p.l_g;
    d.i_g.b = (s.v_c.b - v_g.b - p.r_g * s.i_g.b) / p.l_g;
    d.i_l.a = (v_i.a - s.v_c.a - p.r_f * s.i_l.a) / p.l_f;
    d.i_l.b = (v_i.b - s.v_c.b - p.r_f * s.i_l.b) / p.l_f;
    return d;
}

AlphaBetaPair grid_voltage(double t, const PlantParams& p)
{
    const double theta = p.omega_g * t;
    return {p.v_g_amp * std::cos(theta), p.v_g_amp * std::sin(theta)};
}

double plant_stored_energy(const PlantState& s, const PlantParams& p)
{
    const double vc2 = s.v_c.a * s.v_c.a + s.v_c.b * s.v_c.b;
    const double il2 = s.i_l.a * s.i_l.a + s.i_l.b * s.i_l.b;
    const double ig2 = s.i_g.a * s.i_g.a + s.i_g.b * s.i_g.b;
    return 0.5 * (p.c_f * vc2 + p.l_f * il2 + p.l_g * ig2);
}

} // namespace gridmode
