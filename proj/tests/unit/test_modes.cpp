#include "gridmode/modes.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace gridmode;
using gridmode::test::uniform;

namespace {

GflState random_gfl()
{
    return {{uniform(-3, 3), uniform(-5, 5)}, {uniform(-2, 2)}, {uniform(-2, 2)}};
}

GfmState random_gfm()
{
    GfmState g;
    g.droop = {uniform(-3, 3), uniform(-1, 1)};
    g.volt_d = {uniform(-2, 2)};
    g.volt_q = {uniform(-2, 2)};
    g.cur_d = {uniform(-2, 2)};
    g.cur_q = {uniform(-2, 2)};
    return g;
}

PlantState random_plant()
{
    PlantState s;
    s.v_c = {uniform(-1.2, 1.2), uniform(-1.2, 1.2)};
    s.i_g = {uniform(-1, 1), uniform(-1, 1)};
    s.i_l = {uniform(-1, 1), uniform(-1, 1)};
    return s;
}

} // namespace

TEST_CASE("partition round trip is lossless for both modes")
{
    for (int k = 0; k < 100; ++k) {
        const GflState gfl = random_gfl();
        const PlantState phy = random_plant();
        const UnifiedState u = partition(Mode::Gfl, gfl, phy);
        const auto [ctrl, plant] = assemble(u);
        const auto& back = std::get<GflState>(ctrl);
        CHECK(back.pll.theta == gfl.pll.theta);
        CHECK(back.pll.integ == gfl.pll.integ);
        CHECK(back.cur_d.accum == gfl.cur_d.accum);
        CHECK(back.cur_q.accum == gfl.cur_q.accum);
        CHECK(plant.v_c.a == phy.v_c.a);
        CHECK(plant.i_l.b == phy.i_l.b);

        const GfmState gfm = random_gfm();
        const UnifiedState u2 = partition(Mode::Gfm, gfm, phy);
        const auto [ctrl2, plant2] = assemble(u2);
        const auto& back2 = std::get<GfmState>(ctrl2);
        CHECK(back2.droop.theta == gfm.droop.theta);
        CHECK(back2.droop.p_filt == gfm.droop.p_filt);
        CHECK(back2.volt_d.accum == gfm.volt_d.accum);
        CHECK(back2.cur_q.accum == gfm.cur_q.accum);
        CHECK(plant2.i_g.a == phy.i_g.a);
    }
}

TEST_CASE("current loop integrators land in x_c2 for both modes")
{
    const PlantState phy = random_plant();
    const GflState gfl{{0.1, 0.2}, {0.3}, {0.4}};
    GfmState gfm;
    gfm.cur_d = {0.5};
    gfm.cur_q = {0.6};
    CHECK(partition(Mode::Gfl, gfl, phy).x_c2.d.accum == 0.3);
    CHECK(partition(Mode::Gfl, gfl, phy).x_c2.q.accum == 0.4);
    CHECK(partition(Mode::Gfm, gfm, phy).x_c2.d.accum == 0.5);
    CHECK(partition(Mode::Gfm, gfm, phy).x_c2.q.accum == 0.6);
}

TEST_CASE("gfl command reduces to the integrator with a zero current error")
{
    const auto sp = test::make_params();
    const PlantState meas = random_plant();
    GflState st;
    st.pll.theta = 0.7;
    const GflRefs refs{park(meas.i_l, st.pll.theta)}; // reference equals measurement
    const StepResult r = gfl_step(st, meas, refs, sp.ctrl, 1e-5);
    CHECK(r.v_i_cmd_dq.d == 0.0); // zero error, zero integrator
    CHECK(r.v_i_cmd_dq.q == 0.0);
}

TEST_CASE("gfm voltage loop output is the integrator when tracking exactly")
{
    const auto sp = test::make_params();
    const PlantState meas = random_plant();
    GfmState st;
    st.droop.theta = -0.4;
    st.volt_d = {0.33};
    st.volt_q = {-0.11};
    GfmRefs refs;
    refs.v_ref = park(meas.v_c, st.droop.theta);
    refs.p_ref = 0.5;
    const StepResult r = gfm_step(st, meas, refs, sp.ctrl, 1e-5);
    // voltage-loop proportional part vanishes; the current loop sees the
    // integrator outputs as its reference
    const DqPair i_l = park(meas.i_l, -0.4);
    CHECK(r.v_i_cmd_dq.d == doctest::Approx(sp.ctrl.cur.kp * (0.33 - i_l.d)).epsilon(1e-12));
    CHECK(r.v_i_cmd_dq.q == doctest::Approx(sp.ctrl.cur.kp * (-0.11 - i_l.q)).epsilon(1e-12));
}

TEST_CASE("mode steps are deterministic")
{
    const auto sp = test::make_params();
    const PlantState meas = random_plant();
    GflState a;
    a.pll.theta = 0.3;
    GflState b = a;
    const GflRefs refs{{0.5, 0.1}};
    const StepResult ra = gfl_step(a, meas, refs, sp.ctrl, 1e-5);
    const StepResult rb = gfl_step(b, meas, refs, sp.ctrl, 1e-5);
    CHECK(ra.v_i_cmd.a == rb.v_i_cmd.a);
    CHECK(ra.v_i_cmd.b == rb.v_i_cmd.b);
    CHECK(a.pll.theta == b.pll.theta);
    CHECK(a.cur_d.accum == b.cur_d.accum);
}
