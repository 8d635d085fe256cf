#include "gridmode/mapping.hpp"

#include "gridmode/equilibrium.hpp"
#include "gridmode/sim.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <numbers>

using namespace gridmode;
using gridmode::test::uniform;

TEST_CASE("sync offset arithmetic")
{
    CHECK(sync_offset(1.0, 1.226) == doctest::Approx(-0.226));
    CHECK(sync_offset(0.7, 0.7) == 0.0);
    CHECK(sync_offset(0.1, 2.0 * std::numbers::pi - 0.1) == doctest::Approx(0.2));
}

TEST_CASE("gfl to gfm mapping reproduces the measured operating point")
{
    const auto sp = test::make_params();
    PlantState plant;
    plant.v_c = {0.9, 0.3};
    plant.i_g = {0.4, -0.1};
    plant.i_l = {0.45, -0.05};
    GflState gfl;
    gfl.pll.theta = 0.35;
    const DqPair cmd_prev{0.95, 0.06};

    const MappingResult m = map_gfl_to_gfm(gfl, plant, cmd_prev, sp);
    CHECK(m.target == Mode::Gfm);
    CHECK(m.theta0 == doctest::Approx(0.35));

    const auto& refs = std::get<GfmRefs>(m.refs);
    const DqPair v_c = park(plant.v_c, 0.35);
    CHECK(refs.v_ref.d == v_c.d);
    CHECK(refs.v_ref.q == v_c.q);
    const DqPair i_g = park(plant.i_g, 0.35);
    CHECK(refs.p_ref == doctest::Approx(v_c.d * i_g.d + v_c.q * i_g.q));
    CHECK(m.p_filt_init == refs.p_ref);

    const DqPair i_l = park(plant.i_l, 0.35);
    CHECK(m.volt_d.accum == i_l.d);
    CHECK(m.volt_q.accum == i_l.q);
    CHECK(m.cur_d.accum == cmd_prev.d);
    CHECK(m.cur_q.accum == cmd_prev.q);
}

TEST_CASE("command continuity holds exactly even away from equilibrium")
{
    const auto sp = test::make_params();
    for (int k = 0; k < 20; ++k) {
        PlantState plant;
        plant.v_c = {uniform(-1.1, 1.1), uniform(-1.1, 1.1)};
        plant.i_g = {uniform(-0.8, 0.8), uniform(-0.8, 0.8)};
        plant.i_l = {uniform(-0.8, 0.8), uniform(-0.8, 0.8)};

        GflState gfl;
        gfl.pll.theta = uniform(-3.0, 3.0);
        gfl.cur_d.accum = uniform(-1.0, 1.0);
        gfl.cur_q.accum = uniform(-1.0, 1.0);
        const DqPair cmd_prev{uniform(-1.0, 1.0), uniform(-1.0, 1.0)};

        const ModeRefs naive{GfmRefs{{1.0, 0.0}, 0.5}};
        MappingFlags full;
        full.use_full_mapping = true;
        const auto sw = switch_event(plant, gfl, Mode::Gfm, full, naive, PllState{},
                                     cmd_prev, sp, 0.0);
        GfmState target = std::get<GfmState>(sw.ctrl);
        const StepResult r =
            gfm_step(target, plant, std::get<GfmRefs>(sw.refs), sp.ctrl, 1e-5);
        // first post-switch dq command is bit-identical to the held command
        CHECK(r.v_i_cmd_dq.d == cmd_prev.d);
        CHECK(r.v_i_cmd_dq.q == cmd_prev.q);
        CHECK(r.theta == gfl.pll.theta);
    }
}

TEST_CASE("reverse hand-off keeps the command and aligns the pll")
{
    const auto sp = test::make_params();
    PlantState plant;
    plant.v_c = {1.0, 0.1};
    plant.i_g = {0.5, 0.05};
    plant.i_l = {0.52, 0.22};
    GfmState gfm;
    gfm.droop.theta = 0.12;
    const DqPair cmd_prev{1.01, 0.04};
    PllState shadow{0.08, 0.0}; // tracker slightly off the droop angle

    const ModeRefs naive{GflRefs{{0.55, 0.0}}};
    MappingFlags full;
    full.use_full_mapping = true;
    const auto sw = switch_event(plant, gfm, Mode::Gfl, full, naive, shadow, cmd_prev, sp, 0.0);
    GflState target = std::get<GflState>(sw.ctrl);
    CHECK(target.pll.theta == gfm.droop.theta);

    const auto& refs = std::get<GflRefs>(sw.refs);
    const DqPair i_l = park(plant.i_l, gfm.droop.theta);
    CHECK(refs.i_ref.d == i_l.d);
    CHECK(refs.i_ref.q == i_l.q);

    const StepResult r = gfl_step(target, plant, refs, sp.ctrl, 1e-5);
    CHECK(r.v_i_cmd_dq.d == cmd_prev.d);
    CHECK(r.v_i_cmd_dq.q == cmd_prev.q);
}

TEST_CASE("mapping an exact equilibrium lands on the target fixed point")
{
    const auto sp = test::make_params();
    const GflRefs gfl_refs{{0.55, 0.0}};
    const auto eq = solve_equilibrium(Mode::Gfl, gfl_refs, sp);
    REQUIRE(eq.converged);

    const auto [ctrl, plant_pu] = assemble(eq.unified);
    const auto& gfl = std::get<GflState>(ctrl);

    // equilibrium inverter command in the PLL frame
    const DqPair i_l = park(plant_pu.i_l, gfl.pll.theta);
    const DqPair cmd_prev{sp.ctrl.cur.kp * (gfl_refs.i_ref.d - i_l.d) + gfl.cur_d.accum,
                          sp.ctrl.cur.kp * (gfl_refs.i_ref.q - i_l.q) + gfl.cur_q.accum};

    const MappingResult m = map_gfl_to_gfm(gfl, plant_pu, cmd_prev, sp);

    // assemble the target synchronous-frame state and verify the fixed point
    GfmIndependent c1;
    c1.droop.theta = gfl.pll.theta;
    c1.droop.p_filt = m.p_filt_init;
    c1.volt_d = m.volt_d;
    c1.volt_q = m.volt_q;
    UnifiedState target;
    target.mode = Mode::Gfm;
    target.x_c1 = c1;
    target.x_c2 = {m.cur_d, m.cur_q};
    target.x_phy = plant_pu;

    const auto before = pack_state(target);
    const auto after = pack_state(sync_frame_rk4_step(target, m.refs, sp, 1e-5));
    for (std::size_t k = 0; k < before.size(); ++k)
        CHECK(std::abs(after[k] - before[k]) < 1e-9);
}

TEST_CASE("ablation flags splice naive components")
{
    MappingResult full;
    full.target = Mode::Gfm;
    full.theta0 = 0.4;
    full.refs = GfmRefs{{0.92, 0.0}, 0.51};
    full.cur_d = {0.93};
    full.cur_q = {0.09};
    full.volt_d = {0.51};
    full.volt_q = {0.02};
    full.p_filt_init = 0.51;

    MappingResult naive;
    naive.target = Mode::Gfm;
    naive.refs = GfmRefs{{1.0, 0.0}, 0.5};

    MappingFlags none;
    const auto r_none = apply_flags(full, none, naive);
    CHECK(r_none.theta0 == 0.0);
    CHECK(std::get<GfmRefs>(r_none.refs).v_ref.d == 1.0);
    CHECK(r_none.cur_d.accum == 0.0);
    CHECK(r_none.p_filt_init == 0.0);

    MappingFlags sync_only;
    sync_only.use_sync = true;
    const auto r_sync = apply_flags(full, sync_only, naive);
    CHECK(r_sync.theta0 == 0.4);
    CHECK(r_sync.cur_d.accum == 0.0);
    CHECK(std::get<GfmRefs>(r_sync.refs).p_ref == 0.5);

    MappingFlags amp_only;
    amp_only.use_amplitude = true;
    const auto r_amp = apply_flags(full, amp_only, naive);
    CHECK(r_amp.theta0 == 0.0);
    CHECK(r_amp.cur_d.accum == 0.93);
    CHECK(std::get<GfmRefs>(r_amp.refs).v_ref.d == 0.92);

    MappingFlags all;
    all.use_full_mapping = true;
    const auto r_all = apply_flags(full, all, naive);
    CHECK(r_all.theta0 == 0.4);
    CHECK(r_all.cur_d.accum == 0.93);
    CHECK(r_all.volt_q.accum == 0.02);
    CHECK(std::get<GfmRefs>(r_all.refs).v_ref.d == 0.92);

    MappingResult wrong = naive;
    wrong.target = Mode::Gfl;
    CHECK_THROWS_AS(apply_flags(full, all, wrong), std::invalid_argument);
}
