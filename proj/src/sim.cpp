#include "gridmode/sim.hpp"

#include "gridmode/ioutil.hpp"

#include <cmath>
#include <stdexcept>

namespace gridmode {

const char* const kTraceCsvHeader =
    "t,v_ca,v_cb,i_ga,i_gb,i_la,i_lb,v_cd,v_cq,i_gd,i_gq,i_ld,i_lq,"
    "theta,omega,p,q,vi_d_cmd,vi_q_cmd,mode";

const char* ordering_name(Ordering o)
{
    switch (o) {
    case Ordering::None: return "none";
    case Ordering::SetpointBeforeSwitch: return "setpoint-before-switch";
    case Ordering::SetpointAfterSwitch: return "setpoint-after-switch";
    }
    return "none";
}

void Scenario::validate() const
{
    if (!(dt > 0.0) || dt > 50e-6)
        throw std::invalid_argument("scenario." + name + ".dt_s: must be in (0, 50e-6]");
    if (!(duration > 0.0))
        throw std::invalid_argument("scenario." + name + ".duration_s: must be positive");
    if (decimation < 1)
        throw std::invalid_argument("scenario." + name + ".decimation: must be >= 1");
    if (target_mode) {
        if (*target_mode == initial_mode)
            throw std::invalid_argument("scenario." + name + ": initial and target mode must differ when a switch is scheduled");
        if (!(t_switch > 0.0) || !(t_switch < duration))
            throw std::invalid_argument("scenario." + name + ".t_switch_s: must lie inside (0, duration)");
    }
    for (std::size_t k = 0; k < setpoints.size(); ++k) {
        const auto& sp = setpoints[k];
        if (sp.t < 0.0 || sp.t >= duration)
            throw std::invalid_argument("scenario." + name + ".setpoints[" + std::to_string(k) + "].t_s: outside the run");
        if (target_mode && ordering == Ordering::SetpointBeforeSwitch && sp.t >= t_switch)
            throw std::invalid_argument("scenario." + name + ": setpoint-before-switch ordering requires setpoint times before t_switch");
        if (target_mode && ordering == Ordering::SetpointAfterSwitch && sp.t <= t_switch)
            throw std::invalid_argument("scenario." + name + ": setpoint-after-switch ordering requires setpoint times after t_switch");
    }
}

PlantState plant_to_pu(const PlantState& si, const PerUnitBase& base)
{
    PlantState pu;
    pu.v_c = {si.v_c.a / base.v_base, si.v_c.b / base.v_base};
    pu.i_g = {si.i_g.a / base.i_base, si.i_g.b / base.i_base};
    pu.i_l = {si.i_l.a / base.i_base, si.i_l.b / base.i_base};
    return pu;
}

PlantState plant_from_pu(const PlantState& pu, const PerUnitBase& base)
{
    PlantState si;
    si.v_c = {pu.v_c.a * base.v_base, pu.v_c.b * base.v_base};
    si.i_g = {pu.i_g.a * base.i_base, pu.i_g.b * base.i_base};
    si.i_l = {pu.i_l.a * base.i_base, pu.i_l.b * base.i_base};
    return si;
}

namespace {

PlantState axpy(const PlantState& x, const PlantState& d, double h)
{
    PlantState r;
    r.v_c = {x.v_c.a + h * d.v_c.a, x.v_c.b + h * d.v_c.b};
    r.i_g = {x.i_g.a + h * d.i_g.a, x.i_g.b + h * d.i_g.b};
    r.i_l = {x.i_l.a + h * d.i_l.a, x.i_l.b + h * d.i_l.b};
    return r;
}

/// Held inverter command over one step: the dq command is frozen while the
/// ideal modulator keeps rotating it at the step's frequency, so a steady
/// state produces an exact sinusoid between controller updates.
struct HeldCommand {
    DqPair cmd_dq;      // pu
    double theta0 = 0.0; // controller angle at the step start
    double omega = 0.0;  // rad/s
    double v_base = 1.0;

    AlphaBetaPair at(double tau) const
    {
        const AlphaBetaPair pu = inverse_park(cmd_dq, theta0 + omega * tau);
        return {pu.a * v_base, pu.b * v_base};
    }
};

/// Plant RK4 over one step; grid source and the held command are evaluated
/// at the stage times.
PlantState plant_rk4(const PlantState& s, const HeldCommand& v_i, double t, double dt,
                     const PlantParams& p)
{
    const PlantState k1 = plant_derivative(s, v_i.at(0.0), grid_voltage(t, p), p);
    const PlantState k2 =
        plant_derivative(axpy(s, k1, 0.5 * dt), v_i.at(0.5 * dt), grid_voltage(t + 0.5 * dt, p), p);
    const PlantState k3 =
        plant_derivative(axpy(s, k2, 0.5 * dt), v_i.at(0.5 * dt), grid_voltage(t + 0.5 * dt, p), p);
    const PlantState k4 = plant_derivative(axpy(s, k3, dt), v_i.at(dt), grid_voltage(t + dt, p), p);
    PlantState r = s;
    const double h = dt / 6.0;
    r = axpy(r, k1, h);
    r = axpy(r, k2, 2.0 * h);
    r = axpy(r, k3, 2.0 * h);
    r = axpy(r, k4, h);
    return r;
}

MappingResult naive_mapping(Mode target, const ModeRefs& naive_refs, const PllState& shadow)
{
    MappingResult m;
    m.target = target;
    m.theta0 = 0.0;
    m.refs = naive_refs;
    // integrators at zero, power filter seeded empty; the PLL raw state is
    // the shadow tracker and is handled by switch_event
    (void)shadow;
    return m;
}

bool state_out_of_range(const PlantState& pu, const ControllerState& ctrl)
{
    auto bad = [](double v) { return !std::isfinite(v) || std::abs(v) > 100.0; };
    if (bad(pu.v_c.a) || bad(pu.v_c.b) || bad(pu.i_g.a) || bad(pu.i_g.b) ||
        bad(pu.i_l.a) || bad(pu.i_l.b))
        return true;
    if (std::holds_alternative<GflState>(ctrl)) {
        const auto& g = std::get<GflState>(ctrl);
        return bad(g.cur_d.accum) || bad(g.cur_q.accum);
    }
    const auto& g = std::get<GfmState>(ctrl);
    return bad(g.cur_d.accum) || bad(g.cur_q.accum) || bad(g.volt_d.accum) ||
           bad(g.volt_q.accum) || bad(g.droop.p_filt);
}

} // namespace

SwitchOutcome switch_event(const PlantState& plant_pu, const ControllerState& source,
                           Mode target, const MappingFlags& flags, const ModeRefs& naive_refs,
                           const PllState& shadow_pll, const DqPair& cmd_prev,
                           const SystemParams& params, double t)
{
    MappingResult full;
    if (target == Mode::Gfm) {
        // a fresh droop integrator starts from zero raw phase
        full = map_gfl_to_gfm(std::get<GflState>(source), plant_pu, cmd_prev, params, 0.0);
    } else {
        full = map_gfm_to_gfl(std::get<GfmState>(source), plant_pu, cmd_prev, params, shadow_pll);
    }
    const MappingResult applied = apply_flags(full, flags, naive_mapping(target, naive_refs, shadow_pll));

    // With the synchronization controller active the target angle is set to
    // the source angle directly; adding theta0 to the raw angle is the same
    // value up to wrapping, but this keeps the alignment bit-exact.
    SwitchOutcome out;
    if (target == Mode::Gfm) {
        GfmState g;
        g.droop.theta = flags.sync_active() ? std::get<GflState>(source).pll.theta
                                            : park_angle_wrap(applied.theta0);
        g.droop.p_filt = applied.p_filt_init;
        g.volt_d = applied.volt_d;
        g.volt_q = applied.volt_q;
        g.cur_d = applied.cur_d;
        g.cur_q = applied.cur_q;
        out.ctrl = g;
    } else {
        GflState g;
        g.pll = shadow_pll;
        g.pll.theta = flags.sync_active() ? std::get<GfmState>(source).droop.theta
                                          : park_angle_wrap(shadow_pll.theta + applied.theta0);
        g.cur_d = applied.cur_d;
        g.cur_q = applied.cur_q;
        out.ctrl = g;
    }
    out.refs = applied.refs;
    out.record = MappingRecord{t, full, applied};
    return out;
}

Trace run_scenario(const Scenario& sc, const SystemParams& params,
                   const std::optional<SimStart>& start)
{
    sc.validate();
    params.plant.validate();
    params.ctrl.validate();

    UnifiedState initial;
    if (start) {
        initial = start->state;
        if (initial.mode != sc.initial_mode)
            throw std::invalid_argument("explicit start state does not match the scenario's initial mode");
    } else {
        const ModeRefs refs0 = sc.initial_mode == Mode::Gfl ? ModeRefs{sc.gfl_refs} : ModeRefs{sc.gfm_refs};
        const Equilibrium eq = solve_equilibrium(sc.initial_mode, refs0, params);
        if (!eq.converged)
            throw std::runtime_error("scenario " + sc.name + ": initial equilibrium solve did not converge (residual " +
                                     format_roundtrip(eq.residual_norm) + ")");
        initial = eq.unified;
    }

    // grid angle is zero at t = 0, so synchronous-frame dq values are the
    // stationary-frame values at the start instant
    auto [ctrl, plant_pu0] = assemble(initial);
    PlantState plant = plant_from_pu(plant_pu0, params.base);
    Mode mode = sc.initial_mode;
    ModeRefs refs = mode == Mode::Gfl ? ModeRefs{sc.gfl_refs} : ModeRefs{sc.gfm_refs};

    // measurement-driven tracker for the inactive PLL; starts near the
    // active angle and locks on its own during the pre-switch interval
    PllState shadow;
    shadow.theta = mode == Mode::Gfl ? std::get<GflState>(ctrl).pll.theta
                                     : std::get<GfmState>(ctrl).droop.theta;
    shadow.integ = mode == Mode::Gfl ? std::get<GflState>(ctrl).pll.integ : 0.0;

    const long n_steps = std::lround(sc.duration / sc.dt);
    const long k_switch = sc.target_mode ? std::lround(sc.t_switch / sc.dt) : -1;

    DqPair cmd_prev_dq{0.0, 0.0};
    std::size_t next_setpoint = 0;

    Trace trace;
    trace.samples.reserve(static_cast<std::size_t>(n_steps / sc.decimation) + 1);

    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        const PlantState meas = plant_to_pu(plant, params.base);

        while (next_setpoint < sc.setpoints.size() &&
               sc.setpoints[next_setpoint].t <= t) {
            const auto& sp = sc.setpoints[next_setpoint];
            if (sp.refs.index() == refs.index())
                refs = sp.refs;
            ++next_setpoint;
        }

        if (sc.target_mode && k == k_switch) {
            const ModeRefs naive = *sc.target_mode == Mode::Gfl ? ModeRefs{sc.gfl_refs} : ModeRefs{sc.gfm_refs};
            SwitchOutcome sw = switch_event(meas, ctrl, *sc.target_mode, sc.flags, naive,
                                            shadow, cmd_prev_dq, params, t);
            ctrl = sw.ctrl;
            refs = sw.refs;
            mode = *sc.target_mode;
            trace.mapping = sw.record;
        }

        StepResult r;
        if (mode == Mode::Gfl) {
            r = gfl_step(std::get<GflState>(ctrl), meas, std::get<GflRefs>(refs), params.ctrl, sc.dt);
        } else {
            r = gfm_step(std::get<GfmState>(ctrl), meas, std::get<GfmRefs>(refs), params.ctrl, sc.dt);
            const DqPair v_c_shadow = park(meas.v_c, shadow.theta);
            pll_step(shadow, v_c_shadow.q, params.ctrl.pll, params.ctrl.omega_ref, sc.dt);
        }
        cmd_prev_dq = r.v_i_cmd_dq;

        if (k % sc.decimation == 0) {
            TraceSample s;
            s.t = t;
            s.v_ca = meas.v_c.a;
            s.v_cb = meas.v_c.b;
            s.i_ga = meas.i_g.a;
            s.i_gb = meas.i_g.b;
            s.i_la = meas.i_l.a;
            s.i_lb = meas.i_l.b;
            const DqPair v_c_dq = park(meas.v_c, r.theta);
            const DqPair i_g_dq = park(meas.i_g, r.theta);
            const DqPair i_l_dq = park(meas.i_l, r.theta);
            s.v_cd = v_c_dq.d;
            s.v_cq = v_c_dq.q;
            s.i_gd = i_g_dq.d;
            s.i_gq = i_g_dq.q;
            s.i_ld = i_l_dq.d;
            s.i_lq = i_l_dq.q;
            s.theta = r.theta;
            s.omega = r.omega;
            s.p = r.p;
            s.q = r.q;
            s.vi_d_cmd = r.v_i_cmd_dq.d;
            s.vi_q_cmd = r.v_i_cmd_dq.q;
            s.mode = mode == Mode::Gfm ? 1 : 0;
            trace.samples.push_back(s);
        }

        const HeldCommand held{r.v_i_cmd_dq, r.theta, r.omega, params.base.v_base};
        plant = plant_rk4(plant, held, t, sc.dt, params.plant);

        if (state_out_of_range(plant_to_pu(plant, params.base), ctrl)) {
            trace.diverged = true;
            trace.t_diverged = t + sc.dt;
            break;
        }
    }
    return trace;
}

TransientMetrics transient_metrics(const Trace& tr, double t_switch, double window)
{
    constexpr double kBaselineSpan = 0.010; // s of pre-switch samples
    constexpr double kBand = 0.01;          // settling band, absolute in signal units

    if (tr.samples.empty())
        throw std::invalid_argument("transient_metrics: empty trace");
    const double t_begin = tr.samples.front().t;
    const double t_end = tr.samples.back().t;
    if (t_switch - kBaselineSpan < t_begin || t_switch + window > t_end)
        throw std::invalid_argument("transient_metrics: window does not fit within the trace");

    struct Column {
        const char* name;
        double TraceSample::* field;
    };
    static const Column columns[] = {
        {"v_cd", &TraceSample::v_cd}, {"v_cq", &TraceSample::v_cq},
        {"i_gd", &TraceSample::i_gd}, {"i_gq", &TraceSample::i_gq},
        {"i_ld", &TraceSample::i_ld}, {"i_lq", &TraceSample::i_lq},
        {"p", &TraceSample::p},       {"q", &TraceSample::q},
        {"omega", &TraceSample::omega},
    };

    TransientMetrics m;
    std::map<std::string, double> baseline;
    for (const auto& col : columns) {
        double sum = 0.0;
        long count = 0;
        for (const auto& s : tr.samples) {
            if (s.t >= t_switch - kBaselineSpan && s.t < t_switch) {
                sum += s.*(col.field);
                ++count;
            }
        }
        if (count == 0)
            throw std::invalid_argument("transient_metrics: no pre-switch samples for the baseline");
        baseline[col.name] = sum / static_cast<double>(count);
    }

    for (const auto& col : columns) {
        const double base = baseline[col.name];
        double max_dev = 0.0;
        double settle = 0.0;
        double final_value = base;
        for (const auto& s : tr.samples) {
            if (s.t < t_switch || s.t > t_switch + window)
                continue;
            const double dev = std::abs(s.*(col.field) - base);
            max_dev = std::max(max_dev, dev);
            if (dev > kBand)
                settle = s.t - t_switch;
            final_value = s.*(col.field);
        }
        SignalMetrics sm;
        sm.max_deviation = max_dev;
        sm.settling_time = settle;
        const double net = std::abs(final_value - base);
        sm.overshoot_ratio = net > 1e-9 ? std::max(0.0, (max_dev - net) / net) : 0.0;
        m.signals[col.name] = sm;
    }

    auto vector_dev = [&](const char* dn, const char* qn, double TraceSample::* fd,
                          double TraceSample::* fq) {
        const double bd = baseline[dn];
        const double bq = baseline[qn];
        double max_dev = 0.0;
        for (const auto& s : tr.samples) {
            if (s.t < t_switch || s.t > t_switch + window)
                continue;
            max_dev = std::max(max_dev, std::hypot(s.*fd - bd, s.*fq - bq));
        }
        return max_dev;
    };
    m.max_dev_v_c = vector_dev("v_cd", "v_cq", &TraceSample::v_cd, &TraceSample::v_cq);
    m.max_dev_i_g = vector_dev("i_gd", "i_gq", &TraceSample::i_gd, &TraceSample::i_gq);
    m.max_dev_i_l = vector_dev("i_ld", "i_lq", &TraceSample::i_ld, &TraceSample::i_lq);
    return m;
}

std::string trace_csv(const Trace& tr)
{
    std::string out = kTraceCsvHeader;
    out += '\n';
    for (const auto& s : tr.samples) {
        out += format_roundtrip(s.t);
        for (double v : {s.v_ca, s.v_cb, s.i_ga, s.i_gb, s.i_la, s.i_lb, s.v_cd, s.v_cq,
                         s.i_gd, s.i_gq, s.i_ld, s.i_lq, s.theta, s.omega, s.p, s.q,
                         s.vi_d_cmd, s.vi_q_cmd}) {
            out += ',';
            out += format_roundtrip(v);
        }
        out += ',';
        out += std::to_string(s.mode);
        out += '\n';
    }
    return out;
}

} // namespace gridmode
