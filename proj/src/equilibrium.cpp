#include "gridmode/equilibrium.hpp"

#include "gridmode/ioutil.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gridmode {

namespace {

using Complex = std::complex<double>;

constexpr std::size_t kGflDim = 10;
constexpr std::size_t kGfmDim = 12;
constexpr double kSettleDt = 1e-4; // s, comfortably inside the RK4 stability region

Complex to_complex(const DqPair& x) { return {x.d, x.q}; }
Complex to_complex(const AlphaBetaPair& x) { return {x.a, x.b}; }

/// Synchronous-frame closed-loop derivative, complex per-axis-pair form.
/// Rotations: a controller at angle delta relative to the grid frame sees
/// measurements x*exp(-j*delta) and its dq command maps back with exp(+j*delta).
/// Every dq pair obeys xdot = f_local - j*omega_g*x in the rotating frame.
struct OdeContext {
    PlantParamsPu plant;
    ControlParams ctrl;
    Mode mode;
    GflRefs gfl;
    GfmRefs gfm;
};

OdeContext make_context(Mode mode, const ModeRefs& refs, const SystemParams& params)
{
    OdeContext c;
    c.plant = params.plant_pu();
    c.ctrl = params.ctrl;
    c.mode = mode;
    if (mode == Mode::Gfl)
        c.gfl = std::get<GflRefs>(refs);
    else
        c.gfm = std::get<GfmRefs>(refs);
    return c;
}

void residual_raw(const OdeContext& c, const double* x, double* f)
{
    const Complex v_c{x[0], x[1]};
    const Complex i_g{x[2], x[3]};
    const Complex i_l{x[4], x[5]};
    const double delta = x[6];
    const Complex rot = std::polar(1.0, -delta);
    const Complex j{0.0, 1.0};
    const Complex v_g{c.plant.v_g, 0.0};
    const double w_g = c.plant.omega_g;

    Complex v_i;
    double omega = 0.0;
    if (c.mode == Mode::Gfl) {
        const Complex v_m = v_c * rot;
        const Complex i_lm = i_l * rot;
        const double integ = x[7];
        omega = c.ctrl.omega_ref + c.ctrl.pll.kp * v_m.imag() + integ;
        const Complex e_cur = to_complex(c.gfl.i_ref) - i_lm;
        const Complex v_cmd = c.ctrl.cur.kp * e_cur + Complex{x[8], x[9]};
        v_i = v_cmd * std::conj(rot);
        f[7] = c.ctrl.pll.ki * v_m.imag();
        f[8] = c.ctrl.cur.ki * e_cur.real();
        f[9] = c.ctrl.cur.ki * e_cur.imag();
    } else {
        const Complex v_m = v_c * rot;
        const Complex i_gm = i_g * rot;
        const Complex i_lm = i_l * rot;
        const double p_filt = x[7];
        const double p = v_m.real() * i_gm.real() + v_m.imag() * i_gm.imag();
        omega = c.ctrl.omega_ref + c.ctrl.m_p * (c.gfm.p_ref - p_filt);
        const Complex e_v = to_complex(c.gfm.v_ref) - v_m;
        const Complex i_cmd = c.ctrl.volt.kp * e_v + Complex{x[8], x[9]};
        const Complex e_cur = i_cmd - i_lm;
        const Complex v_cmd = c.ctrl.cur.kp * e_cur + Complex{x[10], x[11]};
        v_i = v_cmd * std::conj(rot);
        f[7] = c.ctrl.lpf_cutoff * (p - p_filt);
        f[8] = c.ctrl.volt.ki * e_v.real();
        f[9] = c.ctrl.volt.ki * e_v.imag();
        f[10] = c.ctrl.cur.ki * e_cur.real();
        f[11] = c.ctrl.cur.ki * e_cur.imag();
    }

    const Complex f_vc = (i_l - i_g) / c.plant.c_f - j * w_g * v_c;
    const Complex f_ig = (v_c - v_g - c.plant.r_g * i_g) / c.plant.l_g - j * w_g * i_g;
    const Complex f_il = (v_i - v_c - c.plant.r_f * i_l) / c.plant.l_f - j * w_g * i_l;
    f[0] = f_vc.real();
    f[1] = f_vc.imag();
    f[2] = f_ig.real();
    f[3] = f_ig.imag();
    f[4] = f_il.real();
    f[5] = f_il.imag();
    f[6] = omega - w_g;
}

Eigen::VectorXd residual_vec(const OdeContext& c, const Eigen::VectorXd& x)
{
    Eigen::VectorXd f(x.size());
    residual_raw(c, x.data(), f.data());
    return f;
}

Eigen::MatrixXd fd_jacobian(const OdeContext& c, const Eigen::VectorXd& x)
{
    const auto n = x.size();
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd xp = x, xm = x;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double h = 1e-7 * std::max(std::abs(x[k]), 1.0);
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        jac.col(k) = (residual_vec(c, xp) - residual_vec(c, xm)) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return jac;
}

Eigen::VectorXd rk4_step_vec(const OdeContext& c, const Eigen::VectorXd& x, double dt)
{
    const Eigen::VectorXd k1 = residual_vec(c, x);
    const Eigen::VectorXd k2 = residual_vec(c, x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = residual_vec(c, x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = residual_vec(c, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& jac)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(jac, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen decomposition of the closed-loop Jacobian failed");
    std::vector<std::complex<double>> ev(jac.rows());
    for (Eigen::Index k = 0; k < jac.rows(); ++k)
        ev[k] = es.eigenvalues()[k];
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real())
            return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return ev;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

} // namespace

std::size_t state_dimension(Mode mode)
{
    return mode == Mode::Gfl ? kGflDim : kGfmDim;
}

std::vector<std::string> state_labels(Mode mode)
{
    if (mode == Mode::Gfl)
        return {"v_cd", "v_cq", "i_gd", "i_gq", "i_ld", "i_lq",
                "delta", "pll_integ", "cur_accum_d", "cur_accum_q"};
    return {"v_cd", "v_cq", "i_gd", "i_gq", "i_ld", "i_lq",
            "delta", "p_filt", "volt_accum_d", "volt_accum_q", "cur_accum_d", "cur_accum_q"};
}

std::vector<double> pack_state(const UnifiedState& u)
{
    std::vector<double> x(state_dimension(u.mode));
    x[0] = u.x_phy.v_c.a;
    x[1] = u.x_phy.v_c.b;
    x[2] = u.x_phy.i_g.a;
    x[3] = u.x_phy.i_g.b;
    x[4] = u.x_phy.i_l.a;
    x[5] = u.x_phy.i_l.b;
    if (u.mode == Mode::Gfl) {
        const auto& c1 = std::get<GflIndependent>(u.x_c1);
        x[6] = c1.pll.theta;
        x[7] = c1.pll.integ;
        x[8] = u.x_c2.d.accum;
        x[9] = u.x_c2.q.accum;
    } else {
        const auto& c1 = std::get<GfmIndependent>(u.x_c1);
        x[6] = c1.droop.theta;
        x[7] = c1.droop.p_filt;
        x[8] = c1.volt_d.accum;
        x[9] = c1.volt_q.accum;
        x[10] = u.x_c2.d.accum;
        x[11] = u.x_c2.q.accum;
    }
    return x;
}

UnifiedState unpack_state(Mode mode, const std::vector<double>& x)
{
    if (x.size() != state_dimension(mode))
        throw std::invalid_argument("state vector has the wrong dimension for the mode");
    UnifiedState u;
    u.mode = mode;
    u.x_phy.v_c = {x[0], x[1]};
    u.x_phy.i_g = {x[2], x[3]};
    u.x_phy.i_l = {x[4], x[5]};
    if (mode == Mode::Gfl) {
        GflIndependent c1;
        c1.pll.theta = x[6];
        c1.pll.integ = x[7];
        u.x_c1 = c1;
        u.x_c2 = {PiState{x[8]}, PiState{x[9]}};
    } else {
        GfmIndependent c1;
        c1.droop.theta = x[6];
        c1.droop.p_filt = x[7];
        c1.volt_d = PiState{x[8]};
        c1.volt_q = PiState{x[9]};
        u.x_c1 = c1;
        u.x_c2 = {PiState{x[10]}, PiState{x[11]}};
    }
    return u;
}

std::vector<double> closed_loop_residual(const UnifiedState& u, const ModeRefs& refs,
                                         const SystemParams& params)
{
    const OdeContext c = make_context(u.mode, refs, params);
    std::vector<double> x = pack_state(u);
    std::vector<double> f(x.size());
    residual_raw(c, x.data(), f.data());
    return f;
}

UnifiedState sync_frame_rk4_step(const UnifiedState& u, const ModeRefs& refs,
                                 const SystemParams& params, double dt)
{
    const OdeContext c = make_context(u.mode, refs, params);
    return unpack_state(u.mode, to_std(rk4_step_vec(c, to_eigen(pack_state(u)), dt)));
}

UnifiedState default_equilibrium_guess(Mode mode, const ModeRefs& refs,
                                       const SystemParams& params)
{
    const PlantParamsPu pu = params.plant_pu();
    const Complex j{0.0, 1.0};
    const Complex z_f{pu.r_f, pu.omega_g * pu.l_f};
    const double b_c = pu.omega_g * pu.c_f;

    Complex v_c, i_g, i_l;
    std::vector<double> x(state_dimension(mode), 0.0);
    if (mode == Mode::Gfl) {
        const auto& r = std::get<GflRefs>(refs);
        v_c = {1.0, 0.0};
        i_l = to_complex(r.i_ref);
        i_g = i_l - j * b_c * v_c;
        const Complex v_cmd = v_c + z_f * i_l;
        x[8] = v_cmd.real();
        x[9] = v_cmd.imag();
    } else {
        const auto& r = std::get<GfmRefs>(refs);
        v_c = to_complex(r.v_ref);
        const double vd = std::max(std::abs(v_c.real()), 0.2);
        i_g = {r.p_ref / vd, 0.0};
        i_l = i_g + j * b_c * v_c;
        const Complex v_cmd = v_c + z_f * i_l;
        x[7] = r.p_ref;
        x[8] = i_l.real();
        x[9] = i_l.imag();
        x[10] = v_cmd.real();
        x[11] = v_cmd.imag();
    }
    x[0] = v_c.real();
    x[1] = v_c.imag();
    x[2] = i_g.real();
    x[3] = i_g.imag();
    x[4] = i_l.real();
    x[5] = i_l.imag();
    x[6] = 0.0;
    return unpack_state(mode, x);
}

Equilibrium solve_equilibrium(Mode mode, const ModeRefs& refs, const SystemParams& params,
                              const std::optional<UnifiedState>& guess)
{
    const OdeContext c = make_context(mode, refs, params);
    Eigen::VectorXd x = to_eigen(pack_state(guess ? *guess : default_equilibrium_guess(mode, refs, params)));

    constexpr int max_iters = 50;
    constexpr double target = 1e-12;
    constexpr double accept = 1e-10;

    Equilibrium eq;
    eq.mode = mode;

    Eigen::VectorXd f = residual_vec(c, x);
    double nf = f.lpNorm<Eigen::Infinity>();
    int iter = 0;
    bool step_converged = false;
    while (nf > target && iter < max_iters) {
        const Eigen::MatrixXd jac = fd_jacobian(c, x);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible())
            break; // singular Jacobian: report the last iterate below
        const Eigen::VectorXd dx = lu.solve(-f);

        // the raw residual floor scales with the loop gains; once the Newton
        // step is at rounding level in state units the iterate is done
        if (dx.lpNorm<Eigen::Infinity>() <
            1e-13 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
            step_converged = true;
            break;
        }

        // backtracking line search on the residual norm
        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= 1.0 / 64.0) {
            const Eigen::VectorXd x_try = x + lambda * dx;
            const Eigen::VectorXd f_try = residual_vec(c, x_try);
            const double nf_try = f_try.lpNorm<Eigen::Infinity>();
            if (nf_try < nf || nf_try < target) {
                x = x_try;
                f = f_try;
                nf = nf_try;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        ++iter;
        if (!accepted)
            break;
    }

    eq.iterations = iter;
    eq.residual_norm = nf;
    eq.converged = nf < accept || step_converged;
    eq.unified = unpack_state(mode, to_std(x));
    if (eq.converged) {
        eq.eigenvalues = sorted_eigenvalues(fd_jacobian(c, x));
        eq.stable = eq.eigenvalues.front().real() < 0.0;
    }
    return eq;
}

SettleResult settle_by_simulation(Mode mode, const ModeRefs& refs, const SystemParams& params,
                                  double t_max, double tol,
                                  const std::optional<UnifiedState>& start)
{
    if (!(t_max > 0.0))
        throw std::invalid_argument("t_max must be strictly positive");
    const OdeContext c = make_context(mode, refs, params);
    Eigen::VectorXd x = to_eigen(pack_state(start ? *start : default_equilibrium_guess(mode, refs, params)));

    SettleResult res;
    double t = 0.0;
    double nf = residual_vec(c, x).lpNorm<Eigen::Infinity>();
    while (t < t_max) {
        if (nf < tol) {
            res.settled = true;
            break;
        }
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e3)
            break; // diverged; report unsettled with the last finite-ish state
        x = rk4_step_vec(c, x, kSettleDt);
        t += kSettleDt;
        nf = residual_vec(c, x).lpNorm<Eigen::Infinity>();
    }
    res.state = unpack_state(mode, to_std(x));
    res.t_end = t;
    res.derivative_norm = nf;
    if (nf < tol)
        res.settled = true;
    return res;
}

std::vector<std::complex<double>> linearize(const Equilibrium& eq, const ModeRefs& refs,
                                            const SystemParams& params)
{
    if (!eq.converged)
        throw std::invalid_argument("linearize requires a converged equilibrium");
    const OdeContext c = make_context(eq.mode, refs, params);
    const Eigen::MatrixXd jac = fd_jacobian(c, to_eigen(pack_state(eq.unified)));
    if (!jac.allFinite())
        throw std::runtime_error("closed-loop Jacobian is not finite");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible())
        throw std::runtime_error("closed-loop Jacobian is singular or ill-conditioned");
    return sorted_eigenvalues(jac);
}

const char* basin_class_name(BasinClass c)
{
    switch (c) {
    case BasinClass::Converged: return "converged";
    case BasinClass::Diverged: return "diverged";
    case BasinClass::Undecided: return "undecided";
    }
    return "undecided";
}

BasinMap probe_basin(const Equilibrium& eq, const ModeRefs& refs, const SystemParams& params,
                     const std::vector<std::vector<double>>& offsets,
                     double t_max, double tol)
{
    if (!eq.converged || !eq.stable)
        throw std::invalid_argument("probe_basin requires a converged, stable equilibrium");
    const OdeContext c = make_context(eq.mode, refs, params);
    const Eigen::VectorXd x_eq = to_eigen(pack_state(eq.unified));
    const auto n = x_eq.size();
    constexpr int delta_index = 6;

    BasinMap map;
    map.mode = eq.mode;
    map.points.reserve(offsets.size());

    for (const auto& off : offsets) {
        if (static_cast<Eigen::Index>(off.size()) != n)
            throw std::invalid_argument("basin offset has the wrong dimension");
        BasinPoint pt;
        pt.offset = off;
        Eigen::VectorXd x = x_eq + to_eigen(off);
        double t = 0.0;
        pt.cls = BasinClass::Undecided;
        while (t <= t_max) {
            const double dist = (x - x_eq).lpNorm<Eigen::Infinity>();
            if (dist < tol) {
                pt.cls = BasinClass::Converged;
                pt.settle_time = t;
                break;
            }
            if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 100.0 ||
                std::abs(x[delta_index] - x_eq[delta_index]) > std::numbers::pi) {
                pt.cls = BasinClass::Diverged;
                break;
            }
            x = rk4_step_vec(c, x, kSettleDt);
            t += kSettleDt;
        }
        map.points.push_back(std::move(pt));
    }
    return map;
}

std::string basin_csv(const BasinMap& map)
{
    std::string out;
    const auto labels = state_labels(map.mode);
    for (const auto& l : labels) {
        out += "offset_";
        out += l;
        out += ',';
    }
    out += "classification,settle_time_s\n";
    for (const auto& pt : map.points) {
        for (double v : pt.offset) {
            out += format_roundtrip(v);
            out += ',';
        }
        out += basin_class_name(pt.cls);
        out += ',';
        out += format_roundtrip(pt.cls == BasinClass::Converged ? pt.settle_time : -1.0);
        out += '\n';
    }
    return out;
}

} // namespace gridmode
