#include "gridmode/config.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace gridmode {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw std::invalid_argument("config: " + path + ": " + what);
}

void require_object(const json& j, const std::string& path)
{
    if (!j.is_object())
        fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed)
{
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key()))
            fail(path + "." + item.key(), "unknown key");
    }
}

double get_number(const json& j, const std::string& path)
{
    if (!j.is_number())
        fail(path, "expected a number");
    return j.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback)
{
    if (!j.contains(key))
        return fallback;
    return get_number(j.at(key), path + "." + key);
}

int int_or(const json& j, const std::string& path, const char* key, int fallback)
{
    if (!j.contains(key))
        return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool bool_or(const json& j, const std::string& path, const char* key, bool fallback)
{
    if (!j.contains(key))
        return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean())
        fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string string_or(const json& j, const std::string& path, const char* key,
                      const std::string& fallback)
{
    if (!j.contains(key))
        return fallback;
    const json& v = j.at(key);
    if (!v.is_string())
        fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

/// Returns which of the alternative keys is present; at most one is allowed.
const char* pick_alternative(const json& j, const std::string& path,
                             std::initializer_list<const char*> keys)
{
    const char* found = nullptr;
    for (const char* k : keys) {
        if (j.contains(k)) {
            if (found)
                fail(path, std::string("keys ") + found + " and " + k + " are mutually exclusive");
            found = k;
        }
    }
    return found;
}

Mode parse_mode(const std::string& s, const std::string& path)
{
    if (s == "gfl")
        return Mode::Gfl;
    if (s == "gfm")
        return Mode::Gfm;
    fail(path, "expected \"gfl\" or \"gfm\"");
}

Ordering parse_ordering(const std::string& s, const std::string& path)
{
    if (s == "none")
        return Ordering::None;
    if (s == "setpoint-before-switch")
        return Ordering::SetpointBeforeSwitch;
    if (s == "setpoint-after-switch")
        return Ordering::SetpointAfterSwitch;
    fail(path, "expected \"none\", \"setpoint-before-switch\" or \"setpoint-after-switch\"");
}

PerUnitBase parse_base(const json& root)
{
    const std::string path = "base";
    double s_base = 2000.0;
    double v_base = 200.0 * std::numbers::sqrt2 / std::numbers::sqrt3;
    double omega_base = kTwoPi * 50.0;
    if (root.contains("base")) {
        const json& j = root.at("base");
        require_object(j, path);
        check_keys(j, path, {"s_base_w", "v_base_v", "v_base_ll_rms_v",
                             "f_base_hz", "omega_base_rad_s"});
        s_base = number_or(j, path, "s_base_w", s_base);
        if (const char* k = pick_alternative(j, path, {"v_base_v", "v_base_ll_rms_v"})) {
            const double v = get_number(j.at(k), path + "." + k);
            v_base = std::string(k) == "v_base_v" ? v : v * std::numbers::sqrt2 / std::numbers::sqrt3;
        }
        if (const char* k = pick_alternative(j, path, {"f_base_hz", "omega_base_rad_s"})) {
            const double v = get_number(j.at(k), path + "." + k);
            omega_base = std::string(k) == "f_base_hz" ? v * kTwoPi : v;
        }
    }
    if (!(s_base > 0.0))
        fail(path + ".s_base_w", "must be strictly positive");
    if (!(v_base > 0.0))
        fail(path + ".v_base_v", "must be strictly positive");
    if (!(omega_base > 0.0))
        fail(path + ".omega_base_rad_s", "must be strictly positive");
    return PerUnitBase::from(s_base, v_base, omega_base);
}

PlantParams parse_plant(const json& root, const PerUnitBase& base)
{
    const std::string path = "plant";
    PlantParams p;
    p.l_f = 5e-3;
    p.r_f = 0.05;
    p.c_f = 30e-6;
    p.l_g = 4e-3;
    p.r_g = 0.4;
    p.v_g_amp = 200.0 * std::numbers::sqrt2 / std::numbers::sqrt3;
    p.omega_g = kTwoPi * 50.0;
    if (root.contains("plant")) {
        const json& j = root.at("plant");
        require_object(j, path);
        check_keys(j, path, {"l_f_h", "l_f_pu", "r_f_ohm", "r_f_pu", "c_f_f", "c_f_pu",
                             "l_g_h", "l_g_pu", "r_g_ohm", "r_g_pu",
                             "v_g_v", "v_g_ll_rms_v", "v_g_pu", "f_g_hz", "omega_g_rad_s"});

        auto inductance = [&](const char* si_key, const char* pu_key, double fallback) {
            if (const char* k = pick_alternative(j, path, {si_key, pu_key})) {
                const double v = get_number(j.at(k), path + "." + k);
                return std::string(k) == si_key ? v : v * base.z_base / base.omega_base;
            }
            return fallback;
        };
        auto resistance = [&](const char* si_key, const char* pu_key, double fallback) {
            if (const char* k = pick_alternative(j, path, {si_key, pu_key})) {
                const double v = get_number(j.at(k), path + "." + k);
                return std::string(k) == si_key ? v : v * base.z_base;
            }
            return fallback;
        };
        p.l_f = inductance("l_f_h", "l_f_pu", p.l_f);
        p.l_g = inductance("l_g_h", "l_g_pu", p.l_g);
        p.r_f = resistance("r_f_ohm", "r_f_pu", p.r_f);
        p.r_g = resistance("r_g_ohm", "r_g_pu", p.r_g);
        if (const char* k = pick_alternative(j, path, {"c_f_f", "c_f_pu"})) {
            const double v = get_number(j.at(k), path + "." + k);
            p.c_f = std::string(k) == "c_f_f" ? v : v / (base.z_base * base.omega_base);
        }
        if (const char* k = pick_alternative(j, path, {"v_g_v", "v_g_ll_rms_v", "v_g_pu"})) {
            const double v = get_number(j.at(k), path + "." + k);
            if (std::string(k) == "v_g_v")
                p.v_g_amp = v;
            else if (std::string(k) == "v_g_ll_rms_v")
                p.v_g_amp = v * std::numbers::sqrt2 / std::numbers::sqrt3;
            else
                p.v_g_amp = v * base.v_base;
        }
        if (const char* k = pick_alternative(j, path, {"f_g_hz", "omega_g_rad_s"})) {
            const double v = get_number(j.at(k), path + "." + k);
            p.omega_g = std::string(k) == "f_g_hz" ? v * kTwoPi : v;
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return p;
}

ControlParams parse_control(const json& root, const PerUnitBase& base)
{
    const std::string path = "control";
    ControlParams c;
    c.pll = {0.7 * base.omega_base, 50.0 * base.omega_base};
    c.cur = {1.0, 200.0};
    c.volt = {0.5, 5000.0};
    c.m_p = 0.01 * base.omega_base;
    c.p_ref = 0.5;
    c.lpf_cutoff = kTwoPi * 10.0;
    c.omega_ref = base.omega_base;
    if (root.contains("control")) {
        const json& j = root.at("control");
        require_object(j, path);
        check_keys(j, path, {"pll", "current", "voltage", "m_p_rad_s_per_pu", "droop_percent",
                             "p_ref_pu", "lpf_cutoff_rad_s", "lpf_cutoff_hz", "omega_ref_rad_s"});
        if (j.contains("pll")) {
            const json& g = j.at("pll");
            require_object(g, path + ".pll");
            check_keys(g, path + ".pll", {"kp_rad_s_per_pu", "ki_rad_s2_per_pu"});
            c.pll.kp = number_or(g, path + ".pll", "kp_rad_s_per_pu", c.pll.kp);
            c.pll.ki = number_or(g, path + ".pll", "ki_rad_s2_per_pu", c.pll.ki);
        }
        auto loop_gains = [&](const char* key, PiGains fallback) {
            if (!j.contains(key))
                return fallback;
            const json& g = j.at(key);
            const std::string p2 = path + "." + key;
            require_object(g, p2);
            check_keys(g, p2, {"kp_pu", "ki_per_s"});
            return PiGains{number_or(g, p2, "kp_pu", fallback.kp),
                           number_or(g, p2, "ki_per_s", fallback.ki)};
        };
        c.cur = loop_gains("current", c.cur);
        c.volt = loop_gains("voltage", c.volt);
        if (const char* k = pick_alternative(j, path, {"m_p_rad_s_per_pu", "droop_percent"})) {
            const double v = get_number(j.at(k), path + "." + k);
            c.m_p = std::string(k) == "m_p_rad_s_per_pu" ? v : (v / 100.0) * base.omega_base;
        }
        c.p_ref = number_or(j, path, "p_ref_pu", c.p_ref);
        if (const char* k = pick_alternative(j, path, {"lpf_cutoff_rad_s", "lpf_cutoff_hz"})) {
            const double v = get_number(j.at(k), path + "." + k);
            c.lpf_cutoff = std::string(k) == "lpf_cutoff_rad_s" ? v : v * kTwoPi;
        }
        c.omega_ref = number_or(j, path, "omega_ref_rad_s", c.omega_ref);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return c;
}

GflRefs parse_gfl_refs(const json& j, const std::string& path, const GflRefs& fallback,
                       const Limits& limits)
{
    require_object(j, path);
    check_keys(j, path, {"i_d_pu", "i_q_pu"});
    GflRefs r;
    r.i_ref.d = number_or(j, path, "i_d_pu", fallback.i_ref.d);
    r.i_ref.q = number_or(j, path, "i_q_pu", fallback.i_ref.q);
    if (r.i_ref.magnitude() > limits.current_limit_pu)
        fail(path, "current reference magnitude exceeds limits.current_limit_pu");
    return r;
}

GfmRefs parse_gfm_refs(const json& j, const std::string& path, const GfmRefs& fallback,
                       const Limits& limits)
{
    require_object(j, path);
    check_keys(j, path, {"v_d_pu", "v_q_pu", "p_ref_pu"});
    GfmRefs r;
    r.v_ref.d = number_or(j, path, "v_d_pu", fallback.v_ref.d);
    r.v_ref.q = number_or(j, path, "v_q_pu", fallback.v_ref.q);
    r.p_ref = number_or(j, path, "p_ref_pu", fallback.p_ref);
    const double mag = r.v_ref.magnitude();
    if (mag < limits.v_ref_min_pu || mag > limits.v_ref_max_pu)
        fail(path, "voltage reference magnitude outside [v_ref_min_pu, v_ref_max_pu]");
    return r;
}

Scenario parse_scenario(const json& j, const std::string& path, const RunConfig& cfg)
{
    require_object(j, path);
    check_keys(j, path, {"name", "initial_mode", "target_mode", "t_switch_s", "duration_s",
                         "dt_s", "decimation", "flags", "gfl_refs", "gfm_refs", "setpoints",
                         "ordering", "metrics_window_s"});
    Scenario sc;
    sc.name = string_or(j, path, "name", "scenario");
    sc.initial_mode = parse_mode(string_or(j, path, "initial_mode", "gfl"), path + ".initial_mode");
    if (j.contains("target_mode") && !j.at("target_mode").is_null())
        sc.target_mode = parse_mode(string_or(j, path, "target_mode", ""), path + ".target_mode");
    sc.t_switch = number_or(j, path, "t_switch_s", 0.3);
    sc.duration = number_or(j, path, "duration_s", 0.8);
    sc.dt = number_or(j, path, "dt_s", 1e-5);
    sc.decimation = int_or(j, path, "decimation", cfg.output.decimation);
    if (j.contains("flags")) {
        const json& f = j.at("flags");
        const std::string p2 = path + ".flags";
        require_object(f, p2);
        check_keys(f, p2, {"use_sync", "use_amplitude", "use_full_mapping"});
        sc.flags.use_sync = bool_or(f, p2, "use_sync", false);
        sc.flags.use_amplitude = bool_or(f, p2, "use_amplitude", false);
        sc.flags.use_full_mapping = bool_or(f, p2, "use_full_mapping", false);
    } else {
        sc.flags.use_full_mapping = true;
    }
    GflRefs gfl_default{{0.55, 0.0}};
    GfmRefs gfm_default{{1.0, 0.0}, cfg.params.ctrl.p_ref};
    sc.gfl_refs = j.contains("gfl_refs")
                      ? parse_gfl_refs(j.at("gfl_refs"), path + ".gfl_refs", gfl_default, cfg.limits)
                      : gfl_default;
    sc.gfm_refs = j.contains("gfm_refs")
                      ? parse_gfm_refs(j.at("gfm_refs"), path + ".gfm_refs", gfm_default, cfg.limits)
                      : gfm_default;
    if (j.contains("setpoints")) {
        const json& sps = j.at("setpoints");
        if (!sps.is_array())
            fail(path + ".setpoints", "expected an array");
        for (std::size_t k = 0; k < sps.size(); ++k) {
            const std::string p2 = path + ".setpoints[" + std::to_string(k) + "]";
            const json& sp = sps.at(k);
            require_object(sp, p2);
            check_keys(sp, p2, {"t_s", "gfl_refs", "gfm_refs"});
            if (!sp.contains("t_s"))
                fail(p2, "missing t_s");
            const char* kind = pick_alternative(sp, p2, {"gfl_refs", "gfm_refs"});
            if (!kind)
                fail(p2, "expected exactly one of gfl_refs or gfm_refs");
            SetpointChange ch;
            ch.t = get_number(sp.at("t_s"), p2 + ".t_s");
            if (std::string(kind) == "gfl_refs")
                ch.refs = parse_gfl_refs(sp.at("gfl_refs"), p2 + ".gfl_refs", sc.gfl_refs, cfg.limits);
            else
                ch.refs = parse_gfm_refs(sp.at("gfm_refs"), p2 + ".gfm_refs", sc.gfm_refs, cfg.limits);
            sc.setpoints.push_back(ch);
        }
    }
    sc.ordering = parse_ordering(string_or(j, path, "ordering", "none"), path + ".ordering");
    sc.metrics_window = number_or(j, path, "metrics_window_s", 0.2);
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return sc;
}

Scenario default_scenario(const RunConfig& cfg)
{
    Scenario sc;
    sc.name = "case1_gfl_to_gfm";
    sc.initial_mode = Mode::Gfl;
    sc.target_mode = Mode::Gfm;
    sc.t_switch = 0.3;
    sc.duration = 0.8;
    sc.dt = 1e-5;
    sc.decimation = cfg.output.decimation;
    sc.flags.use_full_mapping = true;
    sc.gfl_refs = GflRefs{{0.55, 0.0}};
    sc.gfm_refs = GfmRefs{{1.0, 0.0}, cfg.params.ctrl.p_ref};
    sc.metrics_window = 0.2;
    return sc;
}

json refs_to_json(const ModeRefs& refs)
{
    json j;
    if (std::holds_alternative<GflRefs>(refs)) {
        const auto& r = std::get<GflRefs>(refs);
        j["gfl_refs"] = {{"i_d_pu", r.i_ref.d}, {"i_q_pu", r.i_ref.q}};
    } else {
        const auto& r = std::get<GfmRefs>(refs);
        j["gfm_refs"] = {{"v_d_pu", r.v_ref.d}, {"v_q_pu", r.v_ref.q}, {"p_ref_pu", r.p_ref}};
    }
    return j;
}

} // namespace

RunConfig config_from_json(const json& doc)
{
    require_object(doc, "(root)");
    check_keys(doc, "(root)", {"plant", "base", "control", "limits", "thresholds",
                               "output", "basin", "sweep", "scenarios"});

    RunConfig cfg;
    cfg.params.base = parse_base(doc);
    cfg.params.plant = parse_plant(doc, cfg.params.base);
    cfg.params.ctrl = parse_control(doc, cfg.params.base);

    if (doc.contains("limits")) {
        const json& j = doc.at("limits");
        require_object(j, "limits");
        check_keys(j, "limits", {"current_limit_pu", "v_ref_min_pu", "v_ref_max_pu"});
        cfg.limits.current_limit_pu = number_or(j, "limits", "current_limit_pu", cfg.limits.current_limit_pu);
        cfg.limits.v_ref_min_pu = number_or(j, "limits", "v_ref_min_pu", cfg.limits.v_ref_min_pu);
        cfg.limits.v_ref_max_pu = number_or(j, "limits", "v_ref_max_pu", cfg.limits.v_ref_max_pu);
    }
    if (doc.contains("thresholds")) {
        const json& j = doc.at("thresholds");
        require_object(j, "thresholds");
        check_keys(j, "thresholds", {"smooth_max_dev_pu"});
        cfg.thresholds.smooth_max_dev_pu =
            number_or(j, "thresholds", "smooth_max_dev_pu", cfg.thresholds.smooth_max_dev_pu);
        if (!(cfg.thresholds.smooth_max_dev_pu > 0.0))
            fail("thresholds.smooth_max_dev_pu", "must be strictly positive");
    }
    if (doc.contains("output")) {
        const json& j = doc.at("output");
        require_object(j, "output");
        check_keys(j, "output", {"dir", "decimation"});
        cfg.output.dir = string_or(j, "output", "dir", cfg.output.dir);
        cfg.output.decimation = int_or(j, "output", "decimation", cfg.output.decimation);
        if (cfg.output.decimation < 1)
            fail("output.decimation", "must be >= 1");
    }
    if (doc.contains("basin")) {
        const json& j = doc.at("basin");
        require_object(j, "basin");
        check_keys(j, "basin", {"delta_span_rad", "aux_span", "n_delta", "n_aux", "t_max_s"});
        cfg.basin.delta_span = number_or(j, "basin", "delta_span_rad", cfg.basin.delta_span);
        cfg.basin.aux_span = number_or(j, "basin", "aux_span", cfg.basin.aux_span);
        cfg.basin.n_delta = int_or(j, "basin", "n_delta", cfg.basin.n_delta);
        cfg.basin.n_aux = int_or(j, "basin", "n_aux", cfg.basin.n_aux);
        cfg.basin.t_max = number_or(j, "basin", "t_max_s", cfg.basin.t_max);
        if (cfg.basin.n_delta < 1 || cfg.basin.n_aux < 1)
            fail("basin", "grid counts must be >= 1");
        if (!(cfg.basin.delta_span > 0.0) || !(cfg.basin.aux_span > 0.0) || !(cfg.basin.t_max > 0.0))
            fail("basin", "spans and t_max must be strictly positive");
    }
    if (doc.contains("sweep")) {
        const json& j = doc.at("sweep");
        require_object(j, "sweep");
        check_keys(j, "sweep", {"t_switch_s", "duration_s", "metrics_window_s",
                                "gfl_refs", "gfm_refs"});
        cfg.sweep.t_switch = number_or(j, "sweep", "t_switch_s", cfg.sweep.t_switch);
        cfg.sweep.duration = number_or(j, "sweep", "duration_s", cfg.sweep.duration);
        cfg.sweep.metrics_window = number_or(j, "sweep", "metrics_window_s", cfg.sweep.metrics_window);
        if (j.contains("gfl_refs"))
            cfg.sweep.gfl_refs = parse_gfl_refs(j.at("gfl_refs"), "sweep.gfl_refs",
                                                cfg.sweep.gfl_refs, cfg.limits);
        if (j.contains("gfm_refs"))
            cfg.sweep.gfm_refs = parse_gfm_refs(j.at("gfm_refs"), "sweep.gfm_refs",
                                                cfg.sweep.gfm_refs, cfg.limits);
        if (!(cfg.sweep.t_switch > 0.0) || !(cfg.sweep.t_switch < cfg.sweep.duration))
            fail("sweep", "t_switch_s must lie inside (0, duration_s)");
    }
    if (doc.contains("scenarios")) {
        const json& js = doc.at("scenarios");
        if (!js.is_array())
            fail("scenarios", "expected an array");
        for (std::size_t k = 0; k < js.size(); ++k)
            cfg.scenarios.push_back(
                parse_scenario(js.at(k), "scenarios[" + std::to_string(k) + "]", cfg));
        for (std::size_t a = 0; a < cfg.scenarios.size(); ++a)
            for (std::size_t b = a + 1; b < cfg.scenarios.size(); ++b)
                if (cfg.scenarios[a].name == cfg.scenarios[b].name)
                    fail("scenarios", "duplicate scenario name \"" + cfg.scenarios[a].name + "\"");
    } else {
        cfg.scenarios.push_back(default_scenario(cfg));
    }
    return cfg;
}

RunConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    return config_from_json(doc);
}

RunConfig default_config()
{
    return config_from_json(json::object());
}

json config_to_json(const RunConfig& cfg)
{
    json doc;
    doc["base"] = {{"s_base_w", cfg.params.base.s_base},
                   {"v_base_v", cfg.params.base.v_base},
                   {"omega_base_rad_s", cfg.params.base.omega_base}};
    doc["plant"] = {{"l_f_h", cfg.params.plant.l_f},   {"r_f_ohm", cfg.params.plant.r_f},
                    {"c_f_f", cfg.params.plant.c_f},   {"l_g_h", cfg.params.plant.l_g},
                    {"r_g_ohm", cfg.params.plant.r_g}, {"v_g_v", cfg.params.plant.v_g_amp},
                    {"omega_g_rad_s", cfg.params.plant.omega_g}};
    doc["control"] = {
        {"pll", {{"kp_rad_s_per_pu", cfg.params.ctrl.pll.kp}, {"ki_rad_s2_per_pu", cfg.params.ctrl.pll.ki}}},
        {"current", {{"kp_pu", cfg.params.ctrl.cur.kp}, {"ki_per_s", cfg.params.ctrl.cur.ki}}},
        {"voltage", {{"kp_pu", cfg.params.ctrl.volt.kp}, {"ki_per_s", cfg.params.ctrl.volt.ki}}},
        {"m_p_rad_s_per_pu", cfg.params.ctrl.m_p},
        {"p_ref_pu", cfg.params.ctrl.p_ref},
        {"lpf_cutoff_rad_s", cfg.params.ctrl.lpf_cutoff},
        {"omega_ref_rad_s", cfg.params.ctrl.omega_ref}};
    doc["limits"] = {{"current_limit_pu", cfg.limits.current_limit_pu},
                     {"v_ref_min_pu", cfg.limits.v_ref_min_pu},
                     {"v_ref_max_pu", cfg.limits.v_ref_max_pu}};
    doc["thresholds"] = {{"smooth_max_dev_pu", cfg.thresholds.smooth_max_dev_pu}};
    doc["output"] = {{"dir", cfg.output.dir}, {"decimation", cfg.output.decimation}};
    doc["basin"] = {{"delta_span_rad", cfg.basin.delta_span},
                    {"aux_span", cfg.basin.aux_span},
                    {"n_delta", cfg.basin.n_delta},
                    {"n_aux", cfg.basin.n_aux},
                    {"t_max_s", cfg.basin.t_max}};
    doc["sweep"] = {{"t_switch_s", cfg.sweep.t_switch},
                    {"duration_s", cfg.sweep.duration},
                    {"metrics_window_s", cfg.sweep.metrics_window},
                    {"gfl_refs", {{"i_d_pu", cfg.sweep.gfl_refs.i_ref.d},
                                  {"i_q_pu", cfg.sweep.gfl_refs.i_ref.q}}},
                    {"gfm_refs", {{"v_d_pu", cfg.sweep.gfm_refs.v_ref.d},
                                  {"v_q_pu", cfg.sweep.gfm_refs.v_ref.q},
                                  {"p_ref_pu", cfg.sweep.gfm_refs.p_ref}}}};
    doc["scenarios"] = json::array();
    for (const auto& sc : cfg.scenarios) {
        json j;
        j["name"] = sc.name;
        j["initial_mode"] = mode_name(sc.initial_mode);
        j["target_mode"] = sc.target_mode ? json(mode_name(*sc.target_mode)) : json(nullptr);
        j["t_switch_s"] = sc.t_switch;
        j["duration_s"] = sc.duration;
        j["dt_s"] = sc.dt;
        j["decimation"] = sc.decimation;
        j["flags"] = {{"use_sync", sc.flags.use_sync},
                      {"use_amplitude", sc.flags.use_amplitude},
                      {"use_full_mapping", sc.flags.use_full_mapping}};
        j["gfl_refs"] = {{"i_d_pu", sc.gfl_refs.i_ref.d}, {"i_q_pu", sc.gfl_refs.i_ref.q}};
        j["gfm_refs"] = {{"v_d_pu", sc.gfm_refs.v_ref.d},
                         {"v_q_pu", sc.gfm_refs.v_ref.q},
                         {"p_ref_pu", sc.gfm_refs.p_ref}};
        j["setpoints"] = json::array();
        for (const auto& sp : sc.setpoints) {
            json e = refs_to_json(sp.refs);
            e["t_s"] = sp.t;
            j["setpoints"].push_back(e);
        }
        j["ordering"] = ordering_name(sc.ordering);
        j["metrics_window_s"] = sc.metrics_window;
        doc["scenarios"].push_back(j);
    }
    return doc;
}

std::string emit_config(const RunConfig& cfg)
{
    return config_to_json(cfg).dump(2) + "\n";
}

std::vector<Scenario> sweep_scenarios(const RunConfig& cfg)
{
    struct FlagCase {
        const char* tag;
        MappingFlags flags;
    };
    const FlagCase cases[] = {
        {"full", {false, false, true}},
        {"sync_only", {true, false, false}},
        {"amplitude_only", {false, true, false}},
        {"none", {false, false, false}},
    };
    std::vector<Scenario> out;
    for (Mode from : {Mode::Gfl, Mode::Gfm}) {
        const Mode to = from == Mode::Gfl ? Mode::Gfm : Mode::Gfl;
        for (const auto& fc : cases) {
            Scenario sc;
            sc.name = std::string("sweep_") + mode_name(from) + "_to_" + mode_name(to) + "_" + fc.tag;
            sc.initial_mode = from;
            sc.target_mode = to;
            sc.t_switch = cfg.sweep.t_switch;
            sc.duration = cfg.sweep.duration;
            sc.dt = 1e-5;
            sc.decimation = cfg.output.decimation;
            sc.flags = fc.flags;
            sc.gfl_refs = cfg.sweep.gfl_refs;
            sc.gfm_refs = cfg.sweep.gfm_refs;
            sc.metrics_window = cfg.sweep.metrics_window;
            sc.validate();
            out.push_back(sc);
        }
    }
    return out;
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override: expected key.path=value, got \"" + assignment + "\"");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty())
            throw std::invalid_argument("override: empty key segment in \"" + path + "\"");
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error&) {
                parsed = value; // plain string such as a mode name
            }
            (*node)[key] = parsed;
            return;
        }
        node = &((*node)[key]);
        pos = dot + 1;
    }
}

} // namespace gridmode
