#include "dupc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace dupc
{

namespace
{

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.count(item.key())) throw ConfigError(std::string("unknown key '") + item.key() + "' in " + section);
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key)) return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception& e)
    {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out)
{
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
    {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v);
    out = v;
}

template <typename T>
json opt_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

ojson variant_json(const Variant& v)
{
    ojson j;
    j["label"] = v.label;
    j["strategy"] = to_string(v.strategy);
    j["P"] = v.P;
    j["C"] = v.C;
    j["C_extra"] = v.C_extra;
    j["C_total"] = v.C_total;
    j["prediction_mode"] = to_string(v.prediction_mode);
    j["derivative_mode"] = to_string(v.derivative_mode);
    return j;
}

Variant variant_from(const json& j)
{
    check_keys(j, "sweep.variants[]",
               {"label", "strategy", "P", "C", "C_extra", "C_total", "prediction_mode", "derivative_mode"});
    Variant v;
    std::string s;
    read(j, "strategy", s);
    if (!s.empty()) v.strategy = strategy_from_string(s);
    v.label = to_string(v.strategy);
    read(j, "label", v.label);
    read(j, "P", v.P);
    read(j, "C", v.C);
    read(j, "C_extra", v.C_extra);
    read(j, "C_total", v.C_total);
    s.clear();
    read(j, "prediction_mode", s);
    if (!s.empty()) v.prediction_mode = prediction_mode_from_string(s);
    s.clear();
    read(j, "derivative_mode", s);
    if (!s.empty()) v.derivative_mode = derivative_mode_from_string(s);
    return v;
}

}  // namespace

RunConfig default_config()
{
    RunConfig c;
    c.tracker.P = 27;
    c.tracker.C = 3;
    c.tracker.k_max = 2000;
    c.sweep.variants = {
        {"correction_only", Strategy::correction_only, 0, 3, 0, 1, PredictionMode::dual_gradient, DerivativeMode::exact},
        {"adupc", Strategy::adupc, 27, 3, 0, 1, PredictionMode::dual_gradient, DerivativeMode::exact},
        {"adupc_bd", Strategy::adupc, 27, 3, 0, 1, PredictionMode::dual_gradient, DerivativeMode::backward_difference},
    };
    return c;
}

ojson to_json(const RunConfig& c)
{
    ojson j;
    const Scenario& s = c.scenario;
    ojson sc;
    sc["kind"] = to_string(s.kind);
    sc["N"] = s.N;
    sc["n"] = s.n;
    sc["amp"] = s.amp;
    sc["omega"] = s.omega;
    sc["seed"] = s.seed;
    sc["a_min"] = s.a_min;
    sc["a_max"] = s.a_max;
    sc["graph"] = {{"expected_degree", s.graph.expected_degree}, {"edge_file", s.graph.edge_file}};
    sc["dim"] = s.dim;
    sc["rows"] = s.rows;
    sc["rank"] = s.rank;
    sc["m"] = s.m;
    sc["L"] = s.L;
    sc["custom"] = s.custom;
    j["scenario"] = sc;

    const TrackerConfig& t = c.tracker;
    ojson tr;
    tr["alpha"] = opt_json(c.alpha);
    tr["beta"] = opt_json(c.beta);
    tr["strategy"] = to_string(t.strategy);
    tr["P"] = t.P;
    tr["C"] = t.C;
    tr["C_extra"] = t.C_extra;
    tr["C_total"] = t.C_total;
    tr["prediction_mode"] = to_string(t.prediction_mode);
    tr["derivative_mode"] = to_string(t.derivative_mode);
    tr["h"] = t.h;
    tr["k_max"] = t.k_max;
    tr["t0"] = t.t0;
    tr["inner_tol"] = t.inner_tol;
    tr["inner_max_iters"] = t.inner_max_iters;
    tr["oracle_tol"] = opt_json(c.oracle_tol);
    j["tracker"] = tr;

    const SweepSpec& w = c.sweep;
    ojson sw;
    sw["h_values"] = w.h_values;
    ojson vs = ojson::array();
    for (const auto& v : w.variants) vs.push_back(variant_json(v));
    sw["variants"] = vs;
    sw["horizon"] = w.horizon;
    sw["tail"] = w.tail;
    sw["oracle_tol"] = w.oracle_tol;
    sw["seeds"] = w.seeds;
    sw["alpha"] = opt_json(w.alpha);
    sw["beta"] = opt_json(w.beta);
    sw["inner_tol"] = w.inner_tol;
    sw["inner_max_iters"] = w.inner_max_iters;
    j["sweep"] = sw;

    const RuntimeBudget& b = c.budget;
    j["budget"] = {{"r1", b.r1}, {"r2", b.r2}, {"t_C", b.t_C}, {"t_P", b.t_P}, {"t_bar", b.t_bar},
                   {"h_values", c.budget_h_values}};
    return j;
}

RunConfig config_from_json(const json& j)
{
    RunConfig c = default_config();
    check_keys(j, "config", {"scenario", "tracker", "sweep", "budget"});

    if (j.contains("scenario"))
    {
        const json& s = j["scenario"];
        check_keys(s, "scenario",
                   {"kind", "N", "n", "amp", "omega", "seed", "a_min", "a_max", "graph", "dim", "rows", "rank", "m", "L",
                    "custom"});
        Scenario& sc = c.scenario;
        std::string kind;
        read(s, "kind", kind);
        if (!kind.empty()) sc.kind = scenario_kind_from_string(kind);
        read(s, "N", sc.N);
        read(s, "n", sc.n);
        read(s, "amp", sc.amp);
        read(s, "omega", sc.omega);
        read(s, "seed", sc.seed);
        read(s, "a_min", sc.a_min);
        read(s, "a_max", sc.a_max);
        if (s.contains("graph"))
        {
            check_keys(s["graph"], "scenario.graph", {"expected_degree", "edge_file"});
            read(s["graph"], "expected_degree", sc.graph.expected_degree);
            read(s["graph"], "edge_file", sc.graph.edge_file);
        }
        read(s, "dim", sc.dim);
        read(s, "rows", sc.rows);
        read(s, "rank", sc.rank);
        read(s, "m", sc.m);
        read(s, "L", sc.L);
        if (s.contains("custom")) sc.custom = s["custom"];
    }

    if (j.contains("tracker"))
    {
        const json& t = j["tracker"];
        check_keys(t, "tracker",
                   {"alpha", "beta", "strategy", "P", "C", "C_extra", "C_total", "prediction_mode", "derivative_mode",
                    "h", "k_max", "t0", "inner_tol", "inner_max_iters", "oracle_tol"});
        TrackerConfig& tc = c.tracker;
        read_opt(t, "alpha", c.alpha);
        read_opt(t, "beta", c.beta);
        std::string s;
        read(t, "strategy", s);
        if (!s.empty()) tc.strategy = strategy_from_string(s);
        read(t, "P", tc.P);
        read(t, "C", tc.C);
        read(t, "C_extra", tc.C_extra);
        read(t, "C_total", tc.C_total);
        s.clear();
        read(t, "prediction_mode", s);
        if (!s.empty()) tc.prediction_mode = prediction_mode_from_string(s);
        s.clear();
        read(t, "derivative_mode", s);
        if (!s.empty()) tc.derivative_mode = derivative_mode_from_string(s);
        read(t, "h", tc.h);
        read(t, "k_max", tc.k_max);
        read(t, "t0", tc.t0);
        read(t, "inner_tol", tc.inner_tol);
        read(t, "inner_max_iters", tc.inner_max_iters);
        read_opt(t, "oracle_tol", c.oracle_tol);
    }

    if (j.contains("sweep"))
    {
        const json& w = j["sweep"];
        check_keys(w, "sweep",
                   {"h_values", "variants", "horizon", "tail", "oracle_tol", "seeds", "alpha", "beta", "inner_tol",
                    "inner_max_iters"});
        SweepSpec& sw = c.sweep;
        read(w, "h_values", sw.h_values);
        if (w.contains("variants"))
        {
            if (!w["variants"].is_array()) throw ConfigError("sweep.variants must be an array");
            sw.variants.clear();
            for (const auto& v : w["variants"]) sw.variants.push_back(variant_from(v));
        }
        read(w, "horizon", sw.horizon);
        read(w, "tail", sw.tail);
        read(w, "oracle_tol", sw.oracle_tol);
        read(w, "seeds", sw.seeds);
        read_opt(w, "alpha", sw.alpha);
        read_opt(w, "beta", sw.beta);
        read(w, "inner_tol", sw.inner_tol);
        read(w, "inner_max_iters", sw.inner_max_iters);
    }

    if (j.contains("budget"))
    {
        const json& b = j["budget"];
        check_keys(b, "budget", {"r1", "r2", "t_C", "t_P", "t_bar", "h_values"});
        read(b, "r1", c.budget.r1);
        read(b, "r2", c.budget.r2);
        read(b, "t_C", c.budget.t_C);
        read(b, "t_P", c.budget.t_P);
        read(b, "t_bar", c.budget.t_bar);
        read(b, "h_values", c.budget_h_values);
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::exception& e)
    {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace dupc
