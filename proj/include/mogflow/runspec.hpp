#pragma once

#include <json.hpp>

#include "mogflow/flow.hpp"

namespace mogflow {

using nlohmann::json;

/// Declarative problem description parsed from a JSON spec file. Unknown keys
/// are rejected; parse -> serialize -> parse is the identity.
struct RunSpec {
    // problem
    std::string g_family = "power";
    double g_exponent = 2.0;
    std::string g_weight;  // optional expression a(xi)
    std::string psi_family = "power";
    double psi_exponent = 2.0;
    std::string f_expression = "1";
    std::vector<Atom> f_atoms;  // alternative to the expression
    double f_kappa = 0.0;
    std::string p_lambda_expression = "1";

    // grid
    int dim = 1;
    std::vector<int> resolution{256};

    // initial body
    std::string initial_type = "ball";
    double initial_radius = 1.0;
    double initial_a = 1.2, initial_b = 0.9;
    std::string initial_expression;

    // flow
    std::string mode = "plain";
    double dt_init = 1e-3, dt_min = 1e-12, dt_max = 0.05, safety = 0.45, dt_scale = 1.0;
    double tol_residual = 1e-4, tol_energy_slope = 1e-9, u_floor_rel = 1e-6;
    long max_steps = 400000;
    int epsilon_stages = 6;
    double epsilon0 = 0.0;  // 0 = auto: min(delta/2, c0/10)
    std::vector<double> epsilon_schedule;

    // outputs and post-solve checks
    std::string out_dir = "out";
    std::vector<std::string> checks;

    // sweep: dotted spec paths to lists of values
    std::map<std::string, std::vector<json>> sweep_parameters;

    static RunSpec parse(const json& j);
    static RunSpec parse_text(const std::string& text) { return parse(json::parse(text)); }
    json to_json() const;

    GridPtr make_grid() const { return build_grid(dim, resolution); }
    MOFunction make_G() const { return make_family(g_family, g_exponent, g_weight); }
    MOFunction make_Psi() const { return make_family(psi_family, psi_exponent, ""); }

    DirectionFn make_p_lambda() const {
        Expr e = Expr::parse(p_lambda_expression);
        return [e](const Vec3& xi) { return e.eval(0.0, xi); };
    }

    DirectionFn make_f(const GridPtr& grid) const {
        if (!f_atoms.empty()) {
            auto field = std::make_shared<ScalarField>(mollify_measure(f_atoms, f_kappa, grid));
            return [field](const Vec3& x) { return sample(*field, x); };
        }
        Expr e = Expr::parse(f_expression);
        return [e](const Vec3& x) { return e.eval(0.0, x); };
    }

    ProblemTriple make_triple(const GridPtr& grid) const {
        return ProblemTriple::make(dim, make_G(), make_Psi(), make_p_lambda(), make_f(grid));
    }

    ScalarField make_initial(const GridPtr& grid) const {
        if (initial_type == "ball") {
            return ScalarField(grid, initial_radius);
        }
        if (initial_type == "ellipse") {
            if (dim != 1) throw ConfigError("initial type 'ellipse' requires dim = 1");
            double a = initial_a, b = initial_b;
            return ScalarField::from_function(grid, [a, b](const Vec3& v) {
                return std::sqrt(a * a * v.x * v.x + b * b * v.y * v.y);
            });
        }
        if (initial_type == "spheroid") {
            if (dim != 2) throw ConfigError("initial type 'spheroid' requires dim = 2");
            double a = initial_a, b = initial_b;  // a: polar semi-axis, b: equatorial
            return ScalarField::from_function(grid, [a, b](const Vec3& v) {
                return std::sqrt(b * b * (v.x * v.x + v.y * v.y) + a * a * v.z * v.z);
            });
        }
        if (initial_type == "expression") {
            Expr e = Expr::parse(initial_expression);
            return ScalarField::from_function(grid, [e](const Vec3& v) { return e.eval(0.0, v); });
        }
        throw ConfigError("unknown initial type '" + initial_type + "'");
    }

    FlowConfig make_flow_config(const GridPtr& grid) const {
        FlowConfig cfg;
        cfg.triple = make_triple(grid);
        cfg.initial_u = make_initial(grid);
        cfg.mode = mode == "regularized" ? FlowMode::Regularized : FlowMode::Plain;
        cfg.dt_init = dt_init;
        cfg.dt_min = dt_min;
        cfg.dt_max = dt_max;
        cfg.safety = safety;
        cfg.dt_scale = dt_scale;
        cfg.tol_residual = tol_residual;
        cfg.tol_energy_slope = tol_energy_slope;
        cfg.max_steps = max_steps;
        cfg.u_floor_rel = u_floor_rel;
        if (cfg.mode == FlowMode::Regularized) {
            if (!epsilon_schedule.empty()) {
                cfg.epsilon_schedule = epsilon_schedule;
            } else {
                double delta = PsiHat::find_delta(cfg.triple.G, sample_directions(64));
                double c0 = cfg.initial_u.min();  // min u = min r
                double e0 = epsilon0 > 0.0 ? epsilon0 : std::min(0.5 * delta, c0 / 10.0);
                cfg.epsilon_schedule.resize(epsilon_stages);
                for (int k = 0; k < epsilon_stages; ++k)
                    cfg.epsilon_schedule[k] = e0 * std::pow(2.0, -k);
            }
        }
        return cfg;
    }

  private:
    static MOFunction make_family(const std::string& family, double exponent,
                                  const std::string& weight) {
        if (family == "power") {
            if (weight.empty()) return make_power(exponent);
            return make_power(exponent, Expr::parse(weight));
        }
        if (family == "log") return make_log();
        if (family == "tlog1p")
            return make_orlicz([](double t) { return t * std::log1p(t); },
                               [](double t) { return std::log1p(t) + t / (1.0 + t); }, true,
                               "tlog1p");
        if (family == "expm1")
            return make_orlicz([](double t) { return std::expm1(t); },
                               [](double t) { return std::exp(t); }, true, "expm1");
        throw ConfigError("unknown function family '" + family + "'");
    }
};

namespace detail {

inline void require_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunSpec RunSpec::parse(const json& j) {
    detail::require_keys(j, "spec",
                         {"problem", "grid", "initial", "flow", "outputs", "checks", "sweep"});
    RunSpec s;
    if (j.contains("problem")) {
        const json& p = j.at("problem");
        detail::require_keys(p, "problem", {"G", "Psi", "f", "p_lambda"});
        if (p.contains("G")) {
            detail::require_keys(p.at("G"), "problem.G", {"family", "exponent", "weight"});
            detail::maybe(p.at("G"), "family", s.g_family);
            detail::maybe(p.at("G"), "exponent", s.g_exponent);
            detail::maybe(p.at("G"), "weight", s.g_weight);
        }
        if (p.contains("Psi")) {
            detail::require_keys(p.at("Psi"), "problem.Psi", {"family", "exponent"});
            detail::maybe(p.at("Psi"), "family", s.psi_family);
            detail::maybe(p.at("Psi"), "exponent", s.psi_exponent);
        }
        if (p.contains("f")) {
            detail::require_keys(p.at("f"), "problem.f", {"expression", "atoms", "kappa"});
            detail::maybe(p.at("f"), "expression", s.f_expression);
            detail::maybe(p.at("f"), "kappa", s.f_kappa);
            if (p.at("f").contains("atoms")) {
                for (const json& a : p.at("f").at("atoms")) {
                    detail::require_keys(a, "problem.f.atoms[]", {"direction", "mass"});
                    auto d = a.at("direction").get<std::vector<double>>();
                    if (d.size() != 3) throw ConfigError("atom direction must have 3 components");
                    Vec3 v{d[0], d[1], d[2]};
                    double n = norm(v);
                    if (!(n > 0)) throw ConfigError("atom direction must be nonzero");
                    s.f_atoms.push_back({v * (1.0 / n), a.at("mass").get<double>()});
                }
                if (!(s.f_kappa > 0.0))
                    throw ConfigError("problem.f.kappa must be positive with atoms");
            }
        }
        if (p.contains("p_lambda")) {
            detail::require_keys(p.at("p_lambda"), "problem.p_lambda", {"expression"});
            detail::maybe(p.at("p_lambda"), "expression", s.p_lambda_expression);
        }
    }
    if (j.contains("grid")) {
        detail::require_keys(j.at("grid"), "grid", {"dim", "resolution"});
        detail::maybe(j.at("grid"), "dim", s.dim);
        detail::maybe(j.at("grid"), "resolution", s.resolution);
    }
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        detail::require_keys(i, "initial", {"type", "radius", "a", "b", "u"});
        detail::maybe(i, "type", s.initial_type);
        detail::maybe(i, "radius", s.initial_radius);
        detail::maybe(i, "a", s.initial_a);
        detail::maybe(i, "b", s.initial_b);
        detail::maybe(i, "u", s.initial_expression);
    }
    if (j.contains("flow")) {
        const json& f = j.at("flow");
        detail::require_keys(f, "flow",
                             {"mode", "dt_init", "dt_min", "dt_max", "safety", "dt_scale",
                              "tol_residual", "tol_energy_slope", "max_steps", "u_floor_rel",
                              "epsilon_stages", "epsilon0", "epsilon_schedule"});
        detail::maybe(f, "mode", s.mode);
        if (s.mode != "plain" && s.mode != "regularized")
            throw ConfigError("flow.mode must be 'plain' or 'regularized'");
        detail::maybe(f, "dt_init", s.dt_init);
        detail::maybe(f, "dt_min", s.dt_min);
        detail::maybe(f, "dt_max", s.dt_max);
        detail::maybe(f, "safety", s.safety);
        detail::maybe(f, "dt_scale", s.dt_scale);
        detail::maybe(f, "tol_residual", s.tol_residual);
        detail::maybe(f, "tol_energy_slope", s.tol_energy_slope);
        detail::maybe(f, "max_steps", s.max_steps);
        detail::maybe(f, "u_floor_rel", s.u_floor_rel);
        detail::maybe(f, "epsilon_stages", s.epsilon_stages);
        detail::maybe(f, "epsilon0", s.epsilon0);
        detail::maybe(f, "epsilon_schedule", s.epsilon_schedule);
    }
    if (j.contains("outputs")) {
        detail::require_keys(j.at("outputs"), "outputs", {"dir"});
        detail::maybe(j.at("outputs"), "dir", s.out_dir);
    }
    if (j.contains("checks")) s.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("sweep")) {
        detail::require_keys(j.at("sweep"), "sweep", {"parameters"});
        if (j.at("sweep").contains("parameters"))
            for (auto it = j.at("sweep").at("parameters").begin();
                 it != j.at("sweep").at("parameters").end(); ++it)
                s.sweep_parameters[it.key()] = it.value().get<std::vector<json>>();
    }
    return s;
}

inline json RunSpec::to_json() const {
    json j;
    j["problem"]["G"]["family"] = g_family;
    j["problem"]["G"]["exponent"] = g_exponent;
    if (!g_weight.empty()) j["problem"]["G"]["weight"] = g_weight;
    j["problem"]["Psi"]["family"] = psi_family;
    j["problem"]["Psi"]["exponent"] = psi_exponent;
    if (!f_atoms.empty()) {
        for (const auto& a : f_atoms)
            j["problem"]["f"]["atoms"].push_back(
                {{"direction", {a.direction.x, a.direction.y, a.direction.z}}, {"mass", a.mass}});
        j["problem"]["f"]["kappa"] = f_kappa;
    } else {
        j["problem"]["f"]["expression"] = f_expression;
    }
    j["problem"]["p_lambda"]["expression"] = p_lambda_expression;
    j["grid"]["dim"] = dim;
    j["grid"]["resolution"] = resolution;
    j["initial"]["type"] = initial_type;
    if (initial_type == "ball") j["initial"]["radius"] = initial_radius;
    if (initial_type == "ellipse" || initial_type == "spheroid") {
        j["initial"]["a"] = initial_a;
        j["initial"]["b"] = initial_b;
    }
    if (initial_type == "expression") j["initial"]["u"] = initial_expression;
    j["flow"]["mode"] = mode;
    j["flow"]["dt_init"] = dt_init;
    j["flow"]["dt_min"] = dt_min;
    j["flow"]["dt_max"] = dt_max;
    j["flow"]["safety"] = safety;
    j["flow"]["dt_scale"] = dt_scale;
    j["flow"]["tol_residual"] = tol_residual;
    j["flow"]["tol_energy_slope"] = tol_energy_slope;
    j["flow"]["max_steps"] = max_steps;
    j["flow"]["u_floor_rel"] = u_floor_rel;
    if (mode == "regularized") {
        j["flow"]["epsilon_stages"] = epsilon_stages;
        if (epsilon0 > 0.0) j["flow"]["epsilon0"] = epsilon0;
        if (!epsilon_schedule.empty()) j["flow"]["epsilon_schedule"] = epsilon_schedule;
    }
    j["outputs"]["dir"] = out_dir;
    if (!checks.empty()) j["checks"] = checks;
    if (!sweep_parameters.empty()) {
        json params = json::object();
        for (const auto& [k, v] : sweep_parameters) params[k] = v;
        j["sweep"]["parameters"] = params;
    }
    return j;
}

}  // namespace mogflow
