// mogflow: solves Gauss-curvature-type normalized flows for support functions
// on the sphere and verifies the associated conservation/monotonicity/measure
// identities. Subcommands: solve, check, sweep.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "mogflow/checks.hpp"

using namespace mogflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitMaxSteps = 2;
constexpr int kExitCollapsed = 3;
constexpr int kExitConfig = 4;

RunSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file " + path);
    json j = json::parse(in);
    return RunSpec::parse(j);
}

int status_exit_code(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return kExitOk;
        case FlowStatus::MaxSteps: return kExitMaxSteps;
        case FlowStatus::Collapsed: return kExitCollapsed;
    }
    return kExitConfig;
}

int worker_pool_size() {
    if (const char* env = std::getenv("MOGFLOW_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

struct SolveOutcome {
    int exit_code = kExitConfig;
    json summary;
};

// One full solve with artifact files: series.csv, solution.json, report.json.
SolveOutcome run_solve(const RunSpec& spec, const std::string& out_dir, long max_steps_override) {
    RunSpec s = spec;
    if (max_steps_override > 0) s.max_steps = max_steps_override;
    auto grid = s.make_grid();

    // pre-solve admissibility: a mollified atom measure concentrated on a
    // closed hemisphere cannot drive the flow
    if (!s.f_atoms.empty()) {
        ScalarField f = mollify_measure(s.f_atoms, s.f_kappa, grid);
        double c_mu = hemisphere_min_mass(f);
        double total = integrate(f);
        if (!(c_mu > 1e-3 * total))
            throw ConfigError(
                "target measure is concentrated on a closed hemisphere "
                "(min over directions of the positive-part mass is " +
                std::to_string(c_mu) + " of total " + std::to_string(total) +
                "); the problem has no solution in this class");
    }

    auto cfg = s.make_flow_config(grid);
    json continuation;
    FlowResult result;
    if (cfg.mode == FlowMode::Regularized) {
        ContinuationResult cres = continuation_run(cfg);
        result = std::move(cres.final);
        json stages = json::array();
        for (const auto& st : cres.stages)
            stages.push_back({{"epsilon", st.epsilon},
                              {"status", to_string(st.status)},
                              {"gamma", st.gamma},
                              {"gap_to_prev", st.gap_to_prev},
                              {"w_minus", st.w_minus},
                              {"w_plus", st.w_plus},
                              {"steps", st.steps}});
        continuation = {{"stages", stages},
                        {"widths_in_bracket", cres.widths_in_bracket},
                        {"bracket", {cres.bracket_lo, cres.bracket_hi}}};
    } else {
        result = run_flow(cfg);
    }

    std::filesystem::path dir(out_dir);
    write_file(dir / "series.csv", series_csv(result.series));
    if (result.status == FlowStatus::Converged) {
        auto triple = s.make_triple(grid);
        write_file(dir / "density.csv",
                   density_csv(gauss_image_density(triple, result.body, false)));
    }
    json solution = solution_record(result, s);
    if (!continuation.is_null()) solution["continuation"] = continuation;
    write_json(dir / "solution.json", solution);

    json report;
    report["status"] = to_string(result.status);
    report["gamma"] = result.gamma;
    report["residual_norm"] = result.residual_norm;
    auto [wlo, whi] = widths(result.body);
    report["w_minus"] = wlo;
    report["w_plus"] = whi;
    report["min_u"] = result.body.min_u();
    report["max_u"] = result.body.max_u();
    if (!result.diagnostic.empty()) report["diagnostic"] = result.diagnostic;

    bool checks_ok = true;
    if (!s.checks.empty()) {
        json checks = json::array();
        for (const auto& name : s.checks) {
            CheckReport rep = run_check_suite(name, s);
            checks.push_back(rep.to_json());
            checks_ok = checks_ok && rep.pass();
        }
        report["checks"] = checks;
    }
    write_json(dir / "report.json", report);

    SolveOutcome out;
    out.exit_code = status_exit_code(result.status);
    if (out.exit_code == kExitOk && !checks_ok) out.exit_code = kExitCheckFailed;
    out.summary = {{"status", to_string(result.status)},
                   {"gamma", result.gamma},
                   {"residual_norm", result.residual_norm},
                   {"w_minus", wlo},
                   {"w_plus", whi},
                   {"min_u", result.body.min_u()},
                   {"steps", result.series.empty() ? 0 : result.series.back().step}};
    return out;
}

void set_by_path(json& j, const std::string& dotted, const json& value) {
    json* cur = &j;
    std::size_t pos = 0;
    for (;;) {
        std::size_t dot = dotted.find('.', pos);
        std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        pos = dot + 1;
    }
}

int cmd_solve(const std::string& spec_path, const std::string& out_override,
              long max_steps_override) {
    RunSpec spec = load_spec(spec_path);
    std::string out_dir = out_override.empty() ? spec.out_dir : out_override;
    SolveOutcome outcome = run_solve(spec, out_dir, max_steps_override);
    std::cout << outcome.summary.dump(2) << "\n";
    return outcome.exit_code;
}

int cmd_check(const std::string& suite, const std::string& spec_path,
              const std::string& out_override) {
    RunSpec spec = load_spec(spec_path);
    CheckReport rep = run_check_suite(suite, spec);
    for (const auto& a : rep.assertions)
        std::cout << (a.pass ? "[pass] " : "[FAIL] ") << rep.suite << ": " << a.name
                  << "  (measured " << a.measured << ", threshold " << a.threshold << ")\n";
    std::string out_dir = out_override.empty() ? spec.out_dir : out_override;
    write_json(std::filesystem::path(out_dir) / ("check_" + suite + ".json"), rep.to_json());
    return rep.pass() ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_override, bool strict,
              long max_steps_override) {
    RunSpec base = load_spec(spec_path);
    if (base.sweep_parameters.empty()) throw ConfigError("sweep requires sweep.parameters");
    std::string out_dir = out_override.empty() ? base.out_dir : out_override;

    // cartesian cells in deterministic key order
    std::vector<std::string> keys;
    std::vector<std::size_t> sizes;
    std::size_t total = 1;
    for (const auto& [k, v] : base.sweep_parameters) {
        keys.push_back(k);
        sizes.push_back(v.size());
        total *= v.size();
        if (total > 10000) throw ConfigError("sweep grid exceeds 10^4 cells");
    }

    json base_json = base.to_json();
    base_json.erase("sweep");
    struct Cell {
        std::size_t index;
        json spec_json;
        json params;
    };
    std::vector<Cell> cells;
    for (std::size_t idx = 0; idx < total; ++idx) {
        json cell_spec = base_json;
        json params = json::object();
        std::size_t rem = idx;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const auto& values = base.sweep_parameters.at(keys[k]);
            const json& v = values[rem % sizes[k]];
            rem /= sizes[k];
            set_by_path(cell_spec, keys[k], v);
            params[keys[k]] = v;
        }
        cells.push_back({idx, std::move(cell_spec), std::move(params)});
    }

    std::vector<json> rows(total);
    std::vector<int> codes(total, kExitConfig);
    std::atomic<std::size_t> next{0};
    int pool = std::min<int>(worker_pool_size(), static_cast<int>(total));
    std::vector<std::thread> workers;
    for (int w = 0; w < pool; ++w)
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                json row;
                row["cell"] = cells[i].index;
                row["params"] = cells[i].params;
                try {
                    RunSpec cell_spec = RunSpec::parse(cells[i].spec_json);
                    std::string cell_dir = out_dir + "/cell_" + std::to_string(cells[i].index);
                    SolveOutcome outcome = run_solve(cell_spec, cell_dir, max_steps_override);
                    row["result"] = outcome.summary;
                    codes[i] = outcome.exit_code;
                } catch (const std::exception& e) {
                    row["error"] = e.what();
                    codes[i] = kExitConfig;
                }
                rows[i] = std::move(row);
            }
        });
    for (auto& w : workers) w.join();

    json summary = json::array();
    bool any_failed = false;
    std::string table = "cell";
    for (const auto& k : keys) table += "," + k;
    table += ",status,gamma,residual_norm,w_minus,w_plus,min_u,steps\n";
    for (std::size_t i = 0; i < total; ++i) {
        summary.push_back(rows[i]);
        any_failed = any_failed || codes[i] != kExitOk;
        table += std::to_string(i);
        for (const auto& k : keys) table += "," + rows[i]["params"][k].dump();
        if (rows[i].contains("result")) {
            const json& r = rows[i]["result"];
            table += "," + r["status"].get<std::string>() + "," +
                     detail::fmt17(r["gamma"].get<double>()) + "," +
                     detail::fmt17(r["residual_norm"].get<double>()) + "," +
                     detail::fmt17(r["w_minus"].get<double>()) + "," +
                     detail::fmt17(r["w_plus"].get<double>()) + "," +
                     detail::fmt17(r["min_u"].get<double>()) + "," +
                     std::to_string(r["steps"].get<long>()) + "\n";
        } else {
            table += ",error,,,,,,\n";
        }
    }
    write_json(std::filesystem::path(out_dir) / "sweep.json", summary);
    write_file(std::filesystem::path(out_dir) / "sweep.csv", table);
    std::cout << table;
    return (strict && any_failed) ? kExitCheckFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauss-curvature-type normalized flows for convex bodies on S^n"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, suite;
    bool strict = false, seedless = false;
    long max_steps = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory (overrides spec outputs.dir)");
        cmd->add_flag("--seedless", seedless, "reserved; all numerics are deterministic");
        cmd->add_option("--max-steps", max_steps, "override flow.max_steps");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the flow described by a spec file");
    solve->add_option("spec", spec_path, "spec file (JSON)")->required();
    add_common(solve);

    CLI::App* check = app.add_subcommand("check", "run a named verification suite");
    std::string suites;
    for (const auto& s : check_suite_names()) suites += s + " ";
    check->add_option("suite", suite, "one of: " + suites)->required();
    check->add_option("spec", spec_path, "spec file (JSON)")->required();
    add_common(check);

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("spec", spec_path, "spec file with sweep.parameters")->required();
    sweep->add_flag("--strict", strict, "exit 1 if any cell fails");
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(spec_path, out_dir, max_steps);
        if (check->parsed()) return cmd_check(suite, spec_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(spec_path, out_dir, strict, max_steps);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitConfig;
}
