#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mogflow/runspec.hpp"

namespace mogflow {

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Per-accepted-step series, one row per emitted diagnostic. Column order is
/// part of the file contract.
inline std::string series_csv(const std::vector<SeriesRow>& series) {
    std::string out =
        "step,t,dt,eta,J,V_G,residual_norm,min_u,max_u,w_minus,w_plus,min_eig_b,max_eig_b\n";
    for (const auto& r : series) {
        out += std::to_string(r.step);
        for (double v : {r.t, r.dt, r.eta, r.J, r.V_G, r.residual_norm, r.min_u, r.max_u,
                         r.w_minus, r.w_plus, r.min_eig_b, r.max_eig_b}) {
            out += ',';
            out += detail::fmt17(v);
        }
        out += '\n';
    }
    return out;
}

/// Per-node density export: direction components, density value, node weight.
inline std::string density_csv(const MeasureDensity& density) {
    const auto& g = *density.density.grid;
    std::string out = "x1,x2,x3,density,weight\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        out += detail::fmt17(g.nodes[i].x);
        out += ',';
        out += detail::fmt17(g.nodes[i].y);
        out += ',';
        out += detail::fmt17(g.nodes[i].z);
        out += ',';
        out += detail::fmt17(density.density[i]);
        out += ',';
        out += detail::fmt17(g.weights[i]);
        out += '\n';
    }
    return out;
}

inline json grid_descriptor(const SphericalGrid& g) {
    return {{"dim", g.dim}, {"resolution", g.resolution}, {"operators", g.operator_name}};
}

/// Flat body record: grid descriptor plus support values.
inline json body_record(const SupportBody& body) {
    return {{"grid", grid_descriptor(*body.grid)}, {"u", body.u.values}};
}

inline ScalarField body_from_record(const json& j) {
    auto gd = j.at("grid");
    auto grid = build_grid(gd.at("dim").get<int>(), gd.at("resolution").get<std::vector<int>>());
    return ScalarField(grid, j.at("u").get<std::vector<double>>());
}

inline json solution_record(const FlowResult& result, const RunSpec& spec) {
    json j = body_record(result.body);
    j["gamma"] = result.gamma;
    j["tau"] = 1.0 / result.gamma;
    j["status"] = to_string(result.status);
    j["residual_norm"] = result.residual_norm;
    j["steps"] = result.series.empty() ? 0 : result.series.back().step;
    j["spec"] = spec.to_json();
    if (!result.diagnostic.empty()) j["diagnostic"] = result.diagnostic;
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

}  // namespace mogflow
