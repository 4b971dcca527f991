#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "mogflow/grid.hpp"

namespace mogflow {

/// One real value per grid node.
struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid || values.size() != grid->size())
            throw GridMismatch("value count does not match node count");
        for (double x : values)
            if (!std::isfinite(x)) throw Error("non-finite field value");
    }
    ScalarField(GridPtr g, double constant)
        : grid(std::move(g)), values(grid ? grid->size() : 0, constant) {}

    static ScalarField from_function(GridPtr g, const std::function<double(const Vec3&)>& f) {
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) v[i] = f(g->nodes[i]);
        return {std::move(g), std::move(v)};
    }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    double min() const {
        double m = values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    double max() const {
        double m = values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

/// Tangential vector field in the local orthonormal frame (comp2 used for n=2).
struct VecField {
    GridPtr grid;
    std::vector<double> comp1;
    std::vector<double> comp2;

    double norm_at(std::size_t i) const {
        double a = comp1[i];
        double b = grid->dim == 2 ? comp2[i] : 0.0;
        return std::sqrt(a * a + b * b);
    }
    Vec3 ambient_at(std::size_t i) const {
        Vec3 v = grid->frame1[i] * comp1[i];
        if (grid->dim == 2) v = v + grid->frame2[i] * comp2[i];
        return v;
    }
};

/// Symmetric n-by-n matrix per node in the local frame (a12/a22 used for n=2).
struct SymMatField {
    GridPtr grid;
    std::vector<double> a11;
    std::vector<double> a12;
    std::vector<double> a22;

    double det_at(std::size_t i) const {
        if (grid->dim == 1) return a11[i];
        return a11[i] * a22[i] - a12[i] * a12[i];
    }
    std::pair<double, double> eig_at(std::size_t i) const {
        if (grid->dim == 1) return {a11[i], a11[i]};
        double tr = a11[i] + a22[i];
        double d = std::sqrt(std::max(0.0, 0.25 * (a11[i] - a22[i]) * (a11[i] - a22[i]) + a12[i] * a12[i]));
        return {0.5 * tr - d, 0.5 * tr + d};
    }
};

inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (a.get() != b.get()) throw GridMismatch("fields live on different grids");
}

/// Quadrature of `field` (optionally times `weight_field`) over the sphere.
inline double integrate(const ScalarField& field, const ScalarField* weight_field = nullptr) {
    if (weight_field) require_same_grid(field.grid, weight_field->grid);
    KahanSum s;
    const auto& w = field.grid->weights;
    for (std::size_t i = 0; i < field.size(); ++i) {
        double v = w[i] * field.values[i];
        if (weight_field) v *= weight_field->values[i];
        s.add(v);
    }
    return s.value();
}

}  // namespace mogflow
