#pragma once

#include <limits>

#include "mogflow/operators.hpp"

namespace mogflow {

enum class Validate {
    Strict,        // u > 0 and hess(u) + u I positive definite at every node
    PositiveOnly,  // u > 0 only; hull outputs may have flat spots where the
                   // discrete Hessian jitters around zero
};

/// Convex body with the origin interior, represented by its support function
/// on the normal-direction grid. Caches the gradient, b = hess + u I, the
/// boundary radius r(x) = sqrt(u^2 + |grad u|^2) and the pushed-forward radial
/// direction xi(x) = (u x + grad u)/r.
struct SupportBody {
    GridPtr grid;
    ScalarField u;
    VecField grad;
    SymMatField b;
    std::vector<double> det_b, eig_min, eig_max, r;
    std::vector<Vec3> xi;
    bool strictly_convex = false;

    double min_u() const { return u.min(); }
    double max_u() const { return u.max(); }
    double min_eig() const {
        double m = eig_min[0];
        for (double v : eig_min) m = std::min(m, v);
        return m;
    }
    double max_eig() const {
        double m = eig_max[0];
        for (double v : eig_max) m = std::max(m, v);
        return m;
    }

    static SupportBody build(ScalarField uf, Validate mode = Validate::Strict) {
        SupportBody body;
        body.grid = uf.grid;
        body.u = std::move(uf);
        const auto& g = *body.grid;
        double umin = body.u.min();
        if (!(umin > 0.0))
            throw NotPositive("support function must be positive, min = " + std::to_string(umin));
        auto gh = gradient_and_hessian(body.u);
        body.grad = std::move(gh.grad);
        body.b = std::move(gh.hess);
        for (std::size_t i = 0; i < g.size(); ++i) {
            body.b.a11[i] += body.u[i];
            if (g.dim == 2) body.b.a22[i] += body.u[i];
        }
        std::size_t n = g.size();
        body.det_b.resize(n);
        body.eig_min.resize(n);
        body.eig_max.resize(n);
        body.r.resize(n);
        body.xi.resize(n);
        double max_eig = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            body.det_b[i] = body.b.det_at(i);
            auto [lo, hi] = body.b.eig_at(i);
            body.eig_min[i] = lo;
            body.eig_max[i] = hi;
            max_eig = std::max(max_eig, std::abs(hi));
            double gu2 = body.grad.comp1[i] * body.grad.comp1[i];
            if (g.dim == 2) gu2 += body.grad.comp2[i] * body.grad.comp2[i];
            body.r[i] = std::sqrt(body.u[i] * body.u[i] + gu2);
            Vec3 amb = g.nodes[i] * body.u[i] + body.grad.ambient_at(i);
            body.xi[i] = amb * (1.0 / body.r[i]);
        }
        // relative floor separating genuine convexity loss from FD round-off
        double floor = 1e-10 * std::max(1.0, max_eig);
        body.strictly_convex = true;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (body.eig_min[i] < body.eig_min[worst]) worst = i;
        if (body.eig_min[worst] <= floor) {
            body.strictly_convex = false;
            if (mode == Validate::Strict) {
                const Vec3& v = g.nodes[worst];
                throw NotConvex("hess(u) + u I loses positivity at node " + std::to_string(worst) +
                                " (" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
                                std::to_string(v.z) + "), smallest eigenvalue " +
                                std::to_string(body.eig_min[worst]));
            }
        }
        return body;
    }
};

inline SupportBody make_support_body(ScalarField u) {
    return SupportBody::build(std::move(u), Validate::Strict);
}

/// Body represented by its radial function on a radial-direction grid.
struct RadialBody {
    ScalarField r;

    explicit RadialBody(ScalarField rf) : r(std::move(rf)) {
        if (!(r.min() > 0.0)) throw NotPositive("radial function must be positive");
    }
};

namespace detail {

inline Vec3 direction_from_angles(int dim, double a, double b) {
    if (dim == 1) return {std::cos(a), std::sin(a), 0.0};
    // reflect colatitude through the poles
    for (int guard = 0; guard < 4 && (a < 0.0 || a > std::numbers::pi); ++guard) {
        if (a < 0.0) {
            a = -a;
            b += std::numbers::pi;
        }
        if (a > std::numbers::pi) {
            a = 2.0 * std::numbers::pi - a;
            b += std::numbers::pi;
        }
    }
    double sp = std::sin(a);
    return {sp * std::cos(b), sp * std::sin(b), std::cos(a)};
}

/// Coarse global scan over grid nodes followed by local refinement
/// (golden-section on the circle, coordinate pattern search on the sphere).
inline double minimize_over_sphere(const SphericalGrid& g,
                                   const std::function<double(const Vec3&)>& fn,
                                   Vec3* argmin = nullptr) {
    std::size_t best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = fn(g.nodes[i]);
        if (v < fbest) {
            fbest = v;
            best = i;
        }
    }
    if (g.dim == 1) {
        double t0 = std::atan2(g.nodes[best].y, g.nodes[best].x);
        double lo = t0 - g.dtheta, hi = t0 + g.dtheta;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        double fc = fn(direction_from_angles(1, c, 0)), fd = fn(direction_from_angles(1, d, 0));
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = fn(direction_from_angles(1, c, 0));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = fn(direction_from_angles(1, d, 0));
            }
        }
        double t = 0.5 * (lo + hi);
        Vec3 dir = direction_from_angles(1, t, 0);
        double f = fn(dir);
        if (f > fbest) {
            dir = g.nodes[best];
            f = fbest;
        }
        if (argmin) *argmin = dir;
        return f;
    }
    double a = std::acos(std::clamp(g.nodes[best].z, -1.0, 1.0));
    double b = std::atan2(g.nodes[best].y, g.nodes[best].x);
    double fcur = fbest;
    double step = std::max(g.dphi, g.dlon);
    while (step > 1e-11) {
        bool moved = false;
        const double da[4] = {step, -step, 0.0, 0.0};
        const double db[4] = {0.0, 0.0, step, -step};
        for (int k = 0; k < 4; ++k) {
            double v = fn(direction_from_angles(2, a + da[k], b + db[k]));
            if (v < fcur) {
                fcur = v;
                a += da[k];
                b += db[k];
                moved = true;
                break;
            }
        }
        if (!moved) step *= 0.5;
    }
    Vec3 dir = direction_from_angles(2, a, b);
    if (argmin) *argmin = dir;
    return fcur;
}

}  // namespace detail

/// Radial function of the Wulff shape of a positive field h:
/// r(xi) = min over <x, xi> > 0 of h(x)/<x, xi>. For a support function h this
/// is the body's own radial function.
inline RadialBody radial_from_field(const ScalarField& h, GridPtr radial_grid) {
    if (!(h.min() > 0.0)) throw NotPositive("field must be positive");
    const auto& g = *radial_grid;
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 xi = g.nodes[i];
        auto objective = [&](const Vec3& x) {
            double d = dot(x, xi);
            if (d <= 1e-9) return std::numeric_limits<double>::infinity();
            return sample(h, x) / d;
        };
        r[i] = detail::minimize_over_sphere(*h.grid, objective);
    }
    return RadialBody(ScalarField(std::move(radial_grid), std::move(r)));
}

inline RadialBody radial_from_support(const SupportBody& body, GridPtr radial_grid) {
    return radial_from_field(body.u, std::move(radial_grid));
}

/// Support function of the convex hull of {r(xi) xi}: u(x) = max_xi r(xi) <x, xi>.
inline SupportBody support_from_radial(const RadialBody& body, GridPtr normal_grid,
                                       Validate mode = Validate::PositiveOnly) {
    const auto& g = *normal_grid;
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 x = g.nodes[i];
        auto objective = [&](const Vec3& xi) { return -sample(body.r, xi) * dot(x, xi); };
        u[i] = -detail::minimize_over_sphere(*body.r.grid, objective);
    }
    return SupportBody::build(ScalarField(std::move(normal_grid), std::move(u)), mode);
}

/// Wulff shape generated by h: intersection of half-spaces {<x, xi> <= h(xi)},
/// realized on grids through the radial/support dual pair. Idempotent on
/// support functions of convex bodies.
inline SupportBody wulff_shape(const ScalarField& h) {
    RadialBody rb = radial_from_field(h, h.grid);
    return support_from_radial(rb, h.grid, Validate::PositiveOnly);
}

/// K = 1/det(hess u + u I).
inline ScalarField gauss_curvature(const SupportBody& body) {
    std::vector<double> k(body.grid->size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (!(body.det_b[i] > 0.0))
            throw NotConvex("det(hess u + u I) <= 0 at node " + std::to_string(i));
        k[i] = 1.0 / body.det_b[i];
    }
    return {body.grid, std::move(k)};
}

/// Minimal and maximal widths: min/max over nodes of u(x) + u(-x).
inline std::pair<double, double> widths(const SupportBody& body) {
    const auto& g = *body.grid;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double w = body.u[i] + body.u[g.antipode[i]];
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    return {lo, hi};
}

}  // namespace mogflow
