#pragma once

#include "mogflow/body.hpp"
#include "mogflow/psi_hat.hpp"

namespace mogflow {

using DirectionFn = std::function<double(const Vec3&)>;

namespace detail {
inline double pow_dim(double r, int dim) { return dim == 1 ? r : r * r; }
inline double inv_pow_dim(double r, int dim) { return dim == 1 ? 1.0 / r : 1.0 / (r * r); }
inline double inv_pow_dimp1(double r, int dim) {
    return dim == 1 ? 1.0 / (r * r) : 1.0 / (r * r * r);
}
}  // namespace detail

/// The full problem statement: the pair of Orlicz-type functions, the density
/// of the reference measure and the target density.
struct ProblemTriple {
    int dim = 1;
    MOFunction G;
    MOFunction Psi;
    MOFunction psi;  // z Psi_z, kept alongside Psi
    DirectionFn p_lambda;
    DirectionFn f;

    static ProblemTriple make(int dim, MOFunction G, MOFunction Psi, DirectionFn p_lambda,
                              DirectionFn f) {
        ProblemTriple t;
        t.dim = dim;
        t.G = std::move(G);
        t.Psi = std::move(Psi);
        t.psi = psi_from_Psi(t.Psi);
        t.p_lambda = std::move(p_lambda);
        t.f = std::move(f);
        return t;
    }

    void validate_on(const SphericalGrid& grid) const {
        for (const auto& x : grid.nodes) {
            if (!(p_lambda(x) > 0.0)) throw NotPositive("p_lambda must be positive everywhere");
            if (!(f(x) > 0.0)) throw NotPositive("target density f must be positive everywhere");
        }
    }
};

struct MeasureDensity {
    ScalarField density;  // w.r.t. dx on normal directions
    double total() const { return integrate(density); }
};

/// Dual volume from the radial side: integral of G(r(xi), xi) p_lambda(xi) dxi.
inline double dual_volume(const MOFunction& G, const DirectionFn& p_lambda,
                          const RadialBody& body) {
    const auto& g = *body.r.grid;
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i)
        s.add(g.weights[i] * G.value(body.r[i], g.nodes[i]) * p_lambda(g.nodes[i]));
    return s.value();
}

/// Dual volume evaluated through the body's cached pushforward: the xi-integral
/// transported to normal directions with the Jacobian u det(b) / r^{n+1}.
inline double dual_volume(const MOFunction& G, const DirectionFn& p_lambda,
                          const SupportBody& body) {
    const auto& g = *body.grid;
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double jac = body.u[i] * body.det_b[i] * detail::inv_pow_dimp1(body.r[i], g.dim);
        s.add(g.weights[i] * G.value(body.r[i], body.xi[i]) * p_lambda(body.xi[i]) * jac);
    }
    return s.value();
}

/// Orlicz energy: integral of f(x) Psi(u(x), x) dx.
inline double orlicz_energy(const DirectionFn& f, const MOFunction& Psi, const SupportBody& body) {
    const auto& g = *body.grid;
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i)
        s.add(g.weights[i] * f(g.nodes[i]) * Psi.value(body.u[i], g.nodes[i]));
    return s.value();
}

/// Regularized energy: integral of f(x) PsiHat_eps(u(x), x) dx.
inline double orlicz_energy_eps(const DirectionFn& f, const PsiHat& ph, const SupportBody& body) {
    const auto& g = *body.grid;
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i)
        s.add(g.weights[i] * f(g.nodes[i]) * ph.Psi_hat(body.u[i], g.nodes[i]));
    return s.value();
}

namespace detail {

// denominator of the normalization: integral of r G_z(r, xi) p_lambda(xi) dxi,
// evaluated through the cached pushforward (equals r^{-n} G_z p u K^{-1} in x)
inline double radial_weight_integral(const ProblemTriple& t, const SupportBody& body) {
    const auto& g = *body.grid;
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = t.G.dz(body.r[i], body.xi[i]) * t.p_lambda(body.xi[i]) * body.u[i] *
                   body.det_b[i] / pow_dim(body.r[i], g.dim);
        s.add(g.weights[i] * v);
    }
    return s.value();
}

inline double eta_impl(const ProblemTriple& t,
                       const std::function<double(double, const Vec3&)>& psi_impl,
                       const SupportBody& body) {
    const auto& g = *body.grid;
    KahanSum num;
    for (std::size_t i = 0; i < g.size(); ++i)
        num.add(g.weights[i] * t.f(g.nodes[i]) * psi_impl(body.u[i], g.nodes[i]));
    double den = radial_weight_integral(t, body);
    if (!(den > 0.0)) throw DegenerateDenominator("radial weight integral is not positive");
    return num.value() / den;
}

}  // namespace detail

/// Normalization eta = (integral of f psi(u, x) dx) / (integral of r G_z p_lambda dxi).
inline double eta(const ProblemTriple& t, const SupportBody& body) {
    return detail::eta_impl(t, [&](double z, const Vec3& x) { return t.psi.value(z, x); }, body);
}

/// Same with the regularized psi_hat.
inline double eta_eps(const ProblemTriple& t, const PsiHat& ph, const SupportBody& body) {
    return detail::eta_impl(t, [&](double z, const Vec3& x) { return ph.psi_hat(z, x); }, body);
}

/// Density (w.r.t. dx) of the weighted image measure on normal directions:
/// u r^{-n} G_z(r, xi(x)) p_lambda(xi(x)) det(b); with_psi divides by
/// psi(u(x), x), switching from the log-case measure to the full one.
inline MeasureDensity gauss_image_density(const ProblemTriple& t, const SupportBody& body,
                                          bool with_psi) {
    const auto& g = *body.grid;
    double floor = 1e-12 * std::max(1.0, body.max_u());
    if (!(body.min_u() > floor))
        throw NotInteriorBody("min u is below the interior floor " + std::to_string(floor));
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        d[i] = body.u[i] * t.G.dz(body.r[i], body.xi[i]) * t.p_lambda(body.xi[i]) *
               body.det_b[i] / detail::pow_dim(body.r[i], g.dim);
    if (with_psi) {
        double psi_max = 0.0;
        std::vector<double> pv(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            pv[i] = t.psi.value(body.u[i], g.nodes[i]);
            psi_max = std::max(psi_max, pv[i]);
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!(pv[i] >= 1e-12 * psi_max))
                throw ZeroPsi("psi(u(x), x) vanishes at node " + std::to_string(i));
            d[i] /= pv[i];
        }
    }
    return {ScalarField(body.grid, std::move(d))};
}

/// Masked quadrature of a density over a node set.
inline double measure_of_set(const MeasureDensity& density, const std::vector<bool>& mask) {
    const auto& g = *density.density.grid;
    if (mask.size() != g.size()) throw GridMismatch("mask size does not match grid");
    KahanSum s;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mask[i]) s.add(g.weights[i] * density.density[i]);
    return s.value();
}

struct VariationalReport {
    double fd_derivative = 0.0;       // central difference at eps_fd
    double fd_derivative_half = 0.0;  // central difference at eps_fd / 2
    double measure_integral = 0.0;    // integral of g against the image-measure density
    double rel_gap = 0.0;
};

/// Checks the first-variation identity: perturb base_u by eps g underneath
/// Psi, take Wulff shapes, differentiate the dual volume, and compare with
/// the integral of g against the image-measure density of the base body.
inline VariationalReport variational_check(const ProblemTriple& t, const ScalarField& base_u,
                                           const ScalarField& g_dir, double eps_fd) {
    require_same_grid(base_u.grid, g_dir.grid);
    const auto& g = *base_u.grid;

    auto perturbed_volume = [&](double s) {
        std::vector<double> fe(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            double target = t.Psi.value(base_u[i], g.nodes[i]) + s * g_dir[i];
            fe[i] = invert(t.Psi, target, g.nodes[i], 1e-13);
        }
        RadialBody rb = radial_from_field(ScalarField(base_u.grid, std::move(fe)), base_u.grid);
        return dual_volume(t.G, t.p_lambda, rb);
    };

    VariationalReport rep;
    rep.fd_derivative = (perturbed_volume(eps_fd) - perturbed_volume(-eps_fd)) / (2.0 * eps_fd);
    rep.fd_derivative_half = (perturbed_volume(0.5 * eps_fd) - perturbed_volume(-0.5 * eps_fd)) / eps_fd;

    SupportBody base = SupportBody::build(base_u, Validate::Strict);
    MeasureDensity dens = gauss_image_density(t, base, /*with_psi=*/true);
    KahanSum mi;
    for (std::size_t i = 0; i < g.size(); ++i)
        mi.add(g.weights[i] * g_dir[i] * dens.density[i]);
    rep.measure_integral = mi.value();

    double scale = std::max({std::abs(rep.fd_derivative), std::abs(rep.measure_integral),
                             1e-9 * std::max(1.0, std::abs(perturbed_volume(0.0)))});
    rep.rel_gap = std::abs(rep.fd_derivative - rep.measure_integral) / scale;
    return rep;
}

struct Atom {
    Vec3 direction;
    double mass = 0.0;
};

/// Smooth positive density approximating a discrete measure: one spherical
/// exponential kernel exp(kappa <x, x_i>) per atom, each normalized to its
/// atom's mass against the grid quadrature, so the total mass is preserved.
inline ScalarField mollify_measure(const std::vector<Atom>& atoms, double kappa, GridPtr grid) {
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    const auto& g = *grid;
    std::vector<double> out(g.size(), 0.0);
    for (const auto& atom : atoms) {
        if (!(atom.mass > 0.0)) throw NotPositive("atom masses must be positive");
        std::vector<double> k(g.size());
        KahanSum z;
        for (std::size_t i = 0; i < g.size(); ++i) {
            k[i] = std::exp(kappa * (dot(g.nodes[i], atom.direction) - 1.0));
            z.add(g.weights[i] * k[i]);
        }
        for (std::size_t i = 0; i < g.size(); ++i) out[i] += atom.mass * k[i] / z.value();
    }
    return {std::move(grid), std::move(out)};
}

/// Non-concentration functional: min over directions v of the integral of
/// <x, v>_+ against the density. Zero (up to mollification leakage) exactly
/// when the measure is concentrated on a closed hemisphere.
inline double hemisphere_min_mass(const ScalarField& density) {
    const auto& g = *density.grid;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.size(); ++j) {
        const Vec3 v = g.nodes[j];
        KahanSum s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double d = dot(g.nodes[i], v);
            if (d > 0.0) s.add(g.weights[i] * d * density[i]);
        }
        best = std::min(best, s.value());
    }
    return best;
}

}  // namespace mogflow
