#include <doctest.h>

#include <numbers>

#include "mogflow/operators.hpp"

using namespace mogflow;
using std::numbers::pi;

namespace {
double theta_of(const Vec3& v) {
    double t = std::atan2(v.y, v.x);
    return t < 0 ? t + 2.0 * pi : t;
}
}  // namespace

TEST_CASE("circle gradient: exact on resolved trig polynomials, spectral on analytic fields") {
    auto g = build_grid(1, {256});
    auto u = ScalarField::from_function(g, [](const Vec3& v) { return std::cos(theta_of(v)); });
    auto du = gradient(u);
    std::size_t quarter = 64;  // theta = pi/2
    CHECK(du.comp1[quarter] == doctest::Approx(-1.0).epsilon(1e-11));

    ScalarField c(g, 3.0);
    auto dc = gradient(c);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(dc.comp1[i]) < 1e-12);

    auto u3 = ScalarField::from_function(g, [](const Vec3& v) { return std::cos(3.0 * theta_of(v)); });
    auto du3 = gradient(u3);
    for (std::size_t i = 0; i < g->size(); ++i) {
        double th = theta_of(g->nodes[i]);
        CHECK(std::abs(du3.comp1[i] + 3.0 * std::sin(3.0 * th)) < 1e-11);
    }

    // observed convergence order on a non-polynomial analytic field far
    // exceeds the 4th-order floor
    double errs[2];
    int k = 0;
    for (int n : {16, 32}) {
        auto gn = build_grid(1, {n});
        auto un = ScalarField::from_function(
            gn, [](const Vec3& v) { return std::exp(std::sin(theta_of(v))); });
        auto dun = gradient(un);
        double emax = 0.0;
        for (std::size_t i = 0; i < gn->size(); ++i) {
            double th = theta_of(gn->nodes[i]);
            emax = std::max(emax,
                            std::abs(dun.comp1[i] - std::cos(th) * std::exp(std::sin(th))));
        }
        errs[k++] = emax;
    }
    double order = std::log2(errs[0] / errs[1]);
    CHECK(order >= 3.8);
}

TEST_CASE("circle hessian: constants, support of a point, analytic field") {
    auto g = build_grid(1, {256});
    ScalarField c(g, 2.5);
    auto hc = hessian(c);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(hc.a11[i] + c[i] == doctest::Approx(2.5).epsilon(1e-11));

    auto upt = ScalarField::from_function(g, [](const Vec3& v) { return std::cos(theta_of(v)); });
    auto hpt = hessian(upt);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(std::abs(hpt.a11[i] + upt[i]) < 1e-10);

    auto u2 = ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.1 * std::cos(2.0 * theta_of(v)); });
    auto h2 = hessian(u2);
    for (std::size_t i = 0; i < g->size(); ++i) {
        double th = theta_of(g->nodes[i]);
        CHECK(h2.a11[i] + u2[i] == doctest::Approx(1.0 - 0.3 * std::cos(2.0 * th)).epsilon(1e-7));
    }
}

TEST_CASE("sphere gradient: exact on resolved fields through the poles") {
    auto g = build_grid(2, {24, 48});
    auto u = ScalarField::from_function(g, [](const Vec3& v) { return std::exp(v.z); });
    auto du = gradient(u);
    for (std::size_t i = 0; i < g->size(); ++i) {
        // d/dphi exp(cos phi) = -sin(phi) exp(cos phi); longitude derivative 0
        double sp = std::sqrt(std::max(0.0, 1.0 - g->nodes[i].z * g->nodes[i].z));
        double expect = -sp * std::exp(g->nodes[i].z);
        CHECK(std::abs(du.comp1[i] - expect) < 1e-10);
        CHECK(std::abs(du.comp2[i]) < 1e-10);
    }

    // non-zonal: u = x has gradient = projection of e1 onto the tangent plane
    auto ux = ScalarField::from_function(g, [](const Vec3& v) { return v.x; });
    auto dux = gradient(ux);
    for (std::size_t i = 0; i < g->size(); ++i) {
        Vec3 e1{1.0, 0.0, 0.0};
        Vec3 tangential = e1 - g->nodes[i] * g->nodes[i].x;
        CHECK(norm(dux.ambient_at(i) - tangential) < 1e-10);
    }
}

TEST_CASE("sphere hessian: exact on resolved fields, translates included") {
    // translate of sphere: u = R + c z has b = hess + u I == R identically
    auto g = build_grid(2, {32, 64});
    double R = 1.0, c = 0.3;
    auto u = ScalarField::from_function(g, [=](const Vec3& v) { return R + c * v.z; });
    auto H = hessian(u);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(H.a11[i] + u[i] == doctest::Approx(R).epsilon(1e-10));
        CHECK(H.a22[i] + u[i] == doctest::Approx(R).epsilon(1e-10));
        CHECK(std::abs(H.a12[i]) < 1e-10);
    }

    // non-zonal translate along e1
    auto g2 = build_grid(2, {24, 48});
    auto ux = ScalarField::from_function(g2, [](const Vec3& v) { return 1.0 + 0.1 * v.x; });
    auto Hx = hessian(ux);
    for (std::size_t i = 0; i < g2->size(); ++i) {
        CHECK(Hx.a11[i] + ux[i] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(Hx.a22[i] + ux[i] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(Hx.a12[i]) < 1e-10);
    }

    // zonal analytic: u = exp(z)
    auto uz = ScalarField::from_function(g2, [](const Vec3& v) { return std::exp(v.z); });
    auto Hz = hessian(uz);
    for (int j = 0; j < g2->nlat; ++j) {
        double sp = g2->sin_phi[j], cp = g2->cos_phi[j];
        double a11 = (sp * sp - cp) * std::exp(cp);
        double a22 = -cp * std::exp(cp);
        for (int k = 0; k < g2->nlon; ++k) {
            std::size_t i = g2->id(j, k);
            CHECK(std::abs(Hz.a11[i] - a11) < 1e-9);
            CHECK(std::abs(Hz.a22[i] - a22) < 1e-9);
            CHECK(std::abs(Hz.a12[i]) < 1e-9);
        }
    }

    // mixed component through the polar rows: u = x z has A12 = sin(phi) sin(theta)
    auto uxz = ScalarField::from_function(g2, [](const Vec3& v) { return 1.0 + v.x * v.z; });
    auto Hxz = hessian(uxz);
    for (int j = 0; j < g2->nlat; ++j)
        for (int k = 0; k < g2->nlon; ++k) {
            double expect = g2->sin_phi[j] * std::sin(k * g2->dlon);
            CHECK(std::abs(Hxz.a12[g2->id(j, k)] - expect) < 1e-9);
        }
}

TEST_CASE("discrete integration by parts: integral of gradient vanishes") {
    auto g = build_grid(1, {128});
    auto u = ScalarField::from_function(g, [](const Vec3& v) {
        double th = theta_of(v);
        return std::exp(std::sin(th)) + 0.3 * std::cos(5.0 * th);
    });
    auto du = gradient(u);
    ScalarField d1(g, du.comp1);
    CHECK(std::abs(integrate(d1)) < 1e-10);
}

TEST_CASE("sample: constants exact, smooth fields at interpolation order") {
    auto g = build_grid(1, {256});
    ScalarField c(g, 4.25);
    CHECK(sample(c, {0.3, std::sqrt(1.0 - 0.09), 0.0}) == doctest::Approx(4.25).epsilon(1e-14));

    auto u = ScalarField::from_function(g, [](const Vec3& v) { return std::cos(theta_of(v)); });
    double th0 = 1.2345;
    CHECK(std::abs(sample(u, {std::cos(th0), std::sin(th0), 0.0}) - std::cos(th0)) < 1e-8);

    CHECK_THROWS_AS(sample(u, Vec3{0.5, 0.0, 0.0}), NotUnitVector);

    auto g2 = build_grid(2, {32, 64});
    auto v2 = ScalarField::from_function(g2, [](const Vec3& v) { return v.z * v.z + 0.2 * v.x; });
    Vec3 dir = normalized({0.4, 0.3, 0.85});
    CHECK(std::abs(sample(v2, dir) - (dir.z * dir.z + 0.2 * dir.x)) < 5e-3);
    // across-pole sampling stays smooth
    Vec3 near_pole = normalized({0.01, -0.02, 0.9995});
    CHECK(std::abs(sample(v2, near_pole) - (near_pole.z * near_pole.z + 0.2 * near_pole.x)) < 5e-3);
}

TEST_CASE("polar filter removes only sub-resolution longitudinal modes") {
    auto g = build_grid(2, {16, 32});
    PolarFilter filter(g);
    REQUIRE(filter.active());

    // zonal field untouched
    auto z = ScalarField::from_function(g, [](const Vec3& v) { return 1.0 + 0.3 * v.z * v.z; });
    auto zc = z.values;
    filter.apply(zc);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(zc[i] == doctest::Approx(z[i]).epsilon(1e-13));

    // m=2 mode survives at mid-latitudes, is removed close to the pole
    auto f = ScalarField::from_function(g, [](const Vec3& v) {
        double th = std::atan2(v.y, v.x);
        return std::cos(2.0 * th);
    });
    auto fc = f.values;
    filter.apply(fc);
    int mid = g->nlat / 2;
    CHECK(std::abs(fc[g->id(mid, 3)] - f[g->id(mid, 3)]) < 1e-12);
    double pole_amp = 0.0;
    for (int k = 0; k < g->nlon; ++k) pole_amp = std::max(pole_amp, std::abs(fc[g->id(0, k)]));
    CHECK(pole_amp < 1e-12);
}
