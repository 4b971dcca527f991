#include <doctest.h>

#include <numbers>

#include "mogflow/body.hpp"

using namespace mogflow;
using std::numbers::pi;

namespace {

double theta_of(const Vec3& v) {
    double t = std::atan2(v.y, v.x);
    return t < 0 ? t + 2.0 * pi : t;
}

ScalarField ellipse_support(GridPtr g, double a, double b) {
    return ScalarField::from_function(g, [=](const Vec3& v) {
        return std::sqrt(a * a * v.x * v.x + b * b * v.y * v.y);
    });
}

// offset disk: radius 1 centered at (c, 0)
double offset_disk_radial(double c, double xi_angle) {
    double d = c * std::cos(xi_angle);
    return d + std::sqrt(d * d + 1.0 - c * c);
}

}  // namespace

TEST_CASE("make_support_body: disk, translated disk, convexity rejection") {
    auto g = build_grid(1, {256});

    auto disk = make_support_body(ScalarField(g, 1.0));
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(disk.b.a11[i] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(disk.r[i] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(norm(disk.xi[i] - g->nodes[i]) < 1e-10);
    }

    auto shifted = make_support_body(ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.3 * std::cos(theta_of(v)); }));
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(shifted.b.a11[i] == doctest::Approx(1.0).epsilon(1e-7));

    auto bad = ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.9 * std::cos(2.0 * theta_of(v)); });
    CHECK_THROWS_AS(make_support_body(bad), NotConvex);

    CHECK_THROWS_AS(make_support_body(ScalarField(g, -0.5)), NotPositive);
}

TEST_CASE("body caches satisfy the parametrization identities") {
    auto g = build_grid(1, {256});
    auto body = make_support_body(ellipse_support(g, 1.4, 0.8));
    for (std::size_t i = 0; i < g->size(); ++i) {
        // |xi| = 1 and r xi = u x + grad u, componentwise
        CHECK(std::abs(norm(body.xi[i]) - 1.0) < 1e-10);
        Vec3 rhs = g->nodes[i] * body.u[i] + body.grad.ambient_at(i);
        Vec3 lhs = body.xi[i] * body.r[i];
        CHECK(norm(lhs - rhs) < 1e-10);
        // r >= u with equality iff grad u = 0
        CHECK(body.r[i] >= body.u[i] - 1e-14);
    }
}

TEST_CASE("radial_from_support") {
    auto g = build_grid(1, {256});

    auto disk = make_support_body(ScalarField(g, 1.0));
    auto rb = radial_from_support(disk, g);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(rb.r[i] == doctest::Approx(1.0).epsilon(1e-10));

    auto shifted = make_support_body(ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.3 * std::cos(theta_of(v)); }));
    auto rs = radial_from_support(shifted, g);
    std::size_t quarter = g->size() / 4;
    CHECK(rs.r[quarter] == doctest::Approx(std::sqrt(1.0 - 0.09)).epsilon(1e-8));
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(rs.r[i] == doctest::Approx(offset_disk_radial(0.3, theta_of(g->nodes[i]))).epsilon(1e-7));

    // max u = max r and min u = min r (within interpolation tolerance)
    auto body = make_support_body(ellipse_support(g, 1.4, 0.8));
    auto rr = radial_from_support(body, g);
    ScalarField rfield = rr.r;
    CHECK(std::abs(rfield.max() - body.max_u()) < 1e-6);
    CHECK(std::abs(rfield.min() - body.min_u()) < 1e-6);
}

TEST_CASE("support_from_radial and round trips") {
    auto g = build_grid(1, {256});

    RadialBody ball(ScalarField(g, 2.0));
    auto u2 = support_from_radial(ball, g);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(u2.u[i] == doctest::Approx(2.0).epsilon(1e-10));

    // offset disk round trip against the closed form
    auto rvals = ScalarField::from_function(
        g, [](const Vec3& v) { return offset_disk_radial(0.3, theta_of(v)); });
    auto back = support_from_radial(RadialBody(rvals), g);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(back.u[i] == doctest::Approx(1.0 + 0.3 * std::cos(theta_of(g->nodes[i]))).epsilon(1e-5));

    // single-node spike: support of the hull of the sampled points
    std::vector<double> spike(g->size(), 1.0);
    spike[10] = 1.5;
    RadialBody spiked{ScalarField(g, spike)};
    auto hull = support_from_radial(spiked, g);
    CHECK_FALSE(hull.strictly_convex);
    for (std::size_t i = 0; i < g->size(); ++i) {
        double brute = 1.0;  // hull of grid points: max_j r_j <x, xi_j>
        for (std::size_t jj = 0; jj < g->size(); ++jj)
            brute = std::max(brute, spike[jj] * dot(g->nodes[i], g->nodes[jj]));
        CHECK(hull.u[i] >= brute - 1e-9);
        CHECK(hull.u[i] <= brute + 0.05);
    }
}

TEST_CASE("gauss curvature") {
    auto g1 = build_grid(1, {512});
    auto circle = make_support_body(ScalarField(g1, 1.0));
    auto K1 = gauss_curvature(circle);
    for (std::size_t i = 0; i < K1.size(); ++i) CHECK(K1[i] == doctest::Approx(1.0).epsilon(1e-10));

    auto g2 = build_grid(2, {32, 64});
    auto sphere = make_support_body(ScalarField(g2, 2.0));
    auto K2 = gauss_curvature(sphere);
    for (std::size_t i = 0; i < K2.size(); ++i) CHECK(K2[i] == doctest::Approx(0.25).epsilon(1e-10));

    // ellipse a=2, b=1: curvature at the normal e1 equals a/b^2 = 2
    auto body = make_support_body(ellipse_support(g1, 2.0, 1.0));
    auto K = gauss_curvature(body);
    CHECK(K[0] == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(K[g1->size() / 4] == doctest::Approx(1.0 / 4.0).epsilon(1e-4));  // b/a^2 at e2
}

TEST_CASE("wulff shapes") {
    auto g = build_grid(1, {256});

    auto ball = wulff_shape(ScalarField(g, 1.0));
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(ball.u[i] == doctest::Approx(1.0).epsilon(1e-10));

    // idempotent on support functions
    auto usup = ellipse_support(g, 1.3, 0.8);
    auto same = wulff_shape(usup);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(same.u[i] == doctest::Approx(usup[i]).epsilon(1e-6));
    auto gf = build_grid(1, {512});
    auto mild = ScalarField::from_function(
        gf, [](const Vec3& v) { return 1.0 + 0.05 * std::cos(2.0 * theta_of(v)); });
    auto same2 = wulff_shape(mild);
    for (std::size_t i = 0; i < gf->size(); ++i)
        CHECK(same2.u[i] == doctest::Approx(mild[i]).epsilon(1e-8));

    // h = 1 + 0.5 cos(2 theta) is not a support function: the Wulff shape is
    // strictly smaller somewhere and never exceeds h
    auto h = ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.5 * std::cos(2.0 * theta_of(v)); });
    auto w = wulff_shape(h);
    double max_gap = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(w.u[i] <= h[i] + 5e-3);  // slack: interpolation ringing at the hull corners
        max_gap = std::max(max_gap, h[i] - w.u[i]);
    }
    CHECK(max_gap > 0.05);

    // brute-force halfspace-intersection oracle on a dense analytic sample
    const int dense = 16384;
    for (std::size_t i = 0; i < g->size(); i += 37) {
        double xi_ang = theta_of(g->nodes[i]);
        double rb = 1e300;
        for (int j = 0; j < dense; ++j) {
            double xa = 2.0 * pi * j / dense;
            double d = std::cos(xa - xi_ang);
            if (d <= 1e-9) continue;
            rb = std::min(rb, (1.0 + 0.5 * std::cos(2.0 * xa)) / d);
        }
        double ub = 0.0;  // support of the brute-force radial body
        // nested maximization over the same dense directions
        for (int j = 0; j < dense; ++j) {
            double xia = 2.0 * pi * j / dense;
            double d = std::cos(xia - xi_ang);
            if (d <= 0) continue;
            double rr = 1e300;
            for (int k = 0; k < 256; ++k) {
                double xa = 2.0 * pi * k / 256;
                double dd = std::cos(xa - xia);
                if (dd <= 1e-9) continue;
                rr = std::min(rr, (1.0 + 0.5 * std::cos(2.0 * xa)) / dd);
            }
            ub = std::max(ub, rr * d);
        }
        CHECK(w.u[i] == doctest::Approx(ub).epsilon(2e-3));
    }
}

TEST_CASE("widths") {
    auto g = build_grid(1, {256});
    auto disk = make_support_body(ScalarField(g, 1.0));
    auto [w0, w1] = widths(disk);
    CHECK(w0 == doctest::Approx(2.0));
    CHECK(w1 == doctest::Approx(2.0));

    auto shifted = make_support_body(ScalarField::from_function(
        g, [](const Vec3& v) { return 1.0 + 0.3 * std::cos(theta_of(v)); }));
    auto [s0, s1] = widths(shifted);
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(2.0).epsilon(1e-12));

    auto body = make_support_body(ellipse_support(g, 2.0, 1.0));
    auto [e0, e1] = widths(body);
    CHECK(e0 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(e1 == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("cone inequality from the maximum point") {
    auto g = build_grid(1, {256});
    auto body = make_support_body(ellipse_support(g, 1.5, 0.7));
    std::size_t imax = 0;
    for (std::size_t i = 0; i < g->size(); ++i)
        if (body.u[i] > body.u[imax]) imax = i;
    for (std::size_t i = 0; i < g->size(); ++i) {
        double d = dot(g->nodes[i], g->nodes[imax]);
        if (d > 0) CHECK(body.u[i] >= d * body.u[imax] - 1e-12);
    }
}

TEST_CASE("radial resampling identity u = r^2 / sqrt(r^2 + |grad r|^2)") {
    auto g = build_grid(1, {256});
    auto body = make_support_body(ellipse_support(g, 1.4, 0.9));
    auto rb = radial_from_support(body, g);
    auto dr = gradient(rb.r);
    ScalarField drf(g, dr.comp1);
    for (std::size_t i = 0; i < g->size(); i += 7) {
        double rr = sample(rb.r, body.xi[i]);
        double rg = sample(drf, body.xi[i]);
        double expect = rr * rr / std::sqrt(rr * rr + rg * rg);
        CHECK(body.u[i] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("pushforward Jacobian: x-integrals of u det(b)/r^{n+1} transport test functions") {
    auto g = build_grid(1, {512});
    auto body = make_support_body(ellipse_support(g, 1.6, 0.9));
    auto phi = [](const Vec3& v) { return 1.0 + 0.3 * v.x + 0.2 * v.x * v.y; };
    KahanSum lhs;
    for (std::size_t i = 0; i < g->size(); ++i) {
        double jac = body.u[i] * body.det_b[i] / std::pow(body.r[i], g->dim + 1);
        lhs.add(g->weights[i] * jac * phi(body.xi[i]));
    }
    double rhs = integrate(ScalarField::from_function(g, phi));
    CHECK(lhs.value() == doctest::Approx(rhs).epsilon(1e-6));

    auto g2 = build_grid(2, {32, 64});
    auto body2 = make_support_body(ScalarField::from_function(g2, [](const Vec3& v) {
        return std::sqrt(0.81 * (v.x * v.x + v.y * v.y) + 1.44 * v.z * v.z);
    }));
    KahanSum lhs2;
    for (std::size_t i = 0; i < g2->size(); ++i) {
        double jac = body2.u[i] * body2.det_b[i] / std::pow(body2.r[i], g2->dim + 1);
        lhs2.add(g2->weights[i] * jac * phi(body2.xi[i]));
    }
    double rhs2 = integrate(ScalarField::from_function(g2, phi));
    CHECK(lhs2.value() == doctest::Approx(rhs2).epsilon(1e-3));
}
