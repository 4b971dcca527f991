#pragma once

#include <algorithm>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "mogflow/core.hpp"

namespace mogflow {

/// Structured discretization of S^n (n = 1: equispaced angles on the circle,
/// n = 2: latitude-longitude rows at midpoint colatitudes, poles excluded).
///
/// Latitude weights for n = 2 are the interpolatory (Fejer-type) weights on
/// the midpoint rows, so zonal spherical harmonics integrate to their exact
/// values up to degree nlat-1 and the weights sum to exactly |S^2|.
class SphericalGrid {
  public:
    int dim = 1;                    // n
    std::vector<int> resolution;    // per-axis node counts
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<Vec3> frame1;       // e1 (tangent / colatitude direction)
    std::vector<Vec3> frame2;       // e2 (longitude direction, n = 2 only)
    std::vector<std::size_t> antipode;
    std::string operator_name;      // derivative scheme descriptor
    int operator_order = 0;

    // n = 1 layout
    double dtheta = 0.0;

    // n = 2 layout (row-major: index = j * nlon + k)
    int nlat = 0, nlon = 0;
    double dphi = 0.0, dlon = 0.0;
    std::vector<double> phi, sin_phi, cos_phi;
    std::vector<double> lat_weight;

    std::size_t size() const { return nodes.size(); }
    std::size_t id(int j, int k) const { return static_cast<std::size_t>(j) * nlon + k; }
    double surface_area() const { return area_; }

    // Fourier differentiation matrices, row-major.
    // n = 1: d1/d2 are N x N over the circle nodes.
    // n = 2: dlon1/dlon2 are nlon x nlon per latitude row; dpath1/dpath2 are
    // (2 nlat) x (2 nlat) along great circles doubled through the poles.
    std::vector<double> d1, d2;
    std::vector<double> dlon1, dlon2, dpath1, dpath2;

    // Grid spacing governing the explicit-step stability bound. For n = 2 the
    // longitudinal filter keeps retained modes no stiffer than the dphi ones.
    double stencil_h() const { return dim == 1 ? dtheta : dphi; }

    // dt <= safety * h^2 / (stiffness_factor * diffusivity): the factor packs
    // the scheme's maximal symbol. The spectral second derivative peaks at
    // (pi/h)^2 per direction; the longitudinal filter caps the theta symbol
    // at the colatitude one.
    double stiffness_factor() const {
        double p2 = std::numbers::pi * std::numbers::pi;
        return dim == 1 ? 0.5 * p2 : p2;
    }

    static std::shared_ptr<const SphericalGrid> build(int dim, const std::vector<int>& resolution);

  private:
    double area_ = 0.0;
};

using GridPtr = std::shared_ptr<const SphericalGrid>;

namespace detail {

// Fourier differentiation matrices on n equispaced points with spacing h
// (period n h), n even. Diagonals are pinned so row sums vanish exactly and
// constants differentiate to zero.
inline void fourier_diff_matrices(int n, double h, std::vector<double>& m1,
                                  std::vector<double>& m2) {
    using std::numbers::pi;
    std::vector<double> c1(n, 0.0), c2(n, 0.0);
    c2[0] = -pi * pi / (3.0 * h * h) - 1.0 / 6.0;
    for (int m = 1; m < n; ++m) {
        double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        double s = std::sin(0.5 * m * h);
        c1[m] = sgn * 0.5 / std::tan(0.5 * m * h);
        c2[m] = -sgn * 0.5 / (s * s);
    }
    m1.assign(static_cast<std::size_t>(n) * n, 0.0);
    m2.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            int m = ((j - k) % n + n) % n;
            m1[static_cast<std::size_t>(j) * n + k] = m == 0 ? 0.0 : c1[m];
            m2[static_cast<std::size_t>(j) * n + k] = c2[m];
        }
        KahanSum s1, s2;
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            s1.add(m1[static_cast<std::size_t>(j) * n + k]);
            s2.add(m2[static_cast<std::size_t>(j) * n + k]);
        }
        m1[static_cast<std::size_t>(j) * n + j] = -s1.value();
        m2[static_cast<std::size_t>(j) * n + j] = -s2.value();
    }
}

}  // namespace detail

inline std::shared_ptr<const SphericalGrid> SphericalGrid::build(int dim,
                                                                 const std::vector<int>& resolution) {
    using std::numbers::pi;
    if (dim != 1 && dim != 2)
        throw UnsupportedDimension("dim must be 1 or 2, got " + std::to_string(dim));
    auto grid = std::make_shared<SphericalGrid>();
    grid->dim = dim;
    grid->resolution = resolution;

    if (dim == 1) {
        if (resolution.size() != 1)
            throw ConfigError("n=1 grid takes one resolution entry");
        int n = resolution[0];
        if (n < 16) throw ResolutionTooSmall("need at least 16 nodes, got " + std::to_string(n));
        if (n % 2 != 0) throw ResolutionNotEven("node count must be even for antipodal symmetry");
        grid->dtheta = 2.0 * pi / n;
        grid->nodes.resize(n);
        grid->weights.assign(n, grid->dtheta);
        grid->frame1.resize(n);
        grid->antipode.resize(n);
        for (int i = 0; i < n; ++i) {
            double th = i * grid->dtheta;
            grid->nodes[i] = {std::cos(th), std::sin(th), 0.0};
            grid->frame1[i] = {-std::sin(th), std::cos(th), 0.0};
            grid->antipode[i] = static_cast<std::size_t>((i + n / 2) % n);
        }
        detail::fourier_diff_matrices(n, grid->dtheta, grid->d1, grid->d2);
        grid->operator_name = "spectral-fourier";
        grid->operator_order = 4;  // conservative floor; exact on resolved modes
    } else {
        if (resolution.size() != 2)
            throw ConfigError("n=2 grid takes two resolution entries (nlat nlon)");
        int m = resolution[0], l = resolution[1];
        if (m < 16 || l < 16)
            throw ResolutionTooSmall("need at least 16 nodes per axis");
        if (l % 2 != 0) throw ResolutionNotEven("longitude count must be even");
        grid->nlat = m;
        grid->nlon = l;
        grid->dphi = pi / m;
        grid->dlon = 2.0 * pi / l;
        grid->phi.resize(m);
        grid->sin_phi.resize(m);
        grid->cos_phi.resize(m);
        grid->lat_weight.resize(m);
        for (int j = 0; j < m; ++j) {
            double ph = (j + 0.5) * grid->dphi;
            grid->phi[j] = ph;
            grid->sin_phi[j] = std::sin(ph);
            grid->cos_phi[j] = std::cos(ph);
            // Interpolatory weight for \int_0^pi g(phi) sin(phi) dphi on
            // midpoint rows: (2/m)[1 + sum_{even k>=2} 2 cos(k phi)/(1-k^2)].
            KahanSum w;
            w.add(1.0);
            for (int k = 2; k <= m - 1; k += 2)
                w.add(2.0 / (1.0 - double(k) * k) * std::cos(k * ph));
            grid->lat_weight[j] = 2.0 / m * w.value();
        }
        std::size_t total = static_cast<std::size_t>(m) * l;
        grid->nodes.resize(total);
        grid->weights.resize(total);
        grid->frame1.resize(total);
        grid->frame2.resize(total);
        grid->antipode.resize(total);
        for (int j = 0; j < m; ++j) {
            double sp = grid->sin_phi[j], cp = grid->cos_phi[j];
            for (int k = 0; k < l; ++k) {
                double th = k * grid->dlon;
                double ct = std::cos(th), st = std::sin(th);
                std::size_t i = grid->id(j, k);
                grid->nodes[i] = {sp * ct, sp * st, cp};
                grid->frame1[i] = {cp * ct, cp * st, -sp};
                grid->frame2[i] = {-st, ct, 0.0};
                grid->weights[i] = grid->lat_weight[j] * grid->dlon;
                grid->antipode[i] = grid->id(m - 1 - j, (k + l / 2) % l);
            }
        }
        detail::fourier_diff_matrices(l, grid->dlon, grid->dlon1, grid->dlon2);
        detail::fourier_diff_matrices(2 * m, grid->dphi, grid->dpath1, grid->dpath2);
        grid->operator_name = "spectral-double-fourier";
        grid->operator_order = 4;  // conservative floor; exact on resolved modes
    }

    KahanSum area;
    for (double w : grid->weights) area.add(w);
    grid->area_ = area.value();
    return grid;
}

inline GridPtr build_grid(int dim, const std::vector<int>& resolution) {
    return SphericalGrid::build(dim, resolution);
}

}  // namespace mogflow
