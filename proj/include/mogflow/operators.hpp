#pragma once

#include <numbers>

#include "mogflow/field.hpp"

namespace mogflow {

namespace detail {

inline void matvec(const std::vector<double>& m, const double* x, double* y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = m.data() + j * n;
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += row[k] * x[k];
        y[j] = s;
    }
}

// Gradient and Hessian on the lat-lon grid, differentiated spectrally:
// longitude rows are periodic; colatitude runs along great circles doubled
// through the poles (a meridian continues into the opposite meridian).
struct SphereDerivs {
    std::vector<double> u_phi, u_lon, u_pp, u_ll, a12;
};

inline SphereDerivs sphere_derivs(const SphericalGrid& g, const std::vector<double>& u) {
    int m = g.nlat, l = g.nlon;
    SphereDerivs d;
    d.u_phi.resize(g.size());
    d.u_lon.resize(g.size());
    d.u_pp.resize(g.size());
    d.u_ll.resize(g.size());
    d.a12.resize(g.size());

    // per-row longitude derivatives
    std::vector<double> tmp(l), out1(l), out2(l);
    for (int j = 0; j < m; ++j) {
        const double* row = u.data() + g.id(j, 0);
        matvec(g.dlon1, row, out1.data(), l);
        matvec(g.dlon2, row, out2.data(), l);
        for (int k = 0; k < l; ++k) {
            d.u_lon[g.id(j, k)] = out1[k];
            d.u_ll[g.id(j, k)] = out2[k];
        }
    }

    // w = u_lon / sin(phi) is a smooth frame component across the poles up to
    // a sign flip; its colatitude derivative is the mixed Hessian entry.
    std::vector<double> path(2 * m), dp1(2 * m), dp2(2 * m), wpath(2 * m), dw(2 * m);
    for (int kp = 0; kp < l / 2; ++kp) {
        int ko = kp + l / 2;
        for (int jp = 0; jp < m; ++jp) {
            path[jp] = u[g.id(jp, kp)];
            path[2 * m - 1 - jp] = u[g.id(jp, ko)];
            wpath[jp] = d.u_lon[g.id(jp, kp)] / g.sin_phi[jp];
            wpath[2 * m - 1 - jp] = -d.u_lon[g.id(jp, ko)] / g.sin_phi[jp];
        }
        matvec(g.dpath1, path.data(), dp1.data(), 2 * m);
        matvec(g.dpath2, path.data(), dp2.data(), 2 * m);
        matvec(g.dpath1, wpath.data(), dw.data(), 2 * m);
        for (int jp = 0; jp < m; ++jp) {
            d.u_phi[g.id(jp, kp)] = dp1[jp];
            d.u_phi[g.id(jp, ko)] = -dp1[2 * m - 1 - jp];
            d.u_pp[g.id(jp, kp)] = dp2[jp];
            d.u_pp[g.id(jp, ko)] = dp2[2 * m - 1 - jp];
            d.a12[g.id(jp, kp)] = dw[jp];
            d.a12[g.id(jp, ko)] = dw[2 * m - 1 - jp];
        }
    }
    return d;
}

}  // namespace detail

/// Discrete covariant gradient in the local orthonormal frame (spectral).
inline VecField gradient(const ScalarField& field) {
    const auto& g = *field.grid;
    const auto& u = field.values;
    VecField out;
    out.grid = field.grid;
    out.comp1.resize(g.size());
    if (g.dim == 1) {
        detail::matvec(g.d1, u.data(), out.comp1.data(), g.size());
    } else {
        out.comp2.resize(g.size());
        auto d = detail::sphere_derivs(g, u);
        for (int j = 0; j < g.nlat; ++j)
            for (int k = 0; k < g.nlon; ++k) {
                std::size_t i = g.id(j, k);
                out.comp1[i] = d.u_phi[i];
                out.comp2[i] = d.u_lon[i] / g.sin_phi[j];
            }
    }
    return out;
}

/// Discrete covariant Hessian in the local orthonormal frame (on the circle
/// this is the scalar u'').
inline SymMatField hessian(const ScalarField& field) {
    const auto& g = *field.grid;
    const auto& u = field.values;
    SymMatField out;
    out.grid = field.grid;
    out.a11.resize(g.size());
    if (g.dim == 1) {
        detail::matvec(g.d2, u.data(), out.a11.data(), g.size());
    } else {
        out.a12.resize(g.size());
        out.a22.resize(g.size());
        auto d = detail::sphere_derivs(g, u);
        for (int j = 0; j < g.nlat; ++j) {
            double sp = g.sin_phi[j], cot = g.cos_phi[j] / sp;
            for (int k = 0; k < g.nlon; ++k) {
                std::size_t i = g.id(j, k);
                out.a11[i] = d.u_pp[i];
                out.a12[i] = d.a12[i];
                out.a22[i] = d.u_ll[i] / (sp * sp) + cot * d.u_phi[i];
            }
        }
    }
    return out;
}

struct GradHess {
    VecField grad;
    SymMatField hess;
};

/// Gradient and Hessian in one pass (the sphere machinery is shared).
inline GradHess gradient_and_hessian(const ScalarField& field) {
    const auto& g = *field.grid;
    GradHess out;
    out.grad.grid = field.grid;
    out.hess.grid = field.grid;
    out.grad.comp1.resize(g.size());
    out.hess.a11.resize(g.size());
    if (g.dim == 1) {
        detail::matvec(g.d1, field.values.data(), out.grad.comp1.data(), g.size());
        detail::matvec(g.d2, field.values.data(), out.hess.a11.data(), g.size());
        return out;
    }
    out.grad.comp2.resize(g.size());
    out.hess.a12.resize(g.size());
    out.hess.a22.resize(g.size());
    auto d = detail::sphere_derivs(g, field.values);
    for (int j = 0; j < g.nlat; ++j) {
        double sp = g.sin_phi[j], cot = g.cos_phi[j] / sp;
        for (int k = 0; k < g.nlon; ++k) {
            std::size_t i = g.id(j, k);
            out.grad.comp1[i] = d.u_phi[i];
            out.grad.comp2[i] = d.u_lon[i] / sp;
            out.hess.a11[i] = d.u_pp[i];
            out.hess.a12[i] = d.a12[i];
            out.hess.a22[i] = d.u_ll[i] / (sp * sp) + cot * d.u_phi[i];
        }
    }
    return out;
}

/// Interpolated field value at an arbitrary unit direction. Periodic cubic on
/// the circle, bilinear in (lat, lon) on the sphere.
inline double sample(const ScalarField& field, const Vec3& direction) {
    using std::numbers::pi;
    if (std::abs(norm(direction) - 1.0) > 1e-12)
        throw NotUnitVector("direction must be unit length");
    const auto& g = *field.grid;
    const auto& u = field.values;
    if (g.dim == 1) {
        double th = std::atan2(direction.y, direction.x);
        if (th < 0) th += 2.0 * pi;
        double s = th / g.dtheta;
        int n = static_cast<int>(g.size());
        int j = static_cast<int>(std::floor(s));
        double t = s - j;
        j = ((j % n) + n) % n;
        double um1 = u[(j - 1 + n) % n], u0 = u[j];
        double up1 = u[(j + 1) % n], up2 = u[(j + 2) % n];
        double lm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        double l0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        double l1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        double l2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        return lm1 * um1 + l0 * u0 + l1 * up1 + l2 * up2;
    }
    double ph = std::acos(std::clamp(direction.z, -1.0, 1.0));
    double th = std::atan2(direction.y, direction.x);
    if (th < 0) th += 2.0 * pi;
    auto row_value = [&](int j, double theta) {
        int shift = 0;
        if (j < 0) {
            j = -1 - j;
            shift = g.nlon / 2;
        } else if (j >= g.nlat) {
            j = 2 * g.nlat - 1 - j;
            shift = g.nlon / 2;
        }
        double s = theta / g.dlon;
        int k = static_cast<int>(std::floor(s));
        double t = s - k;
        k = ((k % g.nlon) + g.nlon) % g.nlon;
        int k0 = (k + shift) % g.nlon;
        int k1 = (k + 1 + shift) % g.nlon;
        return (1.0 - t) * u[g.id(j, k0)] + t * u[g.id(j, k1)];
    };
    double s = (ph - 0.5 * g.dphi) / g.dphi;
    int j = static_cast<int>(std::floor(s));
    double t = s - j;
    return (1.0 - t) * row_value(j, th) + t * row_value(j + 1, th);
}

/// Longitudinal spectral filter for the lat-lon grid: per row, removes Fourier
/// modes whose effective wavenumber m/sin(phi) exceeds what the colatitude
/// resolution carries, so explicit steps are not throttled by pole clustering.
/// Zonal content (m = 0) is never touched; no-op on the circle.
class PolarFilter {
  public:
    explicit PolarFilter(GridPtr grid) : grid_(std::move(grid)) {
        const auto& g = *grid_;
        if (g.dim != 2) return;
        int l = g.nlon, m = g.nlat;
        cos_.resize(static_cast<std::size_t>(l / 2 + 1) * l);
        sin_.resize(static_cast<std::size_t>(l / 2 + 1) * l);
        for (int mm = 0; mm <= l / 2; ++mm)
            for (int k = 0; k < l; ++k) {
                double a = mm * k * g.dlon;
                cos_[static_cast<std::size_t>(mm) * l + k] = std::cos(a);
                sin_[static_cast<std::size_t>(mm) * l + k] = std::sin(a);
            }
        mmax_.resize(m);
        for (int j = 0; j < m; ++j)
            mmax_[j] = std::max(1, static_cast<int>(std::floor(m * g.sin_phi[j])));
    }

    bool active() const { return grid_->dim == 2; }

    void apply(std::vector<double>& u) const {
        const auto& g = *grid_;
        if (g.dim != 2) return;
        int l = g.nlon;
        std::vector<double> row(l);
        for (int j = 0; j < g.nlat; ++j) {
            int keep = mmax_[j];
            if (keep >= l / 2) continue;
            double* base = u.data() + g.id(j, 0);
            for (int k = 0; k < l; ++k) row[k] = base[k];
            for (int mm = keep + 1; mm <= l / 2; ++mm) {
                const double* cs = cos_.data() + static_cast<std::size_t>(mm) * l;
                const double* sn = sin_.data() + static_cast<std::size_t>(mm) * l;
                KahanSum sa, sb;
                for (int k = 0; k < l; ++k) {
                    sa.add(row[k] * cs[k]);
                    sb.add(row[k] * sn[k]);
                }
                double scale = (mm == l / 2) ? 1.0 / l : 2.0 / l;
                double a = sa.value() * scale, b = sb.value() * scale;
                for (int k = 0; k < l; ++k) base[k] -= a * cs[k] + b * sn[k];
            }
        }
    }

  private:
    GridPtr grid_;
    std::vector<double> cos_, sin_;
    std::vector<int> mmax_;
};

}  // namespace mogflow
