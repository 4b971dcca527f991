#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "mogflow/expr.hpp"

namespace mogflow {

/// A direction-dependent Orlicz-type function (z, xi) -> F(z, xi) together
/// with its partial derivative in z. `increasing_class` declares membership of
/// the class used by the flows: F >= 0 continuous, F_z > 0 on (0,inf),
/// F(0,.) = 0 and z F_z -> 0 at z = 0.
struct MOFunction {
    std::function<double(double, const Vec3&)> value;
    std::function<double(double, const Vec3&)> dz;
    bool increasing_class = false;
    bool direction_independent = true;
    std::string family;  // descriptor for config round-trips
};

inline MOFunction make_power(double q, std::optional<Expr> direction_weight = {}) {
    if (!(q > 0.0)) throw NonpositiveExponent("power exponent must be > 0");
    MOFunction f;
    f.family = "power";
    f.increasing_class = true;
    f.direction_independent = !direction_weight || direction_weight->constant();
    if (direction_weight) {
        Expr w = *direction_weight;
        f.value = [q, w](double z, const Vec3& xi) { return w.eval(0.0, xi) * std::pow(z, q); };
        f.dz = [q, w](double z, const Vec3& xi) {
            return w.eval(0.0, xi) * q * std::pow(z, q - 1.0);
        };
    } else {
        f.value = [q](double z, const Vec3&) { return std::pow(z, q); };
        f.dz = [q](double z, const Vec3&) { return q * std::pow(z, q - 1.0); };
    }
    return f;
}

inline MOFunction make_orlicz(std::function<double(double)> phi, std::function<double(double)> dphi,
                              bool increasing_class, const std::string& family = "orlicz") {
    MOFunction f;
    f.family = family;
    f.increasing_class = increasing_class;
    f.value = [phi = std::move(phi)](double z, const Vec3&) { return phi(z); };
    f.dz = [dphi = std::move(dphi)](double z, const Vec3&) { return dphi(z); };
    return f;
}

/// The Gauss-image special case Psi = log t (psi == 1). Not in the increasing
/// class: the value is undefined at 0 and negative below 1, but z Psi_z == 1.
inline MOFunction make_log() {
    MOFunction f;
    f.family = "log";
    f.increasing_class = false;
    f.value = [](double z, const Vec3&) { return std::log(z); };
    f.dz = [](double z, const Vec3&) { return 1.0 / z; };
    return f;
}

/// psi = z Psi_z, with psi(0,.) taken as the limit value (0 for the
/// increasing class, 1 for the log family).
inline MOFunction psi_from_Psi(const MOFunction& Psi) {
    MOFunction f;
    f.family = "psi(" + Psi.family + ")";
    f.increasing_class = Psi.increasing_class;
    f.direction_independent = Psi.direction_independent;
    bool zero_limit = Psi.increasing_class;
    auto dz = Psi.dz;
    f.value = [dz, zero_limit](double z, const Vec3& xi) {
        if (z <= 0.0) return zero_limit ? 0.0 : 1e-12 * dz(1e-12, xi);
        return z * dz(z, xi);
    };
    f.dz = [val = f.value](double z, const Vec3& xi) {
        double h = std::max(1e-7, 1e-7 * z);
        double lo = std::max(0.0, z - h);
        return (val(z + h, xi) - val(lo, xi)) / (z + h - lo);
    };
    return f;
}

/// Deterministic direction samples: a Fibonacci spiral on the sphere plus a
/// ring of circle directions, so both grid dimensions are exercised.
inline std::vector<Vec3> sample_directions(int count) {
    std::vector<Vec3> dirs;
    int ring = count / 4;
    for (int i = 0; i < ring; ++i) {
        double th = 2.0 * std::numbers::pi * i / ring;
        dirs.push_back({std::cos(th), std::sin(th), 0.0});
    }
    int spiral = count - ring;
    double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < spiral; ++i) {
        double zc = 1.0 - 2.0 * (i + 0.5) / spiral;
        double rad = std::sqrt(std::max(0.0, 1.0 - zc * zc));
        double th = golden * i;
        dirs.push_back({rad * std::cos(th), rad * std::sin(th), zc});
    }
    return dirs;
}

/// Monotone inversion of y = F(z, xi) in z: bracket expansion, bisection,
/// then derivative refinement. Accuracy |F(z) - y| <= tol * max(1, |y|).
inline double invert(const MOFunction& F, double y, const Vec3& xi, double tol = 1e-12) {
    auto f = [&](double z) { return F.value(z, xi); };
    double lo, hi;
    if (F.increasing_class) {
        if (y < 0.0) throw InversionOutOfRange("target below range of an increasing-class function");
        if (y == 0.0) return 0.0;
        lo = 0.0;
        hi = 1.0;
    } else {
        lo = 1e-300;
        hi = 1.0;
    }
    int guard = 0;
    while (f(hi) < y) {
        hi *= 2.0;
        if (++guard > 60) throw OutOfRange("target exceeds function range at bracket cap");
    }
    if (!F.increasing_class) {
        guard = 0;
        while (f(lo) > y) {
            lo = lo > 0.0 ? lo * 0.5 : -1.0;
            if (lo < 1e-308 || ++guard > 1200)
                throw OutOfRange("target below function range at bracket floor");
        }
    }
    // monotonicity spot check on the bracket
    double prev = f(std::max(lo, hi * 1e-9));
    for (int i = 1; i <= 8; ++i) {
        double zc = std::max(lo, hi * 1e-9) + (hi - std::max(lo, hi * 1e-9)) * i / 8.0;
        double fc = f(zc);
        if (fc < prev - 1e-12 * (std::abs(fc) + std::abs(prev)))
            throw NotMonotone("function is not increasing on the bracket");
        prev = fc;
    }
    double a = lo, b = hi;
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (std::abs(fm - y) <= tol * std::max(1.0, std::abs(y))) {
            // derivative polish
            for (int k = 0; k < 3; ++k) {
                double d = F.dz(m, xi);
                if (!std::isfinite(d) || d <= 0.0) break;
                double step = (f(m) - y) / d;
                double next = m - step;
                if (next <= a || next >= b) break;
                m = next;
            }
            return m;
        }
        (fm < y ? a : b) = m;
        if (b - a < 1e-16 * std::max(1.0, b)) return 0.5 * (a + b);
    }
    return 0.5 * (a + b);
}

struct SampleSpec {
    double z_min = 1e-8;
    double z_max = 10.0;
    int n_z = 64;
    int n_dirs = 24;
    int growth_steps = 40;  // probe sequence z = 2^{-k}, k = 1..growth_steps
};

struct CertifyReport {
    bool pass = true;
    std::string condition;
    std::string witness;
    std::vector<double> trend;
};

enum class ClassCondition { IncreasingClassZero, PsiComp };

/// Sampled pass/fail certification of the declared class properties.
inline CertifyReport certify(const MOFunction& F, ClassCondition cond,
                             const SampleSpec& spec = {}) {
    CertifyReport rep;
    auto dirs = sample_directions(spec.n_dirs);
    if (cond == ClassCondition::IncreasingClassZero) {
        rep.condition = "increasing-class-zero";
        for (const auto& xi : dirs) {
            double v0 = F.value(0.0, xi);
            if (!(std::abs(v0) < 1e-12)) {
                rep.pass = false;
                rep.witness = "F(0, xi) = " + std::to_string(v0);
                return rep;
            }
        }
        for (int iz = 0; iz < spec.n_z; ++iz) {
            double z = spec.z_min * std::pow(spec.z_max / spec.z_min, double(iz) / (spec.n_z - 1));
            for (const auto& xi : dirs) {
                if (!(F.dz(z, xi) > 0.0)) {
                    rep.pass = false;
                    rep.witness = "F_z <= 0 at z = " + std::to_string(z);
                    return rep;
                }
            }
        }
        double prev_max = 1e300;
        for (int k = 1; k <= spec.growth_steps; ++k) {
            double z = std::pow(2.0, -k);
            double m = 0.0;
            for (const auto& xi : dirs) m = std::max(m, z * F.dz(z, xi));
            rep.trend.push_back(m);
            prev_max = m;
        }
        if (!(prev_max < 1e-6)) {
            rep.pass = false;
            rep.witness = "z F_z does not vanish along z = 2^-k (tail " + std::to_string(prev_max) + ")";
        }
        return rep;
    }
    rep.condition = "psi-comp";
    for (const auto& xi : dirs) {
        double prev = F.value(1.0, xi);
        bool grew = true;
        for (int k = 1; k <= 30; ++k) {
            double v = F.value(std::pow(2.0, k), xi);
            if (!(v > prev)) grew = false;
            prev = v;
        }
        rep.trend.push_back(prev);
        if (!grew || !(prev > 1e6)) {
            rep.pass = false;
            rep.witness = "Psi(s, xi) does not grow without bound";
            return rep;
        }
    }
    return rep;
}

struct GrowthReport {
    int condition = 2;          // 1: s G_z / psi diverges at 0+; 2: stays bounded
    std::vector<double> trend;  // min over sampled xi of s G_z / psi along s = 2^-k
};

/// Sampled trend of s G_z(s,.) / psi(s,.) as s -> 0+, deciding which growth
/// condition the pair (G, Psi) satisfies. Divergence selects condition 1.
inline GrowthReport classify_growth(const MOFunction& G, const MOFunction& Psi,
                                    const SampleSpec& spec = {}) {
    GrowthReport rep;
    MOFunction psi = psi_from_Psi(Psi);
    auto dirs = sample_directions(spec.n_dirs);
    for (int k = 1; k <= spec.growth_steps; ++k) {
        double s = std::pow(2.0, -k);
        double m = 1e300;
        for (const auto& xi : dirs) {
            double num = s * G.dz(s, xi);
            double den = psi.value(s, xi);
            m = std::min(m, den > 0.0 ? num / den : 1e300);
        }
        rep.trend.push_back(m);
    }
    double head = rep.trend.front(), tail = rep.trend.back();
    bool diverges = tail > 1e3 && tail > 10.0 * head;
    rep.condition = diverges ? 1 : 2;
    return rep;
}

}  // namespace mogflow
