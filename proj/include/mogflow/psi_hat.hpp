#pragma once

#include "mogflow/mo_function.hpp"

namespace mogflow {

namespace detail {

// Adaptive Gauss-Legendre (7-point, interval-halving error estimate).
inline double gauss7(const std::function<double(double)>& f, double a, double b) {
    static const double xs[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                                 0.0,
                                 0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
    static const double ws[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                                 0.4179591836734694,
                                 0.3818300505051189, 0.2797053914892766, 0.1294849661688697};
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += ws[i] * f(c + h * xs[i]);
    return s * h;
}

inline double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                             double tol, int depth = 0) {
    double whole = gauss7(f, a, b);
    double m = 0.5 * (a + b);
    double split = gauss7(f, a, m) + gauss7(f, m, b);
    if (depth > 48 || std::abs(split - whole) <= tol * std::max(1.0, std::abs(split)))
        return split;
    return adaptive_gauss(f, a, m, 0.5 * tol, depth + 1) +
           adaptive_gauss(f, m, b, 0.5 * tol, depth + 1);
}

// C-infinity step: 0 for t <= 0, 1 for t >= 1, all derivatives vanish at both ends.
inline double smoothstep_inf(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace detail

/// The epsilon-regularization of psi = z Psi_z: equal to psi for s >= 2 eps,
/// equal to G_z(s,.) s^{1+eps} for s <= eps, and a smooth positive blend
/// bounded by C0 in between. Also evaluates the regularized antiderivative
/// PsiHat(s,.) = \int_0^s psi_hat(t,.)/t dt.
class PsiHat {
  public:
    PsiHat(const MOFunction& Psi, const MOFunction& G, double epsilon)
        : G_(G), psi_(psi_from_Psi(Psi)), Psi_(Psi), eps_(epsilon) {
        dirs_ = sample_directions(64);
        delta_ = find_delta(G_, dirs_);
        c0_ = find_c0(psi_, dirs_);
        if (!(epsilon > 0.0) || !(epsilon < delta_))
            throw EpsilonOutOfRange("epsilon must lie in (0, delta), delta = " +
                                    std::to_string(delta_));
        // max over [0,eps] of G_z s^{1+eps} must stay below s^eps and C0
        for (int i = 1; i <= 256; ++i) {
            double s = eps_ * i / 256.0;
            for (const auto& xi : dirs_) {
                double v = s * G_.dz(s, xi) * std::pow(s, eps_);
                if (!(v <= std::pow(s, eps_) + 1e-12) || !(v <= c0_ + 1e-12))
                    throw EpsilonOutOfRange("regularized branch exceeds its bound at s = " +
                                            std::to_string(s));
            }
        }
        if (psi_.direction_independent && G_.direction_independent)
            head_const_ = head(Vec3{1.0, 0.0, 0.0});
    }

    double epsilon() const { return eps_; }
    double delta() const { return delta_; }
    double C0() const { return c0_; }
    const MOFunction& base_psi() const { return psi_; }

    double psi_hat(double s, const Vec3& x) const {
        if (s <= 0.0) return 0.0;
        if (s >= 2.0 * eps_) return psi_.value(s, x);
        double low = s * G_.dz(s, x) * std::pow(s, eps_);
        if (s <= eps_) return low;
        double chi = detail::smoothstep_inf((s - eps_) / eps_);
        return (1.0 - chi) * low + chi * psi_.value(s, x);
    }

    /// \int_0^s psi_hat(t,x)/t dt. The head below 2 eps uses an adaptive Gauss
    /// rule with the substitution t = c tau^{1/(1+eps)} absorbing the t^eps
    /// endpoint; beyond 2 eps the integrand is Psi_z, integrated exactly.
    double Psi_hat(double s, const Vec3& x) const {
        if (s <= 0.0) return 0.0;
        if (s <= 2.0 * eps_) return head_below(s, x);
        double h = head_const_ ? *head_const_ : head(x);
        return h + Psi_.value(s, x) - Psi_.value(2.0 * eps_, x);
    }

    /// Largest delta in (0,1) with s G_z <= 1 on [0, delta], found by dense
    /// sampling with a 0.9 safety factor.
    static double find_delta(const MOFunction& G, const std::vector<Vec3>& dirs) {
        double best = 0.0;
        for (int i = 1; i <= 2048; ++i) {
            double s = i / 2048.0 * 0.999;
            double m = 0.0;
            for (const auto& xi : dirs) m = std::max(m, s * G.dz(s, xi));
            if (m > 1.0) break;
            best = s;
        }
        if (best == 0.0)
            throw DeltaSearchFailed("s G_z exceeds 1 for arbitrarily small s; G outside the class");
        return 0.9 * best;
    }

    static double find_c0(const MOFunction& psi, const std::vector<Vec3>& dirs) {
        double m = 1.0;
        for (int i = 0; i <= 2048; ++i) {
            double s = 2.0 * i / 2048.0;
            for (const auto& xi : dirs) m = std::max(m, psi.value(s, xi));
        }
        return m;
    }

  private:
    MOFunction G_, psi_, Psi_;
    double eps_, delta_ = 0.0, c0_ = 1.0;
    std::vector<Vec3> dirs_;
    std::optional<double> head_const_;

    // \int_0^{min(s, 2 eps)} psi_hat/t dt
    double head_below(double s, const Vec3& x) const {
        double c = std::min(s, eps_);
        double p = 1.0 / (1.0 + eps_);
        auto sub = [&](double tau) {
            double t = c * std::pow(tau, p);
            double dt = c * p * std::pow(tau, p - 1.0);
            return psi_hat(t, x) / t * dt;
        };
        double total = detail::adaptive_gauss(sub, 0.0, 1.0, 1e-11);
        if (s > eps_) {
            auto plain = [&](double t) { return psi_hat(t, x) / t; };
            total += detail::adaptive_gauss(plain, eps_, std::min(s, 2.0 * eps_), 1e-11);
        }
        return total;
    }

    double head(const Vec3& x) const { return head_below(2.0 * eps_, x); }
};

inline PsiHat regularize(const MOFunction& Psi, const MOFunction& G, double epsilon) {
    return PsiHat(Psi, G, epsilon);
}

}  // namespace mogflow
