#pragma once

#include "mogflow/measures.hpp"

namespace mogflow {

enum class FlowMode { Plain, Regularized };

struct FlowConfig {
    ProblemTriple triple;
    ScalarField initial_u;
    FlowMode mode = FlowMode::Plain;
    std::vector<double> epsilon_schedule;  // regularized mode, strictly decreasing

    double dt_init = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.05;
    double safety = 0.45;
    double dt_scale = 1.0;  // global step refinement knob for order studies
    double tol_residual = 1e-4;
    double tol_energy_slope = 1e-9;
    long max_steps = 400000;
    long min_steps = 0;  // accepted steps before the convergence gate may fire
    double u_floor_rel = 1e-6;  // times the initial max u

    void validate() const {
        if (!(dt_min < dt_init && dt_init <= dt_max)) throw ConfigError("need dt_min < dt_init <= dt_max");
        if (!(safety > 0.0 && safety < 1.0)) throw ConfigError("safety must be in (0,1)");
        if (!(tol_residual > 0.0 && tol_energy_slope > 0.0)) throw ConfigError("tolerances must be positive");
        for (std::size_t i = 1; i < epsilon_schedule.size(); ++i)
            if (!(epsilon_schedule[i] < epsilon_schedule[i - 1]))
                throw ConfigError("epsilon schedule must be strictly decreasing");
    }
};

struct SeriesRow {
    long step = 0;
    double t = 0, dt = 0, eta = 0, J = 0, V_G = 0, residual_norm = 0;
    double min_u = 0, max_u = 0, w_minus = 0, w_plus = 0, min_eig_b = 0, max_eig_b = 0;
};

/// Evolving snapshot, owned by exactly one run at a time.
struct FlowState {
    SupportBody body;
    double t = 0.0;
    double dt = 0.0;  // last accepted step size
    double eta = 0.0;
    double energy = 0.0;
    double dual_vol = 0.0;
};

enum class FlowStatus { Converged, MaxSteps, Collapsed };

inline const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "Converged";
        case FlowStatus::MaxSteps: return "MaxSteps";
        case FlowStatus::Collapsed: return "Collapsed";
    }
    return "?";
}

struct FlowResult {
    FlowStatus status = FlowStatus::MaxSteps;
    SupportBody body;
    double gamma = 0.0;  // 1/eta at the final accepted state
    ScalarField residual_field;
    double residual_norm = 0.0;
    std::vector<SeriesRow> series;
    std::string diagnostic;
};

namespace detail {

struct RhsEval {
    std::vector<double> v;
    double eta = 0.0;
    double max_diffusivity = 0.0;  // max over nodes of Phi / (eig_min * det b)
    double min_ttc = 1e300;        // min over shrinking nodes of u / |v|
};

// velocity of the support-function flow:
//   v = -f(x) psi(u, x) r^n G_z(r, xi)^{-1} p_lambda(xi)^{-1} det(b)^{-1} + eta u
template <class PsiImpl>
RhsEval evaluate_rhs(const ProblemTriple& t, const PsiImpl& psi_impl, const SupportBody& body,
                     const std::vector<double>& f_cache) {
    const auto& g = *body.grid;
    std::size_t n = g.size();
    RhsEval out;
    out.v.resize(n);
    KahanSum num, den;
    std::vector<double> phi(n), psi_u(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gz = t.G.dz(body.r[i], body.xi[i]);
        if (!(gz > 0.0) || !(body.det_b[i] > 0.0))
            throw DegenerateDenominator("G_z or det b not positive at node " + std::to_string(i));
        double pl = t.p_lambda(body.xi[i]);
        psi_u[i] = psi_impl(body.u[i], g.nodes[i]);
        phi[i] = f_cache[i] * psi_u[i] * pow_dim(body.r[i], g.dim) / (gz * pl);
        num.add(g.weights[i] * f_cache[i] * psi_u[i]);
        den.add(g.weights[i] * inv_pow_dim(body.r[i], g.dim) * gz * pl * body.u[i] * body.det_b[i]);
    }
    if (!(den.value() > 0.0)) throw DegenerateDenominator("radial weight integral is not positive");
    out.eta = num.value() / den.value();
    for (std::size_t i = 0; i < n; ++i) {
        double vi = -phi[i] / body.det_b[i] + out.eta * body.u[i];
        out.v[i] = vi;
        out.max_diffusivity =
            std::max(out.max_diffusivity, phi[i] / (body.eig_min[i] * body.det_b[i]));
        if (vi < 0.0) out.min_ttc = std::min(out.min_ttc, body.u[i] / -vi);
    }
    return out;
}

}  // namespace detail

/// Pointwise flow velocity for the current body (plain psi path).
inline ScalarField velocity(const ProblemTriple& t, const SupportBody& body) {
    std::vector<double> f_cache(body.grid->size());
    for (std::size_t i = 0; i < f_cache.size(); ++i) f_cache[i] = t.f(body.grid->nodes[i]);
    auto rhs = detail::evaluate_rhs(
        t, [&](double z, const Vec3& x) { return t.psi.value(z, x); }, body, f_cache);
    return {body.grid, std::move(rhs.v)};
}

/// Residual of the stationary equation at multiplier gamma:
///   R(x) = u r^{-n} G_z(r, xi) p_lambda(xi) det(b) - gamma f(x) psi(u, x)
inline ScalarField residual(const SupportBody& body, double gamma, const ProblemTriple& t) {
    const auto& g = *body.grid;
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double lhs = body.u[i] * detail::inv_pow_dim(body.r[i], g.dim) *
                     t.G.dz(body.r[i], body.xi[i]) * t.p_lambda(body.xi[i]) * body.det_b[i];
        r[i] = lhs - gamma * t.f(g.nodes[i]) * t.psi.value(body.u[i], g.nodes[i]);
    }
    return {body.grid, std::move(r)};
}

inline double residual_norm(const ScalarField& res, const SupportBody& body, double gamma,
                            const ProblemTriple& t) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        num = std::max(num, std::abs(res[i]));
        den = std::max(den, std::abs(gamma * t.f(body.grid->nodes[i]) *
                                     t.psi.value(body.u[i], body.grid->nodes[i])));
    }
    return num / den;
}

namespace detail {

/// One explicit midpoint step with per-stage eta recomputation and
/// reject-and-halve control. Owns the per-run caches.
class FlowDriver {
  public:
    FlowDriver(const FlowConfig& cfg, const PsiHat* ph)
        : cfg_(cfg), psihat_(ph), filter_(cfg.initial_u.grid) {
        const auto& g = *cfg_.initial_u.grid;
        f_cache_.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) f_cache_[i] = cfg_.triple.f(g.nodes[i]);
        stiffness_factor_ = g.stiffness_factor();
        h2_ = g.stencil_h() * g.stencil_h();
    }

    FlowResult run(ScalarField u0) {
        FlowResult out;
        FlowState st{SupportBody::build(std::move(u0))};
        const auto& t = cfg_.triple;
        double u_floor = cfg_.u_floor_rel * st.body.max_u();
        double dt_ctrl = cfg_.dt_init;
        auto psi_impl = [&](double z, const Vec3& x) {
            return psihat_ ? psihat_->psi_hat(z, x) : t.psi.value(z, x);
        };
        auto finish = [&](FlowStatus status) {
            out.status = status;
            out.body = std::move(st.body);
            if (status == FlowStatus::Collapsed) out.diagnostic = collapse_info_;
            return std::move(out);
        };

        for (long step = 0; step <= cfg_.max_steps; ++step) {
            RhsEval rhs = evaluate_rhs(t, psi_impl, st.body, f_cache_);
            st.eta = rhs.eta;
            st.energy = energy(st.body);
            st.dual_vol = dual_volume(t.G, t.p_lambda, st.body);
            double gamma = 1.0 / st.eta;

            SeriesRow row;
            row.step = step;
            row.t = st.t;
            row.dt = st.dt;
            row.eta = st.eta;
            row.J = st.energy;
            row.V_G = st.dual_vol;
            ScalarField res = residual_with(psi_impl, st.body, gamma);
            row.residual_norm = residual_norm_with(psi_impl, res, st.body, gamma);
            row.min_u = st.body.min_u();
            row.max_u = st.body.max_u();
            auto [wlo, whi] = widths(st.body);
            row.w_minus = wlo;
            row.w_plus = whi;
            row.min_eig_b = st.body.min_eig();
            row.max_eig_b = st.body.max_eig();
            out.series.push_back(row);
            observe_row(row);

            out.gamma = gamma;
            out.residual_field = res;
            out.residual_norm = row.residual_norm;

            if (step >= cfg_.min_steps && row.residual_norm <= cfg_.tol_residual &&
                energy_slope_ok())
                return finish(FlowStatus::Converged);
            if (step == cfg_.max_steps) break;

            // attempt a step, halving on rejection
            double dt_try = std::min({dt_ctrl, cfg_.dt_max, cfg_.safety * rhs.min_ttc,
                                      parabolic_bound(rhs)});
            bool accepted = false;
            while (!accepted) {
                double dt = cfg_.dt_scale * dt_try;
                if (dt < cfg_.dt_min) return finish(FlowStatus::Collapsed);
                auto trial = try_step(rhs, st.body, dt, u_floor, psi_impl);
                if (trial) {
                    st.body = std::move(*trial);
                    st.t += dt;
                    st.dt = dt;
                    dt_ctrl = std::min(dt_try * 1.2, cfg_.dt_max);
                    accepted = true;
                } else {
                    dt_try *= 0.5;
                }
            }
        }
        return finish(FlowStatus::MaxSteps);
    }

  private:
    const FlowConfig& cfg_;
    const PsiHat* psihat_;
    PolarFilter filter_;
    std::vector<double> f_cache_;
    double stiffness_factor_ = 2.0, h2_ = 0.0;
    std::string collapse_info_;
    std::vector<std::pair<double, double>> j_hist_;  // (t, J) of emitted rows

    double parabolic_bound(const RhsEval& rhs) const {
        return cfg_.safety * h2_ / (stiffness_factor_ * rhs.max_diffusivity);
    }

    double energy(const SupportBody& body) {
        const auto& t = cfg_.triple;
        double J = psihat_ ? orlicz_energy_eps(t.f, *psihat_, body)
                           : orlicz_energy(t.f, t.Psi, body);
        return J;
    }

    template <class PsiImpl>
    ScalarField residual_with(const PsiImpl& psi_impl, const SupportBody& body, double gamma) const {
        const auto& g = *body.grid;
        const auto& t = cfg_.triple;
        std::vector<double> r(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            double lhs = body.u[i] * inv_pow_dim(body.r[i], g.dim) *
                         t.G.dz(body.r[i], body.xi[i]) * t.p_lambda(body.xi[i]) * body.det_b[i];
            r[i] = lhs - gamma * f_cache_[i] * psi_impl(body.u[i], g.nodes[i]);
        }
        return {body.grid, std::move(r)};
    }

    template <class PsiImpl>
    double residual_norm_with(const PsiImpl& psi_impl, const ScalarField& res,
                              const SupportBody& body, double gamma) const {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            num = std::max(num, std::abs(res[i]));
            den = std::max(den,
                           std::abs(gamma * f_cache_[i] * psi_impl(body.u[i], body.grid->nodes[i])));
        }
        return num / den;
    }

    // slope of J over the last (up to) 10 emitted rows, |dJ/dt| / |J|
    bool energy_slope_ok() const { return slope_ready_ && last_slope_ <= cfg_.tol_energy_slope; }

    void observe_row(const SeriesRow& row) {
        j_hist_.emplace_back(row.t, row.J);
        if (j_hist_.size() < 2) {
            slope_ready_ = false;
            return;
        }
        std::size_t k = j_hist_.size() - 1;
        std::size_t j = k >= 10 ? k - 10 : 0;
        double dtw = j_hist_[k].first - j_hist_[j].first;
        if (!(dtw > 0.0)) {
            slope_ready_ = false;
            return;
        }
        last_slope_ = std::abs(j_hist_[k].second - j_hist_[j].second) /
                      (dtw * std::max(std::abs(j_hist_[k].second), 1e-300));
        slope_ready_ = true;
    }

    bool slope_ready_ = false;
    double last_slope_ = 1e300;

    template <class PsiImpl>
    std::optional<SupportBody> try_step(const RhsEval& rhs0, const SupportBody& body, double dt,
                                        double u_floor, const PsiImpl& psi_impl) {
        const auto& g = *body.grid;
        std::vector<double> u_half(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            u_half[i] = body.u[i] + 0.5 * dt * rhs0.v[i];
        if (filter_.active()) filter_.apply(u_half);
        auto half = build_trial(u_half, u_floor);
        if (!half) return std::nullopt;
        RhsEval rhs1;
        try {
            rhs1 = evaluate_rhs(cfg_.triple, psi_impl, *half, f_cache_);
        } catch (const DegenerateDenominator& e) {
            collapse_info_ = e.what();
            return std::nullopt;
        }
        std::vector<double> u_new(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            u_new[i] = body.u[i] + dt * rhs1.v[i];
        if (filter_.active()) filter_.apply(u_new);
        return build_trial(u_new, u_floor);
    }

    std::optional<SupportBody> build_trial(std::vector<double>& u, double u_floor) {
        double mn = u[0];
        for (double v : u) mn = std::min(mn, v);
        if (!(mn > u_floor)) {
            collapse_info_ = "support function reached the interior floor " + std::to_string(u_floor);
            return std::nullopt;
        }
        try {
            return SupportBody::build(ScalarField(cfg_.initial_u.grid, u), Validate::Strict);
        } catch (const NotConvex& e) {
            collapse_info_ = e.what();
            return std::nullopt;
        }
    }
};

}  // namespace detail

/// Evolve the flow until the residual and energy-slope gates both pass.
/// Never throws on mathematical degeneration: failures are reported in the
/// returned status with the full series either way.
inline FlowResult run_flow(const FlowConfig& cfg, const PsiHat* psihat = nullptr) {
    cfg.validate();
    cfg.triple.validate_on(*cfg.initial_u.grid);
    detail::FlowDriver driver(cfg, psihat);
    return driver.run(cfg.initial_u);
}

struct ContinuationStage {
    double epsilon = 0.0;
    FlowStatus status = FlowStatus::MaxSteps;
    double gamma = 0.0;
    double gap_to_prev = 0.0;  // sup-norm distance of stage solutions
    double w_minus = 0.0, w_plus = 0.0;
    long steps = 0;
};

struct ContinuationResult {
    FlowResult final;
    std::vector<ContinuationStage> stages;
    double bracket_lo = 0.0, bracket_hi = 0.0;  // width bracket from the first stage
    bool widths_in_bracket = true;
};

/// Default geometric schedule: eps_0 = min(delta/2, c0/10) halved per stage,
/// where c0 is the initial body's minimal radius.
inline std::vector<double> default_epsilon_schedule(double delta, double c0, int stages = 6) {
    double eps0 = std::min(0.5 * delta, c0 / 10.0);
    std::vector<double> out(stages);
    for (int k = 0; k < stages; ++k) out[k] = eps0 * std::pow(2.0, -k);
    return out;
}

/// Runs the regularized flow over the epsilon schedule, warm-starting each
/// stage from the previous solution. A collapsed stage aborts the schedule
/// with partial results. Every stage performs at least a fixed quantum of
/// accepted steps so the cross-stage gap diagnostic measures the flow's
/// contraction rather than stopping-rule jitter at the gate.
inline ContinuationResult continuation_run(const FlowConfig& cfg) {
    constexpr long kStageMinSteps = 25;
    cfg.validate();
    if (cfg.mode != FlowMode::Regularized || cfg.epsilon_schedule.empty())
        throw ConfigError("continuation requires regularized mode and a nonempty schedule");
    ContinuationResult out;
    ScalarField u = cfg.initial_u;
    std::vector<double> prev_u;
    for (std::size_t k = 0; k < cfg.epsilon_schedule.size(); ++k) {
        PsiHat ph = regularize(cfg.triple.Psi, cfg.triple.G, cfg.epsilon_schedule[k]);
        FlowConfig stage_cfg = cfg;
        stage_cfg.initial_u = u;
        stage_cfg.min_steps = std::max(cfg.min_steps, kStageMinSteps);
        detail::FlowDriver driver(stage_cfg, &ph);
        FlowResult res = driver.run(u);

        ContinuationStage stage;
        stage.epsilon = cfg.epsilon_schedule[k];
        stage.status = res.status;
        stage.gamma = res.gamma;
        stage.steps = res.series.empty() ? 0 : res.series.back().step;
        auto [wlo, whi] = widths(res.body);
        stage.w_minus = wlo;
        stage.w_plus = whi;
        if (k == 0) {
            out.bracket_lo = 0.1 * wlo;
            out.bracket_hi = 10.0 * whi;
        } else {
            double gap = 0.0;
            for (std::size_t i = 0; i < res.body.u.size(); ++i)
                gap = std::max(gap, std::abs(res.body.u[i] - prev_u[i]));
            stage.gap_to_prev = gap;
        }
        if (wlo < out.bracket_lo || whi > out.bracket_hi) out.widths_in_bracket = false;
        prev_u = res.body.u.values;
        u = res.body.u;
        out.stages.push_back(stage);
        out.final = std::move(res);
        if (out.final.status == FlowStatus::Collapsed) break;
    }
    return out;
}

}  // namespace mogflow
