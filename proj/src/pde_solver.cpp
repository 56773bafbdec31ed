#include "rdlab/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdlab/errors.hpp"
#include "rdlab/phase_plane.hpp"

namespace rdlab {
namespace {

// In-place Thomas elimination for a tridiagonal system (sub a, diag b, super c).
void solve_tridiagonal(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                       std::span<double> d, std::span<double> scratch) {
    const std::size_t n = d.size();
    scratch[0] = c[0] / b[0];
    d[0] = d[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = 1.0 / (b[i] - a[i] * scratch[i - 1]);
        scratch[i] = c[i] * m;
        d[i] = (d[i] - a[i] * d[i - 1]) * m;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= scratch[i] * d[i + 1];
}

double sup_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

LimitOde::LimitOde(const NonlinearitySpec& spec, double alpha, double beta, double max_step, double blowup_limit)
    : spec_(&spec), h_(max_step), limit_(blowup_limit), minus_(alpha), plus_(beta) {
    if (!(max_step > 0.0)) throw ArgumentError("limit ODE: step must be positive");
}

double LimitOde::rk4(double y, double h) const {
    const auto& s = *spec_;
    const double k1 = s.f(y);
    const double k2 = s.f(y + 0.5 * h * k1);
    const double k3 = s.f(y + 0.5 * h * k2);
    const double k4 = s.f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void LimitOde::advance_to(double t) {
    if (t < t_) throw ArgumentError("limit ODE: cannot integrate backward");
    while (t_ < t) {
        const double h = std::min(h_, t - t_);
        minus_ = rk4(minus_, h);
        plus_ = rk4(plus_, h);
        t_ = (t - t_ <= h_) ? t : t_ + h;
        if (!(std::fabs(minus_) <= limit_) || !(std::fabs(plus_) <= limit_)) {
            std::ostringstream msg;
            msg << "limit ODE blow-up at t = " << t_ << " (|theta| > " << limit_ << ")";
            throw NumericalError(msg.str());
        }
    }
}

double limit_ode_step(const NonlinearitySpec& spec, double alpha, double beta, double dt) {
    const double lo = std::min(alpha, beta) - 1.0, hi = std::max(alpha, beta) + 1.0;
    const double lip = lipschitz_bound(spec, lo, hi);
    return lip > 0.0 ? std::min(dt, 0.01 / lip) : dt;
}

std::pair<double, double> solve_theta(const NonlinearitySpec& spec, double alpha, double beta, double t,
                                      double dt) {
    if (!(t >= 0.0)) throw ArgumentError("solve_theta: t must be nonnegative");
    const double kappa = spec.kappa().value_or(default_kappa(std::max(std::fabs(alpha), std::fabs(beta))));
    LimitOde ode(spec, alpha, beta, limit_ode_step(spec, alpha, beta, dt), 10.0 * kappa);
    ode.advance_to(t);
    return {ode.minus(), ode.plus()};
}

double invariant_bound(const NonlinearitySpec& spec, const Profile& u0) {
    const double sup = u0.sup_norm();
    const double reach = spec.kappa().value_or(default_kappa(sup));
    double largest = 0.0;
    try {
        for (double e : find_equilibria(spec, -reach, reach).roots) largest = std::max(largest, std::fabs(e));
    } catch (const DegenerateError&) {
    }
    return std::max(sup, largest) + 1.0;
}

Stepper::Stepper(const NonlinearitySpec& spec, const Grid& grid, const SolverConfig& cfg, double alpha,
                 double beta, StepperHooks hooks)
    : spec_(&spec), grid_(grid), cfg_(cfg), hooks_(std::move(hooks)), kernels_(&kernels::active()),
      poly_(spec.poly_reaction()) {
    if (!(cfg.dt > 0.0)) throw ArgumentError("solver: dt must be positive");
    const double kappa = spec.kappa().value_or(default_kappa(std::max(std::fabs(alpha), std::fabs(beta))));
    blowup_limit_ = cfg.blowup_limit.value_or(10.0 * kappa);
    if (!hooks_.boundary)
        theta_.emplace(spec, alpha, beta, limit_ode_step(spec, alpha, beta, cfg.dt), blowup_limit_);

    const std::size_t n = grid.size();
    work_.assign(n, 0.0);
    work2_.assign(n, 0.0);
    rate_.assign(n, 0.0);
    fu_.assign(n, 0.0);
    du_.assign(n, 0.0);
    a_.assign(n, 0.0);
    b_.assign(n, 1.0);
    c_.assign(n, 0.0);

    // (I - dt D2) with identity rows at both ends; the pivots never change.
    const double r = cfg.dt / (grid.dx() * grid.dx());
    imex_cprime_.assign(n, 0.0);
    imex_inv_pivot_.assign(n, 1.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double pivot = (1.0 + 2.0 * r) - (-r) * imex_cprime_[i - 1];
        imex_inv_pivot_[i] = 1.0 / pivot;
        imex_cprime_[i] = -r * imex_inv_pivot_[i];
    }
}

void Stepper::reaction(std::span<const double> u, std::span<double> out) const {
    if (poly_) {
        kernels_->reaction(*poly_, u, out);
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = spec_->f(u[i]);
}

void Stepper::reaction_slope(std::span<const double> u, std::span<double> out) const {
    if (poly_) {
        kernels_->reaction_slope(*poly_, u, out);
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = spec_->df(u[i]);
}

void Stepper::add_source(double t, double weight, std::span<double> out) const {
    if (!hooks_.source) return;
    for (std::size_t j = 1; j + 1 < out.size(); ++j) out[j] += weight * hooks_.source(grid_.x(j), t);
}

std::pair<double, double> Stepper::boundary_at(double t) {
    if (hooks_.boundary) return hooks_.boundary(t);
    theta_->advance_to(t);
    return {theta_->minus(), theta_->plus()};
}

void Stepper::check_bounds(const std::vector<double>& u, double t) const {
    const double m = kernels_->max_abs(u);
    if (!(m <= blowup_limit_)) {
        std::ostringstream msg;
        msg << "solution blow-up at t = " << t << ": sup|u| = " << m << " exceeds " << blowup_limit_;
        throw NumericalError(msg.str());
    }
}

StepStats Stepper::step_imex(SolverState& state, double t_next) {
    auto& u = state.profile.values;
    const std::size_t n = u.size();
    const double dt = cfg_.dt;
    // rhs = u + dt f(u) (+ dt g(t^n))
    if (poly_) {
        kernels_->explicit_update(*poly_, dt, u, work_);
    } else {
        reaction(u, fu_);
        kernels_->axpy(u, dt, fu_, work_);
    }
    add_source(state.t, dt, work_);
    const auto [lo, hi] = boundary_at(t_next);
    work_[0] = lo;
    work_[n - 1] = hi;
    // forward sweep with the cached pivots, then back substitution
    const double r = dt / (grid_.dx() * grid_.dx());
    for (std::size_t i = 1; i + 1 < n; ++i) work_[i] = (work_[i] + r * work_[i - 1]) * imex_inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 1;) work_[i] -= imex_cprime_[i] * work_[i + 1];
    kernels_->axpy(work_, -1.0, u, rate_);
    for (double& v : rate_) v /= dt;
    u.swap(work_);
    state.theta_minus = lo;
    state.theta_plus = hi;
    return {};
}

StepStats Stepper::step_cn(SolverState& state, double t_next) {
    auto& u = state.profile.values;
    const std::size_t n = u.size();
    const double dt = cfg_.dt;
    const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
    const double half = 0.5 * dt;

    // explicit half: e = u + dt/2 (D2 u + f(u) + g^n)
    std::vector<double>& e = work2_;
    kernels_->second_difference(u, inv_dx2, du_);
    reaction(u, fu_);
    for (std::size_t j = 0; j < n; ++j) e[j] = u[j] + half * (du_[j] + fu_[j]);
    add_source(state.t, half, e);
    add_source(t_next, half, e);

    const auto [lo, hi] = boundary_at(t_next);
    std::vector<double> w = u;
    w[0] = lo;
    w[n - 1] = hi;
    std::vector<double> trial(n), residual(n), slope(n);

    auto compute_residual = [&](const std::vector<double>& v, std::vector<double>& res) {
        kernels_->second_difference(v, inv_dx2, du_);
        reaction(v, fu_);
        res[0] = 0.0;
        res[n - 1] = 0.0;
        for (std::size_t j = 1; j + 1 < n; ++j) res[j] = v[j] - half * (du_[j] + fu_[j]) - e[j];
        return kernels_->max_abs(res);
    };

    StepStats stats;
    const double tol = cfg_.newton_tol * std::max(1.0, kernels_->max_abs(u));
    double res_norm = compute_residual(w, residual);
    while (res_norm > tol) {
        if (stats.newton_iterations >= cfg_.newton_max_iter) {
            std::ostringstream msg;
            msg << "Crank-Nicolson Newton did not converge at t = " << t_next << " after "
                << stats.newton_iterations << " iterations (residual " << res_norm << ", tol " << tol << ")";
            throw NumericalError(msg.str());
        }
        ++stats.newton_iterations;
        reaction_slope(w, slope);
        const double off = -half * inv_dx2;
        a_[0] = 0.0;
        b_[0] = 1.0;
        c_[0] = 0.0;
        a_[n - 1] = 0.0;
        b_[n - 1] = 1.0;
        c_[n - 1] = 0.0;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            a_[j] = off;
            c_[j] = off;
            b_[j] = 1.0 + dt * inv_dx2 - half * slope[j];
        }
        std::vector<double> delta = residual;
        solve_tridiagonal(a_, b_, c_, delta, work_);
        double lambda = 1.0;
        double trial_norm = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = w[j] - lambda * delta[j];
            trial_norm = compute_residual(trial, residual);
            if (trial_norm <= (1.0 - 1e-4 * lambda) * res_norm || halvings >= 10) break;
            lambda *= 0.5;
        }
        w.swap(trial);
        res_norm = trial_norm;
    }
    stats.newton_residual = res_norm;
    for (std::size_t j = 0; j < n; ++j) rate_[j] = (w[j] - u[j]) / dt;
    u.swap(w);
    state.theta_minus = lo;
    state.theta_plus = hi;
    return stats;
}

StepStats Stepper::step(SolverState& state) {
    if (state.profile.values.size() != grid_.size()) throw ArgumentError("step: profile does not match the grid");
    ++steps_;
    const double t_next = state.t + cfg_.dt;
    StepStats stats = cfg_.scheme == Scheme::Imex ? step_imex(state, t_next) : step_cn(state, t_next);
    state.t = t_next;
    check_bounds(state.profile.values, t_next);
    return stats;
}

SolverState step(const SolverState& state, const SolverConfig& cfg, const NonlinearitySpec& spec) {
    SolverState next = state;
    const double alpha = state.theta_minus, beta = state.theta_plus;
    // Far-field values are carried by the state: integrate the limit ODE from t.
    StepperHooks hooks;
    hooks.boundary = [&spec, alpha, beta, t0 = state.t, dt = cfg.dt](double t) {
        return solve_theta(spec, alpha, beta, t - t0, dt);
    };
    Stepper stepper(spec, state.profile.grid, cfg, alpha, beta, std::move(hooks));
    stepper.step(next);
    return next;
}

RunResult run(const NonlinearitySpec& spec, const Profile& u0, const SolverConfig& cfg, StepperHooks hooks) {
    if (!(cfg.T_end > 0.0)) throw ArgumentError("run: T_end must be positive");
    if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end()))
        throw ArgumentError("run: snapshot_times must be sorted");
    for (double t : cfg.snapshot_times)
        if (t < 0.0 || t > cfg.T_end * (1.0 + 1e-12)) throw ArgumentError("run: snapshot time outside [0, T_end]");
    for (double v : u0.values)
        if (!std::isfinite(v)) throw ArgumentError("run: initial data is not finite");

    RunResult out;
    out.grid = u0.grid;
    out.info.invariant_bound = invariant_bound(spec, u0);
    const double B = out.info.invariant_bound;
    out.info.lipschitz = lipschitz_bound(spec, -B, B);
    if (cfg.dt * out.info.lipschitz > cfg.max_dt_lipschitz * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "run: dt * Lip(f) = " << cfg.dt * out.info.lipschitz << " exceeds " << cfg.max_dt_lipschitz
            << " (Lip = " << out.info.lipschitz << " on [-" << B << ", " << B << "])";
        throw ArgumentError(msg.str());
    }

    SolverConfig local = cfg;
    const double alpha = u0.values.front(), beta = u0.values.back();
    if (!local.blowup_limit) local.blowup_limit = 10.0 * spec.kappa().value_or(default_kappa(u0.sup_norm()));
    out.info.blowup_limit = *local.blowup_limit;
    Stepper stepper(spec, u0.grid, local, alpha, beta, hooks);
    out.info.isa = stepper.isa();
    out.info.theta_step = limit_ode_step(spec, alpha, beta, cfg.dt);

    const auto total_steps = static_cast<std::size_t>(std::llround(cfg.T_end / cfg.dt));
    std::vector<std::size_t> wanted;
    for (double t : cfg.snapshot_times)
        wanted.push_back(std::min(total_steps, static_cast<std::size_t>(std::llround(t / cfg.dt))));

    SolverState state{0.0, u0, alpha, beta};
    out.info.max_abs = u0.sup_norm();
    std::size_t next = 0;
    auto emit = [&](std::size_t n, bool with_rate) {
        while (next < wanted.size() && wanted[next] == n) {
            Snapshot s;
            s.t = static_cast<double>(n) * cfg.dt;
            s.u = state.profile.values;
            if (with_rate) s.ut = stepper.last_rate();
            s.theta_minus = state.theta_minus;
            s.theta_plus = state.theta_plus;
            out.snapshots.push_back(std::move(s));
            ++next;
        }
    };
    emit(0, false);
    for (std::size_t n = 1; n <= total_steps; ++n) {
        StepStats stats;
        try {
            stats = stepper.step(state);
        } catch (const NumericalError& e) {
            out.info.steps = n - 1;
            throw RunAborted(e.what(), std::move(out));
        }
        state.t = static_cast<double>(n) * cfg.dt;
        out.info.max_newton_iterations = std::max(out.info.max_newton_iterations, stats.newton_iterations);
        out.info.max_abs = std::max(out.info.max_abs, sup_abs(state.profile.values));
        emit(n, true);
    }
    out.info.steps = total_steps;
    return out;
}

}  // namespace rdlab
