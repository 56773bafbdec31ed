#pragma once
// Time stepping for u_t = u_xx + f(u) on [-L, L].  The end nodes carry the
// far-field values theta(t), which solve theta' = f(theta) from the limits of
// the initial data.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdlab/errors.hpp"
#include "rdlab/grid.hpp"
#include "rdlab/kernels.hpp"
#include "rdlab/nonlinearity.hpp"

namespace rdlab {

enum class Scheme { Imex, CrankNicolsonNewton };

struct SolverConfig {
    double dt = 0.01;
    double T_end = 1.0;
    std::vector<double> snapshot_times;  // sorted, within [0, T_end]
    Scheme scheme = Scheme::Imex;
    double newton_tol = 1e-11;
    int newton_max_iter = 25;
    /// Reaction accuracy guard: dt * Lip(f) on the invariant range must not exceed this.
    double max_dt_lipschitz = 0.2;
    /// |u| or |theta| beyond this is treated as blow-up; default 10 kappa (kappa from
    /// the spec, else the default coercivity radius of the initial data).
    std::optional<double> blowup_limit;
};

struct SolverState {
    double t = 0.0;
    Profile profile;
    double theta_minus = 0.0;
    double theta_plus = 0.0;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
    /// (u^n - u^{n-1}) / dt of the step that produced this snapshot; empty at t = 0.
    std::vector<double> ut;
    double theta_minus = 0.0;
    double theta_plus = 0.0;
};

/// Incremental RK4 integration of theta' = f(theta) for both far-field limits.
class LimitOde {
public:
    LimitOde(const NonlinearitySpec& spec, double alpha, double beta, double max_step, double blowup_limit);
    void advance_to(double t);
    double t() const { return t_; }
    double minus() const { return minus_; }
    double plus() const { return plus_; }
    double step_size() const { return h_; }

private:
    double rk4(double y, double h) const;

    const NonlinearitySpec* spec_;
    double h_;
    double limit_;
    double t_ = 0.0;
    double minus_;
    double plus_;
};

/// Step used for the limit ODE: min(dt, 0.01 / Lip(f)) with Lip taken around alpha, beta.
double limit_ode_step(const NonlinearitySpec& spec, double alpha, double beta, double dt);

/// (theta_-(t), theta_+(t)).  Throws NumericalError on blow-up (|theta| > 10 kappa).
std::pair<double, double> solve_theta(const NonlinearitySpec& spec, double alpha, double beta, double t,
                                      double dt = 0.01);

/// Hooks used by verification harnesses (manufactured solutions) to replace the
/// far-field boundary data and add a source term g(x, t) to the right-hand side.
struct StepperHooks {
    std::function<std::pair<double, double>(double t)> boundary;
    std::function<double(double x, double t)> source;
};

struct StepStats {
    int newton_iterations = 0;
    double newton_residual = 0.0;
};

class Stepper {
public:
    Stepper(const NonlinearitySpec& spec, const Grid& grid, const SolverConfig& cfg, double alpha, double beta,
            StepperHooks hooks = {});

    /// Advances state by one dt.  Throws NumericalError on blow-up or Newton failure.
    StepStats step(SolverState& state);
    /// Increment of the most recent step divided by dt.
    const std::vector<double>& last_rate() const { return rate_; }
    kernels::Isa isa() const { return kernels_->isa; }

private:
    void reaction(std::span<const double> u, std::span<double> out) const;
    void reaction_slope(std::span<const double> u, std::span<double> out) const;
    void add_source(double t, double weight, std::span<double> out) const;
    std::pair<double, double> boundary_at(double t);
    StepStats step_imex(SolverState& state, double t_next);
    StepStats step_cn(SolverState& state, double t_next);
    void check_bounds(const std::vector<double>& u, double t) const;

    const NonlinearitySpec* spec_;
    Grid grid_;
    SolverConfig cfg_;
    StepperHooks hooks_;
    const kernels::Table* kernels_;
    std::optional<kernels::PolyReaction> poly_;
    std::optional<LimitOde> theta_;
    double blowup_limit_;
    std::size_t steps_ = 0;
    // constant IMEX factorization of (I - dt D2) with pinned end rows
    std::vector<double> imex_cprime_, imex_inv_pivot_;
    std::vector<double> work_, work2_, rate_, fu_, du_;
    std::vector<double> a_, b_, c_;
};

/// Single IMEX / Crank-Nicolson step from a standalone state.
SolverState step(const SolverState& state, const SolverConfig& cfg, const NonlinearitySpec& spec);

struct RunInfo {
    std::size_t steps = 0;
    double max_abs = 0.0;
    int max_newton_iterations = 0;
    double invariant_bound = 0.0;  // B = max(sup|u0|, max |equilibrium|) + 1
    double lipschitz = 0.0;        // Lip(f) on [-B, B]
    double theta_step = 0.0;
    double blowup_limit = 0.0;
    kernels::Isa isa = kernels::Isa::Scalar;
};

struct RunResult {
    Grid grid;
    std::vector<Snapshot> snapshots;
    RunInfo info;
};

/// Thrown by run() when stepping fails; carries the snapshots taken so far.
struct RunAborted : NumericalError {
    RunAborted(const std::string& what, RunResult partial_run)
        : NumericalError(what), partial(std::move(partial_run)) {}
    RunResult partial;
};

/// Evolves u0 to cfg.T_end and returns the snapshots nearest to the requested
/// times, recorded at the exact step time n dt.
RunResult run(const NonlinearitySpec& spec, const Profile& u0, const SolverConfig& cfg, StepperHooks hooks = {});

/// Invariant-region bound B for initial data u0.
double invariant_bound(const NonlinearitySpec& spec, const Profile& u0);

}  // namespace rdlab
