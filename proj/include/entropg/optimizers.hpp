#pragma once

#include "entropg/mdp.hpp"
#include "entropg/oracle.hpp"
#include "entropg/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace entropg {

/// Constant step size, optionally switching to eta_t = 1 / (t - switch_at + t0)
/// for t > switch_at (phase-local inverse-time decay).
struct StepSchedule {
    enum class Kind { constant, inverse_time };

    Kind kind = Kind::constant;
    double eta = 0.0;
    std::int64_t t0 = 1;
    std::int64_t switch_at = 0;

    static StepSchedule constant(double eta) { return {Kind::constant, eta, 1, 0}; }
    static StepSchedule two_phase(double eta, std::int64_t t0, std::int64_t switch_at) {
        return {Kind::inverse_time, eta, t0, switch_at};
    }

    /// Step size for update t (1-based).
    double at(std::int64_t t) const {
        if (kind == Kind::constant || t <= switch_at) return eta;
        return 1.0 / static_cast<double>(t - switch_at + t0);
    }
};

/// Row t describes theta_t, the iterate after t updates (row 0 is theta_0).
/// batch_size is the batch used by update t; diagnostics come from the
/// exact oracle and cost no environment steps.
struct TraceRow {
    std::int64_t t = 0;
    double objective = 0.0;
    double gap = 0.0;
    double grad_norm = 0.0;
    double min_pi = 0.0;
    double dist = 0.0;
    std::int64_t batch_size = 0;
    std::int64_t cum_env_steps = 0;
    bool omega_flag = false;
    bool exited_region = false;
};

struct RunTrace {
    std::vector<TraceRow> rows;
    PolicyParams final_theta;
    double final_gap = 0.0;
    std::int64_t env_steps = 0;
    std::int64_t truncated_horizons = 0;
    /// Smallest min_pi over every recorded iterate.
    double min_pi_overall = 1.0;
    /// Set by two_phase: whether D(theta_final) <= epsilon, and the share of
    /// phase-2 rows with omega_flag set.
    std::optional<bool> reached_epsilon;
    std::optional<double> phase2_omega_fraction;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, RunTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const RunTrace& trace() const noexcept { return trace_; }

private:
    RunTrace trace_;
};

/// Region used for the omega_flag / exited_region columns.
struct RegionMonitor {
    double alpha = 0.5;
    double delta = 1.0;
    double delta_bar = std::numeric_limits<double>::infinity();
};

struct RunOptions {
    int workers = 1;
    std::int64_t step_budget = 1'000'000'000;
    std::int64_t diagnostics_every = 1;
    RegionMonitor region;
    std::function<void(const TraceRow&)> sink;
};

/// Deterministic gradient ascent theta <- theta + eta grad V_lambda^theta(rho).
RunTrace exact_pg(const TabularMdp& mdp, const PolicyParams& theta0, double lambda, double eta,
                  std::int64_t t_max, const SoftOptimum& opt, const RunOptions& options = {});

/// Random-horizon stochastic PG with batch size b. Update t draws its batch
/// from derive_stream(rng, t).
RunTrace ent_rpg(const TabularMdp& mdp, const PolicyParams& theta0, double lambda, std::int64_t b,
                 std::int64_t t_max, const StepSchedule& schedule, const RngStream& rng,
                 const SoftOptimum& opt, const RunOptions& options = {});

struct TwoPhasePlan {
    std::int64_t t1 = 0;
    std::int64_t t2 = 0;
    std::int64_t b1 = 1;
    std::int64_t b2 = 1;
    StepSchedule schedule;
    double epsilon0 = 1.0;
    double alpha = 0.5;
    double c_alpha = 0.0;
    double c0_delta = 0.0;
    double delta_bar = std::numeric_limits<double>::infinity();
    double delta = 1.0;
    double epsilon = 1e-2;

    /// Throws InvalidInput when a field is out of range.
    void validate() const;
};

/// Large-batch constant-step phase of t1 updates, then t2 small-batch updates
/// with the inverse-time step. Refuses plans whose expected sample cost
/// exceeds options.step_budget.
RunTrace two_phase(const TabularMdp& mdp, const PolicyParams& theta0, double lambda,
                   const TwoPhasePlan& plan, const RngStream& rng, const SoftOptimum& opt,
                   const RunOptions& options = {});

/// Expected environment steps of one random-horizon gradient sample.
double expected_steps_per_sample(double gamma);

struct CbarEstimate {
    double c_bar = 0.0;
    double delta_bar = 0.0;
};

/// Runs exact PG and reports the smallest action probability seen along the
/// way, plus the induced log-policy radius || log c_bar - log pi* ||_2.
CbarEstimate estimate_cbar(const TabularMdp& mdp, const PolicyParams& theta0, double lambda,
                           double eta, std::int64_t t_max, const SoftOptimum& opt);

/// A count that may be far too large to represent: its natural log, plus the
/// exact ceiling when it fits in 63 bits.
struct BigCount {
    double log_value = 0.0;
    std::optional<std::int64_t> exact;

    static BigCount from_log(double log_value);
};

enum class PhaseTwoLength { nominal, measured };

/// Smallest integers satisfying the two-phase convergence conditions, with
/// epsilon0 and C_alpha computed from the problem. Counts are carried in log
/// space so astronomically large schedules evaluate without overflow.
struct GuaranteedSchedule {
    BigCount t1;
    BigCount t2;
    BigCount b1;
    BigCount b2;
    BigCount t0;
    double eta = 0.0;
    double epsilon0 = 0.0;
    double log_epsilon0 = 0.0;
    double c_alpha = 0.0;
    double c0_delta = 0.0;
    double delta_bar = 0.0;
    double alpha = 0.5;
    double delta = 0.0;
    double epsilon = 0.0;
    /// True when the per-step condition B >= 1/eta_t dominated B2.
    bool b2_from_step_condition = false;

    /// Materializes an executable plan; throws BudgetExceeded if any count
    /// overflows or the expected cost exceeds `step_budget` for this gamma.
    TwoPhasePlan plan(double gamma, std::int64_t step_budget) const;
};

/// `d_theta1` is D(theta_1). With PhaseTwoLength::measured, `d_phase1_end`
/// replaces epsilon0 in the T2 bound.
GuaranteedSchedule guaranteed_schedule(const ProblemConstants& consts, const TabularMdp& mdp, double lambda,
                                 const SoftOptimum& opt, double d_theta1, double c0_delta,
                                 double delta_bar, double alpha, double delta, double epsilon,
                                 PhaseTwoLength t2_mode = PhaseTwoLength::nominal,
                                 double d_phase1_end = 0.0);

double epsilon0(const TabularMdp& mdp, double lambda, double alpha);
double c_alpha(const TabularMdp& mdp, double lambda, double alpha, const SoftOptimum& opt);

}  // namespace entropg
