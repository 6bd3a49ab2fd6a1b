#include "entropg/optimizers.hpp"

#include "entropg/errors.hpp"
#include "entropg/log.hpp"
#include "entropg/sampling.hpp"

#include <cmath>
#include <string>

namespace entropg {

namespace {

// Shared bookkeeping for all three optimizers: diagnostics rows, sinks,
// divergence handling.
class TraceRecorder {
public:
    TraceRecorder(const TabularMdp& mdp, double lambda, const SoftOptimum& opt, const RunOptions& options)
        : mdp_(mdp), lambda_(lambda), opt_(opt), options_(options),
          pi_star_min_(opt.pi_star.min_prob()), value_star_(opt.value(mdp)) {
        if (lambda != opt.lambda) throw InvalidInput("soft optimum was computed at a different lambda");
        if (options.diagnostics_every < 1) throw InvalidInput("diagnostics_every must be >= 1");
    }

    void record(std::int64_t t, const PolicyParams& theta, std::int64_t batch, bool force) {
        trace_.env_steps = cum_steps_;
        if (!force && t % options_.diagnostics_every != 0) return;
        const PolicyMatrix pi = policy_from_params(theta);
        TraceRow row;
        row.t = t;
        row.objective = objective(mdp_, pi, lambda_);
        row.gap = value_star_ - row.objective;
        row.grad_norm = exact_gradient(mdp_, pi, lambda_).norm();
        row.min_pi = pi.min_prob();
        row.dist = distance_to_optimal_set(pi, opt_);
        row.batch_size = batch;
        row.cum_env_steps = cum_steps_;
        row.omega_flag = row.min_pi >= (1.0 - options_.region.alpha) * pi_star_min_;
        row.exited_region = row.dist > (1.0 + 1.0 / options_.region.delta) * options_.region.delta_bar;
        trace_.min_pi_overall = std::min(trace_.min_pi_overall, row.min_pi);
        trace_.final_gap = row.gap;
        trace_.rows.push_back(row);
        if (options_.sink) options_.sink(row);
    }

    void add_steps(const GradientEstimate& est) {
        cum_steps_ += est.env_steps;
        trace_.truncated_horizons += est.truncated_horizons;
        if (cum_steps_ > options_.step_budget) {
            throw BudgetExceeded("environment step budget of " + std::to_string(options_.step_budget) +
                                 " exceeded");
        }
    }

    void check_finite(std::int64_t t, const PolicyParams& theta) {
        if (theta.logits.allFinite()) return;
        trace_.env_steps = cum_steps_;
        throw DivergenceError("non-finite iterate at update " + std::to_string(t), trace_);
    }

    RunTrace finish(const PolicyParams& theta) {
        trace_.final_theta = theta;
        trace_.env_steps = cum_steps_;
        return std::move(trace_);
    }

    const RunTrace& trace() const { return trace_; }

private:
    const TabularMdp& mdp_;
    double lambda_;
    const SoftOptimum& opt_;
    const RunOptions& options_;
    double pi_star_min_;
    double value_star_;
    std::int64_t cum_steps_ = 0;
    RunTrace trace_;
};

void require_positive_gamma(const TabularMdp& mdp) {
    if (!(mdp.discount > 0.0 && mdp.discount < 1.0)) {
        throw InvalidInput("stochastic PG needs gamma in (0,1)");
    }
}

// Update loop shared by ent_rpg and two_phase.
RunTrace stochastic_run(const TabularMdp& mdp, const PolicyParams& theta0, double lambda,
                        std::int64_t total, const std::function<std::int64_t(std::int64_t)>& batch_at,
                        const StepSchedule& schedule, const RngStream& rng, const SoftOptimum& opt,
                        const RunOptions& options) {
    require_valid(mdp);
    require_positive_gamma(mdp);
    TraceRecorder rec(mdp, lambda, opt, options);
    PolicyParams theta = theta0;
    rec.record(0, theta, 0, true);
    for (std::int64_t t = 1; t <= total; ++t) {
        const std::int64_t b = batch_at(t);
        const PolicyMatrix pi = policy_from_params(theta);
        const SingleSampleEstimator estimator = [&](const RngStream& stream) {
            return spg_estimate(mdp, pi, lambda, stream);
        };
        const GradientEstimate est =
            batch_mean(estimator, static_cast<int>(b), derive_stream(rng, static_cast<std::uint64_t>(t)),
                       options.workers);
        rec.add_steps(est);
        theta.logits += schedule.at(t) * est.grad;
        rec.check_finite(t, theta);
        rec.record(t, theta, b, t == total);
    }
    return rec.finish(theta);
}

}  // namespace

RunTrace exact_pg(const TabularMdp& mdp, const PolicyParams& theta0, double lambda, double eta,
                  std::int64_t t_max, const SoftOptimum& opt, const RunOptions& options) {
    require_valid(mdp);
    if (!(eta >= 0.0)) throw InvalidInput("step size must be nonnegative");
    if (t_max < 0) throw InvalidInput("t_max must be >= 0");
    const ProblemConstants c = constants_from_bounds(mdp.reward_max, lambda, mdp.num_actions, mdp.discount);
    if (eta > 2.0 / c.lipschitz) {
        log::warn("exact PG step " + std::to_string(eta) + " exceeds 2/L = " + std::to_string(2.0 / c.lipschitz) +
                  "; ascent is not guaranteed");
    }

    TraceRecorder rec(mdp, lambda, opt, options);
    PolicyParams theta = theta0;
    rec.record(0, theta, 0, true);
    for (std::int64_t t = 1; t <= t_max; ++t) {
        theta.logits += eta * exact_gradient(mdp, theta, lambda);
        rec.check_finite(t, theta);
        rec.record(t, theta, 0, t == t_max);
    }
    return rec.finish(theta);
}

RunTrace ent_rpg(const TabularMdp& mdp, const PolicyParams& theta0, double lambda, std::int64_t b,
                 std::int64_t t_max, const StepSchedule& schedule, const RngStream& rng,
                 const SoftOptimum& opt, const RunOptions& options) {
    if (b < 1) throw InvalidInput("batch size must be >= 1");
    if (t_max < 0) throw InvalidInput("t_max must be >= 0");
    const double expected = expected_steps_per_sample(mdp.discount) * static_cast<double>(b) *
                            static_cast<double>(t_max);
    if (expected > static_cast<double>(options.step_budget)) {
        throw BudgetExceeded("run needs about " + std::to_string(expected) +
                             " environment steps, above the budget of " + std::to_string(options.step_budget));
    }
    return stochastic_run(mdp, theta0, lambda, t_max, [b](std::int64_t) { return b; }, schedule, rng, opt,
                          options);
}

void TwoPhasePlan::validate() const {
    if (t1 < 0 || t2 < 0) throw InvalidInput("phase lengths must be >= 0");
    if (b1 < 1 || b2 < 1) throw InvalidInput("batch sizes must be >= 1");
    if (!(schedule.eta > 0.0)) throw InvalidInput("phase-1 step size must be positive");
    if (schedule.t0 < 1) throw InvalidInput("t0 must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
    if (!(delta > 0.0) || !(epsilon > 0.0)) throw InvalidInput("delta and epsilon must be positive");
    if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) throw InvalidInput("epsilon0 must lie in (0,1]");
}

double expected_steps_per_sample(double gamma) {
    const double root = std::sqrt(gamma);
    return gamma / (1.0 - gamma) + root / (1.0 - root) + 1.0;
}

RunTrace two_phase(const TabularMdp& mdp, const PolicyParams& theta0, double lambda,
                   const TwoPhasePlan& plan, const RngStream& rng, const SoftOptimum& opt,
                   const RunOptions& options) {
    plan.validate();
    const double samples = static_cast<double>(plan.t1) * static_cast<double>(plan.b1) +
                           static_cast<double>(plan.t2) * static_cast<double>(plan.b2);
    const double expected = expected_steps_per_sample(mdp.discount) * samples;
    if (expected > static_cast<double>(options.step_budget)) {
        throw BudgetExceeded("two-phase plan needs about " + std::to_string(expected) +
                             " environment steps, above the budget of " + std::to_string(options.step_budget));
    }

    RunOptions run_options = options;
    run_options.region.alpha = plan.alpha;
    run_options.region.delta = plan.delta;
    run_options.region.delta_bar = plan.delta_bar;
    const StepSchedule schedule = StepSchedule::two_phase(plan.schedule.eta, plan.schedule.t0, plan.t1);
    RunTrace trace = stochastic_run(
        mdp, theta0, lambda, plan.t1 + plan.t2,
        [&plan](std::int64_t t) { return t <= plan.t1 ? plan.b1 : plan.b2; }, schedule, rng, opt,
        run_options);

    trace.reached_epsilon = trace.final_gap <= plan.epsilon;
    std::int64_t phase2 = 0;
    std::int64_t flagged = 0;
    for (const auto& row : trace.rows) {
        if (row.t <= plan.t1) continue;
        ++phase2;
        flagged += row.omega_flag ? 1 : 0;
    }
    if (phase2 > 0) trace.phase2_omega_fraction = static_cast<double>(flagged) / static_cast<double>(phase2);
    return trace;
}

CbarEstimate estimate_cbar(const TabularMdp& mdp, const PolicyParams& theta0, double lambda,
                           double eta, std::int64_t t_max, const SoftOptimum& opt) {
    const ProblemConstants c = constants_from_bounds(mdp.reward_max, lambda, mdp.num_actions, mdp.discount);
    if (eta > 1.0 / (2.0 * c.lipschitz)) {
        log::warn("estimate_cbar: step " + std::to_string(eta) + " is above 1/(2L)");
    }
    const RunTrace trace = exact_pg(mdp, theta0, lambda, eta, t_max, opt);
    CbarEstimate out;
    out.c_bar = trace.min_pi_overall;
    out.delta_bar = (opt.pi_star.log_probs.array() - std::log(out.c_bar)).matrix().norm();
    return out;
}

}  // namespace entropg
