#include "entropg/errors.hpp"
#include "entropg/log.hpp"
#include "entropg/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace entropg {

namespace {

// log(exp(x) + exp(y))
double log_add(double x, double y) {
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    if (std::isinf(lo) && lo < 0) return hi;
    return hi + std::log1p(std::exp(lo - hi));
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

BigCount BigCount::from_log(double log_value) {
    BigCount c;
    // 62 bits of headroom so sums of counts stay representable.
    if (log_value < 62.0 * std::log(2.0)) {
        const double v = std::ceil(std::exp(log_value) - 1e-9);
        c.exact = static_cast<std::int64_t>(std::max(v, 0.0));
        c.log_value = *c.exact > 0 ? std::log(static_cast<double>(*c.exact)) : kNegInf;
    } else {
        c.log_value = log_value;
    }
    return c;
}

namespace {

double log_epsilon0(const TabularMdp& mdp, double lambda, double alpha) {
    if (!(lambda > 0.0)) throw InvalidInput("epsilon0 needs lambda > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
    const double rho_min = mdp.initial_dist.minCoeff();
    const double log_eps = 2.0 * std::log(lambda * rho_min / (6.0 * std::log(2.0))) +
                           4.0 * (std::log(alpha) - mdp.reward_max / ((1.0 - mdp.discount) * lambda));
    return std::min(log_eps, 0.0);
}

}  // namespace

double epsilon0(const TabularMdp& mdp, double lambda, double alpha) {
    return std::exp(log_epsilon0(mdp, lambda, alpha));
}

double c_alpha(const TabularMdp& mdp, double lambda, double alpha, const SoftOptimum& opt) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0,1)");
    return lojasiewicz_constant(mdp, (1.0 - alpha) * opt.pi_star.min_prob(), lambda, opt);
}

GuaranteedSchedule guaranteed_schedule(const ProblemConstants& consts, const TabularMdp& mdp, double lambda,
                                 const SoftOptimum& opt, double d_theta1, double c0_delta,
                                 double delta_bar, double alpha, double delta, double epsilon,
                                 PhaseTwoLength t2_mode, double d_phase1_end) {
    if (!(c0_delta > 0.0)) throw InvalidInput("C0_delta must be positive");
    if (!(delta_bar > 0.0)) throw InvalidInput("Delta_bar must be positive");
    if (!(delta > 0.0) || !(epsilon > 0.0)) throw InvalidInput("delta and epsilon must be positive");
    if (!(d_theta1 >= 0.0)) throw InvalidInput("D(theta_1) must be nonnegative");
    if (t2_mode == PhaseTwoLength::measured && !(d_phase1_end > 0.0)) {
        throw InvalidInput("measured T2 needs a positive D(theta_T1)");
    }

    GuaranteedSchedule out;
    out.alpha = alpha;
    out.delta = delta;
    out.epsilon = epsilon;
    out.c0_delta = c0_delta;
    out.delta_bar = delta_bar;
    out.log_epsilon0 = log_epsilon0(mdp, lambda, alpha);
    out.epsilon0 = std::exp(out.log_epsilon0);
    out.c_alpha = c_alpha(mdp, lambda, alpha, opt);
    if (epsilon > out.epsilon0) log::warn("guaranteed_schedule: epsilon exceeds epsilon0");

    const double log_sigma_sq = std::log(consts.sigma_sq);
    const double log_sigma = 0.5 * log_sigma_sq;
    const double log_L = std::log(consts.lipschitz);
    const double log_eps0 = out.log_epsilon0;

    // t0 >= sqrt(3 sigma^2 / (2 delta eps0))
    out.t0 = BigCount::from_log(0.5 * (std::log(3.0) + log_sigma_sq - std::log(2.0 * delta) - log_eps0));
    if (out.t0.exact && *out.t0.exact < 1) out.t0 = BigCount::from_log(0.0);

    // T1 >= (6 D(theta_1) / (delta eps0))^(8L / (C0 ln 2)); at least 2 so log T1 > 0.
    const double exponent = 8.0 * consts.lipschitz / (c0_delta * std::log(2.0));
    double log_t1 = d_theta1 > 0.0 ? exponent * (std::log(6.0 * d_theta1) - std::log(delta) - log_eps0) : kNegInf;
    log_t1 = std::max(log_t1, std::log(2.0));
    out.t1 = BigCount::from_log(log_t1);
    log_t1 = out.t1.log_value;

    // eta = min{ log T1 / (T1 L), 8 / C0, 1 / (2L) }
    const double log_eta_1 = std::log(log_t1) - log_t1 - log_L;
    out.eta = std::min({std::exp(log_eta_1), 8.0 / c0_delta, 1.0 / (2.0 * consts.lipschitz)});

    // B1 >= max{ 30 sigma^2 / (C0 eps0 delta), 6 sigma T1 log T1 / (Delta_bar L) }
    const double log_b1_a = std::log(30.0) + log_sigma_sq - std::log(c0_delta) - log_eps0 - std::log(delta);
    const double log_b1_b = std::log(6.0) + log_sigma + log_t1 + std::log(log_t1) - std::log(delta_bar) - log_L;
    out.b1 = BigCount::from_log(std::max(log_b1_a, log_b1_b));

    // T2 >= t0 (X / (6 delta eps) - 1), X = eps0 (nominal) or D(theta_T1) (measured)
    const double log_x = t2_mode == PhaseTwoLength::nominal ? log_eps0 : std::log(d_phase1_end);
    const double log_ratio = log_x - std::log(6.0 * delta * epsilon);
    const double log_t0 = out.t0.log_value;
    if (log_ratio <= 0.0) {
        out.t2 = BigCount::from_log(kNegInf);
    } else {
        // log(t0 (e^r - 1)) = log t0 + r + log(1 - e^-r)
        out.t2 = BigCount::from_log(log_t0 + log_ratio + std::log(-std::expm1(-log_ratio)));
    }

    // B2 >= sigma^2 ln(T2 + t0) / (6 C_alpha delta eps), and B >= 1/eta_t = T2 + t0 at the last step.
    const double log_t2_plus_t0 = log_add(out.t2.log_value, log_t0);
    const double log_b2_formula = log_sigma_sq + std::log(log_t2_plus_t0) - std::log(6.0 * out.c_alpha * delta * epsilon);
    out.b2_from_step_condition = log_t2_plus_t0 > log_b2_formula;
    out.b2 = BigCount::from_log(std::max(log_b2_formula, log_t2_plus_t0));
    return out;
}

TwoPhasePlan GuaranteedSchedule::plan(double gamma, std::int64_t step_budget) const {
    if (!t1.exact || !t2.exact || !b1.exact || !b2.exact || !t0.exact) {
        throw BudgetExceeded("theoretical schedule is not representable (log T1 = " + std::to_string(t1.log_value) +
                             ", log B1 = " + std::to_string(b1.log_value) + ")");
    }
    const double samples = static_cast<double>(*t1.exact) * static_cast<double>(*b1.exact) +
                           static_cast<double>(*t2.exact) * static_cast<double>(*b2.exact);
    const double steps = samples * expected_steps_per_sample(gamma);
    if (steps > static_cast<double>(step_budget)) {
        throw BudgetExceeded("theoretical schedule needs about " + std::to_string(steps) +
                             " environment steps, above the budget of " + std::to_string(step_budget));
    }
    TwoPhasePlan p;
    p.t1 = *t1.exact;
    p.t2 = *t2.exact;
    p.b1 = *b1.exact;
    p.b2 = *b2.exact;
    p.schedule = StepSchedule::two_phase(eta, *t0.exact, p.t1);
    p.epsilon0 = epsilon0;
    p.alpha = alpha;
    p.c_alpha = c_alpha;
    p.c0_delta = c0_delta;
    p.delta_bar = delta_bar;
    p.delta = delta;
    p.epsilon = epsilon;
    return p;
}

}  // namespace entropg
