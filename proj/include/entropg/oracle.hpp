#pragma once

#include "entropg/mdp.hpp"

namespace entropg {

/// Soft value and Q tables of a fixed policy. `advantage` is Q - V of the
/// unregularized problem (lambda = 0) for the same policy.
struct RegularizedSolution {
    Vector v;
    Matrix q;
    Matrix advantage;
    double lambda = 0.0;
    double residual = 0.0;
};

struct SoftOptimum {
    Vector v_star;
    Matrix q_star;
    PolicyMatrix pi_star;
    double lambda = 0.0;
    int iterations = 0;
    double residual = 0.0;
    /// || d_rho^{pi*} / rho ||_inf, the distribution-mismatch factor that
    /// enters the gradient-domination constant.
    double mismatch = 1.0;

    double value(const TabularMdp& mdp) const { return mdp.initial_dist.dot(v_star); }
};

struct VisitationMeasures {
    Vector d;
    Matrix v;
};

struct ProblemConstants {
    double g_bound = 0.0;
    double lipschitz = 0.0;
    double sigma_sq = 0.0;
    double gpomdp_var_bound = 0.0;
    double value_bound = 0.0;
    double pi_star_floor = 0.0;
};

/// Exact soft policy evaluation by a dense LU solve of V = r_pi + gamma P_pi V.
RegularizedSolution evaluate_policy(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda);

/// rho^T V_lambda^pi.
double objective(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda);
double objective(const TabularMdp& mdp, const PolicyParams& theta, double lambda);

/// Iterates V <- lambda * logsumexp((r + gamma P V) / lambda) until the
/// sup-norm Bellman residual is at most `tol`. lambda = 0 falls back to
/// standard value iteration with a greedy policy (ties to the lowest action).
/// max_iter <= 0 selects ten times the contraction bound.
SoftOptimum soft_value_iteration(const TabularMdp& mdp, double lambda, double tol = 1e-12,
                                 int max_iter = 0);

VisitationMeasures visitation(const TabularMdp& mdp, const PolicyMatrix& pi);

/// Exact gradient of V_lambda^theta(rho) with respect to the logits.
Matrix exact_gradient(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda);
Matrix exact_gradient(const TabularMdp& mdp, const PolicyParams& theta, double lambda);

/// D(theta) = V*_lambda(rho) - V_lambda^theta(rho).
double suboptimality(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                     const SoftOptimum& opt);

/// Gradient-domination constant C(theta) with ||grad||^2 >= C(theta) D(theta).
double lojasiewicz_constant(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                            const SoftOptimum& opt);
double lojasiewicz_constant(const TabularMdp& mdp, double min_policy_prob, double lambda,
                            const SoftOptimum& opt);

/// Closed-form constants from the reward bound, regularization, action count
/// and discount. Valid for any gamma in [0,1).
ProblemConstants constants_from_bounds(double reward_max, double lambda, int num_actions,
                                       double gamma);

/// Same as constants_from_bounds, but rejects gamma = 0 where the random
/// horizon estimators (and hence sigma^2) have no role.
ProblemConstants problem_constants(const TabularMdp& mdp, double lambda);

/// Upper bound on the bias of the truncated GPOMDP estimator at horizon h.
double gpomdp_bias_bound(const TabularMdp& mdp, double lambda, int h);

struct SandwichResult {
    double lower = 0.0;  // unregularized value of pi*_lambda
    double mid = 0.0;    // unregularized optimum
    double upper = 0.0;  // lower + lambda log|A| / (1 - gamma)
    bool holds = false;
};

SandwichResult sandwich_check(const TabularMdp& mdp, double lambda, const SoftOptimum& opt);

/// || log pi_theta - log pi*_lambda ||_2 over all (s,a); equals the distance
/// from theta to the set of optimal logits.
double distance_to_optimal_set(const PolicyParams& theta, const SoftOptimum& opt);
double distance_to_optimal_set(const PolicyMatrix& pi, const SoftOptimum& opt);

/// Discounted entropy H(rho, pi).
double entropy_value(const TabularMdp& mdp, const PolicyMatrix& pi);

}  // namespace entropg
