#include "entropg/oracle.hpp"

#include "entropg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace entropg {

namespace {

void require_shape(const TabularMdp& mdp, const PolicyMatrix& pi) {
    if (pi.num_states() != mdp.num_states || pi.num_actions() != mdp.num_actions) {
        throw InvalidInput("policy shape does not match the MDP");
    }
}

Matrix induced_chain(const TabularMdp& mdp, const PolicyMatrix& pi) {
    const int S = mdp.num_states;
    Matrix chain = Matrix::Zero(S, S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            chain.row(s) += pi.probs(s, a) * mdp.transitions.row(mdp.row(s, a));
        }
    }
    return chain;
}

// Per-state expected reward sum_a pi(a|s) (r(s,a) - lambda log pi(a|s)).
// Zero-probability actions contribute nothing.
Vector regularized_reward(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda) {
    Vector out = Vector::Zero(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double p = pi.probs(s, a);
            if (p == 0.0) continue;
            out[s] += p * (mdp.rewards(s, a) - lambda * pi.log_probs(s, a));
        }
    }
    return out;
}

Matrix backup(const TabularMdp& mdp, const Vector& v) {
    Matrix q(mdp.num_states, mdp.num_actions);
    const Vector next = mdp.transitions * v;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            q(s, a) = mdp.rewards(s, a) + mdp.discount * next[mdp.row(s, a)];
        }
    }
    return q;
}

Vector solve_values(const TabularMdp& mdp, const Matrix& chain, const Vector& reward) {
    const int S = mdp.num_states;
    const Matrix system = Matrix::Identity(S, S) - mdp.discount * chain;
    return system.partialPivLu().solve(reward);
}

}  // namespace

RegularizedSolution evaluate_policy(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda) {
    require_valid(mdp);
    require_shape(mdp, pi);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
    if (lambda > 0.0) {
        for (Eigen::Index i = 0; i < pi.log_probs.size(); ++i) {
            if (!std::isfinite(pi.log_probs.data()[i])) {
                throw InvalidInput("policy has a zero-probability action; log pi is undefined for lambda > 0");
            }
        }
    }

    const Matrix chain = induced_chain(mdp, pi);
    RegularizedSolution sol;
    sol.lambda = lambda;
    sol.v = solve_values(mdp, chain, regularized_reward(mdp, pi, lambda));
    sol.q = backup(mdp, sol.v);

    const Vector v0 = lambda == 0.0 ? sol.v : solve_values(mdp, chain, regularized_reward(mdp, pi, 0.0));
    const Matrix q0 = lambda == 0.0 ? sol.q : backup(mdp, v0);
    sol.advantage = q0.colwise() - v0;

    double residual = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        double rhs = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double p = pi.probs(s, a);
            if (p == 0.0) continue;
            rhs += p * (sol.q(s, a) - lambda * pi.log_probs(s, a));
        }
        residual = std::max(residual, std::abs(rhs - sol.v[s]));
    }
    sol.residual = residual;
    return sol;
}

double objective(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda) {
    return mdp.initial_dist.dot(evaluate_policy(mdp, pi, lambda).v);
}

double objective(const TabularMdp& mdp, const PolicyParams& theta, double lambda) {
    return objective(mdp, policy_from_params(theta), lambda);
}

SoftOptimum soft_value_iteration(const TabularMdp& mdp, double lambda, double tol, int max_iter) {
    require_valid(mdp);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");

    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    const double gamma = mdp.discount;
    if (max_iter <= 0) {
        const double bound = std::max(
            (mdp.reward_max + lambda * std::log(static_cast<double>(A))) / (1.0 - gamma), tol);
        double contraction = 1.0;
        if (gamma > 0.0) contraction = std::ceil(std::log(tol * (1.0 - gamma) / bound) / std::log(gamma));
        max_iter = static_cast<int>(std::clamp(10.0 * std::max(contraction, 1.0), 10.0, 1e8));
    }

    auto apply = [&](const Vector& v, Matrix& q) {
        q = backup(mdp, v);
        Vector out(S);
        for (int s = 0; s < S; ++s) {
            if (lambda > 0.0) {
                const Eigen::Array<double, Eigen::Dynamic, 1> scaled = q.row(s).transpose().array() / lambda;
                out[s] = lambda * logsumexp({scaled.data(), static_cast<std::size_t>(A)});
            } else {
                out[s] = q.row(s).maxCoeff();
            }
        }
        return out;
    };

    Vector v = Vector::Zero(S);
    Matrix q;
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < max_iter) {
        Vector next = apply(v, q);
        residual = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        ++it;
        if (residual <= tol) break;
    }
    if (residual > tol) {
        throw ConvergenceFailure("soft value iteration did not reach tolerance within " +
                                     std::to_string(max_iter) + " iterations",
                                 residual);
    }

    SoftOptimum opt;
    opt.lambda = lambda;
    opt.iterations = it;
    opt.residual = residual;
    opt.v_star = v;
    opt.q_star = backup(mdp, v);
    opt.pi_star.probs.resize(S, A);
    opt.pi_star.log_probs.resize(S, A);
    for (int s = 0; s < S; ++s) {
        if (lambda > 0.0) {
            Eigen::Array<double, Eigen::Dynamic, 1> scaled = opt.q_star.row(s).transpose().array() / lambda;
            const double lse = logsumexp({scaled.data(), static_cast<std::size_t>(A)});
            for (int a = 0; a < A; ++a) {
                opt.pi_star.log_probs(s, a) = scaled[a] - lse;
                opt.pi_star.probs(s, a) = std::exp(scaled[a] - lse);
            }
        } else {
            Eigen::Index best = 0;
            opt.q_star.row(s).maxCoeff(&best);  // first maximizer
            for (int a = 0; a < A; ++a) {
                const bool chosen = a == best;
                opt.pi_star.probs(s, a) = chosen ? 1.0 : 0.0;
                opt.pi_star.log_probs(s, a) = chosen ? 0.0 : -std::numeric_limits<double>::infinity();
            }
        }
    }
    const VisitationMeasures vis = visitation(mdp, opt.pi_star);
    opt.mismatch = (vis.d.array() / mdp.initial_dist.array()).maxCoeff();
    return opt;
}

VisitationMeasures visitation(const TabularMdp& mdp, const PolicyMatrix& pi) {
    require_valid(mdp);
    require_shape(mdp, pi);
    const int S = mdp.num_states;
    const Matrix chain = induced_chain(mdp, pi);
    // d^T (I - gamma P_pi) = (1 - gamma) rho^T
    const Matrix system = (Matrix::Identity(S, S) - mdp.discount * chain).transpose();
    VisitationMeasures out;
    out.d = (1.0 - mdp.discount) * system.partialPivLu().solve(mdp.initial_dist);
    out.v = pi.probs.array().colwise() * out.d.array();
    return out;
}

Matrix exact_gradient(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda) {
    const RegularizedSolution sol = evaluate_policy(mdp, pi, lambda);
    const VisitationMeasures vis = visitation(mdp, pi);
    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    Matrix grad = Matrix::Zero(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const double weight = vis.v(s, a);
            if (weight == 0.0) continue;
            const double target = sol.q(s, a) - lambda * pi.log_probs(s, a);
            // score row s: e_a - pi(.|s)
            for (int b = 0; b < A; ++b) {
                const double score = (b == a ? 1.0 : 0.0) - pi.probs(s, b);
                grad(s, b) += weight * score * target;
            }
        }
    }
    return grad / (1.0 - mdp.discount);
}

Matrix exact_gradient(const TabularMdp& mdp, const PolicyParams& theta, double lambda) {
    return exact_gradient(mdp, policy_from_params(theta), lambda);
}

double suboptimality(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                     const SoftOptimum& opt) {
    if (lambda != opt.lambda) throw InvalidInput("soft optimum was computed at a different lambda");
    return opt.value(mdp) - objective(mdp, theta, lambda);
}

double lojasiewicz_constant(const TabularMdp& mdp, double min_policy_prob, double lambda,
                            const SoftOptimum& opt) {
    if (lambda != opt.lambda) throw InvalidInput("soft optimum was computed at a different lambda");
    return 2.0 * lambda / mdp.num_states * mdp.initial_dist.minCoeff() * min_policy_prob *
           min_policy_prob / opt.mismatch;
}

double lojasiewicz_constant(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                            const SoftOptimum& opt) {
    return lojasiewicz_constant(mdp, policy_from_params(theta).min_prob(), lambda, opt);
}

ProblemConstants constants_from_bounds(double reward_max, double lambda, int num_actions, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("discount must lie in [0,1)");
    if (!(lambda >= 0.0) || !(reward_max >= 0.0) || num_actions < 1) {
        throw InvalidInput("constants need reward_max >= 0, lambda >= 0, |A| >= 1");
    }
    const double ent = lambda * std::log(static_cast<double>(num_actions));
    const double one_minus = 1.0 - gamma;
    const double root_gap = 1.0 - std::sqrt(gamma);

    ProblemConstants c;
    c.value_bound = (reward_max + ent) / one_minus;
    c.g_bound = 2.0 * (reward_max + ent) / (one_minus * one_minus);
    c.lipschitz = (8.0 * reward_max + lambda * (4.0 + 8.0 * std::log(static_cast<double>(num_actions)))) /
                  (one_minus * one_minus * one_minus);
    c.sigma_sq = 8.0 / (one_minus * one_minus) * (reward_max * reward_max + ent * ent) / (root_gap * root_gap);
    c.gpomdp_var_bound = (12.0 * reward_max * reward_max + 24.0 * ent * ent) / std::pow(one_minus, 4);
    c.pi_star_floor = lambda > 0.0 ? std::exp(-reward_max / (one_minus * lambda)) : 0.0;
    return c;
}

ProblemConstants problem_constants(const TabularMdp& mdp, double lambda) {
    if (mdp.discount == 0.0) {
        throw InvalidInput("sigma^2 is undefined by formula for gamma = 0 (no random horizon)");
    }
    return constants_from_bounds(mdp.reward_max, lambda, mdp.num_actions, mdp.discount);
}

double gpomdp_bias_bound(const TabularMdp& mdp, double lambda, int h) {
    if (h < 1) throw InvalidInput("horizon must be >= 1");
    const double gamma = mdp.discount;
    const double scale = mdp.reward_max + lambda * std::log(static_cast<double>(mdp.num_actions));
    return 2.0 * scale * std::pow(gamma, h) / (1.0 - gamma) * (h + 1.0 / (1.0 - gamma));
}

SandwichResult sandwich_check(const TabularMdp& mdp, double lambda, const SoftOptimum& opt) {
    if (lambda != opt.lambda) throw InvalidInput("soft optimum was computed at a different lambda");
    constexpr double tol = 1e-9;
    SandwichResult out;
    out.lower = objective(mdp, opt.pi_star, 0.0);
    out.mid = soft_value_iteration(mdp, 0.0).value(mdp);
    out.upper = out.lower + lambda * std::log(static_cast<double>(mdp.num_actions)) / (1.0 - mdp.discount);
    out.holds = out.lower <= out.mid + tol && out.mid <= out.upper + tol;
    return out;
}

double distance_to_optimal_set(const PolicyMatrix& pi, const SoftOptimum& opt) {
    return (pi.log_probs - opt.pi_star.log_probs).norm();
}

double distance_to_optimal_set(const PolicyParams& theta, const SoftOptimum& opt) {
    return distance_to_optimal_set(policy_from_params(theta), opt);
}

double entropy_value(const TabularMdp& mdp, const PolicyMatrix& pi) {
    for (Eigen::Index i = 0; i < pi.log_probs.size(); ++i) {
        if (!std::isfinite(pi.log_probs.data()[i])) {
            throw InvalidInput("entropy needs a strictly positive policy");
        }
    }
    const VisitationMeasures vis = visitation(mdp, pi);
    return -(vis.v.array() * pi.log_probs.array()).sum() / (1.0 - mdp.discount);
}

}  // namespace entropg
