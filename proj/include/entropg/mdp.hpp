#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace entropg {

/// All (state, action)-indexed tables are row-major so a state's row is a
/// contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Finite discounted MDP with an exploratory initial distribution.
///
/// Transitions are stored densely as an (S*A) x S row-major matrix; row
/// `s * A + a` is the next-state distribution P(.|s,a). The reward bound
/// reward_max is kept separately from the rewards themselves, since the
/// problem constants are stated in terms of the bound and not the attained
/// maximum.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    Matrix transitions;
    Matrix rewards;
    double reward_max = 0.0;
    double discount = 0.0;
    Vector initial_dist;

    Eigen::Index row(int s, int a) const { return static_cast<Eigen::Index>(s) * num_actions + a; }
    double p(int s, int a, int next) const { return transitions(row(s, a), next); }

    std::span<const double> next_state_dist(int s, int a) const {
        return {transitions.data() + row(s, a) * num_states, static_cast<std::size_t>(num_states)};
    }
    std::span<const double> initial() const {
        return {initial_dist.data(), static_cast<std::size_t>(num_states)};
    }

    friend bool operator==(const TabularMdp&, const TabularMdp&);
};

struct Violation {
    std::string field;
    std::string index;
    double residual = 0.0;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks shapes, probability axioms, reward bounds, discount range and
/// strict positivity of the initial distribution.
ValidationReport validate_mdp(const TabularMdp& mdp);

/// Throws InvalidInput listing every violation when the report is non-empty.
void require_valid(const TabularMdp& mdp);

/// Softmax logits theta[s][a].
struct PolicyParams {
    Matrix logits;

    static PolicyParams zeros(int num_states, int num_actions) {
        return {Matrix::Zero(num_states, num_actions)};
    }
    int num_states() const { return static_cast<int>(logits.rows()); }
    int num_actions() const { return static_cast<int>(logits.cols()); }
};

/// Row-stochastic policy matrix together with its elementwise logarithm.
/// When built from logits, log_probs is computed as theta - logsumexp(row)
/// and stays finite even where probs underflows to zero.
struct PolicyMatrix {
    Matrix probs;
    Matrix log_probs;

    static PolicyMatrix from_probabilities(const Matrix& probs);

    int num_states() const { return static_cast<int>(probs.rows()); }
    int num_actions() const { return static_cast<int>(probs.cols()); }
    double min_prob() const { return probs.minCoeff(); }

    std::span<const double> row(int s) const {
        return {probs.data() + static_cast<Eigen::Index>(s) * probs.cols(),
                static_cast<std::size_t>(probs.cols())};
    }
};

PolicyMatrix policy_from_params(const PolicyParams& theta);

double logsumexp(std::span<const double> values);

/// Score function d/dtheta log pi_theta(a|s): zero outside row s, and
/// row s equal to e_a - pi(.|s).
Matrix log_policy_gradient(const PolicyParams& theta, int s, int a);
Matrix log_policy_gradient(const PolicyMatrix& pi, int s, int a);

void check_state_action(int num_states, int num_actions, int s, int a);

}  // namespace entropg
