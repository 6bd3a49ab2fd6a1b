#include "entropg/mdp.hpp"

#include "entropg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace entropg {

namespace {

constexpr double kProbTol = 1e-12;

std::string idx(std::initializer_list<long> parts) {
    std::ostringstream os;
    os << '[';
    bool first = true;
    for (long p : parts) {
        if (!first) os << ',';
        os << p;
        first = false;
    }
    os << ']';
    return os.str();
}

}  // namespace

bool operator==(const TabularMdp& a, const TabularMdp& b) {
    return a.num_states == b.num_states && a.num_actions == b.num_actions &&
           a.reward_max == b.reward_max && a.discount == b.discount &&
           a.transitions == b.transitions && a.rewards == b.rewards &&
           a.initial_dist == b.initial_dist;
}

ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport report;
    auto add = [&](std::string field, std::string index, double residual, std::string message) {
        report.push_back({std::move(field), std::move(index), residual, std::move(message)});
    };

    const int S = mdp.num_states;
    const int A = mdp.num_actions;
    if (S < 1) add("num_states", "", S, "num_states must be positive");
    if (A < 1) add("num_actions", "", A, "num_actions must be positive");
    if (!report.empty()) return report;

    bool shapes_ok = true;
    if (mdp.transitions.rows() != static_cast<Eigen::Index>(S) * A || mdp.transitions.cols() != S) {
        add("transitions", "", 0.0, "transitions must have shape [S][A][S]");
        shapes_ok = false;
    }
    if (mdp.rewards.rows() != S || mdp.rewards.cols() != A) {
        add("rewards", "", 0.0, "rewards must have shape [S][A]");
        shapes_ok = false;
    }
    if (mdp.initial_dist.size() != S) {
        add("initial_dist", "", 0.0, "initial_dist must have length S");
        shapes_ok = false;
    }
    if (!(mdp.discount >= 0.0 && mdp.discount < 1.0)) {
        add("gamma", "", mdp.discount, "discount must lie in [0,1)");
    }
    if (!(std::isfinite(mdp.reward_max) && mdp.reward_max >= 0.0)) {
        add("reward_max", "", mdp.reward_max, "reward_max must be finite and nonnegative");
    }
    if (!shapes_ok) return report;

    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double sum = 0.0;
            bool finite = true;
            for (int n = 0; n < S; ++n) {
                const double p = mdp.p(s, a, n);
                if (!std::isfinite(p)) finite = false;
                if (p < 0.0) {
                    add("transitions", idx({s, a, n}), -p,
                        "transitions" + idx({s, a, n}) + " is negative");
                }
                sum += p;
            }
            if (!finite) {
                add("transitions", idx({s, a}), std::numeric_limits<double>::quiet_NaN(),
                    "transitions" + idx({s, a}) + " has non-finite entries");
            } else if (std::abs(sum - 1.0) > kProbTol) {
                std::ostringstream os;
                os << "transitions" << idx({s, a}) << " sums to " << sum << " (residual "
                   << std::abs(sum - 1.0) << ")";
                add("transitions", idx({s, a}), std::abs(sum - 1.0), os.str());
            }

            const double r = mdp.rewards(s, a);
            if (!(r >= 0.0 && r <= mdp.reward_max)) {
                const double excess = std::isfinite(r) ? std::max(-r, r - mdp.reward_max) : r;
                std::ostringstream os;
                os << "rewards" << idx({s, a}) << " = " << r << " outside [0, reward_max]";
                add("rewards", idx({s, a}), excess, os.str());
            }
        }
    }

    double rho_sum = 0.0;
    for (int s = 0; s < S; ++s) {
        const double p = mdp.initial_dist[s];
        rho_sum += p;
        if (!(p > 0.0)) {
            std::ostringstream os;
            os << "initial_dist[" << s << "] = " << p << " must be strictly positive";
            add("initial_dist", idx({s}), std::isfinite(p) ? -p : p, os.str());
        }
    }
    if (std::abs(rho_sum - 1.0) > kProbTol) {
        std::ostringstream os;
        os << "initial_dist sums to " << rho_sum;
        add("initial_dist", "", std::abs(rho_sum - 1.0), os.str());
    }
    return report;
}

void require_valid(const TabularMdp& mdp) {
    const auto report = validate_mdp(mdp);
    if (report.empty()) return;
    std::ostringstream os;
    os << "invalid MDP:";
    for (const auto& v : report) os << "\n  " << v.message;
    throw InvalidInput(os.str());
}

double logsumexp(std::span<const double> values) {
    const double m = *std::max_element(values.begin(), values.end());
    if (std::isinf(m)) return m;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - m);
    return m + std::log(sum);
}

PolicyMatrix PolicyMatrix::from_probabilities(const Matrix& probs) {
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        const double sum = probs.row(s).sum();
        if (!probs.row(s).allFinite() || (probs.row(s).array() < 0.0).any() ||
            std::abs(sum - 1.0) > 1e-10) {
            throw InvalidInput("policy row " + std::to_string(s) + " is not a probability distribution");
        }
    }
    PolicyMatrix pi;
    pi.probs = probs;
    pi.log_probs = probs.array().log().matrix();
    return pi;
}

PolicyMatrix policy_from_params(const PolicyParams& theta) {
    if (!theta.logits.allFinite()) throw InvalidInput("policy logits must be finite");
    const auto S = theta.logits.rows();
    const auto A = theta.logits.cols();
    PolicyMatrix pi;
    pi.probs.resize(S, A);
    pi.log_probs.resize(S, A);
    for (Eigen::Index s = 0; s < S; ++s) {
        // Shift first, so log pi keeps full precision even for huge logits.
        const double m = theta.logits.row(s).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index a = 0; a < A; ++a) sum += std::exp(theta.logits(s, a) - m);
        const double log_sum = std::log(sum);
        for (Eigen::Index a = 0; a < A; ++a) {
            const double lp = (theta.logits(s, a) - m) - log_sum;
            pi.log_probs(s, a) = lp;
            pi.probs(s, a) = std::exp(lp);
        }
    }
    return pi;
}

void check_state_action(int num_states, int num_actions, int s, int a) {
    if (s < 0 || s >= num_states || a < 0 || a >= num_actions) {
        throw std::out_of_range("state-action (" + std::to_string(s) + "," + std::to_string(a) +
                                ") out of range");
    }
}

Matrix log_policy_gradient(const PolicyMatrix& pi, int s, int a) {
    check_state_action(pi.num_states(), pi.num_actions(), s, a);
    Matrix g = Matrix::Zero(pi.num_states(), pi.num_actions());
    g.row(s) = -pi.probs.row(s);
    g(s, a) += 1.0;
    return g;
}

Matrix log_policy_gradient(const PolicyParams& theta, int s, int a) {
    return log_policy_gradient(policy_from_params(theta), s, a);
}

}  // namespace entropg
