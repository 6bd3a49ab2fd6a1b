#include "entropg/environments.hpp"

#include "entropg/errors.hpp"
#include "entropg/oracle.hpp"
#include "entropg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace entropg {

namespace {

TabularMdp random_mdp(const RandomSpec& spec) {
    if (spec.states < 1 || spec.actions < 1) throw InvalidInput("random MDP needs S, A >= 1");
    const RngStream root(spec.seed);
    CounterRng trans = derive_stream(root, 0).generator();
    CounterRng rew = derive_stream(root, 1).generator();

    TabularMdp mdp;
    mdp.num_states = spec.states;
    mdp.num_actions = spec.actions;
    mdp.discount = spec.gamma;
    mdp.reward_max = 1.0;
    mdp.transitions.resize(static_cast<Eigen::Index>(spec.states) * spec.actions, spec.states);
    for (Eigen::Index row = 0; row < mdp.transitions.rows(); ++row) {
        // Dirichlet(1,...,1) as normalized Exp(1) draws.
        double sum = 0.0;
        for (int n = 0; n < spec.states; ++n) {
            const double e = -std::log(trans.uniform_open());
            mdp.transitions(row, n) = e;
            sum += e;
        }
        mdp.transitions.row(row) /= sum;
    }
    mdp.rewards.resize(spec.states, spec.actions);
    for (int s = 0; s < spec.states; ++s) {
        for (int a = 0; a < spec.actions; ++a) mdp.rewards(s, a) = rew.uniform(0.0, 1.0);
    }
    mdp.initial_dist = Vector::Constant(spec.states, 1.0 / spec.states);
    return mdp;
}

TabularMdp chain_mdp(const ChainSpec& spec) {
    if (spec.n < 1) throw InvalidInput("chain needs n >= 1");
    TabularMdp mdp;
    mdp.num_states = spec.n;
    mdp.num_actions = 2;
    mdp.discount = spec.gamma;
    mdp.reward_max = 1.0;
    mdp.transitions = Matrix::Zero(2 * spec.n, spec.n);
    mdp.rewards = Matrix::Zero(spec.n, 2);
    for (int s = 0; s < spec.n; ++s) {
        mdp.transitions(mdp.row(s, 0), std::max(s - 1, 0)) = 1.0;
        mdp.transitions(mdp.row(s, 1), std::min(s + 1, spec.n - 1)) = 1.0;
    }
    mdp.rewards.row(spec.n - 1).setConstant(1.0);
    mdp.initial_dist = Vector::Constant(spec.n, 1.0 / spec.n);
    return mdp;
}

TabularMdp bandit_mdp(const BanditSpec& spec) {
    if (spec.rewards.empty()) throw InvalidInput("bandit needs at least one arm");
    const int A = static_cast<int>(spec.rewards.size());
    TabularMdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = A;
    mdp.discount = 0.0;
    mdp.transitions = Matrix::Ones(A, 1);
    mdp.rewards.resize(1, A);
    for (int a = 0; a < A; ++a) mdp.rewards(0, a) = spec.rewards[a];
    mdp.reward_max = *std::max_element(spec.rewards.begin(), spec.rewards.end());
    mdp.initial_dist = Vector::Ones(1);
    return mdp;
}

struct Generator {
    TabularMdp operator()(const RandomSpec& s) const { return random_mdp(s); }
    TabularMdp operator()(const ChainSpec& s) const { return chain_mdp(s); }
    TabularMdp operator()(const BanditSpec& s) const { return bandit_mdp(s); }
};

}  // namespace

TabularMdp gen_env(const EnvSpec& spec) {
    TabularMdp mdp = std::visit(Generator{}, spec);
    require_valid(mdp);
    return mdp;
}

TabularMdp fixed_test_mdp() { return gen_env(RandomSpec{0, 3, 2, 0.9}); }
TabularMdp fixed_two_state_mdp() { return gen_env(RandomSpec{0, 2, 2, 0.9}); }

PolicyParams fixed_test_theta(const TabularMdp& mdp, std::uint64_t seed) {
    CounterRng gen = derive_stream(RngStream(seed), 0x7e7a).generator();
    PolicyParams theta = PolicyParams::zeros(mdp.num_states, mdp.num_actions);
    for (Eigen::Index i = 0; i < theta.logits.size(); ++i) theta.logits.data()[i] = gen.uniform(-1.0, 1.0);
    return theta;
}

std::vector<LandscapePoint> landscape_grid(const std::vector<double>& rewards, double lambda, double lo,
                                           double hi, double step) {
    if (rewards.size() != 2) throw InvalidInput("landscape grid supports exactly 2 actions");
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidInput("landscape grid needs step > 0 and hi >= lo");
    const TabularMdp mdp = gen_env(BanditSpec{rewards});
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<LandscapePoint> grid;
    grid.reserve(static_cast<std::size_t>(n * n));
    PolicyParams theta = PolicyParams::zeros(1, 2);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            theta.logits(0, 0) = lo + static_cast<double>(i) * step;
            theta.logits(0, 1) = lo + static_cast<double>(j) * step;
            grid.push_back({theta.logits(0, 0), theta.logits(0, 1), objective(mdp, theta, lambda)});
        }
    }
    return grid;
}

}  // namespace entropg
