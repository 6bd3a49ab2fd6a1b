#pragma once

#include "entropg/mdp.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace entropg {

/// Transition rows ~ Dirichlet(1,...,1), rewards ~ U[0,1] (reward_max = 1),
/// uniform initial distribution. Deterministic in `seed`.
struct RandomSpec {
    std::uint64_t seed = 0;
    int states = 1;
    int actions = 1;
    double gamma = 0.9;
};

/// States 0..n-1 with actions {left, right}, deterministic moves clipped at
/// the ends, reward 1 in the last state.
struct ChainSpec {
    int n = 2;
    double gamma = 0.9;
};

/// One state, gamma = 0, reward_max = max reward.
struct BanditSpec {
    std::vector<double> rewards;
};

using EnvSpec = std::variant<RandomSpec, ChainSpec, BanditSpec>;

TabularMdp gen_env(const EnvSpec& spec);

/// The fixed test problems used by the statistical checks: random(0,3,2,0.9)
/// and random(0,2,2,0.9).
TabularMdp fixed_test_mdp();
TabularMdp fixed_two_state_mdp();

/// Logits with entries U[-1,1] from a dedicated substream of `seed`.
PolicyParams fixed_test_theta(const TabularMdp& mdp, std::uint64_t seed = 0);

struct LandscapePoint {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double value = 0.0;
};

/// Grid of the one-step objective pi^T (r - lambda log pi) for a two-armed
/// bandit, theta1 and theta2 each ranging over lo, lo+step, ..., hi.
std::vector<LandscapePoint> landscape_grid(const std::vector<double>& rewards, double lambda, double lo,
                                           double hi, double step);

}  // namespace entropg
