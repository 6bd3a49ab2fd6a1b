#include "entropg/environments.hpp"
#include "entropg/errors.hpp"
#include "entropg/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace entropg;

TEST_CASE("bandit generator") {
    const TabularMdp b = gen_env(BanditSpec{{2.0, 1.0}});
    CHECK(b.num_states == 1);
    CHECK(b.num_actions == 2);
    CHECK(b.discount == 0.0);
    CHECK(b.rewards(0, 0) == 2.0);
    CHECK(b.rewards(0, 1) == 1.0);
    CHECK(b.reward_max == 2.0);
    CHECK(b.initial_dist[0] == 1.0);
    CHECK_THROWS_AS(gen_env(BanditSpec{{}}), InvalidInput);
}

TEST_CASE("random generator is deterministic and valid") {
    const TabularMdp a = gen_env(RandomSpec{0, 5, 3, 0.9});
    const TabularMdp b = gen_env(RandomSpec{0, 5, 3, 0.9});
    CHECK(a == b);
    CHECK_FALSE(a == gen_env(RandomSpec{1, 5, 3, 0.9}));
    CHECK(validate_mdp(a).empty());
    CHECK(a.rewards.minCoeff() >= 0.0);
    CHECK(a.rewards.maxCoeff() < 1.0);
    CHECK(a.reward_max == 1.0);
    CHECK(a.initial_dist.isApproxToConstant(0.2));
    CHECK_THROWS_AS(gen_env(RandomSpec{0, 0, 3, 0.9}), InvalidInput);
    CHECK_THROWS_AS(gen_env(RandomSpec{0, 3, 0, 0.9}), InvalidInput);
}

TEST_CASE("random transitions look like flat Dirichlet rows") {
    // Each entry of a Dirichlet(1,1,1) row has mean 1/3 and variance 1/18.
    const TabularMdp m = gen_env(RandomSpec{3, 3, 200, 0.9});
    double sum = 0;
    const int n = 3 * 200;
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 200; ++a) sum += m.p(s, a, 0);
    CHECK(std::abs(sum / n - 1.0 / 3) < 4 * std::sqrt(1.0 / 18 / n));
}

TEST_CASE("chain generator") {
    const TabularMdp c = gen_env(ChainSpec{4, 0.9});
    CHECK(c.num_states == 4);
    CHECK(c.num_actions == 2);
    CHECK(c.p(0, 0, 0) == 1.0);  // left clipped
    CHECK(c.p(0, 1, 1) == 1.0);
    CHECK(c.p(3, 1, 3) == 1.0);  // right clipped
    CHECK(c.rewards(3, 0) == 1.0);
    CHECK(c.rewards(2, 1) == 0.0);
    const SoftOptimum opt = soft_value_iteration(c, 0.0);
    CHECK(opt.v_star[0] == doctest::Approx(std::pow(0.9, 3) / 0.1).epsilon(1e-10));
    CHECK_THROWS_AS(gen_env(ChainSpec{0, 0.9}), InvalidInput);
}

TEST_CASE("fixed problems") {
    CHECK(fixed_test_mdp() == gen_env(RandomSpec{0, 3, 2, 0.9}));
    CHECK(fixed_two_state_mdp() == gen_env(RandomSpec{0, 2, 2, 0.9}));
    const PolicyParams t = fixed_test_theta(fixed_test_mdp());
    CHECK(t.logits.rows() == 3);
    CHECK(t.logits.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(t.logits == fixed_test_theta(fixed_test_mdp()).logits);
}

TEST_CASE("landscape grid") {
    const auto grid = landscape_grid({2.0, 1.0}, 1.0, -5.0, 5.0, 0.1);
    CHECK(grid.size() == 101 * 101);
    double gmax = -1e300, at0 = 0, at55 = 0;
    for (const auto& p : grid) {
        gmax = std::max(gmax, p.value);
        if (p.theta1 == 0.0 && p.theta2 == 0.0) at0 = p.value;
        if (p.theta1 == 5.0 && p.theta2 == 5.0) at55 = p.value;
    }
    CHECK(std::abs(at0 - 2.193147180559945) <= 1e-12);
    CHECK(gmax <= 2.313261687518223 + 1e-12);
    CHECK(at55 == doctest::Approx(at0).epsilon(1e-14));
    CHECK_THROWS_AS(landscape_grid({1.0, 2.0, 3.0}, 1.0, -1, 1, 0.5), InvalidInput);
    CHECK_THROWS_AS(landscape_grid({1.0, 2.0}, 1.0, -1, 1, 0.0), InvalidInput);
}
