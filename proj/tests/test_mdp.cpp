#include "entropg/errors.hpp"
#include "entropg/mdp.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace entropg;
using testutil::two_state;

TEST_CASE("well-formed MDP validates clean") {
    CHECK(validate_mdp(two_state()).empty());
    CHECK_NOTHROW(require_valid(two_state()));
}

TEST_CASE("zero initial mass is reported with its index") {
    TabularMdp m = two_state();
    m.initial_dist << 1.0, 0.0;
    const auto rep = validate_mdp(m);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].field == "initial_dist");
    CHECK(rep[0].message.find("initial_dist[1] = 0") != std::string::npos);
    CHECK_THROWS_AS(require_valid(m), InvalidInput);
}

TEST_CASE("short transition row names (s,a) and the residual") {
    TabularMdp m = two_state();
    m.transitions.row(m.row(1, 0)) << 0.45, 0.45;
    const auto rep = validate_mdp(m);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].field == "transitions");
    CHECK(rep[0].index == "[1,0]");
    CHECK(rep[0].residual == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("other violations") {
    TabularMdp m = two_state();
    m.discount = 1.0;
    CHECK_FALSE(validate_mdp(m).empty());
    m = two_state();
    m.rewards(0, 0) = 2.0;  // above reward_max
    CHECK_FALSE(validate_mdp(m).empty());
    m = two_state();
    m.transitions(0, 0) = -0.1;
    m.transitions(0, 1) = 1.1;
    CHECK_FALSE(validate_mdp(m).empty());
}

TEST_CASE("softmax examples") {
    PolicyParams t = PolicyParams::zeros(3, 2);
    t.logits << 0, 0, 2, 1, 1000, 1000;
    const PolicyMatrix pi = policy_from_params(t);
    CHECK(pi.probs(0, 0) == doctest::Approx(0.5));
    const double e = std::exp(1.0);
    CHECK(pi.probs(1, 0) == doctest::Approx(e / (e + 1)).epsilon(1e-14));
    CHECK(pi.probs(1, 1) == doctest::Approx(1 / (e + 1)).epsilon(1e-14));
    CHECK(pi.probs(2, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pi.log_probs(2, 1) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("non-finite logits rejected") {
    PolicyParams t = PolicyParams::zeros(1, 2);
    t.logits(0, 1) = std::nan("");
    CHECK_THROWS_AS(policy_from_params(t), InvalidInput);
    t.logits(0, 1) = INFINITY;
    CHECK_THROWS_AS(policy_from_params(t), InvalidInput);
}

TEST_CASE("log probabilities stay finite for extreme logits") {
    PolicyParams t = PolicyParams::zeros(1, 2);
    t.logits << 500, -500;
    const PolicyMatrix pi = policy_from_params(t);
    CHECK(pi.log_probs(0, 1) == doctest::Approx(-1000.0));
    CHECK(std::isfinite(pi.log_probs(0, 1)));
}

TEST_CASE("score function examples") {
    const Matrix g = log_policy_gradient(PolicyParams::zeros(2, 2), 0, 0);
    CHECK(g(0, 0) == doctest::Approx(0.5));
    CHECK(g(0, 1) == doctest::Approx(-0.5));
    CHECK(g.row(1).norm() == 0.0);
    CHECK(log_policy_gradient(PolicyParams::zeros(3, 1), 1, 0).norm() == 0.0);
    CHECK_THROWS_AS(log_policy_gradient(PolicyParams::zeros(2, 2), 2, 0), std::out_of_range);
    CHECK_THROWS_AS(log_policy_gradient(PolicyParams::zeros(2, 2), 0, -1), std::out_of_range);
}

TEST_CASE("policy rows, score norm and shift invariance on random logits") {
    const RngStream root(11);
    for (int i = 0; i < 10000; ++i) {
        CounterRng g = derive_stream(root, i).generator();
        const int S = 1 + static_cast<int>(g.uniform(0, 4));
        const int A = 1 + static_cast<int>(g.uniform(0, 5));
        const PolicyParams t = testutil::random_theta(derive_stream(root, 100000 + i), S, A, 50.0);
        const int s = static_cast<int>(g.uniform(0, S)), a = static_cast<int>(g.uniform(0, A));
        const PolicyMatrix pi = policy_from_params(t);
        for (int r = 0; r < S; ++r) REQUIRE(std::abs(pi.probs.row(r).sum() - 1.0) <= 1e-12);
        const Matrix score = log_policy_gradient(t, s, a);
        REQUIRE(score.norm() <= 2.0);
        REQUIRE(std::abs(score.row(s).sum()) <= 1e-12);
        for (int r = 0; r < S; ++r)
            if (r != s) REQUIRE(score.row(r).norm() == 0.0);

        PolicyParams shifted = t;
        shifted.logits.row(s).array() += g.uniform(-100, 100);
        const PolicyMatrix pi2 = policy_from_params(shifted);
        REQUIRE((pi2.probs - pi.probs).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("probabilities are positive for moderate logits") {
    const PolicyMatrix pi = policy_from_params(testutil::random_theta(RngStream(5), 4, 3, 50.0));
    CHECK(pi.min_prob() > 0.0);
}

TEST_CASE("from_probabilities keeps log consistent") {
    Matrix p(1, 3);
    p << 0.2, 0.3, 0.5;
    const PolicyMatrix pi = PolicyMatrix::from_probabilities(p);
    CHECK(pi.log_probs(0, 2) == doctest::Approx(std::log(0.5)));
    p << 0.2, 0.3, 0.6;
    CHECK_THROWS_AS(PolicyMatrix::from_probabilities(p), InvalidInput);
}

TEST_CASE("logsumexp") {
    const std::vector<double> v = {1000.0, 1000.0};
    CHECK(logsumexp(v) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> w = {2.0, 1.0};
    CHECK(logsumexp(w) == doctest::Approx(std::log(std::exp(2.0) + std::exp(1.0))));
}
