#include "entropg/environments.hpp"
#include "entropg/errors.hpp"
#include "entropg/harness.hpp"
#include "entropg/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace entropg;

namespace {
const TabularMdp& mdp3() {
    static const TabularMdp m = fixed_test_mdp();
    return m;
}
}  // namespace

TEST_CASE("unbiasedness passes for the random-horizon estimator") {
    const CheckReport r = check_unbiasedness(mdp3(), fixed_test_theta(mdp3()), 0.1, 200'000, 4.0, RngStream(1));
    CHECK(r.passed());
    CHECK(r.n_samples == 200'000);
    CHECK(r.seed == 1);
    CHECK(r.details.size() == 6);
}

TEST_CASE("unbiasedness catches a biased estimator") {
    const PolicyParams theta = fixed_test_theta(mdp3());
    const SingleSampleEstimator biased = [&](const RngStream& s) { return gpomdp_truncated(mdp3(), theta, 0.1, 2, s); };
    const CheckReport r = check_unbiasedness(mdp3(), theta, 0.1, 200'000, 4.0, RngStream(2), biased);
    CHECK(r.status == CheckStatus::fail);
    CHECK(r.statistic > 4.0);
}

TEST_CASE("unbiasedness on a single-action MDP") {
    const TabularMdp m = gen_env(RandomSpec{0, 3, 1, 0.9});
    const CheckReport r = check_unbiasedness(m, PolicyParams::zeros(3, 1), 0.1, 1000, 4.0, RngStream(3));
    CHECK(r.passed());
    CHECK(r.statistic == 0.0);
}

TEST_CASE("zero variance with a wrong mean is inconclusive") {
    const TabularMdp m = fixed_test_mdp();
    const SingleSampleEstimator constant = [&](const RngStream&) {
        GradientEstimate g;
        g.grad = Matrix::Constant(3, 2, 7.0);
        return g;
    };
    const CheckReport r = check_unbiasedness(m, fixed_test_theta(m), 0.1, 1000, 4.0, RngStream(4), constant);
    CHECK(r.status == CheckStatus::inconclusive);
    CHECK_THROWS_AS(check_unbiasedness(m, fixed_test_theta(m), 0.1, 999, 4.0, RngStream(4)), InvalidInput);
}

TEST_CASE("variance bound") {
    const CheckReport r = check_variance_bound(mdp3(), fixed_test_theta(mdp3()), 0.1, 50'000, RngStream(5));
    CHECK(r.passed());
    CHECK(r.statistic * 10 < r.threshold);
    CHECK(r.details[0].values[0].first == "ratio");
    CHECK(r.details[0].values[0].second == doctest::Approx(r.statistic / r.threshold));

    const CheckReport z = check_variance_bound(mdp3(), fixed_test_theta(mdp3()), 0.0, 50'000, RngStream(5));
    const double g = 0.9;
    CHECK(z.threshold == doctest::Approx(8.0 / ((1 - g) * (1 - g) * std::pow(1 - std::sqrt(g), 2))));
    CHECK(z.passed());
}

TEST_CASE("truncation bias") {
    const PolicyParams theta = fixed_test_theta(mdp3());
    const CheckReport r = check_truncation_bias(mdp3(), theta, 0.1, {5, 10, 20}, 200'000, RngStream(6));
    CHECK(r.passed());
    const CheckReport ends = check_truncation_bias(mdp3(), theta, 0.1, {1, 20}, 100'000, RngStream(7));
    CHECK(ends.details[0].values[1].second > ends.details[1].values[1].second);
    CHECK(check_truncation_bias(mdp3(), theta, 0.0, {5, 10, 20}, 200'000, RngStream(8)).passed());
}

TEST_CASE("GPOMDP variance bound") {
    const CheckReport r = check_gpomdp_variance(mdp3(), fixed_test_theta(mdp3()), 0.1, {5, 10, 20}, 50'000, RngStream(9));
    CHECK(r.passed());
    CHECK(r.threshold == doctest::Approx(problem_constants(mdp3(), 0.1).gpomdp_var_bound));
}

TEST_CASE("visitation check") {
    const CheckReport r = check_visitation(mdp3(), fixed_test_theta(mdp3()), 1'000'000, RngStream(10));
    CHECK(r.passed());
    CHECK(r.details.back().values[2].first == "tv");
    CHECK(r.details.back().values[2].second <= 0.005);

    const TabularMdp bandit = gen_env(BanditSpec{{2.0, 1.0}});
    CHECK(check_visitation(bandit, PolicyParams::zeros(1, 2), 100'000, RngStream(11)).passed());
    const TabularMdp one = testutil::single_state_single_action(1.0, 0.9);
    const CheckReport single = check_visitation(one, PolicyParams::zeros(1, 1), 1000, RngStream(12));
    CHECK(single.passed());
    CHECK(single.statistic == 1.0);
}

TEST_CASE("landscape bounds") {
    CHECK(check_landscape_bounds(gen_env(BanditSpec{{2.0, 1.0}}), 1.0, 1000, RngStream(13)).passed());
    CHECK(check_landscape_bounds(gen_env(RandomSpec{5, 5, 3, 0.9}), 0.1, 1000, RngStream(14)).passed());

    LandscapeCheckOptions corrupt;
    corrupt.lojasiewicz_scale = 10.0;
    const CheckReport bad = check_landscape_bounds(gen_env(BanditSpec{{2.0, 1.0}}), 1.0, 1000, RngStream(13), corrupt);
    CHECK(bad.status == CheckStatus::fail);
    bool witness = false;
    for (const auto& d : bad.details)
        if (d.label.rfind("lojasiewicz witness=", 0) == 0) witness = true;
    CHECK(witness);
}

TEST_CASE("finite-difference check") {
    const CheckReport r = check_fd_gradient(gen_env(RandomSpec{2, 5, 3, 0.9}), 0.1, 20, 1e-5, RngStream(15));
    CHECK(r.passed());
    CHECK(r.statistic <= 1e-6);
    CHECK(check_fd_gradient(gen_env(RandomSpec{2, 4, 1, 0.9}), 0.1, 5, 1e-5, RngStream(16)).statistic == 0.0);
}

TEST_CASE("checks are reproducible and independent of workers") {
    const PolicyParams theta = fixed_test_theta(mdp3());
    const CheckReport a = check_variance_bound(mdp3(), theta, 0.1, 20'000, RngStream(17), 1);
    const CheckReport b = check_variance_bound(mdp3(), theta, 0.1, 20'000, RngStream(17), 4);
    CHECK(dump_json(report_to_json(a)) == dump_json(report_to_json(b)));
}

TEST_CASE("suite runner") {
    SuiteOptions o;
    o.estimator_samples = 5000;
    o.visitation_samples = 20000;
    o.landscape_thetas = 50;
    const auto reports = run_checks({}, o);
    CHECK(reports.size() == check_names().size());
    const auto one = run_checks({"visitation"}, o);
    REQUIRE(one.size() == 1);
    CHECK(one[0].check_name == "visitation");
    CHECK_THROWS_AS(run_checks({"nope"}, o), InvalidInput);
}
