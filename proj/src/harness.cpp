#include "entropg/harness.hpp"

#include "entropg/environments.hpp"
#include "entropg/errors.hpp"
#include "entropg/oracle.hpp"
#include "entropg/parallel.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace entropg {

const char* to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::inconclusive: return "inconclusive";
    }
    return "fail";
}

namespace {

// Sample i always comes from derive_stream(rng, i); moments are reduced in
// index order.
struct Moments {
    Matrix mean;
    Matrix var;        // per-component sample variance (n - 1 denominator)
    double total_var;  // (1/n) sum_i ||X_i - mean||^2
    std::int64_t env_steps = 0;
};

Moments sample_moments(const SingleSampleEstimator& estimator, std::int64_t n, const RngStream& rng, int workers) {
    std::vector<GradientEstimate> xs(static_cast<std::size_t>(n));
    parallel_for(xs.size(), workers, [&](std::size_t i) { xs[i] = estimator(derive_stream(rng, i)); });
    Moments m;
    m.mean = Matrix::Zero(xs[0].grad.rows(), xs[0].grad.cols());
    for (const auto& x : xs) {
        m.mean += x.grad;
        m.env_steps += x.env_steps;
    }
    m.mean /= static_cast<double>(n);
    Matrix sq = Matrix::Zero(m.mean.rows(), m.mean.cols());
    for (const auto& x : xs) sq += (x.grad - m.mean).cwiseAbs2();
    m.total_var = sq.sum() / static_cast<double>(n);
    m.var = sq / static_cast<double>(std::max<std::int64_t>(n - 1, 1));
    return m;
}

std::string flatten(const Matrix& m) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < m.size(); ++i) os << (i ? "," : "") << m.data()[i];
    return os.str();
}

std::string sa_label(Eigen::Index s, Eigen::Index a) {
    return "(" + std::to_string(s) + "," + std::to_string(a) + ")";
}

PolicyParams uniform_logits(CounterRng& gen, int S, int A, double range) {
    PolicyParams theta = PolicyParams::zeros(S, A);
    for (Eigen::Index i = 0; i < theta.logits.size(); ++i) theta.logits.data()[i] = gen.uniform(-range, range);
    return theta;
}

}  // namespace

CheckReport check_unbiasedness(const TabularMdp& mdp, const PolicyParams& theta, double lambda, std::int64_t n,
                               double z, const RngStream& rng, std::optional<SingleSampleEstimator> estimator,
                               int workers) {
    if (n < 1000) throw InvalidInput("unbiasedness check needs n >= 1000");
    const PolicyMatrix pi = policy_from_params(theta);
    const SingleSampleEstimator est = estimator ? *estimator : SingleSampleEstimator([&](const RngStream& s) {
        return spg_estimate(mdp, pi, lambda, s);
    });
    const Moments m = sample_moments(est, n, rng, workers);
    const Matrix exact = exact_gradient(mdp, pi, lambda);

    CheckReport rep;
    rep.check_name = "unbiasedness";
    rep.threshold = z;
    rep.n_samples = n;
    rep.seed = rng.seed();
    bool inconclusive = false;
    double worst = 0.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (Eigen::Index s = 0; s < exact.rows(); ++s) {
        for (Eigen::Index a = 0; a < exact.cols(); ++a) {
            const double sd = std::sqrt(m.var(s, a));
            const double diff = m.mean(s, a) - exact(s, a);
            double zs = 0.0;
            if (sd == 0.0) {
                if (std::abs(diff) > 1e-12 * (1.0 + std::abs(exact(s, a)))) inconclusive = true;
            } else {
                zs = diff / (sd / root_n);
            }
            worst = std::max(worst, std::abs(zs));
            rep.details.push_back({sa_label(s, a),
                                   {{"mean", m.mean(s, a)}, {"exact", exact(s, a)}, {"sd", sd}, {"z", zs}}});
        }
    }
    rep.statistic = worst;
    rep.status = inconclusive ? CheckStatus::inconclusive : (worst <= z ? CheckStatus::pass : CheckStatus::fail);
    return rep;
}

CheckReport check_variance_bound(const TabularMdp& mdp, const PolicyParams& theta, double lambda, std::int64_t n,
                                 const RngStream& rng, int workers) {
    const PolicyMatrix pi = policy_from_params(theta);
    const ProblemConstants c = problem_constants(mdp, lambda);
    const Moments m = sample_moments([&](const RngStream& s) { return spg_estimate(mdp, pi, lambda, s); }, n, rng,
                                     workers);
    CheckReport rep;
    rep.check_name = "variance_bound";
    rep.statistic = m.total_var;
    rep.threshold = c.sigma_sq;
    rep.n_samples = n;
    rep.seed = rng.seed();
    rep.status = m.total_var <= c.sigma_sq ? CheckStatus::pass : CheckStatus::fail;
    rep.details.push_back({"summary", {{"ratio", m.total_var / c.sigma_sq}, {"env_steps", double(m.env_steps)}}});
    return rep;
}

CheckReport check_truncation_bias(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  const std::vector<int>& horizons, std::int64_t n, const RngStream& rng, double z,
                                  int workers) {
    if (horizons.empty()) throw InvalidInput("truncation bias check needs at least one horizon");
    const PolicyMatrix pi = policy_from_params(theta);
    const Matrix exact = exact_gradient(mdp, pi, lambda);
    std::vector<int> hs = horizons;
    std::sort(hs.begin(), hs.end());

    CheckReport rep;
    rep.check_name = "truncation_bias";
    rep.n_samples = n;
    rep.seed = rng.seed();
    rep.threshold = 0.0;
    bool within = true;
    bool decreasing = true;
    double prev_bias = std::numeric_limits<double>::infinity();
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int h : hs) {
        const Moments m = sample_moments(
            [&](const RngStream& s) { return gpomdp_truncated(mdp, pi, lambda, h, s); }, n, rng, workers);
        const double bias = (m.mean - exact).norm();
        const double se = std::sqrt(m.var.sum() / static_cast<double>(n));
        const double bound = gpomdp_bias_bound(mdp, lambda, h);
        const double excess = bias - (bound + z * se);
        worst_excess = std::max(worst_excess, excess);
        if (excess > 0.0) within = false;
        if (!(bias < prev_bias)) decreasing = false;
        prev_bias = bias;
        rep.details.push_back({"h=" + std::to_string(h), {{"h", double(h)}, {"bias", bias}, {"se", se},
                                                          {"bound", bound}, {"total_var", m.total_var}}});
    }
    rep.statistic = worst_excess;
    rep.details.push_back({"summary", {{"within_bound", within ? 1.0 : 0.0}, {"decreasing", decreasing ? 1.0 : 0.0}}});
    rep.status = within && decreasing ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

CheckReport check_gpomdp_variance(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  const std::vector<int>& horizons, std::int64_t n, const RngStream& rng,
                                  int workers) {
    const PolicyMatrix pi = policy_from_params(theta);
    const ProblemConstants c = problem_constants(mdp, lambda);
    CheckReport rep;
    rep.check_name = "gpomdp_variance";
    rep.n_samples = n;
    rep.seed = rng.seed();
    rep.threshold = c.gpomdp_var_bound;
    double worst = 0.0;
    for (int h : horizons) {
        const Moments m = sample_moments(
            [&](const RngStream& s) { return gpomdp_truncated(mdp, pi, lambda, h, s); }, n, rng, workers);
        worst = std::max(worst, m.total_var);
        rep.details.push_back({"h=" + std::to_string(h),
                               {{"h", double(h)}, {"total_var", m.total_var}, {"ratio", m.total_var / c.gpomdp_var_bound}}});
    }
    rep.statistic = worst;
    rep.status = worst <= c.gpomdp_var_bound ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

CheckReport check_visitation(const TabularMdp& mdp, const PolicyParams& theta, std::int64_t n,
                             const RngStream& rng, int workers) {
    const PolicyMatrix pi = policy_from_params(theta);
    const VisitationMeasures vis = visitation(mdp, pi);
    std::vector<StateAction> draws(static_cast<std::size_t>(n));
    parallel_for(draws.size(), workers, [&](std::size_t i) { draws[i] = sample_visitation(mdp, pi, derive_stream(rng, i)).pair; });
    Matrix counts = Matrix::Zero(mdp.num_states, mdp.num_actions);
    for (const auto& d : draws) counts(d.state, d.action) += 1.0;

    CheckReport rep;
    rep.check_name = "visitation";
    rep.n_samples = n;
    rep.seed = rng.seed();
    rep.threshold = 1e-3;
    double chi2 = 0.0;
    int cells = 0;
    bool impossible = false;
    double tv = 0.0;
    const double nd = static_cast<double>(n);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double expected = nd * vis.v(s, a);
            tv += std::abs(counts(s, a) / nd - vis.v(s, a));
            if (expected > 0.0) {
                chi2 += (counts(s, a) - expected) * (counts(s, a) - expected) / expected;
                ++cells;
            } else if (counts(s, a) > 0.0) {
                impossible = true;
            }
            rep.details.push_back({sa_label(s, a), {{"count", counts(s, a)}, {"expected", expected}}});
        }
    }
    tv *= 0.5;
    double p_value = 1.0;
    if (cells > 1) {
        const boost::math::chi_squared dist(cells - 1);
        p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    }
    if (impossible) p_value = 0.0;
    rep.statistic = p_value;
    rep.details.push_back({"summary", {{"chi2", chi2}, {"dof", double(std::max(cells - 1, 0))}, {"tv", tv}}});
    rep.status = p_value >= rep.threshold ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

CheckReport check_landscape_bounds(const TabularMdp& mdp, double lambda, std::int64_t n_thetas,
                                   const RngStream& rng, const LandscapeCheckOptions& options) {
    const SoftOptimum opt = soft_value_iteration(mdp, lambda);
    const ProblemConstants c = constants_from_bounds(mdp.reward_max, lambda, mdp.num_actions, mdp.discount);
    const double rho_min = mdp.initial_dist.minCoeff();
    const double quad_coeff = lambda * rho_min / (2.0 * std::log(2.0));
    const double v_star = opt.value(mdp);
    constexpr double tol = 1e-10;

    CheckReport rep;
    rep.check_name = "landscape_bounds";
    rep.n_samples = n_thetas;
    rep.seed = rng.seed();
    rep.threshold = 0.0;

    struct Tally {
        std::string name;
        std::int64_t violations = 0;
        double worst = -std::numeric_limits<double>::infinity();  // max of lhs - rhs (violation if > tol)
        std::string witness;
    };
    std::vector<Tally> tallies;
    for (const char* name : {"value_bound", "gradient_bound", "lipschitz", "lojasiewicz", "local_quadratic",
                             "pi_star_floor", "sandwich"}) {
        tallies.emplace_back();
        tallies.back().name = name;
    }
    auto note = [&](std::size_t k, double excess, const Matrix& witness) {
        Tally& t = tallies[k];
        if (excess > t.worst) t.worst = excess;
        if (excess > tol) {
            if (t.violations == 0) t.witness = flatten(witness);
            ++t.violations;
        }
    };

    // pi* floor and sandwich are properties of the problem, not of theta.
    note(5, c.pi_star_floor - opt.pi_star.min_prob(), opt.pi_star.log_probs);
    const SandwichResult sw = sandwich_check(mdp, lambda, opt);
    note(6, sw.holds ? std::max(sw.lower - sw.mid, sw.mid - sw.upper) : 1.0, opt.pi_star.log_probs);

    Matrix prev_theta;
    Matrix prev_grad;
    for (std::int64_t i = 0; i < n_thetas; ++i) {
        CounterRng gen = derive_stream(rng, static_cast<std::uint64_t>(i)).generator();
        const PolicyParams theta = uniform_logits(gen, mdp.num_states, mdp.num_actions, options.theta_range);
        const PolicyMatrix pi = policy_from_params(theta);
        const RegularizedSolution sol = evaluate_policy(mdp, pi, lambda);
        const Matrix grad = exact_gradient(mdp, pi, lambda);
        const double gap = v_star - mdp.initial_dist.dot(sol.v);

        note(0, std::max(sol.v.maxCoeff(), sol.q.maxCoeff()) - c.value_bound, theta.logits);
        const double gnorm = grad.norm();
        note(1, gnorm - c.g_bound, theta.logits);
        if (i > 0) {
            note(2, (grad - prev_grad).norm() - c.lipschitz * (theta.logits - prev_theta).norm(), theta.logits);
        }
        const double cst = options.lojasiewicz_scale * lojasiewicz_constant(mdp, pi.min_prob(), lambda, opt);
        note(3, cst * gap - gnorm * gnorm, theta.logits);
        const double max_dev = (pi.probs - opt.pi_star.probs).cwiseAbs().maxCoeff();
        note(4, quad_coeff * max_dev * max_dev - gap, theta.logits);
        prev_theta = theta.logits;
        prev_grad = grad;
    }

    std::int64_t total = 0;
    for (const auto& t : tallies) {
        total += t.violations;
        DetailRow row{t.name, {{"violations", double(t.violations)}, {"worst_excess", t.worst}}};
        if (t.violations > 0) row.label += " witness=" + t.witness;
        rep.details.push_back(std::move(row));
    }
    rep.statistic = static_cast<double>(total);
    rep.status = total == 0 ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

Matrix finite_difference_gradient(const TabularMdp& mdp, const PolicyParams& theta, double lambda, double step) {
    Matrix fd(theta.logits.rows(), theta.logits.cols());
    PolicyParams probe = theta;
    for (Eigen::Index i = 0; i < probe.logits.size(); ++i) {
        double& x = probe.logits.data()[i];
        const double orig = x;
        x = orig + step;
        const double up = objective(mdp, probe, lambda);
        x = orig - step;
        const double down = objective(mdp, probe, lambda);
        x = orig;
        fd.data()[i] = (up - down) / (2.0 * step);
    }
    return fd;
}

double relative_error(const Matrix& approx, const Matrix& exact, double floor) {
    return (approx - exact).norm() / std::max(exact.norm(), floor);
}

CheckReport check_fd_gradient(const TabularMdp& mdp, double lambda, std::int64_t n_thetas, double step,
                              const RngStream& rng, double tolerance) {
    CheckReport rep;
    rep.check_name = "fd_gradient";
    rep.n_samples = n_thetas;
    rep.seed = rng.seed();
    rep.threshold = tolerance;
    double worst = 0.0;
    std::string witness;
    for (std::int64_t i = 0; i < n_thetas; ++i) {
        CounterRng gen = derive_stream(rng, static_cast<std::uint64_t>(i)).generator();
        const PolicyParams theta = uniform_logits(gen, mdp.num_states, mdp.num_actions, 2.0);
        const double err =
            relative_error(finite_difference_gradient(mdp, theta, lambda, step), exact_gradient(mdp, theta, lambda));
        if (err > worst) {
            worst = err;
            witness = flatten(theta.logits);
        }
    }
    rep.statistic = worst;
    rep.details.push_back({"worst theta=" + witness, {{"relative_error", worst}, {"step", step}}});
    rep.status = worst <= tolerance ? CheckStatus::pass : CheckStatus::fail;
    return rep;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names = {"fd_gradient",  "landscape_bounds", "visitation",
                                                   "unbiasedness", "variance_bound",   "truncation_bias",
                                                   "gpomdp_variance"};
    return names;
}

std::vector<CheckReport> run_checks(const std::vector<std::string>& names, const SuiteOptions& options) {
    const std::vector<std::string>& selected = names.empty() ? check_names() : names;
    const TabularMdp mdp = fixed_test_mdp();
    const PolicyParams theta = fixed_test_theta(mdp);
    const RngStream root(options.seed);
    const std::vector<int> horizons = {5, 10, 20};

    std::vector<CheckReport> out;
    for (const auto& name : selected) {
        const auto it = std::find(check_names().begin(), check_names().end(), name);
        if (it == check_names().end()) throw InvalidInput("unknown check: " + name);
        const RngStream rng = derive_stream(root, static_cast<std::uint64_t>(it - check_names().begin()));
        if (name == "fd_gradient") {
            out.push_back(check_fd_gradient(mdp, options.lambda, 100, 1e-5, rng));
        } else if (name == "landscape_bounds") {
            out.push_back(check_landscape_bounds(mdp, options.lambda, options.landscape_thetas, rng));
        } else if (name == "visitation") {
            out.push_back(check_visitation(mdp, theta, options.visitation_samples, rng, options.workers));
        } else if (name == "unbiasedness") {
            out.push_back(check_unbiasedness(mdp, theta, options.lambda, options.estimator_samples, 4.0, rng, {},
                                             options.workers));
        } else if (name == "variance_bound") {
            out.push_back(check_variance_bound(mdp, theta, options.lambda, options.estimator_samples, rng,
                                               options.workers));
        } else if (name == "truncation_bias") {
            out.push_back(check_truncation_bias(mdp, theta, options.lambda, horizons, options.estimator_samples, rng,
                                                4.0, options.workers));
        } else if (name == "gpomdp_variance") {
            out.push_back(check_gpomdp_variance(mdp, theta, options.lambda, horizons, options.estimator_samples, rng,
                                                options.workers));
        }
    }
    return out;
}

}  // namespace entropg
