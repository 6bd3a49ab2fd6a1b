#pragma once

#include "entropg/mdp.hpp"
#include "entropg/rng.hpp"
#include "entropg/sampling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entropg {

enum class CheckStatus { pass, fail, inconclusive };

const char* to_string(CheckStatus status);

/// One labelled row of named numbers in a report's details table.
struct DetailRow {
    std::string label;
    std::vector<std::pair<std::string, double>> values;
};

/// Outcome of one statistical or analytic check. Carries everything needed
/// to reproduce it: sample count, seed, statistic and threshold.
struct CheckReport {
    std::string check_name;
    CheckStatus status = CheckStatus::fail;
    double statistic = 0.0;
    double threshold = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<DetailRow> details;

    bool passed() const { return status == CheckStatus::pass; }
};

/// Componentwise z-scores of the Monte-Carlo mean of `estimator` against the
/// exact gradient. With no estimator given, the random-horizon estimator is
/// used.
CheckReport check_unbiasedness(const TabularMdp& mdp, const PolicyParams& theta, double lambda, std::int64_t n,
                               double z, const RngStream& rng, std::optional<SingleSampleEstimator> estimator = {},
                               int workers = 1);

/// Empirical total variance (1/n) sum ||X_i - mean||^2 against sigma^2.
CheckReport check_variance_bound(const TabularMdp& mdp, const PolicyParams& theta, double lambda, std::int64_t n,
                                 const RngStream& rng, int workers = 1);

/// Bias of truncated GPOMDP at each horizon against the closed-form bound
/// plus z standard errors; also requires the measured bias to shrink as the
/// horizon grows. All horizons share sample streams.
CheckReport check_truncation_bias(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  const std::vector<int>& horizons, std::int64_t n, const RngStream& rng,
                                  double z = 4.0, int workers = 1);

/// Empirical total variance of truncated GPOMDP at each horizon against its
/// closed-form bound.
CheckReport check_gpomdp_variance(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  const std::vector<int>& horizons, std::int64_t n, const RngStream& rng,
                                  int workers = 1);

/// Chi-square goodness of fit of occupancy samples against the exact
/// state-action visitation; passes iff p >= 0.001. Details carry the TV
/// distance.
CheckReport check_visitation(const TabularMdp& mdp, const PolicyParams& theta, std::int64_t n,
                             const RngStream& rng, int workers = 1);

struct LandscapeCheckOptions {
    double theta_range = 10.0;
    /// Multiplies C(theta) before testing gradient domination (sanity
    /// inversion hook; 1 in normal use).
    double lojasiewicz_scale = 1.0;
};

/// Value bounds, gradient norm bound, Lipschitz bound, gradient domination,
/// local quadratic growth, the pi* floor and the sandwich bound, over
/// n_thetas random logits. Any violation fails with the witness logits.
CheckReport check_landscape_bounds(const TabularMdp& mdp, double lambda, std::int64_t n_thetas,
                                   const RngStream& rng, const LandscapeCheckOptions& options = {});

/// Max relative error between exact_gradient and central finite differences
/// of the objective over n_thetas random logits (entries U[-2,2]).
CheckReport check_fd_gradient(const TabularMdp& mdp, double lambda, std::int64_t n_thetas, double step,
                              const RngStream& rng, double tolerance = 1e-6);

/// Central finite-difference gradient of the objective at theta.
Matrix finite_difference_gradient(const TabularMdp& mdp, const PolicyParams& theta, double lambda, double step);

/// Relative error ||a - b||_2 / max(||a||_2, floor).
double relative_error(const Matrix& approx, const Matrix& exact, double floor = 1e-3);

/// Names accepted by run_checks, in suite order.
const std::vector<std::string>& check_names();

struct SuiteOptions {
    std::uint64_t seed = 0;
    int workers = 1;
    double lambda = 0.1;
    std::int64_t estimator_samples = 200'000;
    std::int64_t visitation_samples = 1'000'000;
    std::int64_t landscape_thetas = 1000;
};

/// Runs the named checks (all of them when `names` is empty) on the fixed
/// test problems.
std::vector<CheckReport> run_checks(const std::vector<std::string>& names, const SuiteOptions& options);

}  // namespace entropg
