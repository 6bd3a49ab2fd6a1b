#pragma once

#include "entropg/mdp.hpp"
#include "entropg/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace entropg {

/// A theta-shaped stochastic gradient with sampling metadata.
struct GradientEstimate {
    Matrix grad;
    std::int64_t batch_size = 1;
    std::int64_t env_steps = 0;
    std::int64_t truncated_horizons = 0;
    std::int64_t horizon_draws = 0;
};

struct StateAction {
    int state = 0;
    int action = 0;
    friend bool operator==(const StateAction&, const StateAction&) = default;
};

/// Rollout of `horizon` transitions: horizon+1 states, actions and rewards.
struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    int horizon = 0;
};

struct GeometricDraw {
    int value = 0;
    bool truncated = false;
};

/// Cap for a Geom(p) horizon such that the clipped tail P(h >= cap) is at most
/// `tail_mass`. Returns 1 when p = 1 (the draw is then always 0).
int geometric_cap(double p, double tail_mass = 1e-12);

/// Number of failures before the first success with success probability p:
/// P(h) = p (1-p)^h for h >= 0, clipped at `cap`.
GeometricDraw sample_geometric(double p, CounterRng& gen, int cap);
GeometricDraw sample_geometric(double p, const RngStream& rng, int cap);

/// Simulates exactly `horizon` transitions, from `start` if given and from
/// s0 ~ rho, a0 ~ pi(.|s0) otherwise.
Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& pi, int horizon,
                   std::optional<StateAction> start, CounterRng& gen);
Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& pi, int horizon,
                   std::optional<StateAction> start, const RngStream& rng);

struct VisitationSample {
    StateAction pair;
    GeometricDraw horizon;
};

/// Draws (s_H, a_H) with H ~ Geom(1-gamma): a sample from the discounted
/// state-action occupancy measure.
VisitationSample sample_visitation(const TabularMdp& mdp, const PolicyMatrix& pi, const RngStream& rng);

struct QSample {
    double value = 0.0;
    GeometricDraw horizon;
};

/// Unbiased soft Q estimate from a Geom(1 - sqrt(gamma)) rollout started at
/// (s,a). The first reward is neither discounted nor entropy-corrected; term
/// t >= 1 is weighted by gamma^(t/2).
QSample est_ent_q(const TabularMdp& mdp, const PolicyMatrix& pi, int s, int a, double lambda,
                  const RngStream& rng);

/// Single-sample random-horizon gradient estimate. Uses child 0 of `rng` for
/// the occupancy draw and child 1 for the Q rollout.
GradientEstimate spg_estimate(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda,
                              const RngStream& rng);
GradientEstimate spg_estimate(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                              const RngStream& rng);

/// Truncated GPOMDP estimate from one length-h rollout started at rho.
GradientEstimate gpomdp_truncated(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda, int h,
                                  const RngStream& rng);
GradientEstimate gpomdp_truncated(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  int h, const RngStream& rng);

using SingleSampleEstimator = std::function<GradientEstimate(const RngStream&)>;

/// Mean of b single-sample estimates, sample i drawn from derive_stream(rng, i).
/// The reduction runs in index order, so the result is bit-identical for any
/// worker count.
GradientEstimate batch_mean(const SingleSampleEstimator& estimator, int b, const RngStream& rng,
                            int workers = 1);

}  // namespace entropg
