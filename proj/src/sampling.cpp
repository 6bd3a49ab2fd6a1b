#include "entropg/sampling.hpp"

#include "entropg/errors.hpp"
#include "entropg/parallel.hpp"

#include <cmath>

namespace entropg {

int geometric_cap(double p, double tail_mass) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("geometric success probability must lie in (0,1]");
    if (p == 1.0) return 1;
    const double cap = std::ceil(std::log(tail_mass) / std::log1p(-p));
    return static_cast<int>(std::clamp(cap, 1.0, 1e9));
}

GeometricDraw sample_geometric(double p, CounterRng& gen, int cap) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("geometric success probability must lie in (0,1]");
    if (cap < 1) throw InvalidInput("geometric cap must be >= 1");
    const double u = gen.uniform_open();
    if (p == 1.0) return {0, false};
    const double raw = std::floor(std::log(u) / std::log1p(-p));
    if (raw >= cap) return {cap, true};
    return {static_cast<int>(raw), false};
}

GeometricDraw sample_geometric(double p, const RngStream& rng, int cap) {
    CounterRng gen = rng.generator();
    return sample_geometric(p, gen, cap);
}

namespace {

int next_state(const TabularMdp& mdp, int s, int a, CounterRng& gen) {
    return gen.categorical(mdp.next_state_dist(s, a));
}

}  // namespace

Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& pi, int horizon,
                   std::optional<StateAction> start, CounterRng& gen) {
    if (horizon < 0) throw InvalidInput("horizon must be >= 0");
    Trajectory tr;
    tr.horizon = horizon;
    tr.states.reserve(horizon + 1);
    tr.actions.reserve(horizon + 1);
    tr.rewards.reserve(horizon + 1);

    int s = 0;
    int a = 0;
    if (start) {
        check_state_action(mdp.num_states, mdp.num_actions, start->state, start->action);
        s = start->state;
        a = start->action;
    } else {
        s = gen.categorical(mdp.initial());
        a = gen.categorical(pi.row(s));
    }
    for (int h = 0;; ++h) {
        tr.states.push_back(s);
        tr.actions.push_back(a);
        tr.rewards.push_back(mdp.rewards(s, a));
        if (h == horizon) break;
        s = next_state(mdp, s, a, gen);
        a = gen.categorical(pi.row(s));
    }
    return tr;
}

Trajectory rollout(const TabularMdp& mdp, const PolicyMatrix& pi, int horizon,
                   std::optional<StateAction> start, const RngStream& rng) {
    CounterRng gen = rng.generator();
    return rollout(mdp, pi, horizon, start, gen);
}

VisitationSample sample_visitation(const TabularMdp& mdp, const PolicyMatrix& pi, const RngStream& rng) {
    CounterRng gen = rng.generator();
    const double p = 1.0 - mdp.discount;
    VisitationSample out;
    out.horizon = sample_geometric(p, gen, geometric_cap(p));
    int s = gen.categorical(mdp.initial());
    int a = gen.categorical(pi.row(s));
    for (int h = 0; h < out.horizon.value; ++h) {
        s = next_state(mdp, s, a, gen);
        a = gen.categorical(pi.row(s));
    }
    out.pair = {s, a};
    return out;
}

QSample est_ent_q(const TabularMdp& mdp, const PolicyMatrix& pi, int s, int a, double lambda,
                  const RngStream& rng) {
    check_state_action(mdp.num_states, mdp.num_actions, s, a);
    CounterRng gen = rng.generator();
    const double root = std::sqrt(mdp.discount);
    const double p = 1.0 - root;
    QSample out;
    out.horizon = sample_geometric(p, gen, geometric_cap(p));
    double q = mdp.rewards(s, a);
    double weight = 1.0;
    for (int t = 1; t <= out.horizon.value; ++t) {
        s = next_state(mdp, s, a, gen);
        a = gen.categorical(pi.row(s));
        weight *= root;
        q += weight * (mdp.rewards(s, a) - lambda * pi.log_probs(s, a));
    }
    out.value = q;
    return out;
}

GradientEstimate spg_estimate(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda,
                              const RngStream& rng) {
    const VisitationSample sa = sample_visitation(mdp, pi, derive_stream(rng, 0));
    const int s = sa.pair.state;
    const int a = sa.pair.action;
    const QSample q = est_ent_q(mdp, pi, s, a, lambda, derive_stream(rng, 1));

    GradientEstimate est;
    est.grad = Matrix::Zero(mdp.num_states, mdp.num_actions);
    const double coeff = (q.value - lambda * pi.log_probs(s, a)) / (1.0 - mdp.discount);
    est.grad.row(s) = -coeff * pi.probs.row(s);
    est.grad(s, a) += coeff;
    est.batch_size = 1;
    est.env_steps = sa.horizon.value + q.horizon.value + 1;
    est.horizon_draws = 2;
    est.truncated_horizons = int{sa.horizon.truncated} + int{q.horizon.truncated};
    return est;
}

GradientEstimate spg_estimate(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                              const RngStream& rng) {
    return spg_estimate(mdp, policy_from_params(theta), lambda, rng);
}

GradientEstimate gpomdp_truncated(const TabularMdp& mdp, const PolicyMatrix& pi, double lambda, int h,
                                  const RngStream& rng) {
    if (h < 1) throw InvalidInput("GPOMDP horizon must be >= 1");
    CounterRng gen = rng.generator();
    const int S = mdp.num_states;
    const int A = mdp.num_actions;

    GradientEstimate est;
    est.grad = Matrix::Zero(S, A);
    Matrix score_sum = Matrix::Zero(S, A);
    int s = gen.categorical(mdp.initial());
    int a = gen.categorical(pi.row(s));
    double discount = 1.0;
    for (int k = 0; k < h; ++k) {
        score_sum.row(s) -= pi.probs.row(s);
        score_sum(s, a) += 1.0;
        est.grad += (discount * (mdp.rewards(s, a) - lambda * pi.log_probs(s, a))) * score_sum;
        discount *= mdp.discount;
        if (k + 1 < h) {
            s = next_state(mdp, s, a, gen);
            a = gen.categorical(pi.row(s));
        }
    }
    est.batch_size = 1;
    est.env_steps = h;
    return est;
}

GradientEstimate gpomdp_truncated(const TabularMdp& mdp, const PolicyParams& theta, double lambda,
                                  int h, const RngStream& rng) {
    return gpomdp_truncated(mdp, policy_from_params(theta), lambda, h, rng);
}

GradientEstimate batch_mean(const SingleSampleEstimator& estimator, int b, const RngStream& rng,
                            int workers) {
    if (b < 1) throw InvalidInput("batch size must be >= 1");
    std::vector<GradientEstimate> samples(static_cast<std::size_t>(b));
    parallel_for(samples.size(), workers,
                 [&](std::size_t i) { samples[i] = estimator(derive_stream(rng, i)); });

    GradientEstimate out;
    out.grad = samples[0].grad;
    out.batch_size = b;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0) out.grad += samples[i].grad;
        out.env_steps += samples[i].env_steps;
        out.truncated_horizons += samples[i].truncated_horizons;
        out.horizon_draws += samples[i].horizon_draws;
    }
    out.grad /= static_cast<double>(b);
    return out;
}

}  // namespace entropg
