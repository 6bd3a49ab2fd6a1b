#include "entropg/experiment.hpp"

#include "entropg/errors.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace entropg {

namespace {

template <class T>
T need(const Json& j, const char* key, const char* where) {
    if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(where) + ": '" + key + "' has the wrong type");
    }
}

template <class T>
T opt(const Json& j, const char* key, T fallback, const char* where) {
    return j.contains(key) ? need<T>(j, key, where) : fallback;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || item.key() == k;
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

Algorithm algorithm_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("algorithm must be an object");
    const auto kind = need<std::string>(j, "kind", "algorithm");
    if (kind == "exact") {
        reject_unknown(j, {"kind", "eta", "t_max"}, "algorithm");
        ExactAlgorithm a{need<double>(j, "eta", "algorithm"), need<std::int64_t>(j, "t_max", "algorithm")};
        if (!(a.eta > 0.0) || a.t_max < 0) throw ConfigError("algorithm: need eta > 0 and t_max >= 0");
        return a;
    }
    if (kind == "entrpg") {
        reject_unknown(j, {"kind", "eta", "batch", "t_max", "t0", "switch_at"}, "algorithm");
        EntRpgAlgorithm a;
        a.eta = need<double>(j, "eta", "algorithm");
        a.batch = need<std::int64_t>(j, "batch", "algorithm");
        a.t_max = need<std::int64_t>(j, "t_max", "algorithm");
        if (j.contains("t0")) a.t0 = need<std::int64_t>(j, "t0", "algorithm");
        a.switch_at = opt<std::int64_t>(j, "switch_at", 0, "algorithm");
        if (!(a.eta > 0.0) || a.batch < 1 || a.t_max < 0 || (a.t0 && *a.t0 < 1))
            throw ConfigError("algorithm: need eta > 0, batch >= 1, t_max >= 0, t0 >= 1");
        return a;
    }
    if (kind == "twophase") {
        reject_unknown(j, {"kind", "t1", "b1", "eta", "t2", "b2", "t0", "alpha", "delta", "delta_bar", "c0_delta",
                           "epsilon"},
                       "algorithm");
        TwoPhasePlan p;
        p.t1 = need<std::int64_t>(j, "t1", "algorithm");
        p.b1 = need<std::int64_t>(j, "b1", "algorithm");
        p.t2 = need<std::int64_t>(j, "t2", "algorithm");
        p.b2 = need<std::int64_t>(j, "b2", "algorithm");
        const double eta = need<double>(j, "eta", "algorithm");
        const auto t0 = need<std::int64_t>(j, "t0", "algorithm");
        p.schedule = StepSchedule::two_phase(eta, t0, p.t1);
        p.alpha = opt<double>(j, "alpha", p.alpha, "algorithm");
        p.delta = opt<double>(j, "delta", p.delta, "algorithm");
        p.c0_delta = opt<double>(j, "c0_delta", p.c0_delta, "algorithm");
        p.epsilon = opt<double>(j, "epsilon", p.epsilon, "algorithm");
        if (j.contains("delta_bar")) p.delta_bar = need<double>(j, "delta_bar", "algorithm");
        try {
            p.validate();
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("algorithm: ") + e.what());
        }
        return p;
    }
    throw ConfigError("algorithm: unknown kind '" + kind + "' (expected exact, entrpg or twophase)");
}

}  // namespace

EnvSpec env_spec_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("generator must be an object");
    const auto kind = need<std::string>(j, "kind", "generator");
    if (kind == "random") {
        reject_unknown(j, {"kind", "seed", "states", "actions", "gamma"}, "generator");
        return RandomSpec{opt<std::uint64_t>(j, "seed", 0, "generator"), need<int>(j, "states", "generator"),
                          need<int>(j, "actions", "generator"), need<double>(j, "gamma", "generator")};
    }
    if (kind == "chain") {
        reject_unknown(j, {"kind", "n", "gamma"}, "generator");
        return ChainSpec{need<int>(j, "n", "generator"), need<double>(j, "gamma", "generator")};
    }
    if (kind == "bandit") {
        reject_unknown(j, {"kind", "rewards"}, "generator");
        return BanditSpec{need<std::vector<double>>(j, "rewards", "generator")};
    }
    throw ConfigError("generator: unknown kind '" + kind + "'");
}

ExperimentConfig config_from_json(const Json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"mdp", "mdp_path", "generator", "lambda", "algorithm", "theta0", "seed", "output",
                       "diagnostics_every", "budget"},
                   "config");
    const int sources = int(j.contains("mdp")) + int(j.contains("mdp_path")) + int(j.contains("generator"));
    if (sources != 1) throw ConfigError("config: exactly one of 'mdp', 'mdp_path', 'generator' is required");

    ExperimentConfig c;
    if (j.contains("mdp")) {
        c.mdp = mdp_from_json(j.at("mdp"));
    } else if (j.contains("mdp_path")) {
        std::filesystem::path p = need<std::string>(j, "mdp_path", "config");
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        if (!std::filesystem::exists(p)) throw ConfigError("config: mdp_path not found: " + p.string());
        c.mdp = mdp_from_json(read_json_file(p.string()));
    } else {
        try {
            c.mdp = gen_env(env_spec_from_json(j.at("generator")));
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("generator: ") + e.what());
        }
    }
    c.lambda = need<double>(j, "lambda", "config");
    if (!(c.lambda >= 0.0)) throw ConfigError("config: lambda must be >= 0");
    c.algorithm = algorithm_from_json(need<Json>(j, "algorithm", "config"));
    if (j.contains("theta0")) {
        try {
            c.theta0 = params_from_json(j.at("theta0"), c.mdp.num_states, c.mdp.num_actions);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("theta0: ") + e.what());
        }
    }
    c.seed = opt<std::uint64_t>(j, "seed", 0, "config");
    c.diagnostics_every = opt<std::int64_t>(j, "diagnostics_every", 1, "config");
    if (c.diagnostics_every < 1) throw ConfigError("config: diagnostics_every must be >= 1");
    c.budget = opt<std::int64_t>(j, "budget", c.budget, "config");
    if (j.contains("output")) {
        const Json& o = j.at("output");
        if (!o.is_object()) throw ConfigError("output must be an object");
        reject_unknown(o, {"trace_path", "summary_path"}, "output");
        c.trace_path = opt<std::string>(o, "trace_path", c.trace_path, "output");
        c.summary_path = opt<std::string>(o, "summary_path", c.summary_path, "output");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    Json j;
    try {
        j = read_json_file(path);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path().string());
}

Json summary_json(const ExperimentConfig& config, const RunTrace& trace) {
    Json j;
    std::visit(
        [&](const auto& a) {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, ExactAlgorithm>) j["algorithm"] = "exact";
            else if constexpr (std::is_same_v<A, EntRpgAlgorithm>) j["algorithm"] = "entrpg";
            else j["algorithm"] = "twophase";
        },
        config.algorithm);
    j["seed"] = config.seed;
    j["lambda"] = config.lambda;
    j["iterations"] = trace.rows.empty() ? 0 : trace.rows.back().t;
    j["final_gap"] = trace.final_gap;
    j["final_objective"] = trace.rows.empty() ? 0.0 : trace.rows.back().objective;
    j["env_steps"] = trace.env_steps;
    j["truncated_horizons"] = trace.truncated_horizons;
    j["min_pi_overall"] = trace.min_pi_overall;
    if (trace.reached_epsilon) j["reached_epsilon"] = *trace.reached_epsilon;
    if (trace.phase2_omega_fraction) j["phase2_omega_fraction"] = *trace.phase2_omega_fraction;
    j["final_theta"] = params_to_json(trace.final_theta)["logits"];
    return j;
}

RunResult run_experiment(const ExperimentConfig& config, int workers) {
    const auto start = std::chrono::steady_clock::now();
    const TabularMdp& mdp = config.mdp;
    const PolicyParams theta0 = config.theta0 ? *config.theta0 : PolicyParams::zeros(mdp.num_states, mdp.num_actions);
    const SoftOptimum opt = soft_value_iteration(mdp, config.lambda);

    std::ofstream trace_out(config.trace_path, std::ios::binary);
    if (!trace_out) throw std::runtime_error("cannot write " + config.trace_path);
    trace_out << trace_header << '\n';

    RunOptions options;
    options.workers = workers;
    options.step_budget = config.budget;
    options.diagnostics_every = config.diagnostics_every;
    options.sink = [&](const TraceRow& row) { trace_out << trace_row_csv(row) << '\n' << std::flush; };
    const RngStream rng(config.seed);

    RunResult result;
    result.trace = std::visit(
        [&](const auto& a) -> RunTrace {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, ExactAlgorithm>) {
                return exact_pg(mdp, theta0, config.lambda, a.eta, a.t_max, opt, options);
            } else if constexpr (std::is_same_v<A, EntRpgAlgorithm>) {
                const StepSchedule sched =
                    a.t0 ? StepSchedule::two_phase(a.eta, *a.t0, a.switch_at) : StepSchedule::constant(a.eta);
                return ent_rpg(mdp, theta0, config.lambda, a.batch, a.t_max, sched, rng, opt, options);
            } else {
                return two_phase(mdp, theta0, config.lambda, a, rng, opt, options);
            }
        },
        config.algorithm);
    trace_out.close();
    write_text_file(config.summary_path, dump_json(summary_json(config, result.trace)));
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace entropg
