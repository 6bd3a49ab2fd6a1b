// entropg: command-line front end for the entropy-regularized PG lab.
//
// Exit codes: 0 ok, 1 check failed / invalid MDP, 2 config or usage error,
// 3 divergence, 4 step budget exceeded, 5 value iteration did not converge.

#include "entropg/environments.hpp"
#include "entropg/errors.hpp"
#include "entropg/experiment.hpp"
#include "entropg/harness.hpp"
#include "entropg/io.hpp"
#include "entropg/log.hpp"
#include "entropg/oracle.hpp"
#include "entropg/parallel.hpp"
#include "entropg/sampling.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace entropg;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int parallel = available_workers();
    std::optional<std::int64_t> budget;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Experiment config JSON");
    cmd->add_option("--seed", c.seed, "Seed (overrides the config)");
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--parallel", c.parallel, "Estimator worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--budget", c.budget, "Environment step budget");
}

// Writes `text` to out/name, or stdout when no directory was given.
void emit(const Common& c, const std::string& name, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(c.out);
    write_text_file((fs::path(c.out) / name).string(), text);
}

// MDP (and lambda, when present) from --mdp or from a config's MDP source.
TabularMdp load_mdp(const std::string& mdp_path, const Common& c, bool validate = true) {
    if (!mdp_path.empty()) {
        try {
            return mdp_from_json(read_json_file(mdp_path), validate);
        } catch (const InvalidInput& e) {
            // Unreadable or malformed files are usage errors; validation
            // failures keep their own exit code.
            if (!fs::exists(mdp_path)) throw ConfigError(e.what());
            throw;
        }
    }
    if (!c.config.empty()) return load_config(c.config).mdp;
    throw ConfigError("need --mdp or --config");
}

double lambda_from(std::optional<double> flag, const Common& c) {
    if (flag) return *flag;
    if (!c.config.empty()) return load_config(c.config).lambda;
    throw ConfigError("need --lambda or --config");
}

int cmd_validate(const std::string& mdp_path, const Common& c) {
    const TabularMdp mdp = load_mdp(mdp_path, c, false);
    const ValidationReport rep = validate_mdp(mdp);
    Json out = Json::array();
    for (const auto& v : rep) out.push_back({{"field", v.field}, {"index", v.index}, {"residual", v.residual},
                                             {"message", v.message}});
    emit(c, "validation.json", dump_json(Json{{"valid", rep.empty()}, {"violations", out}}));
    return rep.empty() ? exit_ok : exit_check_failed;
}

int cmd_train(const Common& c) {
    if (c.config.empty()) throw ConfigError("train needs --config");
    ExperimentConfig cfg = load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.budget) cfg.budget = *c.budget;
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        cfg.trace_path = (fs::path(c.out) / fs::path(cfg.trace_path).filename()).string();
        cfg.summary_path = (fs::path(c.out) / fs::path(cfg.summary_path).filename()).string();
    }
    const RunResult r = run_experiment(cfg, c.parallel);
    std::printf("final D = %.6e\nenv steps = %lld\nwall time = %.3f s\n", r.trace.final_gap,
                static_cast<long long>(r.trace.env_steps), r.wall_seconds);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-regularized softmax policy gradient lab for tabular MDPs"};
    app.require_subcommand(1);

    Common common;
    std::string mdp_path;
    std::optional<double> lambda;

    auto* validate = app.add_subcommand("validate", "Check an MDP file for consistency");
    validate->add_option("--mdp", mdp_path, "MDP JSON");
    add_common(validate, common);

    auto* gen = app.add_subcommand("gen", "Generate an MDP (random, chain or bandit)");
    std::string kind = "random";
    int states = 3, actions = 2, chain_n = 4;
    double gamma = 0.9;
    std::vector<double> rewards = {2.0, 1.0};
    gen->add_option("--kind", kind, "random | chain | bandit")->check(CLI::IsMember({"random", "chain", "bandit"}));
    gen->add_option("--states", states, "random: number of states");
    gen->add_option("--actions", actions, "random: number of actions");
    gen->add_option("--n", chain_n, "chain: length");
    gen->add_option("--gamma", gamma, "discount");
    gen->add_option("--rewards", rewards, "bandit: arm rewards")->delimiter(',');
    add_common(gen, common);

    auto* solve = app.add_subcommand("solve", "Soft-optimal value, Q and policy");
    solve->add_option("--mdp", mdp_path, "MDP JSON");
    solve->add_option("--lambda", lambda, "Entropy weight");
    add_common(solve, common);

    auto* grad = app.add_subcommand("grad", "Exact or sampled gradient at given logits");
    std::string theta_path, estimator = "exact";
    std::int64_t samples = 1000;
    int horizon = 20;
    grad->add_option("--mdp", mdp_path, "MDP JSON");
    grad->add_option("--lambda", lambda, "Entropy weight");
    grad->add_option("--theta", theta_path, "Logits JSON (default zeros)");
    grad->add_option("--estimator", estimator, "exact | spg | gpomdp")
        ->check(CLI::IsMember({"exact", "spg", "gpomdp"}));
    grad->add_option("--samples", samples, "Batch size for sampled estimators")->check(CLI::PositiveNumber);
    grad->add_option("--horizon", horizon, "GPOMDP horizon")->check(CLI::PositiveNumber);
    add_common(grad, common);

    auto* train = app.add_subcommand("train", "Run the optimizer named in --config");
    add_common(train, common);

    auto* check = app.add_subcommand("check", "Run harness checks (all when none named)");
    std::vector<std::string> names;
    SuiteOptions suite;
    check->add_option("names", names, "Check names")->check(CLI::IsMember(check_names()));
    check->add_option("--lambda", suite.lambda, "Entropy weight");
    check->add_option("--samples", suite.estimator_samples, "Samples per estimator check");
    check->add_option("--visitation-samples", suite.visitation_samples, "visitation draws");
    check->add_option("--thetas", suite.landscape_thetas, "Random logits for the landscape check");
    add_common(check, common);

    auto* landscape = app.add_subcommand("landscape", "Two-armed bandit objective over a logit grid");
    double lo = -5.0, hi = 5.0, step = 0.1, grid_lambda = 1.0;
    landscape->add_option("--rewards", rewards, "Arm rewards (two)")->delimiter(',');
    landscape->add_option("--lambda", grid_lambda, "Entropy weight");
    landscape->add_option("--lo", lo, "Grid start");
    landscape->add_option("--hi", hi, "Grid end");
    landscape->add_option("--step", step, "Grid spacing");
    add_common(landscape, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config_error;
    }

    try {
        if (*validate) return cmd_validate(mdp_path, common);
        if (*gen) {
            EnvSpec spec;
            if (kind == "random") spec = RandomSpec{common.seed.value_or(0), states, actions, gamma};
            else if (kind == "chain") spec = ChainSpec{chain_n, gamma};
            else spec = BanditSpec{rewards};
            emit(common, "mdp.json", dump_json(mdp_to_json(gen_env(spec))));
            return exit_ok;
        }
        if (*solve) {
            const TabularMdp mdp = load_mdp(mdp_path, common);
            emit(common, "solution.json", dump_json(solution_to_json(soft_value_iteration(mdp, lambda_from(lambda, common)))));
            return exit_ok;
        }
        if (*grad) {
            const TabularMdp mdp = load_mdp(mdp_path, common);
            const double lam = lambda_from(lambda, common);
            const PolicyParams theta = theta_path.empty()
                                           ? PolicyParams::zeros(mdp.num_states, mdp.num_actions)
                                           : params_from_json(read_json_file(theta_path), mdp.num_states, mdp.num_actions);
            Json out;
            out["estimator"] = estimator;
            if (estimator == "exact") {
                out["gradient"] = params_to_json(PolicyParams{exact_gradient(mdp, theta, lam)})["logits"];
            } else {
                const PolicyMatrix pi = policy_from_params(theta);
                const SingleSampleEstimator est = [&](const RngStream& s) {
                    return estimator == "spg" ? spg_estimate(mdp, pi, lam, s) : gpomdp_truncated(mdp, pi, lam, horizon, s);
                };
                const GradientEstimate g =
                    batch_mean(est, static_cast<int>(samples), RngStream(common.seed.value_or(0)), common.parallel);
                out["gradient"] = params_to_json(PolicyParams{g.grad})["logits"];
                out["samples"] = g.batch_size;
                out["env_steps"] = g.env_steps;
                out["truncated_horizons"] = g.truncated_horizons;
            }
            emit(common, "gradient.json", dump_json(out));
            return exit_ok;
        }
        if (*train) return cmd_train(common);
        if (*check) {
            suite.seed = common.seed.value_or(0);
            suite.workers = common.parallel;
            const std::vector<CheckReport> reports = run_checks(names, suite);
            Json out = Json::array();
            bool all = true;
            for (const auto& r : reports) {
                out.push_back(report_to_json(r));
                all = all && r.passed();
                std::fprintf(stderr, "%-18s %-12s statistic=%.6g threshold=%.6g\n", r.check_name.c_str(),
                             to_string(r.status), r.statistic, r.threshold);
            }
            emit(common, "report.json", dump_json(out));
            return all ? exit_ok : exit_check_failed;
        }
        if (*landscape) {
            std::ostringstream os;
            write_landscape_csv(os, landscape_grid(rewards, grid_lambda, lo, hi, step));
            emit(common, "landscape.csv", os.str());
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return exit_divergence;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return exit_budget;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return exit_convergence;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_check_failed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config_error;
    }
    return exit_ok;
}
