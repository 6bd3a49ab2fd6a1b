#pragma once

#include "entropg/environments.hpp"
#include "entropg/io.hpp"
#include "entropg/optimizers.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace entropg {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,  // a check failed or the input MDP is invalid
    exit_config_error = 2,
    exit_divergence = 3,
    exit_budget = 4,
    exit_convergence = 5,
};

struct ExactAlgorithm {
    double eta = 0.0;
    std::int64_t t_max = 0;
};

struct EntRpgAlgorithm {
    double eta = 0.0;
    std::int64_t batch = 1;
    std::int64_t t_max = 0;
    /// When set, the step becomes 1/(t - switch_at + t0) after `switch_at`.
    std::optional<std::int64_t> t0;
    std::int64_t switch_at = 0;
};

using Algorithm = std::variant<ExactAlgorithm, EntRpgAlgorithm, TwoPhasePlan>;

struct ExperimentConfig {
    TabularMdp mdp;
    double lambda = 0.0;
    Algorithm algorithm;
    std::optional<PolicyParams> theta0;
    std::uint64_t seed = 0;
    std::string trace_path = "trace.csv";
    std::string summary_path = "summary.json";
    std::int64_t diagnostics_every = 1;
    std::int64_t budget = 1'000'000'000;
};

/// Errors in the config itself (as opposed to the MDP it names).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a generator object: {"kind": "random"|"chain"|"bandit", ...}.
EnvSpec env_spec_from_json(const Json& j);

/// `base_dir` resolves a relative "mdp_path". Throws ConfigError for schema
/// problems and InvalidInput when the MDP fails validation.
ExperimentConfig config_from_json(const Json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

struct RunResult {
    RunTrace trace;
    double wall_seconds = 0.0;
};

/// Runs the configured optimizer, streaming the trace CSV and writing the
/// summary JSON. Exceptions propagate; the trace file holds the rows seen so
/// far.
RunResult run_experiment(const ExperimentConfig& config, int workers);

/// Summary document (no timing, so reruns are byte-identical).
Json summary_json(const ExperimentConfig& config, const RunTrace& trace);

}  // namespace entropg
