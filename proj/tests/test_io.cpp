#include "entropg/environments.hpp"
#include "entropg/errors.hpp"
#include "entropg/experiment.hpp"
#include "entropg/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <sstream>
#include <unistd.h>

using namespace entropg;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("entropg_io_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}
}  // namespace

TEST_CASE("MDP JSON round trip is exact") {
    for (const TabularMdp& m : {gen_env(RandomSpec{0, 5, 3, 0.9}), gen_env(ChainSpec{4, 0.9}), gen_env(BanditSpec{{2.0, 1.0}})}) {
        const std::string text = dump_json(mdp_to_json(m));
        CHECK(mdp_from_json(Json::parse(text)) == m);
    }
    const Json j = mdp_to_json(gen_env(RandomSpec{0, 2, 3, 0.9}));
    CHECK(j["transitions"].size() == 2);
    CHECK(j["transitions"][0].size() == 3);
    CHECK(j["transitions"][0][0].size() == 2);
}

TEST_CASE("MDP JSON errors") {
    Json j = mdp_to_json(gen_env(RandomSpec{0, 2, 2, 0.9}));
    j["initial_dist"] = {1.0, 0.0};
    CHECK_THROWS_AS(mdp_from_json(j), InvalidInput);
    CHECK_NOTHROW(mdp_from_json(j, false));
    j.erase("rewards");
    CHECK_THROWS_AS(mdp_from_json(j), InvalidInput);
    Json k = mdp_to_json(gen_env(RandomSpec{0, 2, 2, 0.9}));
    k["transitions"][1] = Json::array();
    CHECK_THROWS_AS(mdp_from_json(k), InvalidInput);
}

TEST_CASE("floats print losslessly") {
    for (double x : {0.1, 1.0 / 3.0, 2.193147180559945, 1e-300, -5e-324}) CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("trace CSV rows") {
    TraceRow r;
    r.t = 3;
    r.objective = 0.1;
    r.batch_size = 32;
    r.cum_env_steps = 100;
    r.omega_flag = true;
    CHECK(std::string(trace_header) ==
          "t,objective,gap,grad_norm,min_pi,dist,batch_size,cum_env_steps,omega_flag,exited_region");
    CHECK(trace_row_csv(r) == "3,0.10000000000000001,0,0,0,0,32,100,1,0");
}

TEST_CASE("report JSON shape") {
    CheckReport r;
    r.check_name = "x";
    r.status = CheckStatus::inconclusive;
    r.statistic = 1.5;
    r.threshold = INFINITY;
    r.n_samples = 10;
    r.seed = 3;
    r.details.push_back({"row", {{"a", 1.0}}});
    const Json j = report_to_json(r);
    CHECK(j["check"] == "x");
    CHECK(j["status"] == "inconclusive");
    CHECK(j["n"] == 10);
    CHECK(j["seed"] == 3);
    CHECK(j["threshold"] == "inf");
    CHECK(j["details"][0]["label"] == "row");
    CHECK(j["details"][0]["a"] == 1.0);
}

TEST_CASE("solution dump") {
    const SoftOptimum opt = soft_value_iteration(gen_env(BanditSpec{{2.0, 1.0}}), 1.0);
    const Json j = solution_to_json(opt);
    for (const char* k : {"lambda", "v", "q", "pi_star", "residual"}) CHECK(j.contains(k));
    CHECK(j["v"][0].get<double>() == doctest::Approx(2.313261687518223));
}

TEST_CASE("logits JSON") {
    PolicyParams t = PolicyParams::zeros(2, 2);
    t.logits << 1, 2, 3, 4;
    const PolicyParams back = params_from_json(params_to_json(t), 2, 2);
    CHECK(back.logits == t.logits);
    CHECK(params_from_json(Json::parse("[[1,2],[3,4]]"), 2, 2).logits == t.logits);
    CHECK_THROWS_AS(params_from_json(Json::parse("[[1,2]]"), 2, 2), InvalidInput);
}

TEST_CASE("config parsing") {
    const Json mdp = mdp_to_json(gen_env(BanditSpec{{2.0, 1.0}}));
    Json cfg = {{"mdp", mdp}, {"lambda", 1.0}, {"algorithm", {{"kind", "exact"}, {"eta", 0.1}, {"t_max", 10}}}};
    const ExperimentConfig c = config_from_json(cfg);
    CHECK(c.lambda == 1.0);
    CHECK(std::holds_alternative<ExactAlgorithm>(c.algorithm));

    Json both = cfg;
    both["mdp_path"] = "x.json";
    CHECK_THROWS_AS(config_from_json(both), ConfigError);
    Json none = cfg;
    none.erase("mdp");
    CHECK_THROWS_AS(config_from_json(none), ConfigError);
    Json missing = cfg;
    missing["algorithm"].erase("eta");
    CHECK_THROWS_AS(config_from_json(missing), ConfigError);
    Json unknown = cfg;
    unknown["algorithm"]["kind"] = "adam";
    CHECK_THROWS_AS(config_from_json(unknown), ConfigError);
    Json typo = cfg;
    typo["lamda"] = 1.0;
    CHECK_THROWS_AS(config_from_json(typo), ConfigError);
    Json bad_path = none;
    bad_path["mdp_path"] = "does/not/exist.json";
    CHECK_THROWS_AS(config_from_json(bad_path), ConfigError);

    Json gen = none;
    gen["generator"] = {{"kind", "random"}, {"seed", 2}, {"states", 3}, {"actions", 2}, {"gamma", 0.9}};
    gen["algorithm"] = {{"kind", "twophase"}, {"t1", 5}, {"b1", 4}, {"eta", 0.05}, {"t2", 5}, {"b2", 2}, {"t0", 10}};
    const ExperimentConfig g = config_from_json(gen);
    CHECK(g.mdp == gen_env(RandomSpec{2, 3, 2, 0.9}));
    const auto& plan = std::get<TwoPhasePlan>(g.algorithm);
    CHECK(plan.schedule.switch_at == 5);
    CHECK(plan.schedule.t0 == 10);
}

TEST_CASE("config with an MDP path is resolved relative to the config") {
    const fs::path mdp = scratch("m.json");
    write_text_file(mdp.string(), dump_json(mdp_to_json(gen_env(ChainSpec{3, 0.5}))));
    const fs::path cfg = scratch("c.json");
    write_text_file(cfg.string(), dump_json(Json{{"mdp_path", "m.json"},
                                                 {"lambda", 0.5},
                                                 {"algorithm", {{"kind", "entrpg"}, {"eta", 0.1}, {"batch", 2}, {"t_max", 3}}}}));
    const ExperimentConfig c = load_config(cfg.string());
    CHECK(c.mdp == gen_env(ChainSpec{3, 0.5}));
}

TEST_CASE("experiment run writes identical files on rerun") {
    Json cfg = {{"generator", {{"kind", "random"}, {"seed", 0}, {"states", 2}, {"actions", 2}, {"gamma", 0.9}}},
                {"lambda", 0.1},
                {"seed", 4},
                {"algorithm", {{"kind", "entrpg"}, {"eta", 0.05}, {"batch", 8}, {"t_max", 20}}}};
    ExperimentConfig c = config_from_json(cfg);
    c.trace_path = scratch("t1.csv").string();
    c.summary_path = scratch("s1.json").string();
    run_experiment(c, 1);
    ExperimentConfig d = c;
    d.trace_path = scratch("t2.csv").string();
    d.summary_path = scratch("s2.json").string();
    run_experiment(d, 3);
    CHECK(slurp(c.trace_path) == slurp(d.trace_path));
    CHECK(slurp(c.summary_path) == slurp(d.summary_path));
    const std::string trace = slurp(c.trace_path);
    CHECK(trace.rfind(std::string(trace_header) + "\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 22);
    const Json s = Json::parse(slurp(c.summary_path));
    CHECK(s["algorithm"] == "entrpg");
    CHECK(s["iterations"] == 20);
    fs::remove_all(scratch("").parent_path());
}
