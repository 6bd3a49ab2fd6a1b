#include "entropg/io.hpp"

#include "entropg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace entropg {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::vector<double> row_vector(const Matrix& m, Eigen::Index r) {
    return std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols());
}

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(row_vector(m, r));
    return out;
}

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <class T>
T get_field(const Json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Json mdp_to_json(const TabularMdp& mdp) {
    Json j;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["gamma"] = mdp.discount;
    j["reward_max"] = mdp.reward_max;
    j["rewards"] = matrix_json(mdp.rewards);
    Json p = Json::array();
    for (int s = 0; s < mdp.num_states; ++s) {
        Json rows = Json::array();
        for (int a = 0; a < mdp.num_actions; ++a) rows.push_back(row_vector(mdp.transitions, mdp.row(s, a)));
        p.push_back(std::move(rows));
    }
    j["transitions"] = std::move(p);
    j["initial_dist"] = vector_json(mdp.initial_dist);
    return j;
}

TabularMdp mdp_from_json(const Json& j, bool validate) {
    if (!j.is_object()) throw InvalidInput("MDP must be a JSON object");
    TabularMdp mdp;
    mdp.num_states = get_field<int>(j, "num_states");
    mdp.num_actions = get_field<int>(j, "num_actions");
    if (mdp.num_states < 1 || mdp.num_actions < 1) throw InvalidInput("num_states and num_actions must be >= 1");
    mdp.discount = get_field<double>(j, "gamma");
    mdp.reward_max = get_field<double>(j, "reward_max");
    const int S = mdp.num_states;
    const int A = mdp.num_actions;

    const auto r = get_field<std::vector<std::vector<double>>>(j, "rewards");
    if (static_cast<int>(r.size()) != S) throw InvalidInput("rewards must have num_states rows");
    mdp.rewards.resize(S, A);
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(r[s].size()) != A) throw InvalidInput("rewards row " + std::to_string(s) + " has wrong length");
        for (int a = 0; a < A; ++a) mdp.rewards(s, a) = r[s][a];
    }

    const auto p = get_field<std::vector<std::vector<std::vector<double>>>>(j, "transitions");
    if (static_cast<int>(p.size()) != S) throw InvalidInput("transitions must have num_states entries");
    mdp.transitions.resize(static_cast<Eigen::Index>(S) * A, S);
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(p[s].size()) != A) throw InvalidInput("transitions[" + std::to_string(s) + "] has wrong length");
        for (int a = 0; a < A; ++a) {
            if (static_cast<int>(p[s][a].size()) != S)
                throw InvalidInput("transitions[" + std::to_string(s) + "][" + std::to_string(a) + "] has wrong length");
            for (int n = 0; n < S; ++n) mdp.transitions(mdp.row(s, a), n) = p[s][a][n];
        }
    }

    const auto rho = get_field<std::vector<double>>(j, "initial_dist");
    if (static_cast<int>(rho.size()) != S) throw InvalidInput("initial_dist must have num_states entries");
    mdp.initial_dist = Eigen::Map<const Vector>(rho.data(), S);
    if (validate) require_valid(mdp);
    return mdp;
}

Json params_to_json(const PolicyParams& theta) { return Json{{"logits", matrix_json(theta.logits)}}; }

PolicyParams params_from_json(const Json& j, int num_states, int num_actions) {
    const Json& m = j.is_object() ? j.at("logits") : j;
    std::vector<std::vector<double>> rows;
    try {
        rows = m.get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad logits: ") + e.what());
    }
    if (static_cast<int>(rows.size()) != num_states) throw InvalidInput("logits must have num_states rows");
    PolicyParams theta = PolicyParams::zeros(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) {
        if (static_cast<int>(rows[s].size()) != num_actions) throw InvalidInput("logits row has wrong length");
        for (int a = 0; a < num_actions; ++a) theta.logits(s, a) = rows[s][a];
    }
    return theta;
}

Json solution_to_json(const SoftOptimum& opt) {
    Json j;
    j["lambda"] = opt.lambda;
    j["v"] = vector_json(opt.v_star);
    j["q"] = matrix_json(opt.q_star);
    j["pi_star"] = matrix_json(opt.pi_star.probs);
    j["iterations"] = opt.iterations;
    j["residual"] = opt.residual;
    return j;
}

namespace {
// JSON has no inf/nan; keep them readable instead of emitting null.
Json number_json(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}
}  // namespace

Json report_to_json(const CheckReport& report) {
    Json j;
    j["check"] = report.check_name;
    j["status"] = to_string(report.status);
    j["statistic"] = number_json(report.statistic);
    j["threshold"] = number_json(report.threshold);
    j["n"] = report.n_samples;
    j["seed"] = report.seed;
    Json details = Json::array();
    for (const auto& row : report.details) {
        Json d;
        d["label"] = row.label;
        for (const auto& [k, v] : row.values) d[k] = number_json(v);
        details.push_back(std::move(d));
    }
    j["details"] = std::move(details);
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

const char* const trace_header =
    "t,objective,gap,grad_norm,min_pi,dist,batch_size,cum_env_steps,omega_flag,exited_region";

std::string trace_row_csv(const TraceRow& row) {
    std::string s = std::to_string(row.t);
    for (double x : {row.objective, row.gap, row.grad_norm, row.min_pi, row.dist}) s += "," + format_double(x);
    s += "," + std::to_string(row.batch_size) + "," + std::to_string(row.cum_env_steps);
    s += row.omega_flag ? ",1" : ",0";
    s += row.exited_region ? ",1" : ",0";
    return s;
}

void write_landscape_csv(std::ostream& os, const std::vector<LandscapePoint>& grid) {
    os << "theta1,theta2,value\n";
    for (const auto& p : grid)
        os << format_double(p.theta1) << ',' << format_double(p.theta2) << ',' << format_double(p.value) << '\n';
}

}  // namespace entropg
