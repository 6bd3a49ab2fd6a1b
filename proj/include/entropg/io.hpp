#pragma once

#include "entropg/harness.hpp"
#include "entropg/mdp.hpp"
#include "entropg/optimizers.hpp"
#include "entropg/oracle.hpp"
#include "entropg/environments.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace entropg {

using Json = nlohmann::ordered_json;

/// Shortest decimal form with 17 significant digits, lossless for doubles.
std::string format_double(double x);

Json mdp_to_json(const TabularMdp& mdp);
/// Parses (and by default validates); throws InvalidInput on malformed input
/// or, when `validate` is set, on an invalid MDP.
TabularMdp mdp_from_json(const Json& j, bool validate = true);

Json params_to_json(const PolicyParams& theta);
/// Accepts either {"logits": [[...]]} or a bare matrix.
PolicyParams params_from_json(const Json& j, int num_states, int num_actions);

Json solution_to_json(const SoftOptimum& opt);
Json report_to_json(const CheckReport& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
/// Pretty-printed dump; floats round-trip exactly.
std::string dump_json(const Json& j);

extern const char* const trace_header;
std::string trace_row_csv(const TraceRow& row);
void write_landscape_csv(std::ostream& os, const std::vector<LandscapePoint>& grid);

}  // namespace entropg
