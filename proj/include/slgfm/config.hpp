#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "slgfm/damping.hpp"
#include "slgfm/sim.hpp"

namespace slgfm {

using Json = nlohmann::json;

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reads a JSON file. Throws ConfigError when missing or unparsable.
Json load_json_file(const std::string& path);

/// Builds a Case from the "params", "control", "inputs" and "ad" sections.
/// Parameter keys are applied in the order l_g, r_g, x_r_ratio so that r_g can
/// be given either directly or through the X/R ratio.
Case case_from_json(const Json& root);
Json case_to_json(const Case& c);

/// Scenario from the root case plus the "sim" section.
Scenario scenario_from_json(const Json& root);

AdDesignSpec design_spec_from_json(const Json& section);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Scientific notation with 12 significant digits.
std::string fmt(double v);

/// Writes a CSV file with a header row; cells are written verbatim.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace slgfm
