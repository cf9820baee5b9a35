#pragma once

#include <string>

#include <json.hpp>

#include "halfline/config.hpp"

namespace hl::cli {

struct CommandOutput {
  nlohmann::json report;
  int exit_code = 0;  // 0 pass, 1 tolerance failure
  std::string csv;    // optional side table
};

CommandOutput cmd_spectrum(const RunConfig& cfg);
CommandOutput cmd_kato(const RunConfig& cfg);
CommandOutput cmd_jost(const RunConfig& cfg);
CommandOutput cmd_det_check(const RunConfig& cfg);
CommandOutput cmd_waveops(const RunConfig& cfg);
CommandOutput cmd_evolve_compare(const RunConfig& cfg);

// FNV-1a of the compact report dump, as 16 hex digits.
std::string report_hash(const nlohmann::json& report);

}  // namespace hl::cli
