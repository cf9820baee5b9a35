#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "halfline/common.hpp"
#include "halfline/potential.hpp"

namespace hl {

inline constexpr int kSchemaVersion = 1;

// Flat key=value file with [section] headers; '#' starts a comment. Values
// are kept as text. Reads through the get_* accessors record the default
// they fall back to, so resolved() lists every value a run actually used.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  void set(const std::string& section, const std::string& key, const std::string& value);
  bool has(const std::string& section, const std::string& key) const;

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  cplx get_complex(const std::string& section, const std::string& key, cplx fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  // Tolerances positive, node counts >= 64.
  void validate() const;

  nlohmann::json resolved() const;

 private:
  mutable std::map<std::string, std::map<std::string, std::string>> values_;
};

// Potential from the [potential] section: family = zero | step | steps |
// exponential | gaussian | sampled.
Potential potential_from_config(const RunConfig& cfg);

// Report skeleton: schema version, command name and the resolved config.
nlohmann::json report_header(const std::string& command, const RunConfig& cfg);

nlohmann::json to_json(cplx z);

}  // namespace hl
