#include "halfline/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hl {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  std::string s = trim(text);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorKind::Input, "'" + what + "' expects a number, got '" + text + "'");
  return v;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in, const std::string& origin) {
  RunConfig c;
  std::string line, section = "run";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorKind::Input, origin + ":" + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Input, origin + ":" + std::to_string(lineno) + ": expected key = value");
    c.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot open config '" + path + "'");
  return parse(in, path);
}

void RunConfig::set(const std::string& section, const std::string& key,
                    const std::string& value) {
  values_[section][key] = value;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

std::string RunConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  auto& sec = values_[section];
  auto it = sec.find(key);
  if (it != sec.end()) return it->second;
  sec[key] = fallback;
  return fallback;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  return parse_double(get(section, key, format_double(fallback)), section + "." + key);
}

int RunConfig::get_int(const std::string& section, const std::string& key, int fallback) const {
  double v = get_double(section, key, fallback);
  if (v != std::floor(v))
    throw Error(ErrorKind::Input, "'" + section + "." + key + "' expects an integer");
  return static_cast<int>(v);
}

bool RunConfig::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  std::string v = get(section, key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::Input, "'" + section + "." + key + "' expects true or false");
}

cplx RunConfig::get_complex(const std::string& section, const std::string& key,
                            cplx fallback) const {
  std::string def = fallback.imag() == 0.0
                        ? format_double(fallback.real())
                        : "(" + format_double(fallback.real()) + "," + format_double(fallback.imag()) + ")";
  return parse_complex(get(section, key, def));
}

std::vector<double> RunConfig::get_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  std::string def;
  for (size_t i = 0; i < fallback.size(); ++i) def += (i ? "," : "") + format_double(fallback[i]);
  std::string text = get(section, key, def);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(parse_double(item, section + "." + key));
  return out;
}

void RunConfig::validate() const {
  auto tol = values_.find("tolerances");
  if (tol != values_.end())
    for (const auto& [k, v] : tol->second)
      if (!(parse_double(v, "tolerances." + k) > 0.0))
        throw Error(ErrorKind::Input, "tolerance '" + k + "' must be positive");
  for (const char* key : {"nodes", "nu"})
    if (has("grid", key) && get_int("grid", key, 64) < 64)
      throw Error(ErrorKind::Input, std::string("grid.") + key + " must be at least 64");
  if (has("potential", "csv") && !std::filesystem::exists(get("potential", "csv", "")))
    throw Error(ErrorKind::Input, "potential CSV '" + get("potential", "csv", "") + "' not found");
}

nlohmann::json RunConfig::resolved() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [sec, kv] : values_) {
    if (kv.empty()) continue;
    for (const auto& [k, v] : kv) j[sec][k] = v;
  }
  return j;
}

Potential potential_from_config(const RunConfig& cfg) {
  const std::string fam = cfg.get("potential", "family", "zero");
  if (fam == "zero" || fam == "free") return Potential();
  if (fam == "step")
    return Potential::step(cfg.get_complex("potential", "v0", -3.0),
                           cfg.get_double("potential", "a", 1.0));
  if (fam == "steps") return Potential::step_stack(parse_pieces(cfg.get("potential", "pieces", "")));
  if (fam == "exponential")
    return Potential::exponential(cfg.get_complex("potential", "amplitude", -1.0),
                                  cfg.get_double("potential", "rate", 1.0));
  if (fam == "gaussian")
    return Potential::gaussian(cfg.get_complex("potential", "amplitude", -1.0),
                               cfg.get_double("potential", "width", 1.0));
  if (fam == "sampled") {
    std::string tail = cfg.get("potential", "tail", "zero");
    TailKind tk = tail == "zero"          ? TailKind::Zero
                  : tail == "exponential" ? TailKind::Exponential
                  : tail == "power"       ? TailKind::Power
                                          : throw Error(ErrorKind::Input, "unknown tail '" + tail + "'");
    return read_sampled_csv(cfg.get("potential", "csv", ""), tk,
                            cfg.get_double("potential", "tail_param", 0.0));
  }
  throw Error(ErrorKind::Input, "unknown potential family '" + fam + "'");
}

nlohmann::json report_header(const std::string& command, const RunConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = cfg.resolved();
  return j;
}

nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace hl
