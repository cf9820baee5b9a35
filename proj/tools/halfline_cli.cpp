#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "commands.hpp"
#include "halfline/parallel.hpp"

namespace {

using hl::RunConfig;
using hl::cli::CommandOutput;

struct Flag {
  const char* name;
  const char* section;
  const char* key;
  const char* help;
};

// Flags that translate one-to-one into config entries.
const Flag kFlags[] = {
    {"--family", "potential", "family", "zero | step | steps | exponential | gaussian | sampled"},
    {"--v0", "potential", "v0", "step height (complex allowed, e.g. -3 or 3+1i)"},
    {"--a", "potential", "a", "step width"},
    {"--pieces", "potential", "pieces", "step stack a:b:value;..."},
    {"--amplitude", "potential", "amplitude", "exponential or gaussian amplitude"},
    {"--rate", "potential", "rate", "exponential decay rate"},
    {"--width", "potential", "width", "gaussian width"},
    {"--csv", "potential", "csv", "sampled potential CSV (x, Re V, Im V)"},
    {"--tail", "potential", "tail", "sampled tail bound: zero | exponential | power"},
    {"--tail-param", "potential", "tail_param", "sampled tail parameter"},
    {"--x-max", "grid", "x_max", "panel grid length"},
    {"--nodes", "grid", "nodes", "panel grid node count"},
    {"--k", "jost", "k", "wavenumbers separated by ';' (jost, det-check)"},
    {"--dump", "jost", "dump", "write the s/e table as CSV (jost)"},
    {"--evolve-x-max", "evolve", "x_max", "uniform grid length (evolve-compare)"},
    {"--nu", "evolve", "nu", "uniform grid node count (evolve-compare)"},
    {"--t-ladder", "evolve", "t_ladder", "comma separated times (evolve-compare)"},
};

struct Common {
  std::string config_path, out_path, csv_dir;
  int threads = 1;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key=value config file");
  sub->add_option("--out", c.out_path, "write the JSON report here instead of stdout");
  sub->add_option("--csv-dir", c.csv_dir, "directory for CSV side tables");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--set", c.sets, "override section.key=value")->take_all();
  for (const Flag& f : kFlags) sub->add_option(f.name, c.flags[f.name], f.help);
}

RunConfig resolve(const Common& c, const std::string& command) {
  RunConfig cfg = c.config_path.empty() ? RunConfig() : RunConfig::load(c.config_path);
  for (const Flag& f : kFlags) {
    auto it = c.flags.find(f.name);
    if (it == c.flags.end() || it->second.empty()) continue;
    // --k is shared by jost and det-check.
    std::string section = std::string(f.section) == "jost" && command == "det-check" &&
                                  std::string(f.key) == "k"
                              ? "det"
                              : f.section;
    cfg.set(section, f.key, it->second);
  }
  for (const std::string& s : c.sets) {
    auto dot = s.find('.'), eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq)
      throw hl::Error(hl::ErrorKind::Input, "--set expects section.key=value, got '" + s + "'");
    cfg.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void emit(const Common& c, const nlohmann::json& report) {
  std::string text = report.dump(2) + "\n";
  if (c.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.out_path);
  if (!out) throw hl::Error(hl::ErrorKind::Input, "cannot write '" + c.out_path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and scattering diagnostics for -d^2/dx^2 + V on the half-line"};
  app.require_subcommand(1);
  using Fn = CommandOutput (*)(const RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Fn>> commands = {
      {"spectrum", "eigenvalues, singularity scan and similarity verdict", hl::cli::cmd_spectrum},
      {"kato", "first moment and the small-potential verdict", hl::cli::cmd_kato},
      {"jost", "table of e(k) and e'(k)", hl::cli::cmd_jost},
      {"det-check", "e(k) against the Fredholm determinant", hl::cli::cmd_det_check},
      {"waveops", "completeness, inverse and intertwining defects of W and Z", hl::cli::cmd_waveops},
      {"evolve-compare", "time-dependent limits against stationary W and Z",
       hl::cli::cmd_evolve_compare},
  };
  Common common;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name], common);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string name;
  Fn fn = nullptr;
  for (const auto& [n, help, f] : commands)
    if (subs[n]->parsed()) name = n, fn = f;

  RunConfig cfg;
  try {
    hl::set_threads(common.threads);
    cfg = resolve(common, name);
    CommandOutput out = fn(cfg);
    out.report["config"] = cfg.resolved();
    if (!out.csv.empty()) {
      std::string dir = common.csv_dir;
      if (dir.empty() && !common.out_path.empty())
        dir = std::filesystem::path(common.out_path).parent_path().string();
      if (!dir.empty() || !common.out_path.empty()) {
        std::filesystem::path p = std::filesystem::path(dir.empty() ? "." : dir) /
                                  (name + "-" + hl::cli::report_hash(out.report) + ".csv");
        std::ofstream(p) << out.csv;
        out.report["csv"] = p.filename().string();
      }
    }
    emit(common, out.report);
    return out.exit_code;
  } catch (const hl::Error& e) {
    nlohmann::json err = hl::report_header(name, cfg);
    err["error"] = {{"kind", e.name()}, {"message", e.what()}};
    std::cerr << name << ": " << e.name() << ": " << e.what() << "\n";
    try {
      emit(common, err);
    } catch (...) {
    }
    return hl::error_exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 3;
  }
}
