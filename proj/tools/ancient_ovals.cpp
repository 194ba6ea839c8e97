// Command-line front end: one subcommand per module plus run-all and compare.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ovals/error.hpp"
#include "ovals/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ovals;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Configuration:
    case ErrorKind::InvalidInput:
    case ErrorKind::Incompatible:
      return kConfigError;
    default:
      return kNumericalError;
  }
}

void write_error(const fs::path& out, const std::string& stage, const std::string& kind, const std::string& what) {
  nlohmann::ordered_json j{{"stage", stage}, {"kind", kind}, {"message", what}};
  std::cerr << j.dump() << '\n';
  try {
    fs::create_directories(out);
    std::ofstream(out / "error.json") << dump_json(j);
  } catch (const std::exception&) {
  }
}

struct Options {
  std::string config, out, scenario;
  unsigned threads = 1;
  long long seed = -1;
  std::vector<std::string> tol;
};

RunConfig load(const Options& o) {
  RunConfig cfg;
  if (!o.config.empty()) {
    std::ifstream is(o.config);
    if (!is) fail(ErrorKind::Configuration, "cannot read config " + o.config);
    cfg = parse_config(is);
  }
  if (!o.scenario.empty()) set_option(cfg, "scenario", o.scenario);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  for (const auto& kv : o.tol) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Configuration, "--tol expects KEY=VAL, got '" + kv + "'");
    set_option(cfg, "tol." + kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

fs::path out_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("ANCIENT_OVALS_OUT")) return env;
  return "ancient_ovals_out";
}

int finish(const fs::path& out, const std::vector<StageResult>& stages) {
  bool pass = true;
  for (const auto& s : stages) {
    write_stage(out, s);
    std::cout << s.name << ": " << (s.pass ? "pass" : "FAIL") << '\n';
    pass = pass && s.pass;
  }
  return pass ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotationally symmetric ancient ovals: simulation and verification"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "key = value configuration file");
  app.add_option("--out", o.out, "output directory (default $ANCIENT_OVALS_OUT)");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed for randomized samples");
  app.add_option("--tol", o.tol, "tolerance override KEY=VAL")->take_all();
  app.add_option("--scenario", o.scenario, "cylinder | sphere | oval-tau10");

  const std::vector<std::string> names{"evolve", "spectral", "bryant", "barrier", "heatkernel", "regimes", "run-all"};
  for (const auto& n : names) app.add_subcommand(n);
  auto* cmp = app.add_subcommand("compare", "compare a run tree against a golden tree");
  std::string golden, run;
  double rel_tol = 1e-9;
  cmp->add_option("golden", golden)->required();
  cmp->add_option("run", run)->required();
  cmp->add_option("--rel-tol", rel_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kConfigError;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  const fs::path out = out_dir(o);
  try {
    if (cmd == "compare") {
      const auto rep = compare_trees(golden, run, rel_tol);
      nlohmann::ordered_json j{{"pass", rep.pass}, {"compared", rep.compared}, {"rel_tol", rel_tol}, {"diffs", rep.diffs}};
      std::cout << dump_json(j);
      return rep.pass ? kPass : kCheckFailed;
    }
    const auto cfg = load(o);
    if (cmd == "run-all") return finish(out, run_all(cfg, o.threads));
    const auto sol = solve_phi(-1.0 / 6);
    if (cmd == "bryant") return finish(out, {bryant_stage(cfg, sol)});
    if (cmd == "heatkernel") return finish(out, {heatkernel_stage(cfg, o.threads)});
    const auto tr = run_trajectory(cfg, sol);
    if (cmd == "evolve") return finish(out, {evolve_stage(cfg, tr)});
    if (cmd == "spectral") return finish(out, {spectral_stage(cfg, tr)});
    if (cmd == "regimes") return finish(out, {regimes_stage(cfg, tr, sol)});
    return finish(out, {barrier_stage(cfg, tr, o.threads)});
  } catch (const Error& e) {
    write_error(out, cmd, std::string(to_string(e.kind())), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    write_error(out, cmd, "Unexpected", e.what());
    return kNumericalError;
  }
}
