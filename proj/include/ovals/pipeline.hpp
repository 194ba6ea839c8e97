#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovals/bryant.hpp"
#include "ovals/flow.hpp"

namespace ovals {

struct RunConfig {
  std::string scenario = "oval-tau10";  // cylinder | sphere | oval-tau10
  double t0 = 0, t_end = 0;             // 0 = scenario default
  std::size_t grid_points = 401;        // cylinder and sphere
  double half_width = 20;               // cylinder window
  double tau0 = 10, dtau = 2;           // oval: t0 = -e^tau0, t_end = -e^(tau0 - dtau)
  double time_scale = 0;                // ansatz built at time_scale * t0; 0 = tune
  double h_tip = 0.04, h_bulk = 0.02;
  double cfl = 0.5, regrid_threshold = 0.1;
  double snapshot_dtau = 0.125;
  double cutoff_floor = 12;
  bool spectral = true, barriers = true, regimes = true;
  std::vector<double> barrier_a{10, 20, 40};
  double L = 3, theta = 0.3, M = 10, star_alpha = 1.0 / 16;
  std::uint64_t seed = 1;
  std::size_t caloric_samples = 20;
  std::map<std::string, double> tolerances;

  double tol(const std::string& key) const;
  bool is_oval() const { return scenario == "oval-tau10"; }
  double start_time() const;
  double end_time() const;
};

/// Known tolerance keys with their defaults.
const std::map<std::string, double>& default_tolerances();

/// Sets one key; throws Configuration on an unknown key or a bad value.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);
/// Flat `key = value` lines with `#` comments.
RunConfig parse_config(std::istream& is);
void validate(const RunConfig& cfg);

struct Artifact {
  std::string name;  // path relative to the output directory
  std::string content;
};

struct StageResult {
  std::string name;
  nlohmann::ordered_json report;
  std::vector<Artifact> files;
  bool pass = true;
};

struct Trajectory {
  FlowState state;
  std::vector<Snapshot> snapshots;
  double time_scale = 1;
  nlohmann::ordered_json tuning;  // secant history when tuned
  double max_cylinder_error = 0;  // against sqrt(-2t), every step
  double max_sphere_drift = 0;    // |r^2 + 4t - c|/r0^2, every step
};

/// Evaluates fn(0..n-1) on up to `threads` workers; rethrows the lowest-index failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Ansatz time scale s for which the H_0 coefficient of the rescaled profile at t_end
/// vanishes (secant from s = 1 and 1.01).
double tune_time_scale(const BryantSolution& sol, const RunConfig& cfg, nlohmann::ordered_json* log = nullptr);

Trajectory run_trajectory(const RunConfig& cfg, const BryantSolution& sol);

StageResult evolve_stage(const RunConfig& cfg, const Trajectory& tr);
StageResult spectral_stage(const RunConfig& cfg, const Trajectory& tr);
StageResult regimes_stage(const RunConfig& cfg, const Trajectory& tr, const BryantSolution& sol);
StageResult barrier_stage(const RunConfig& cfg, const Trajectory& tr, unsigned threads);
StageResult bryant_stage(const RunConfig& cfg, const BryantSolution& sol);
StageResult heatkernel_stage(const RunConfig& cfg, unsigned threads);

/// Every stage in a fixed order plus a summary stage.
std::vector<StageResult> run_all(const RunConfig& cfg, unsigned threads);

/// Writes `<name>.json` and the stage's artifacts under `dir`.
void write_stage(const std::filesystem::path& dir, const StageResult& r);
std::string dump_json(const nlohmann::ordered_json& j);

struct CompareReport {
  bool pass = true;
  std::size_t compared = 0;
  nlohmann::ordered_json diffs = nlohmann::ordered_json::array();
};
/// Field-by-field relative comparison of every .json and .csv file of `golden` against
/// `run`. Throws Incompatible on missing files, keys or headers.
CompareReport compare_trees(const std::filesystem::path& golden, const std::filesystem::path& run,
                            double rel_tol);

}  // namespace ovals
