#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trapx/config.hpp"
#include "trapx/csv.hpp"
#include "trapx/propagators.hpp"
#include "trapx/protocols.hpp"

namespace trapx {

inline constexpr const char* kVersionTag = "trapx 1.0.0";
inline constexpr const char* kWorkerEnv = "TRAPX_WORKERS";

enum class RunAxis { longitudinal, radial, threed };

// Explicit numerics; 0 means "size from the task".  res_divisor and
// dt_scale coarsen the task-sized defaults (smoke variants) without pinning
// absolute numbers.
struct NumericsOverrides {
  int nz = 0;
  int nr = 0;
  double dt_s = 0.0;
  int res_divisor = 1;
  double dt_scale = 1.0;
};

// One sweep: protocol x waists x levels x final times on one axis.
struct Scenario {
  ExpansionTask task;  // t_final, geometry and level are per-point overrides
  ProtocolKind protocol = ProtocolKind::invariant;
  RunAxis axis = RunAxis::longitudinal;
  std::vector<double> waists;   // m; empty -> task's waist
  std::vector<int> levels;      // empty -> {0}
  std::vector<double> tf_grid;  // s;  empty -> {task.t_final}
  int nu = 0;                   // azimuthal number for radial/3d runs
  NumericsOverrides numerics;

  void validate() const;  // positive SI inputs, strictly increasing grids
};

struct RunRecord {
  int index = 0;
  double waist_m = 0.0, tf_s = 0.0;
  int level = 0;
  std::string status = "ok";  // or the physics-error class name
  double fidelity = 0.0, norm_final = 0.0, norm_min = 0.0,
         boundary_leak = 0.0;
  double dt_s = 0.0;
  int steps = 0, nz = 0, nr = 0;
};

// Resolved parameters + unit conversions + per-point diagnostics; its FNV-1a
// hash stamps every CSV emitted from the run.
struct RunManifest {
  std::string version = kVersionTag;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<RunRecord> records;

  std::string text() const;
  std::uint64_t hash() const { return fnv1a_hash(text()); }
};

struct ScenarioResult {
  std::vector<RunRecord> records;  // sweep order, independent of execution
  RunManifest manifest;
};

ScenarioResult run_scenario(const Scenario& s);

// Worker budget from the environment (default 1).  sweep_parallel runs
// work(0..n-1) across that many threads; outputs land in index order and a
// failing point rethrows with its index, lowest first.
int worker_budget();
void sweep_parallel(int n_points, int budget,
                    const std::function<void(int)>& work);

// Scenario from a resolved flat config (axis comes from the caller).
Scenario scenario_from_config(const Config& cfg, RunAxis axis);
ProtocolKind parse_protocol(const std::string& name);
std::string protocol_name(ProtocolKind kind);

// 31 log-spaced final times over the standard sweep window [0.2, 3] ms.
std::vector<double> default_tf_grid();

// A table plus the manifest it came from; the manifest's FNV-1a hash is
// stamped into the emitted file.
struct TableResult {
  CsvTable table;
  std::string manifest_text;
};

// Standard per-record table (point, protocol, waist, tf, level, fidelity,
// norm, boundary leak, status).
CsvTable records_table(const ScenarioResult& res, const std::string& protocol);

// Trajectory dump for one designed protocol (the `protocol` command).
TableResult trajectory_table(const FrequencyTrajectory& traj, int samples = 501);

// Per-level table: variational bound, first/second-order estimates, and the
// full-potential numeric fidelity (levels 0..5 at the configured waist).
TableResult bounds_table(const Config& base, bool fast);

// Overlap of the radially evolving state (full potential, ratio-scaled
// designed frequency) with the instantaneous harmonic ground level and with
// the ideal expanding mode built on the longitudinal scaling.  Entries of
// `instantaneous` are NaN while the trap is transiently repulsive.
struct OverlapSeries {
  std::vector<double> t_s;
  std::vector<double> instantaneous;
  std::vector<double> expanding_mode;
  double final_fidelity = 0.0;
  double min_instantaneous = 1.0;
  double min_expanding_mode = 1.0;
};
OverlapSeries overlap_series(const ExpansionTask& task, bool fast);

// Named figure presets; returns the paths written.  `fast` trades
// resolution and sweep density for runtime (same schemas).
std::vector<std::string> write_figure(const std::string& name,
                                      const std::string& out_dir, bool fast,
                                      const Config& base);

// Quick self-checks (construction identities, unit round-trip, variational
// inequality, selection rule, norm conservation).  Returns (name, pass,
// detail) triples.
struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};
std::vector<CheckResult> run_checks();

}  // namespace trapx
