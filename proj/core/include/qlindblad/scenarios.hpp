#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qlindblad/config.hpp"
#include "qlindblad/creation.hpp"
#include "qlindblad/evolution.hpp"
#include "qlindblad/io.hpp"
#include "qlindblad/trajectories.hpp"

namespace qlindblad {

std::shared_ptr<const FockSpace> make_space(const RunConfig& cfg);

// Product of the configured packets, cut to the cells active at step 0 and
// renormalised.  ConfigError if less than half the weight survives the cut.
SectoredDensityMatrix initial_state(const RunConfig& cfg, const QuasiLindbladEvolution& evo,
                                    const std::shared_ptr<const FockSpace>& space);

struct MonitorOptions {
  bool oracle = false;  // compare with the unitary reference every step
  bool lforms = false;  // compare the two forms of the gain increment every step
  int eigen_every = 10;
  int snapshot_every = 0;
};

struct MonitoredRun {
  std::vector<StepRecord> records;
  std::vector<double> oracle_distance;  // per step when requested
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_purity_increase = 0.0;
  double purity_drop = 0.0;  // initial purity minus the smallest later value
  double max_oracle_distance = 0.0;
  double max_lform_difference = 0.0;
  double max_edge_weight = 0.0;  // largest probability in the outermost cells
  int cross_sector_elements = 0;
  SectoredDensityMatrix final_state;
  std::vector<std::pair<int, SectoredDensityMatrix>> snapshots;
  double seconds = 0.0;
};

MonitoredRun monitored_run(const RunConfig& cfg, const MonitorOptions& opts,
                           double epsilon_override = -1.0);

// Two-packet run: the first step at which the sector-2 weight has dropped below
// 1e-10, and the overlap <phi|rho_1|phi> with the better-surviving packet
// evolved on its own without any surface.  Returns 0 if no such step exists.
struct DisentangledCheck {
  int step = -1;
  int survivor = -1;
  double fidelity = 0.0;
  double survivor_trace = 0.0;
};
DisentangledCheck disentangled_check(const RunConfig& cfg);

struct EquivarianceReport {
  std::vector<int> checkpoints;
  EnsembleResult ensemble;
  double max_tv = 0.0;
  double max_sector_z = 0.0;
  double annihilated_fraction = 0.0;
  double expected_annihilated = 0.0;
  double annihilated_sigma = 0.0;
  double seconds = 0.0;
};
EquivarianceReport equivariance_run(const RunConfig& cfg);

struct SweepReport {
  std::vector<double> epsilons;  // descending
  std::vector<std::vector<double>> sector_traces;
  std::vector<double> diffs;
  bool monotone = true;
  double final_diff = 0.0;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<MonitoredRun> runs;
};
SweepReport epsilon_sweep(const RunConfig& cfg);

struct CreationReport {
  ChiSquareResult chi;
  double mean_creations = 0.0;
  double expected_creations = 0.0;
  double creation_sigma = 0.0;
  bool monotone = true;
  int bound_retries = 0;
  double flagged_fraction = 0.0;
  double max_tv = 0.0;
  std::vector<ParticleEvent> forward_events;
  std::vector<ParticleEvent> creation_events;
  std::vector<PathRecord> recorded;
  std::vector<CheckpointStats> checkpoints;
  double seconds = 0.0;
};
CreationReport creation_reversal(const RunConfig& cfg);

struct DeletedNormReport {
  std::vector<double> deleted_norm;
  std::vector<double> top_sector;
  double max_difference = 0.0;
};
DeletedNormReport deleted_norm_diagnostic(const RunConfig& cfg);

struct ScenarioResult {
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
  ArtifactSet artifacts;
  bool all_pass() const;
};

// Runs the configured scenario; files are only collected, not written.
ScenarioResult run_scenario(const RunConfig& cfg);

}  // namespace qlindblad
