#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlindblad/errors.hpp"
#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/initial_state.hpp"

namespace qlindblad {

enum class Scenario { OracleCompare, Equivariance, EpsilonSweep, CreationReversal, DeletedNormDiagnostic };

std::string to_string(Scenario s);

struct RunConfig {
  // [chart]
  ChartKind chart = ChartKind::MinkowskiTilted;
  double kappa = 0.5;
  double bh_mass = 1.0;
  double surface_t0 = 0.0;
  int surface_orientation = +1;
  // [lattice]
  int sites = 64;
  double dx = 1.0;
  double dt = 1.0;
  double x0 = 0.0;
  bool x0_set = false;
  // [fock]
  int n_max = 2;
  Statistics statistics = Statistics::Fermionic;
  // [surface]
  double epsilon = 0.0;
  std::vector<double> epsilons;  // sweep values, multiples of dx
  // [dynamics]
  double particle_mass = 0.0;
  double t_start = 0.0;
  int steps = 300;
  // [initial]
  std::vector<PacketSpec> packets;
  // [scenario]
  Scenario scenario = Scenario::OracleCompare;
  int checkpoints = 5;
  int bins = 64;
  bool disentangled = false;  // two-packet independence check in oracle_compare
  // [ensemble]
  int ensemble_size = 10000;
  std::uint64_t seed = 1;
  int recorded_paths = 20;
  // [output]
  std::string output_dir = "out";
  int snapshot_interval = 0;

  double resolved_x0() const;
  EvolutionSetup setup(double epsilon_override = -1.0) const;
};

struct ConfigIssue {
  std::string field;
  std::string message;
};

// Thrown with every problem found in one pass.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Sectioned key = value text ([section] headers, ';' or '#' comments).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Cross-field checks (dt <= dx, epsilon on the grid, memory budget, ...).
std::vector<ConfigIssue> validate(const RunConfig& cfg);

// Rough peak memory of a run in bytes.
double estimated_memory_bytes(const RunConfig& cfg);
constexpr double kMemoryBudgetBytes = 8e9;

}  // namespace qlindblad
