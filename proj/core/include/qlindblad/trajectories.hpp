#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"

namespace qlindblad {

// Everything the particle dynamics needs from a density-matrix run, sampled on
// the lattice time grid.  Slice k covers [t_k, t_k + dt): over that interval the
// configuration density is the spin-resolved Fock diagonal `transport[k]` with
// every right-moving component shifted by +tau and every left-moving one by -tau.
struct DensityTimeline {
  Lattice lattice;
  std::shared_ptr<const FockSpace> space;
  double t0 = 0.0;
  double dt = 1.0;
  int first_step = 0;
  // Creation timelines carry jumps at the start of each slice instead of
  // annihilation at swallowed cells.
  bool creation = false;

  std::vector<std::vector<Eigen::VectorXd>> transport;  // [slice][n]
  std::vector<std::vector<Eigen::VectorXd>> pre_jump;   // [slice][n], creation only
  std::vector<std::vector<double>> sector_traces;       // [slice][n] after the jump
  std::vector<ActiveMask> active;                       // [slice] cells alive on the slice
  std::vector<std::vector<int>> created_cells;          // [slice], creation only
  std::vector<std::vector<double>> boundaries;          // [slice] surface crossings at t_k

  int slices() const { return static_cast<int>(transport.size()); }
  double time(int slice) const { return t0 + slice * dt; }
};

// Forward run from rho (at rho.step) over `steps` lattice steps.  Holds steps+1
// slices; the last slice describes the final state.
DensityTimeline build_annihilation_timeline(const QuasiLindbladEvolution& evo,
                                            const SectoredDensityMatrix& rho, int steps);

// Bohmian velocities from a density matrix at lattice cells `sites`:
// v_k = (d4/d3) tr(rho(q;q) alpha^1_k) / tr rho(q;q).  NodeError at vanishing density.
std::vector<double> velocity(const SectoredDensityMatrix& rho, const ChartGeometry& chart,
                             const Lattice& lattice, const std::vector<int>& sites, double t);
// Same field from a pure n-particle Fock vector via its spinor psi(q).
std::vector<double> bohm_dirac_velocity(const FockSpace& space, int n, const Eigen::VectorXcd& psi,
                                        const ChartGeometry& chart, const Lattice& lattice,
                                        const std::vector<int>& sites, double t);

// Velocity of every particle from the transported lattice field; returns the
// total configuration weight through `weight` (0 at a node).
std::vector<double> field_velocity(const DensityTimeline& tl, int slice,
                                   const std::vector<double>& x, double tau, double* weight);

// Probability mass of the unordered cell configuration `cells` in a
// spin-resolved diagonal.
double cell_configuration_mass(const FockSpace& space, const Eigen::VectorXd& diag,
                               std::vector<int> cells);

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);
double uniform01(std::mt19937_64& rng);

struct ParticleEvent {
  int path = 0;
  bool creation = false;
  double t = 0.0;          // crossing time (annihilation) or jump time (creation)
  int step = 0;            // lattice step at which the sector changes
  double position = 0.0;
  int side = 0;            // index of the nearest surface crossing
};

struct PathState {
  std::vector<double> x;
  bool flagged = false;
  double min_piece = 1.0;
};

struct StepReport {
  std::vector<ParticleEvent> events;
  bool node = false;
};

// Move the particles across slice `slice`; in annihilation timelines particles
// entering dead cells are removed at the slice end.
StepReport transport_step(const DensityTimeline& tl, int slice, PathState& state, int path);

// Initial configuration drawn from the slice-0 density (sector by trace, cells by
// mass, uniform inside each cell).
std::vector<double> sample_configuration(const DensityTimeline& tl, int slice, std::mt19937_64& rng);

struct EnsembleOptions {
  int size = 1000;
  std::uint64_t seed = 1;
  std::vector<int> checkpoints;  // slice indices
  int bins = 64;
  int recorded_paths = 0;        // paths whose every step is kept for CSV output
};

struct CheckpointStats {
  int slice = 0;
  double t = 0.0;
  double tv_distance = 0.0;
  std::vector<int> sector_counts;
  std::vector<double> expected_counts;
  std::vector<double> sector_sigma;
  bool sectors_within_3sigma = true;
  // [n][bin] normalised one-particle marginals, empirical and reference
  std::vector<std::vector<double>> empirical;
  std::vector<std::vector<double>> reference;
};

struct PathRecord {
  int path = 0;
  int slice = 0;
  double t = 0.0;
  std::vector<double> x;
};

struct EnsembleResult {
  std::vector<CheckpointStats> checkpoints;
  std::vector<ParticleEvent> events;
  std::vector<PathRecord> recorded;
  int flagged_paths = 0;
  int size = 0;
  double flagged_fraction() const { return size ? static_cast<double>(flagged_paths) / size : 0.0; }
};

// Reference marginals of the slice state on `bins` equal bins over the lattice.
std::vector<std::vector<double>> reference_marginals(const DensityTimeline& tl, int slice, int bins);

EnsembleResult run_annihilation_ensemble(const DensityTimeline& tl, const EnsembleOptions& opts);

// Fill TV distance and sector counts from per-path configurations at a slice.
CheckpointStats checkpoint_stats(const DensityTimeline& tl, int slice, int bins,
                                 const std::vector<std::vector<double>>& configs);

}  // namespace qlindblad
