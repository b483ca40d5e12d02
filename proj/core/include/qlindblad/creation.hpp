#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qlindblad/evolution.hpp"
#include "qlindblad/trajectories.hpp"

namespace qlindblad {

// t -> -t on Fock blocks: right and left movers swap in every cell and
// amplitudes are conjugated.  An involution.
SectoredDensityMatrix time_reflect(const SectoredDensityMatrix& rho);

struct ReversedTimeline {
  // Annihilation run on the reflected chart, starting from the reflected final state.
  DensityTimeline reflected;
  // The same history read in the original time direction, with creation jumps.
  DensityTimeline creation;
  int steps = 0;
};

// `reflected_setup` describes the time-reflected chart (the past surface becomes
// a future one); `rho_final` is the state at the original final time, which is
// the reflected run's start.  Runs `steps` steps.
ReversedTimeline reversed_dm_timeline(const EvolutionSetup& reflected_setup,
                                      const SectoredDensityMatrix& rho_final, int steps);

// Generic minimal jump rate [Re tr(rho R(target <- source))]^+ / tr(rho P(source)).
class RateMeasure {
 public:
  virtual ~RateMeasure() = default;
  virtual cplx weighted_trace(int target, int source) const = 0;
  virtual double source_weight(int source) const = 0;
};

double minimal_jump_rate(const RateMeasure& measure, int target, int source);

// Creation at the boundary cells of a past surface.  Source 0 is the cell
// configuration q; target b creates one particle at boundary cell b.
class PastSingularityMeasure : public RateMeasure {
 public:
  PastSingularityMeasure(const SectoredDensityMatrix& rho, std::vector<int> q_cells,
                         std::vector<BoundaryCell> boundary);
  cplx weighted_trace(int target, int source) const override;
  double source_weight(int source) const override;

 private:
  const SectoredDensityMatrix& rho_;
  std::vector<int> q_;
  std::vector<BoundaryCell> boundary_;
};

// Dense operators supplied by the caller: R[target][source], P[source].
class CustomMeasure : public RateMeasure {
 public:
  CustomMeasure(Eigen::MatrixXcd rho, std::vector<std::vector<Eigen::MatrixXcd>> jump,
                std::vector<Eigen::MatrixXcd> projector);
  cplx weighted_trace(int target, int source) const override;
  double source_weight(int source) const override;

 private:
  Eigen::MatrixXcd rho_;
  std::vector<std::vector<Eigen::MatrixXcd>> jump_;
  std::vector<Eigen::MatrixXcd> projector_;
};

// sigma = w (n+1) tr(rho(q, x; q, x) alpha_sing) / tr rho(q; q) at boundary cell
// `boundary.site`, with the spin of q traced; Fock-normalised form.
double creation_rate(const SectoredDensityMatrix& rho, const std::vector<int>& q_cells,
                     const BoundaryCell& boundary);

struct CreationOptions {
  int size = 1000;
  std::uint64_t seed = 1;
  std::vector<int> checkpoints;
  int bins = 64;
  int recorded_paths = 0;
};

struct CreationResult {
  EnsembleResult ensemble;
  std::vector<int> creations_per_path;
  int bound_retries = 0;
  bool monotone = true;  // particle number never decreased on any path
};

// Piecewise-deterministic creation process on a creation timeline: at each
// slice start the configuration K gains a multiset J of freshly exposed cells
// with probability mass_after(K + J) / mass_before(K), drawn by thinning against
// twice the largest jump probability over the +-1-cell neighbourhood of K.
CreationResult simulate_creation_process(const DensityTimeline& tl, const CreationOptions& opts);

// Probability that configuration `cells` gains nothing at slice `slice`, and the
// distribution of non-empty additions.
struct JumpLaw {
  double before = 0.0;
  double stay = 0.0;
  std::vector<std::vector<int>> additions;
  std::vector<double> probabilities;
  double jump_probability() const;
};
JumpLaw jump_law(const DensityTimeline& tl, int slice, const std::vector<int>& cells);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<double> first;
  std::vector<double> second;
};
// Two-sample homogeneity test on binned counts.
ChiSquareResult chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b);

// 8 time bins x boundary sides over `steps` original lattice steps; creation
// events use their step, reflected annihilation events map step j to steps - j.
std::vector<double> bin_events(const std::vector<ParticleEvent>& events, int steps, int time_bins,
                               int sides, bool reflected);

}  // namespace qlindblad
