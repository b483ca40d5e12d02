#pragma once

#include <functional>
#include <vector>

#include "qlindblad/dirac1p.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/geometry.hpp"

namespace qlindblad {

struct EvolutionSetup {
  Lattice lattice;
  ChartGeometry chart = ChartGeometry::minkowski_tilted(0.5);
  AbsorbingSurface surface = AbsorbingSurface::tilted_line(0.0, 0.5);
  double mass = 0.0;
  double t_start = 0.0;
  double dt = 1.0;
};

// Lattice cell at which a boundary point's gain kernel is evaluated.
struct BoundaryCell {
  int site = -1;
  BoundaryKinematics kinematics;
  // gain_kernel / (d3 dx): spin kernel acting on Fock-basis blocks, per unit time
  SpinMatrix fock_kernel = SpinMatrix::Zero();
};

struct GainRates {
  std::vector<double> inflow;   // into sector n, n in [0, n_max - 1]
  std::vector<double> outflow;  // out of sector n, n in [1, n_max]; entry 0 unused
  std::vector<BoundaryCell> cells;
};

struct StepRecord {
  int step = 0;
  double t = 0.0;
  std::vector<double> sector_traces;
  double trace = 0.0;
  double purity = 0.0;
  std::vector<double> gain;
  std::vector<double> boundary_positions;
  double edge_weight = 0.0;
};

class QuasiLindbladEvolution {
 public:
  explicit QuasiLindbladEvolution(const EvolutionSetup& setup);

  const EvolutionSetup& setup() const { return setup_; }
  const DiracWalk& walk() const { return walk_; }
  const ActivitySchedule& schedule() const { return schedule_; }
  const Lattice& lattice() const { return setup_.lattice; }
  double time(int step) const { return schedule_.time(step); }
  // Grid step for a time on the lattice grid; ArgumentError otherwise.
  int step_of(double t) const;

  // rho must be supported on the cells active at rho.step; returns rho at step+1:
  // walk on the active region, then trace out the cells the surface swallows.
  // `walked`, if given, receives the state after the walk and before the trace.
  SectoredDensityMatrix lindblad_step(const SectoredDensityMatrix& rho,
                                      SectoredDensityMatrix* walked = nullptr) const;
  SectoredDensityMatrix evolve(const SectoredDensityMatrix& rho, int target_step) const;
  // S_s^t rho for rho valid at s; ArgumentError if t < s.
  SectoredDensityMatrix evolve(const SectoredDensityMatrix& rho, double s, double t) const;

  std::vector<BoundaryCell> boundary_cells(int step) const;
  GainRates gain_rate(const SectoredDensityMatrix& rho) const;

  // Steps from rho.step to target_step, calling `observe` on every state
  // including the first.  Throws DivergenceError if the per-step trace drift
  // exceeds `max_step_drift`.
  SectoredDensityMatrix run(const SectoredDensityMatrix& rho, int target_step,
                            const std::function<void(const SectoredDensityMatrix&)>& observe,
                            double max_step_drift = 1e-10) const;

  StepRecord record(const SectoredDensityMatrix& rho) const;

  // Norm of a pure n-particle state when configurations that touch swallowed
  // cells are deleted instead of traced (no lower-sector bookkeeping).
  std::vector<double> deleted_norm_history(int n, Eigen::VectorXcd psi, int from_step,
                                           int to_step) const;

 private:
  EvolutionSetup setup_;
  DiracWalk walk_;
  ActivitySchedule schedule_;
};

// Restrict a one-body vector or a Fock vector to the given active cells.
void restrict_to_active(SectoredDensityMatrix& rho, const ActiveMask& active);

}  // namespace qlindblad
