#pragma once

#include <Eigen/Dense>
#include <array>
#include <limits>
#include <utility>
#include <vector>

#include "qlindblad/geometry.hpp"

namespace qlindblad {

struct Lattice {
  int sites = 0;
  double dx = 1.0;
  double x0 = 0.0;

  double position(int i) const { return x0 + i * dx; }
  int modes() const { return 2 * sites; }
  // Nearest cell centre; may fall outside [0, sites).
  int cell_of(double x) const;
  double left_edge() const { return x0 - 0.5 * dx; }
  double right_edge() const { return x0 + (sites - 0.5) * dx; }
};

constexpr int kRight = 0;
constexpr int kLeft = 1;
inline int mode_index(int site, int chirality) { return 2 * site + chirality; }
inline int mode_site(int mode) { return mode >> 1; }
inline int mode_chirality(int mode) { return mode & 1; }

using ActiveMask = std::vector<char>;

// Direct evaluation: cell i is active at time t iff T(x_i) > t.
ActiveMask active_mask(const Lattice& lattice, const AbsorbingSurface& surface, double t);

// Activity on the lattice time grid t_k = t_start + k dt.  The deactivation step
// of a cell is the first k with T(x_i) <= t_k, computed once so that all modules
// agree on the same lattice surface.
class ActivitySchedule {
 public:
  ActivitySchedule() = default;
  ActivitySchedule(const Lattice& lattice, const AbsorbingSurface& surface, double t_start,
                   double dt);

  static constexpr int kNever = std::numeric_limits<int>::max() / 4;

  double time(int k) const { return t_start_ + k * dt_; }
  double t_start() const { return t_start_; }
  double dt() const { return dt_; }
  int deactivation_step(int site) const { return deact_[site]; }
  bool active(int site, int k) const { return k < deact_[site]; }
  ActiveMask mask(int k) const;
  int active_count(int k) const;
  // Cells active at k but not at k + 1.
  std::vector<int> swallowed(int k) const;
  // Last step at which any cell is still active (kNever if some cell never dies).
  int extinction_step() const;
  const Lattice& lattice() const { return lattice_; }

 private:
  Lattice lattice_;
  double t_start_ = 0.0;
  double dt_ = 1.0;
  std::vector<int> deact_;
};

// Sparse one-step map u = S C on the 2M lattice modes: column m has at most two
// entries (destination mode, amplitude).
struct OneBodyStep {
  struct Entry {
    int dest;
    cplx amp;
  };
  std::vector<std::array<Entry, 2>> columns;
  std::vector<unsigned char> nnz;

  int modes() const { return static_cast<int>(columns.size()); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense() const;
};

// Split-step chiral walk: coin exp(-i dt m F beta) with beta = sigma_x, then
// R moves one cell right, L one cell left; segments of active cells reflect
// (R at the right end of a segment becomes L there and vice versa).
class DiracWalk {
 public:
  DiracWalk(const Lattice& lattice, const ChartGeometry& chart, double mass, double dt);

  const Lattice& lattice() const { return lattice_; }
  const ChartGeometry& chart() const { return chart_; }
  double mass() const { return mass_; }
  double dt() const { return dt_; }

  // Step from t to t + dt on the cells flagged in `active` (empty = all).
  OneBodyStep step_operator(double t, const ActiveMask& active) const;
  SpinMatrix coin(double t, int site) const;
  // Coin only (no shift) on the flagged cells.
  OneBodyStep coin_operator(double t, const ActiveMask& active) const;
  void step(Eigen::VectorXcd& chi, double t, const ActiveMask& active = {}) const;
  Eigen::VectorXcd apply_coin(const Eigen::VectorXcd& chi, double t) const;

 private:
  Lattice lattice_;
  ChartGeometry chart_;
  double mass_;
  double dt_;
};

struct DensityCurrent {
  double rho = 0.0;
  double j = 0.0;
};

// chi holds cell amplitudes, chi = sqrt(dx d3) psi, so |chi|^2 is a cell probability.
DensityCurrent density_current(const Eigen::VectorXcd& chi, const Lattice& lattice,
                               const ChartGeometry& chart, double t, int site);

// Probability transported across each interior edge i+1/2 during one step;
// flux[i] for i in [0, sites - 2].
std::vector<double> edge_fluxes(const DiracWalk& walk, const Eigen::VectorXcd& chi, double t,
                                const ActiveMask& active = {});

// Probability carried into a moving boundary per unit time: (psi^* gain_kernel psi)
// at the evaluation cell.
double boundary_flux(const Eigen::VectorXcd& chi, const Lattice& lattice, int site,
                     const BoundaryKinematics& kin);

// Largest cell probability in the two outermost cells.
double edge_weight(const Eigen::VectorXcd& chi, const Lattice& lattice);
constexpr double kEdgeWeightWarning = 1e-8;

}  // namespace qlindblad
