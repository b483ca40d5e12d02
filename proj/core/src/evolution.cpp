#include "qlindblad/evolution.hpp"

#include <cmath>
#include <string>

#include "qlindblad/errors.hpp"

namespace qlindblad {

QuasiLindbladEvolution::QuasiLindbladEvolution(const EvolutionSetup& setup)
    : setup_(setup),
      walk_(setup.lattice, setup.chart, setup.mass, setup.dt),
      schedule_(setup.lattice, setup.surface, setup.t_start, setup.dt) {
  if (setup.chart.kind() != setup.surface.kind()) {
    throw ConfigError("surface and chart describe different geometries");
  }
}

int QuasiLindbladEvolution::step_of(double t) const {
  const double q = (t - setup_.t_start) / setup_.dt;
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-9) {
    throw ArgumentError("time " + std::to_string(t) + " is not on the lattice time grid");
  }
  return static_cast<int>(k);
}

SectoredDensityMatrix QuasiLindbladEvolution::lindblad_step(const SectoredDensityMatrix& rho,
                                                            SectoredDensityMatrix* walked) const {
  const int k = rho.step;
  SectoredDensityMatrix out = rho;
  apply_one_body(out, walk_.step_operator(schedule_.time(k), schedule_.mask(k)));
  if (walked) *walked = out;
  const std::vector<int> gone = schedule_.swallowed(k);
  if (!gone.empty()) out = partial_trace_over_region(out, gone);
  out.step = k + 1;
  out.time = schedule_.time(k + 1);
  return out;
}

SectoredDensityMatrix QuasiLindbladEvolution::evolve(const SectoredDensityMatrix& rho,
                                                     int target_step) const {
  if (target_step < rho.step) {
    throw ArgumentError("evolve: target step " + std::to_string(target_step) +
                        " precedes the state's step " + std::to_string(rho.step));
  }
  SectoredDensityMatrix cur = rho;
  while (cur.step < target_step) cur = lindblad_step(cur);
  return cur;
}

SectoredDensityMatrix QuasiLindbladEvolution::evolve(const SectoredDensityMatrix& rho, double s,
                                                     double t) const {
  if (t < s) throw ArgumentError("evolve: t < s is not allowed (no backward propagation)");
  const int ks = step_of(s);
  if (ks != rho.step) throw ArgumentError("evolve: rho is not valid at s");
  return evolve(rho, step_of(t));
}

std::vector<BoundaryCell> QuasiLindbladEvolution::boundary_cells(int step) const {
  const Lattice& lat = setup_.lattice;
  const double t = schedule_.time(step);
  std::vector<BoundaryCell> out;
  for (const auto& c : setup_.surface.crossings(t)) {
    int best = -1;
    double dist = 0.0;
    for (int i = 0; i < lat.sites; ++i) {
      const int j = i - c.active_side;
      if (!schedule_.active(i, step) || j < 0 || j >= lat.sites || schedule_.active(j, step)) continue;
      const double d = std::abs(lat.position(i) - c.position);
      if (best < 0 || d < dist) {
        best = i;
        dist = d;
      }
    }
    if (best < 0) continue;
    BoundaryCell bc;
    bc.site = best;
    bc.kinematics = boundary_kinematics(setup_.chart, setup_.surface, t, c, lat.position(best));
    bc.fock_kernel = bc.kinematics.gain_kernel / (bc.kinematics.d3 * lat.dx);
    out.push_back(bc);
  }
  return out;
}

GainRates QuasiLindbladEvolution::gain_rate(const SectoredDensityMatrix& rho) const {
  GainRates g;
  g.cells = boundary_cells(rho.step);
  g.inflow.assign(rho.n_max(), 0.0);
  g.outflow.assign(rho.n_max() + 1, 0.0);
  for (const auto& bc : g.cells) {
    const auto in = annihilation_gain(rho, bc.site, bc.fock_kernel);
    const SectoredDensityMatrix kraus = annihilate_kraus(rho, bc.site, bc.fock_kernel);
    for (int n = 0; n < rho.n_max(); ++n) {
      g.inflow[n] += in[n];
      g.outflow[n + 1] += kraus.sector_trace(n);
    }
  }
  return g;
}

SectoredDensityMatrix QuasiLindbladEvolution::run(
    const SectoredDensityMatrix& rho, int target_step,
    const std::function<void(const SectoredDensityMatrix&)>& observe, double max_step_drift) const {
  SectoredDensityMatrix cur = rho;
  if (observe) observe(cur);
  while (cur.step < target_step) {
    const double before = cur.trace();
    cur = lindblad_step(cur);
    const double drift = std::abs(cur.trace() - before);
    if (!(drift <= max_step_drift)) {
      throw DivergenceError("trace", "trace drift " + std::to_string(drift) + " at step " +
                                         std::to_string(cur.step) + " exceeds " +
                                         std::to_string(max_step_drift));
    }
    if (observe) observe(cur);
  }
  return cur;
}

StepRecord QuasiLindbladEvolution::record(const SectoredDensityMatrix& rho) const {
  StepRecord r;
  r.step = rho.step;
  r.t = rho.time;
  r.sector_traces = rho.sector_traces();
  r.trace = rho.trace();
  r.purity = rho.purity();
  const GainRates g = gain_rate(rho);
  r.gain = g.inflow;
  for (const auto& c : setup_.surface.crossings(rho.time)) r.boundary_positions.push_back(c.position);
  for (int n = 1; n <= rho.n_max(); ++n) {
    const Eigen::VectorXd d = rho.diagonal(n);
    const FockSpace& sp = rho.space();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const std::uint16_t* q = sp.config(n, i);
      for (int p = 0; p < n; ++p) {
        const int site = mode_site(q[p]);
        if (site == 0 || site == setup_.lattice.sites - 1) {
          r.edge_weight = std::max(r.edge_weight, d[i]);
          break;
        }
      }
    }
  }
  return r;
}

std::vector<double> QuasiLindbladEvolution::deleted_norm_history(int n, Eigen::VectorXcd psi,
                                                                 int from_step, int to_step) const {
  auto space = std::make_shared<const FockSpace>(setup_.lattice.modes(), n, Statistics::Fermionic);
  if (psi.size() != space->dimension(n)) throw ArgumentError("deleted_norm_history: bad vector size");
  std::vector<double> norms{psi.squaredNorm()};
  for (int k = from_step; k < to_step; ++k) {
    psi = apply_one_body(*space, n, walk_.step_operator(schedule_.time(k), schedule_.mask(k)), psi);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      const std::uint16_t* q = space->config(n, i);
      for (int p = 0; p < n; ++p) {
        if (!schedule_.active(mode_site(q[p]), k + 1)) {
          psi[i] = 0.0;
          break;
        }
      }
    }
    norms.push_back(psi.squaredNorm());
  }
  return norms;
}

void restrict_to_active(SectoredDensityMatrix& rho, const ActiveMask& active) {
  const FockSpace& sp = rho.space();
  for (int n = 1; n <= rho.n_max(); ++n) {
    auto& v = rho.factor(n);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const std::uint16_t* q = sp.config(n, i);
      for (int p = 0; p < n; ++p) {
        if (!active[mode_site(q[p])]) {
          v.row(i).setZero();
          break;
        }
      }
    }
  }
}

}  // namespace qlindblad
