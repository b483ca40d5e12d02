#include "qlindblad/oracle.hpp"

#include <string>

#include "qlindblad/errors.hpp"

namespace qlindblad {

UnitaryOracle::UnitaryOracle(const EvolutionSetup& setup, std::shared_ptr<const FockSpace> space)
    : setup_(setup),
      space_(std::move(space)),
      walk_(setup.lattice, setup.chart, setup.mass, setup.dt),
      schedule_(setup.lattice, setup.surface, setup.t_start, setup.dt) {
  if (space_->modes() != setup.lattice.modes()) {
    throw ConfigError("oracle: Fock space and lattice disagree on the mode count");
  }
  for (int n = 0; n <= space_->n_max(); ++n) {
    if (16.0 * static_cast<double>(space_->dimension(n)) > kMaxSectorBytes) {
      throw ConfigError("oracle: sector " + std::to_string(n) + " exceeds the memory budget");
    }
  }
}

Eigen::VectorXcd UnitaryOracle::step(int n, const Eigen::VectorXcd& psi, int k) const {
  return apply_one_body(*space_, n, walk_.step_operator(schedule_.time(k), {}), psi);
}

Eigen::VectorXcd UnitaryOracle::unitary_reference(int n, const Eigen::VectorXcd& psi, int from_step,
                                                  int to_step) const {
  if (to_step < from_step) throw ArgumentError("unitary_reference: to_step precedes from_step");
  if (psi.size() != space_->dimension(n)) throw ArgumentError("unitary_reference: bad vector size");
  Eigen::VectorXcd cur = psi;
  for (int k = from_step; k < to_step; ++k) cur = step(n, cur, k);
  return cur;
}

SectoredDensityMatrix UnitaryOracle::reduced_dm(int n, const Eigen::VectorXcd& psi, int step) const {
  SectoredDensityMatrix rho = SectoredDensityMatrix::pure(space_, n, psi);
  std::vector<int> gone;
  for (int i = 0; i < setup_.lattice.sites; ++i) {
    if (!schedule_.active(i, step)) gone.push_back(i);
  }
  SectoredDensityMatrix out = gone.empty() ? rho : partial_trace_over_region(rho, gone);
  out.step = step;
  out.time = schedule_.time(step);
  return out;
}

}  // namespace qlindblad
