#pragma once

#include <memory>

#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"

namespace qlindblad {

// Reference dynamics: the same walk on the full lattice with no surface, and
// the surface entering only through a partial trace at read-out.
class UnitaryOracle {
 public:
  UnitaryOracle(const EvolutionSetup& setup, std::shared_ptr<const FockSpace> space);

  const FockSpace& space() const { return *space_; }

  Eigen::VectorXcd unitary_reference(int n, const Eigen::VectorXcd& psi, int from_step,
                                     int to_step) const;
  Eigen::VectorXcd step(int n, const Eigen::VectorXcd& psi, int k) const;
  // Trace over every cell the surface has swallowed by `step`.
  SectoredDensityMatrix reduced_dm(int n, const Eigen::VectorXcd& psi, int step) const;

  static constexpr double kMaxSectorBytes = 4e9;

 private:
  EvolutionSetup setup_;
  std::shared_ptr<const FockSpace> space_;
  DiracWalk walk_;
  ActivitySchedule schedule_;
};

}  // namespace qlindblad
