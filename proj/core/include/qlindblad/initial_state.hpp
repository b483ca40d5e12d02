#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qlindblad/dirac1p.hpp"
#include "qlindblad/fock.hpp"

namespace qlindblad {

struct PacketSpec {
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  // Probability carried by the right-moving component.
  double right_fraction = 1.0;
};

// Normalised one-particle cell amplitudes of a Gaussian packet.
Eigen::VectorXcd gaussian_packet(const Lattice& lattice, const PacketSpec& spec);

// (Anti)symmetrised product of orbitals, normalised, in sector orbitals.size().
Eigen::VectorXcd product_state(const FockSpace& space, const std::vector<Eigen::VectorXcd>& orbitals);

// Embed a one-body vector as a sector-1 Fock vector (identity map on modes).
inline Eigen::VectorXcd one_particle_state(const Eigen::VectorXcd& chi) { return chi; }

}  // namespace qlindblad
