#include "qlindblad/initial_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qlindblad/errors.hpp"

namespace qlindblad {

Eigen::VectorXcd gaussian_packet(const Lattice& lattice, const PacketSpec& spec) {
  if (!(spec.width > 0.0)) throw ConfigError("packet width must be positive");
  if (spec.right_fraction < 0.0 || spec.right_fraction > 1.0) {
    throw ConfigError("packet right_fraction must lie in [0, 1]");
  }
  const double cr = std::sqrt(spec.right_fraction);
  const double cl = std::sqrt(1.0 - spec.right_fraction);
  Eigen::VectorXcd chi = Eigen::VectorXcd::Zero(lattice.modes());
  for (int i = 0; i < lattice.sites; ++i) {
    const double u = (lattice.position(i) - spec.center) / spec.width;
    const cplx env = std::exp(-0.25 * u * u) * std::polar(1.0, spec.momentum * lattice.position(i));
    chi[mode_index(i, kRight)] = cr * env;
    chi[mode_index(i, kLeft)] = cl * env;
  }
  const double norm = chi.norm();
  if (norm == 0.0) throw ConfigError("packet has no support on the lattice");
  return chi / norm;
}

Eigen::VectorXcd product_state(const FockSpace& space, const std::vector<Eigen::VectorXcd>& orbitals) {
  const int n = static_cast<int>(orbitals.size());
  if (n > space.n_max()) throw ConfigError("more orbitals than the Fock truncation allows");
  for (const auto& o : orbitals) {
    if (o.size() != space.modes()) throw ArgumentError("orbital size does not match the mode count");
  }
  const bool fermions = space.statistics() == Statistics::Fermionic;
  Eigen::VectorXcd out(space.dimension(n));
  std::vector<int> perm(n);
  for (Eigen::Index idx = 0; idx < space.dimension(n); ++idx) {
    const std::uint16_t* q = space.config(n, idx);
    std::iota(perm.begin(), perm.end(), 0);
    cplx sum = 0.0;
    do {
      int parity = 1;
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          if (perm[a] > perm[b]) parity = -parity;
        }
      }
      cplx term = 1.0;
      for (int i = 0; i < n; ++i) term *= orbitals[perm[i]][q[i]];
      sum += (fermions ? static_cast<double>(parity) : 1.0) * term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (!fermions) {
      int qi[kMaxParticles];
      for (int i = 0; i < n; ++i) qi[i] = q[i];
      sum /= std::sqrt(space.occupation_factorial(n, qi));
    }
    out[idx] = sum;
  }
  const double norm = out.norm();
  if (norm == 0.0) throw ArgumentError("product_state: orbitals are linearly dependent");
  return out / norm;
}

}  // namespace qlindblad
