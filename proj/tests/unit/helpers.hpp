#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "qlindblad/dirac1p.hpp"
#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"

namespace testutil {

using qlindblad::cplx;

inline Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

inline Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

// Random unit-trace state with rank-`rank` factors in every sector.
inline qlindblad::SectoredDensityMatrix random_state(
    const std::shared_ptr<const qlindblad::FockSpace>& space, int rank, std::mt19937_64& rng) {
  qlindblad::SectoredDensityMatrix rho(space);
  for (int n = 0; n <= space->n_max(); ++n) rho.factor(n) = random_matrix(space->dimension(n), rank, rng);
  const double tr = rho.trace();
  for (int n = 0; n <= space->n_max(); ++n) rho.factor(n) /= std::sqrt(tr);
  return rho;
}

inline double max_block_difference(const qlindblad::SectoredDensityMatrix& a,
                                   const qlindblad::SectoredDensityMatrix& b) {
  double d = 0.0;
  for (int n = 0; n <= a.n_max(); ++n) {
    const Eigen::MatrixXcd diff = a.dense_block(n) - b.dense_block(n);
    if (diff.size()) d = std::max(d, diff.cwiseAbs().maxCoeff());
  }
  return d;
}

inline qlindblad::EvolutionSetup minkowski_setup(int sites, double t0, double mass,
                                                 double kappa = 0.5, int orientation = 1) {
  qlindblad::EvolutionSetup s;
  s.lattice = qlindblad::Lattice{sites, 1.0, 0.0};
  s.chart = qlindblad::ChartGeometry::minkowski_tilted(kappa);
  s.surface = qlindblad::AbsorbingSurface::tilted_line(t0, orientation * kappa);
  s.mass = mass;
  s.t_start = 0.0;
  s.dt = 1.0;
  return s;
}

}  // namespace testutil
