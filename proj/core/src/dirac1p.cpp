#include "qlindblad/dirac1p.hpp"

#include <cmath>
#include <string>

#include "qlindblad/errors.hpp"

namespace qlindblad {

int Lattice::cell_of(double x) const {
  return static_cast<int>(std::floor((x - x0) / dx + 0.5));
}

ActiveMask active_mask(const Lattice& lattice, const AbsorbingSurface& surface, double t) {
  ActiveMask m(lattice.sites);
  for (int i = 0; i < lattice.sites; ++i) m[i] = surface.time_at(lattice.position(i)) > t;
  return m;
}

ActivitySchedule::ActivitySchedule(const Lattice& lattice, const AbsorbingSurface& surface,
                                   double t_start, double dt)
    : lattice_(lattice), t_start_(t_start), dt_(dt), deact_(lattice.sites) {
  for (int i = 0; i < lattice.sites; ++i) {
    const double q = (surface.time_at(lattice.position(i)) - t_start) / dt;
    if (q <= 0.0) {
      deact_[i] = 0;
    } else if (q >= static_cast<double>(kNever)) {
      deact_[i] = kNever;
    } else {
      // grid times within 1e-9 dt of the surface count as reached
      deact_[i] = std::max(0, static_cast<int>(std::ceil(q - 1e-9)));
    }
  }
}

ActiveMask ActivitySchedule::mask(int k) const {
  ActiveMask m(deact_.size());
  for (std::size_t i = 0; i < deact_.size(); ++i) m[i] = k < deact_[i];
  return m;
}

int ActivitySchedule::active_count(int k) const {
  int n = 0;
  for (int d : deact_) n += k < d;
  return n;
}

std::vector<int> ActivitySchedule::swallowed(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < deact_.size(); ++i) {
    if (deact_[i] == k + 1) out.push_back(static_cast<int>(i));
  }
  return out;
}

int ActivitySchedule::extinction_step() const {
  int last = 0;
  for (int d : deact_) last = std::max(last, d);
  return last;
}

Eigen::VectorXcd OneBodyStep::apply(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (int m = 0; m < modes(); ++m) {
    const cplx a = v[m];
    if (a == cplx(0.0)) continue;
    for (int e = 0; e < nnz[m]; ++e) out[columns[m][e].dest] += columns[m][e].amp * a;
  }
  return out;
}

Eigen::MatrixXcd OneBodyStep::dense() const {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(modes(), modes());
  for (int m = 0; m < modes(); ++m) {
    for (int e = 0; e < nnz[m]; ++e) u(columns[m][e].dest, m) += columns[m][e].amp;
  }
  return u;
}

DiracWalk::DiracWalk(const Lattice& lattice, const ChartGeometry& chart, double mass, double dt)
    : lattice_(lattice), chart_(chart), mass_(mass), dt_(dt) {
  if (lattice.sites < 1) throw ConfigError("lattice.sites must be at least 1");
  if (!(lattice.dx > 0.0)) throw ConfigError("lattice.dx must be positive");
  if (dt > lattice.dx * (1.0 + 1e-12)) {
    throw ConfigError("lattice.dt = " + std::to_string(dt) + " exceeds dx = " +
                      std::to_string(lattice.dx) + ": shift would outrun one cell per step");
  }
  if (dt < lattice.dx * (1.0 - 1e-12)) {
    throw ConfigError("lattice.dt = " + std::to_string(dt) +
                      " does not match the chiral shift, which needs dt = dx");
  }
}

SpinMatrix DiracWalk::coin(double t, int site) const {
  if (mass_ == 0.0) return SpinMatrix::Identity();
  const double x = lattice_.position(site);
  const double f = chart_.inside_manifold(t, x) ? chart_.conformal_factor(t, x) : 0.0;
  const double th = dt_ * mass_ * f;
  SpinMatrix c;
  c << std::cos(th), cplx(0.0, -std::sin(th)), cplx(0.0, -std::sin(th)), std::cos(th);
  return c;
}

OneBodyStep DiracWalk::step_operator(double t, const ActiveMask& active) const {
  const int n = lattice_.sites;
  auto on = [&](int i) { return i >= 0 && i < n && (active.empty() || active[i]); };
  OneBodyStep u;
  u.columns.resize(2 * n);
  u.nnz.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    if (!on(i)) {
      for (int s = 0; s < 2; ++s) {
        u.columns[mode_index(i, s)][0] = {mode_index(i, s), 1.0};
        u.nnz[mode_index(i, s)] = 1;
      }
      continue;
    }
    const int dest_r = on(i + 1) ? mode_index(i + 1, kRight) : mode_index(i, kLeft);
    const int dest_l = on(i - 1) ? mode_index(i - 1, kLeft) : mode_index(i, kRight);
    const SpinMatrix c = coin(t, i);
    for (int s = 0; s < 2; ++s) {
      const int m = mode_index(i, s);
      int k = 0;
      if (c(kRight, s) != cplx(0.0)) u.columns[m][k++] = {dest_r, c(kRight, s)};
      if (c(kLeft, s) != cplx(0.0)) u.columns[m][k++] = {dest_l, c(kLeft, s)};
      u.nnz[m] = static_cast<unsigned char>(k);
    }
  }
  return u;
}

OneBodyStep DiracWalk::coin_operator(double t, const ActiveMask& active) const {
  const int n = lattice_.sites;
  OneBodyStep u;
  u.columns.resize(2 * n);
  u.nnz.assign(2 * n, 0);
  for (int i = 0; i < n; ++i) {
    const bool on = active.empty() || active[i];
    const SpinMatrix c = on ? coin(t, i) : SpinMatrix::Identity();
    for (int s = 0; s < 2; ++s) {
      const int m = mode_index(i, s);
      int k = 0;
      for (int r = 0; r < 2; ++r) {
        if (c(r, s) != cplx(0.0)) u.columns[m][k++] = {mode_index(i, r), c(r, s)};
      }
      u.nnz[m] = static_cast<unsigned char>(k);
    }
  }
  return u;
}

void DiracWalk::step(Eigen::VectorXcd& chi, double t, const ActiveMask& active) const {
  chi = step_operator(t, active).apply(chi);
}

Eigen::VectorXcd DiracWalk::apply_coin(const Eigen::VectorXcd& chi, double t) const {
  Eigen::VectorXcd out = chi;
  for (int i = 0; i < lattice_.sites; ++i) {
    out.segment<2>(2 * i) = coin(t, i) * chi.segment<2>(2 * i);
  }
  return out;
}

DensityCurrent density_current(const Eigen::VectorXcd& chi, const Lattice& lattice,
                               const ChartGeometry& chart, double t, int site) {
  const double x = lattice.position(site);
  const MetricScalars m = chart.metric_scalars(t, x);
  const Eigen::Vector2cd psi = chi.segment<2>(2 * site) / std::sqrt(lattice.dx * m.d3);
  DensityCurrent out;
  out.rho = m.d3 * psi.squaredNorm();
  out.j = m.d4 * (psi.adjoint() * chart.alpha1(t, x) * psi)(0, 0).real();
  return out;
}

std::vector<double> edge_fluxes(const DiracWalk& walk, const Eigen::VectorXcd& chi, double t,
                                const ActiveMask& active) {
  const Lattice& lat = walk.lattice();
  const Eigen::VectorXcd c = walk.apply_coin(chi, t);
  auto on = [&](int i) { return active.empty() || active[i]; };
  std::vector<double> flux(std::max(0, lat.sites - 1), 0.0);
  for (int i = 0; i + 1 < lat.sites; ++i) {
    if (!on(i) || !on(i + 1)) continue;
    flux[i] = std::norm(c[mode_index(i, kRight)]) - std::norm(c[mode_index(i + 1, kLeft)]);
  }
  return flux;
}

double boundary_flux(const Eigen::VectorXcd& chi, const Lattice& lattice, int site,
                     const BoundaryKinematics& kin) {
  const Eigen::Vector2cd psi = chi.segment<2>(2 * site) / std::sqrt(lattice.dx * kin.d3);
  return (psi.adjoint() * kin.gain_kernel * psi)(0, 0).real();
}

double edge_weight(const Eigen::VectorXcd& chi, const Lattice& lattice) {
  const int last = lattice.sites - 1;
  return std::max(chi.segment<2>(0).squaredNorm(), chi.segment<2>(2 * last).squaredNorm());
}

}  // namespace qlindblad
