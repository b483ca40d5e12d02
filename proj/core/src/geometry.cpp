#include "qlindblad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qlindblad/errors.hpp"

namespace qlindblad {

SpinMatrix pauli_x() {
  SpinMatrix s;
  s << 0, 1, 1, 0;
  return s;
}

SpinMatrix pauli_z() {
  SpinMatrix s;
  s << 1, 0, 0, -1;
  return s;
}

double kruskal_r(double t, double x, double mass) {
  if (!(mass > 0.0)) throw DomainError("kruskal_r: mass must be positive");
  const double s = t * t - x * x;
  if (s > 2.0 * mass) {
    throw DomainError("kruskal_r: (t', x') lies beyond the singularity, t'^2 - x'^2 = " +
                      std::to_string(s));
  }
  const double two_m = 2.0 * mass;
  auto residual = [&](double r) { return s + (r - two_m) * std::exp(r / two_m); };
  double lo = 0.0;
  double hi = two_m + x * x + t * t;
  // residual is increasing in r, residual(lo) <= 0 <= residual(hi)
  for (int it = 0; it < 400 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
}

double kruskal_f2(double t, double x, double mass) {
  const double r = kruskal_r(t, x, mass);
  if (r <= 0.0) throw DomainError("kruskal_f2: point lies on the singularity r = 0");
  return 16.0 * mass * mass * std::exp(-r / (2.0 * mass)) / r;
}

ChartGeometry ChartGeometry::kruskal(double mass) {
  if (!(mass > 0.0)) throw ConfigError("chart.mass must be positive");
  ChartGeometry c;
  c.kind_ = ChartKind::Kruskal;
  c.mass_ = mass;
  return c;
}

ChartGeometry ChartGeometry::minkowski_tilted(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("chart.kappa must lie in (0, 1)");
  ChartGeometry c;
  c.kind_ = ChartKind::MinkowskiTilted;
  c.kappa_ = kappa;
  return c;
}

bool ChartGeometry::inside_manifold(double t, double x) const {
  if (kind_ == ChartKind::MinkowskiTilted) return true;
  return t * t - x * x < 2.0 * mass_;
}

double ChartGeometry::conformal_factor(double t, double x) const {
  if (kind_ == ChartKind::MinkowskiTilted) return 1.0;
  return std::sqrt(kruskal_f2(t, x, mass_));
}

MetricScalars ChartGeometry::metric_scalars(double t, double x) const {
  if (kind_ == ChartKind::MinkowskiTilted) return {};
  const double f2 = kruskal_f2(t, x, mass_);
  return {std::sqrt(f2), f2, 1.0 / f2};
}

SpinMatrix ChartGeometry::alpha0(double t, double x) const {
  return SpinMatrix::Identity() / conformal_factor(t, x);
}

SpinMatrix ChartGeometry::alpha1(double t, double x) const {
  return pauli_z() / conformal_factor(t, x);
}

AbsorbingSurface AbsorbingSurface::kruskal_future(double mass, double epsilon) {
  if (!(mass > 0.0)) throw ConfigError("surface: mass must be positive");
  if (epsilon < 0.0) throw ConfigError("surface.epsilon must be non-negative");
  AbsorbingSurface s;
  s.kind_ = ChartKind::Kruskal;
  s.mass_ = mass;
  s.epsilon_ = epsilon;
  return s;
}

AbsorbingSurface AbsorbingSurface::tilted_line(double t0, double slope) {
  if (!(std::abs(slope) > 0.0 && std::abs(slope) < 1.0)) {
    throw ConfigError("surface slope must satisfy 0 < |slope| < 1");
  }
  AbsorbingSurface s;
  s.kind_ = ChartKind::MinkowskiTilted;
  s.t0_ = t0;
  s.slope_ = slope;
  return s;
}

double AbsorbingSurface::time_at(double x) const {
  if (kind_ == ChartKind::Kruskal) return std::sqrt(2.0 * mass_ + x * x) - epsilon_;
  return t0_ + slope_ * x;
}

double AbsorbingSurface::gradient(double x) const {
  if (kind_ == ChartKind::Kruskal) return x / std::sqrt(x * x + 2.0 * mass_);
  return slope_;
}

std::vector<SurfaceCrossing> AbsorbingSurface::crossings(double t) const {
  if (kind_ == ChartKind::MinkowskiTilted) {
    return {{(t - t0_) / slope_, slope_ > 0.0 ? +1 : -1}};
  }
  const double s = (t + epsilon_) * (t + epsilon_) - 2.0 * mass_;
  if (t + epsilon_ < 0.0 || s < 0.0) return {};
  const double xb = std::sqrt(s);
  return {{-xb, -1}, {xb, +1}};
}

BoundaryKinematics boundary_kinematics(const ChartGeometry& chart, const AbsorbingSurface& surface,
                                       double t, const SurfaceCrossing& crossing,
                                       double eval_point) {
  BoundaryKinematics k;
  k.position = crossing.position;
  k.active_side = crossing.active_side;
  k.eval_point = eval_point;
  k.grad_t = surface.gradient(crossing.position);
  if (k.grad_t == 0.0) {
    k.grad_t = crossing.active_side > 0 ? std::numeric_limits<double>::min()
                                        : -std::numeric_limits<double>::min();
  }
  const double kappa = std::abs(k.grad_t);
  k.v_s = 1.0 / kappa;
  k.w = std::sqrt(1.0 + 1.0 / (kappa * kappa));
  k.c_mu = Eigen::Vector2d(1.0, -k.grad_t) / std::sqrt(1.0 + kappa * kappa);

  const MetricScalars m = chart.metric_scalars(t, eval_point);
  k.d3 = m.d3;
  k.d4 = m.d4;
  const SpinMatrix a0 = chart.alpha0(t, eval_point);
  const SpinMatrix a1 = chart.alpha1(t, eval_point);
  k.alpha_perp = (k.grad_t > 0.0 ? 1.0 : -1.0) * a1;
  k.alpha_sing = k.d4 * (k.c_mu(0) * a0 + k.c_mu(1) * a1);
  k.gain_kernel = k.d3 * k.v_s * SpinMatrix::Identity() - k.d4 * k.alpha_perp;
  return k;
}

std::vector<BoundaryKinematics> boundary_kinematics(const ChartGeometry& chart,
                                                    const AbsorbingSurface& surface, double t) {
  std::vector<BoundaryKinematics> out;
  for (const auto& c : surface.crossings(t)) {
    out.push_back(boundary_kinematics(chart, surface, t, c, c.position));
  }
  return out;
}

}  // namespace qlindblad
