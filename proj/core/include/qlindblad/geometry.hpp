#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qlindblad {

using cplx = std::complex<double>;
using SpinMatrix = Eigen::Matrix2cd;

// Chiral basis: component 0 moves right (alpha^1 eigenvalue +1), component 1 left.
enum class ChartKind { Kruskal, MinkowskiTilted };

struct MetricScalars {
  double d3 = 1.0;
  double d4 = 1.0;
  double g00 = 1.0;
};

class ChartGeometry {
 public:
  static ChartGeometry kruskal(double mass);
  static ChartGeometry minkowski_tilted(double kappa);

  ChartKind kind() const { return kind_; }
  double mass() const { return mass_; }
  double kappa() const { return kappa_; }

  // Throws DomainError outside the manifold (Kruskal: t^2 - x^2 >= 2M).
  MetricScalars metric_scalars(double t, double x) const;
  SpinMatrix alpha0(double t, double x) const;
  SpinMatrix alpha1(double t, double x) const;
  // Conformal factor F of the 1+1 reduction; 1 for the flat chart.
  double conformal_factor(double t, double x) const;
  bool inside_manifold(double t, double x) const;

 private:
  ChartKind kind_ = ChartKind::MinkowskiTilted;
  double mass_ = 0.0;
  double kappa_ = 0.5;
};

// Areal radius from t'^2 - x'^2 = -(r - 2M) e^{r/2M}, by bisection only.
double kruskal_r(double t, double x, double mass);
double kruskal_f2(double t, double x, double mass);

struct SurfaceCrossing {
  double position = 0.0;
  int active_side = +1;  // +1: active cells lie at larger x
};

// Space-like cutoff surface t = T(x); a cell at x is active while T(x) > t.
class AbsorbingSurface {
 public:
  // T(x) = sqrt(2M + x^2) - epsilon
  static AbsorbingSurface kruskal_future(double mass, double epsilon);
  // T(x) = t0 + slope * x, |slope| < 1
  static AbsorbingSurface tilted_line(double t0, double slope);

  double time_at(double x) const;
  double gradient(double x) const;
  double epsilon() const { return epsilon_; }
  ChartKind kind() const { return kind_; }
  std::vector<SurfaceCrossing> crossings(double t) const;

 private:
  ChartKind kind_ = ChartKind::MinkowskiTilted;
  double mass_ = 0.0;
  double epsilon_ = 0.0;
  double t0_ = 0.0;
  double slope_ = 0.5;
};

struct BoundaryKinematics {
  double position = 0.0;
  int active_side = +1;
  double eval_point = 0.0;
  double grad_t = 0.0;
  double v_s = 0.0;
  double w = 0.0;
  Eigen::Vector2d c_mu = Eigen::Vector2d::Zero();
  double d3 = 1.0;
  double d4 = 1.0;
  SpinMatrix alpha_perp = SpinMatrix::Zero();
  // c_mu d4 alpha^mu
  SpinMatrix alpha_sing = SpinMatrix::Zero();
  // w * alpha_sing = d3 v_S I - d4 alpha_perp; positive semidefinite
  SpinMatrix gain_kernel = SpinMatrix::Zero();
};

// Kinematics at one crossing, with the spin weights taken at (t, eval_point).
BoundaryKinematics boundary_kinematics(const ChartGeometry& chart, const AbsorbingSurface& surface,
                                       double t, const SurfaceCrossing& crossing,
                                       double eval_point);

// All crossings at time t evaluated on the surface itself; empty before the
// surface has appeared.
std::vector<BoundaryKinematics> boundary_kinematics(const ChartGeometry& chart,
                                                    const AbsorbingSurface& surface, double t);

SpinMatrix pauli_x();
SpinMatrix pauli_z();

}  // namespace qlindblad
