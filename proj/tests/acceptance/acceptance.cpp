#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qlindblad/config.hpp"
#include "qlindblad/evolution.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/geometry.hpp"
#include "qlindblad/scenarios.hpp"
#include "qlindblad/trajectories.hpp"

using namespace qlindblad;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string config_path(const std::string& name) { return std::string(QLINDBLAD_CONFIG_DIR) + "/" + name; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

using cplx = std::complex<double>;

Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

double max_block_difference(const SectoredDensityMatrix& a, const SectoredDensityMatrix& b) {
  double d = 0.0;
  for (int n = 0; n <= a.n_max(); ++n) {
    const Eigen::MatrixXcd diff = a.dense_block(n) - b.dense_block(n);
    if (diff.size()) d = std::max(d, diff.cwiseAbs().maxCoeff());
  }
  return d;
}

// Areal radius by plain bisection in long double.
long double reference_r(long double t, long double x, long double m) {
  const long double target = x * x - t * t;
  auto f = [&](long double r) { return (r - 2 * m) * std::exp(r / (2 * m)) - target; };
  long double lo = 0.0L, hi = 2 * m;
  while (f(hi) < 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

Outcome oracle_equivalence() {
  const RunConfig cfg = load_config(config_path("minkowski_oracle.ini"));
  MonitorOptions opts;
  opts.oracle = true;
  const MonitoredRun run = monitored_run(cfg, opts);
  const bool pass = run.max_oracle_distance <= 1e-10 && run.seconds <= 60.0;
  return {pass, "max trace distance " + fmt(run.max_oracle_distance) + " over " +
                    std::to_string(cfg.steps) + " steps (limit 1e-10), " + fmt(run.seconds) +
                    " s (limit 60 s)"};
}

Outcome trace_conservation() {
  RunConfig mink = load_config(config_path("minkowski_oracle.ini"));
  mink.steps = 10000;
  MonitorOptions opts;
  opts.eigen_every = 0;
  const MonitoredRun flat = monitored_run(mink, opts);
  const SweepReport sweep = epsilon_sweep(load_config(config_path("kruskal_epsilon_sweep.ini")));
  const double worst = std::max(flat.max_trace_error, sweep.max_trace_error);
  return {worst <= 1e-7, "max |tr - 1|: flat chart " + fmt(flat.max_trace_error) + ", Kruskal sweep " +
                             fmt(sweep.max_trace_error) + " over 1e4 steps (limit 1e-7)"};
}

Outcome positivity_block_diagonality() {
  double min_eig = 0.0;
  int cross = 0;
  MonitorOptions opts;
  opts.eigen_every = 10;
  for (const char* name : {"minkowski_oracle.ini", "minkowski_disentangled.ini", "minkowski_equivariance.ini",
                           "free_equivariance.ini", "minkowski_deleted_norm.ini", "kruskal_creation.ini"}) {
    const MonitoredRun run = monitored_run(load_config(config_path(name)), opts);
    min_eig = std::min(min_eig, run.min_eigenvalue);
    cross += run.cross_sector_elements;
  }
  const SweepReport sweep = epsilon_sweep(load_config(config_path("kruskal_epsilon_sweep.ini")));
  min_eig = std::min(min_eig, sweep.min_eigenvalue);
  for (const auto& r : sweep.runs) cross += r.cross_sector_elements;
  return {min_eig >= -1e-10 && cross == 0, "min block eigenvalue " + fmt(min_eig) +
                                               " (limit -1e-10), cross-sector elements " + std::to_string(cross)};
}

Outcome cocycle() {
  std::mt19937_64 rng(20240607);
  double worst = 0.0, identity = 0.0;
  std::vector<EvolutionSetup> setups;
  {
    RunConfig c;
    c.sites = 24;
    c.surface_t0 = 3.0;
    c.particle_mass = 0.3;
    setups.push_back(c.setup());
    c.chart = ChartKind::Kruskal;
    c.bh_mass = 32.0;
    c.epsilon = 2.0;
    c.t_start = 2.0;
    setups.push_back(c.setup());
  }
  for (const auto& setup : setups) {
    const QuasiLindbladEvolution evo(setup);
    auto space = std::make_shared<const FockSpace>(setup.lattice.modes(), 2, Statistics::Fermionic);
    for (int r = 0; r < 5; ++r) {
      SectoredDensityMatrix rho(space);
      for (int n = 0; n <= 2; ++n) rho.factor(n) = random_matrix(space->dimension(n), 4, rng);
      restrict_to_active(rho, evo.schedule().mask(1));
      const double tr = rho.trace();
      for (int n = 0; n <= 2; ++n) rho.factor(n) /= std::sqrt(tr);
      rho.step = 1;
      rho.time = evo.time(1);
      const double s = evo.time(1), t = evo.time(5), u = evo.time(11);
      worst = std::max(worst, max_block_difference(evo.evolve(evo.evolve(rho, s, t), t, u), evo.evolve(rho, s, u)));
      identity = std::max(identity, max_block_difference(evo.evolve(rho, s, s), rho));
    }
  }
  return {worst <= 1e-12 && identity <= 1e-12, "max |S_t^u S_s^t - S_s^u| " + fmt(worst) + ", max |S_t^t - id| " +
                                                   fmt(identity) + " on 10 random inputs (limit 1e-12)"};
}

Outcome purity_monotonicity() {
  const RunConfig cfg = load_config(config_path("minkowski_oracle.ini"));
  MonitorOptions opts;
  opts.eigen_every = 0;
  const MonitoredRun run = monitored_run(cfg, opts);
  const bool pass = run.max_purity_increase <= 1e-12 && run.purity_drop >= 1e-4;
  return {pass, "largest one-step purity increase " + fmt(run.max_purity_increase) +
                    " (limit 0), total drop " + fmt(run.purity_drop) + " (needs >= 1e-4)"};
}

Outcome pure_state_reduction() {
  std::mt19937_64 rng(777);
  const RunConfig cfg = load_config(config_path("minkowski_oracle.ini"));
  double worst = 0.0;
  int checked = 0;
  for (const ChartGeometry& chart : {ChartGeometry::minkowski_tilted(0.5), ChartGeometry::kruskal(2048.0)}) {
    const Lattice lat{cfg.sites, 1.0, chart.kind() == ChartKind::Kruskal ? -31.5 : 0.0};
    auto space = std::make_shared<const FockSpace>(lat.modes(), 2, Statistics::Fermionic);
    const Eigen::VectorXcd a = random_matrix(space->dimension(2), 1, rng).col(0).normalized();
    const auto rho = SectoredDensityMatrix::pure(space, 2, a);
    std::uniform_int_distribution<int> cell(0, lat.sites - 1);
    const double t = 1.0;
    for (int c = 0; c < 500; ++c) {
      const std::vector<int> q{cell(rng), cell(rng)};
      const auto v = velocity(rho, chart, lat, q, t);
      for (int which = 0; which < 2; ++which) {
        // spinor sum over the first-quantized amplitude psi(s1, s2)
        auto amp = [&](int s1, int s2) -> cplx {
          int m[2] = {mode_index(q[0], s1), mode_index(q[1], s2)};
          const int sign = sort_with_sign(m, 2, Statistics::Fermionic);
          return sign ? static_cast<double>(sign) * a[space->index_of(2, m)] : cplx(0.0);
        };
        const double x = lat.position(q[which]);
        const MetricScalars ms = chart.metric_scalars(t, x);
        const SpinMatrix al = chart.alpha1(t, x);
        double dens = 0.0, cur = 0.0;
        for (int s = 0; s < 2; ++s)
          for (int o = 0; o < 2; ++o) {
            dens += std::norm(amp(s, o));
            for (int sp = 0; sp < 2; ++sp) {
              const cplx l = which == 0 ? amp(s, o) : amp(o, s);
              const cplx r = which == 0 ? amp(sp, o) : amp(o, sp);
              cur += (std::conj(l) * al(s, sp) * r).real();
            }
          }
        worst = std::max(worst, std::abs(v[which] - ms.d4 / ms.d3 * cur / dens));
      }
      ++checked;
    }
  }
  return {worst <= 1e-12 && checked == 1000,
          "max velocity difference " + fmt(worst) + " at " + std::to_string(checked) + " configurations (limit 1e-12)"};
}

Outcome equivariance() {
  const RunConfig free_cfg = load_config(config_path("free_equivariance.ini"));
  const EquivarianceReport calib = equivariance_run(free_cfg);
  const RunConfig cfg = load_config(config_path("minkowski_equivariance.ini"));
  const EquivarianceReport rep = equivariance_run(cfg);
  const bool pass = rep.max_tv <= 0.05 && rep.max_sector_z <= 3.0 && rep.seconds <= 300.0 &&
                    static_cast<int>(rep.checkpoints.size()) == 5;
  return {pass, "max TV " + fmt(rep.max_tv) + " (limit 0.05), max sector z " + fmt(rep.max_sector_z) +
                    " (limit 3), " + std::to_string(rep.ensemble.size) + " paths, " + fmt(rep.seconds) +
                    " s; surface-free calibration TV " + fmt(calib.max_tv)};
}

Outcome disentangled() {
  const DisentangledCheck d = disentangled_check(load_config(config_path("minkowski_disentangled.ini")));
  return {d.step >= 0 && d.fidelity >= 1.0 - 1e-6,
          "fidelity " + std::to_string(d.fidelity) + " (1 - " + fmt(1.0 - d.fidelity) +
              ", limit 1 - 1e-6) at step " + std::to_string(d.step)};
}

Outcome creation_consistency() {
  const CreationReport rep = creation_reversal(load_config(config_path("kruskal_creation.ini")));
  const double z = rep.creation_sigma > 0.0 ? std::abs(rep.mean_creations - rep.expected_creations) / rep.creation_sigma
                                            : (rep.mean_creations == rep.expected_creations ? 0.0 : 1e300);
  return {rep.chi.p_value >= 0.01 && z <= 3.0,
          "chi-square p " + fmt(rep.chi.p_value) + " (dof " + std::to_string(rep.chi.dof) +
              ", limit 0.01), mean creations " + fmt(rep.mean_creations) + " vs expected " +
              fmt(rep.expected_creations) + " (z " + fmt(z) + ", limit 3)"};
}

Outcome geometry_identities() {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double rdef = 0.0, d4d3 = 0.0, alpha0 = 0.0, kernel = 0.0;
  for (double m : {32.0, 2048.0, 985000.0}) {
    const ChartGeometry chart = ChartGeometry::kruskal(m);
    for (int i = 0; i < 100; ++i) {
      const double x = 10.0 * std::sqrt(m) * u(rng);
      const double t = 0.999 * std::sqrt(2 * m + x * x) * u(rng);
      const double r = kruskal_r(t, x, m);
      const long double ref = reference_r(t, x, m);
      rdef = std::max(rdef, static_cast<double>(std::abs(r - ref) / std::max(1.0L, ref)));
      const MetricScalars s = chart.metric_scalars(t, x);
      d4d3 = std::max(d4d3, std::abs(s.d4 - s.d3 / std::sqrt(s.g00)) / s.d4);
      alpha0 = std::max(alpha0, (s.d4 * chart.alpha0(t, x) - s.d3 * SpinMatrix::Identity()).cwiseAbs().maxCoeff() / s.d3);
    }
  }
  int points = 0;
  for (double m : {32.0, 2048.0}) {
    const ChartGeometry chart = ChartGeometry::kruskal(m);
    const AbsorbingSurface surf = AbsorbingSurface::kruskal_future(m, 2.0);
    for (int i = 0; i < 25; ++i) {
      const double t = std::sqrt(2 * m) - 2.0 + 0.3 + 1.7 * i;
      for (const auto& k : boundary_kinematics(chart, surf, t)) {
        const SpinMatrix lhs = k.w * (k.c_mu[0] * k.d4 * chart.alpha0(t, k.eval_point) +
                                      k.c_mu[1] * k.d4 * chart.alpha1(t, k.eval_point));
        const SpinMatrix rhs = k.d3 * k.v_s * SpinMatrix::Identity() - k.d4 * k.alpha_perp;
        kernel = std::max(kernel, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
        ++points;
      }
    }
  }
  const double worst = std::max({rdef, d4d3, alpha0, kernel});
  return {worst <= 1e-12 && points == 100,
          "radius " + fmt(rdef) + ", d4 vs d3 " + fmt(d4d3) + ", d4 alpha0 " + fmt(alpha0) + ", boundary kernel " +
              fmt(kernel) + " at " + std::to_string(points) + " boundary points (limit 1e-12, relative)"};
}

Outcome lform_agreement() {
  MonitorOptions opts;
  opts.lforms = true;
  opts.eigen_every = 0;
  double worst = 0.0;
  for (const char* name : {"minkowski_oracle.ini", "kruskal_creation.ini"}) {
    worst = std::max(worst, monitored_run(load_config(config_path(name)), opts).max_lform_difference);
  }
  return {worst <= 1e-12, "max elementwise difference " + fmt(worst) + " per step (limit 1e-12)"};
}

Outcome epsilon_sweep_convergence() {
  const SweepReport rep = epsilon_sweep(load_config(config_path("kruskal_epsilon_sweep.ini")));
  std::string diffs;
  for (double d : rep.diffs) diffs += (diffs.empty() ? "" : ", ") + fmt(d);
  return {rep.monotone && rep.final_diff <= 1e-3,
          "successive sector-trace differences [" + diffs + "] " + (rep.monotone ? "decreasing" : "not decreasing") +
              ", final " + fmt(rep.final_diff) + " (limit 1e-3)"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"oracle_equivalence", oracle_equivalence},
      {"trace_conservation", trace_conservation},
      {"positivity_block_diagonality", positivity_block_diagonality},
      {"cocycle", cocycle},
      {"purity_monotonicity", purity_monotonicity},
      {"pure_state_reduction", pure_state_reduction},
      {"equivariance", equivariance},
      {"disentangled_independence", disentangled},
      {"creation_consistency", creation_consistency},
      {"geometry_identities", geometry_identities},
      {"lform_agreement", lform_agreement},
      {"epsilon_sweep_convergence", epsilon_sweep_convergence},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (!wanted.empty() && (wanted[0] == "--list" || wanted[0] == "-l")) {
    for (const auto& c : criteria()) std::cout << c.first << "\n";
    return 0;
  }
  if (wanted.empty()) {
    for (const auto& c : criteria()) wanted.push_back(c.first);
  }
  bool all_pass = true;
  for (const auto& id : wanted) {
    const auto it = std::find_if(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == id; });
    if (it == criteria().end()) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << ": " << o.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
