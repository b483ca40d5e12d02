#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qlindblad/errors.hpp"
#include "qlindblad/initial_state.hpp"
#include "qlindblad/trajectories.hpp"

using namespace qlindblad;

namespace {

struct Moments {
  double density = 0.0;
  double current = 0.0;
};

// First-quantized spin sum for particle `which` of a two-particle fermion vector.
Moments pair_moments(const FockSpace& fs, const Eigen::VectorXcd& a, const ChartGeometry& chart,
                     const Lattice& lat, int c1, int c2, int which, double t) {
  auto amp = [&](int s1, int s2) -> cplx {
    int m[2] = {mode_index(c1, s1), mode_index(c2, s2)};
    const int sign = sort_with_sign(m, 2, Statistics::Fermionic);
    if (!sign) return 0.0;
    return static_cast<double>(sign) * a[fs.index_of(2, m)];
  };
  const int cell = which == 0 ? c1 : c2;
  const double x = lat.position(cell);
  const MetricScalars ms = chart.metric_scalars(t, x);
  const SpinMatrix al = chart.alpha1(t, x);
  Moments out;
  for (int s = 0; s < 2; ++s)
    for (int o = 0; o < 2; ++o) {
      out.density += std::norm(amp(s, o));
      for (int sp = 0; sp < 2; ++sp) {
        const cplx l = which == 0 ? amp(s, o) : amp(o, s);
        const cplx r = which == 0 ? amp(sp, o) : amp(o, sp);
        out.current += (ms.d4 / ms.d3) * (std::conj(l) * al(s, sp) * r).real();
      }
    }
  return out;
}

}  // namespace

TEST_SUITE("trajectories") {
  TEST_CASE("density-matrix velocity reduces to the pure-state field") {
    std::mt19937_64 rng(51);
    const Lattice lat{12, 1.0, -5.5};
    auto fs = std::make_shared<const FockSpace>(24, 2, Statistics::Fermionic);
    const double t = 1.0;
    for (const ChartGeometry& chart : {ChartGeometry::minkowski_tilted(0.5), ChartGeometry::kruskal(32.0)}) {
      std::uniform_int_distribution<int> cell(0, lat.sites - 1);
      int checked = 0;
      for (int r = 0; r < 10; ++r) {
        const Eigen::VectorXcd a = testutil::random_vector(fs->dimension(2), rng);
        const auto rho = SectoredDensityMatrix::pure(fs, 2, a);
        for (int c = 0; c < 100; ++c) {
          const std::vector<int> sites{cell(rng), cell(rng)};
          const auto v = velocity(rho, chart, lat, sites, t);
          const auto vb = bohm_dirac_velocity(*fs, 2, a, chart, lat, sites, t);
          for (int i = 0; i < 2; ++i) {
            const Moments m = pair_moments(*fs, a, chart, lat, sites[0], sites[1], i, t);
            CHECK(std::abs(v[i] - vb[i]) <= 1e-12);
            CHECK(std::abs(v[i] - m.current / m.density) <= 1e-12);
            CHECK(std::abs(v[i]) <= 1.0 + 1e-12);
            ++checked;
          }
        }
      }
      CHECK(checked == 2000);
    }
  }

  TEST_CASE("mixture velocity is the density-weighted mean current") {
    std::mt19937_64 rng(52);
    const Lattice lat{8, 1.0, 0.0};
    const ChartGeometry chart = ChartGeometry::minkowski_tilted(0.5);
    auto fs = std::make_shared<const FockSpace>(16, 2, Statistics::Fermionic);
    const Eigen::VectorXcd a = testutil::random_vector(fs->dimension(2), rng).normalized();
    const Eigen::VectorXcd b = testutil::random_vector(fs->dimension(2), rng).normalized();
    const double p = 0.3;
    SectoredDensityMatrix rho(fs);
    Eigen::MatrixXcd f(fs->dimension(2), 2);
    f.col(0) = std::sqrt(p) * a;
    f.col(1) = std::sqrt(1 - p) * b;
    rho.factor(2) = f;
    for (int c1 = 0; c1 < 8; ++c1)
      for (int c2 = 0; c2 < 8; ++c2) {
        const auto v = velocity(rho, chart, lat, {c1, c2}, 0.0);
        for (int i = 0; i < 2; ++i) {
          const Moments ma = pair_moments(*fs, a, chart, lat, c1, c2, i, 0.0);
          const Moments mb = pair_moments(*fs, b, chart, lat, c1, c2, i, 0.0);
          const double expected =
              (p * ma.current + (1 - p) * mb.current) / (p * ma.density + (1 - p) * mb.density);
          CHECK(std::abs(v[i] - expected) <= 1e-12);
        }
      }
  }

  TEST_CASE("disjoint product states give one-particle velocities") {
    std::mt19937_64 rng(53);
    const Lattice lat{30, 1.0, 0.0};
    const ChartGeometry chart = ChartGeometry::minkowski_tilted(0.5);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(60), w = Eigen::VectorXcd::Zero(60);
    u.segment(0, 20) = testutil::random_vector(20, rng);
    w.segment(40, 20) = testutil::random_vector(20, rng);
    auto fs2 = std::make_shared<const FockSpace>(60, 2, Statistics::Fermionic);
    auto fs1 = std::make_shared<const FockSpace>(60, 1, Statistics::Fermionic);
    const Eigen::VectorXcd psi = product_state(*fs2, {u, w});
    const auto rho = SectoredDensityMatrix::pure(fs2, 2, psi);
    for (int c1 = 0; c1 < 10; ++c1)
      for (int c2 = 20; c2 < 30; ++c2) {
        const auto v = velocity(rho, chart, lat, {c1, c2}, 0.0);
        CHECK(v[0] == doctest::Approx(bohm_dirac_velocity(*fs1, 1, u, chart, lat, {c1}, 0.0)[0]).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(bohm_dirac_velocity(*fs1, 1, w, chart, lat, {c2}, 0.0)[0]).epsilon(1e-12));
      }
  }

  TEST_CASE("chiral eigenstates move at light speed and nodes are reported") {
    const Lattice lat{6, 1.0, -2.5};
    auto fs = std::make_shared<const FockSpace>(12, 1, Statistics::Fermionic);
    for (const ChartGeometry& chart : {ChartGeometry::minkowski_tilted(0.5), ChartGeometry::kruskal(8.0)}) {
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(12);
      a[mode_index(2, kRight)] = 1.0;
      a[mode_index(4, kLeft)] = 1.0;
      const auto rho = SectoredDensityMatrix::pure(fs, 1, a);
      CHECK(velocity(rho, chart, lat, {2}, 0.5)[0] == doctest::Approx(1.0));
      CHECK(velocity(rho, chart, lat, {4}, 0.5)[0] == doctest::Approx(-1.0));
      CHECK_THROWS_AS(velocity(rho, chart, lat, {0}, 0.5), NodeError);
    }
  }

  TEST_CASE("ensemble runs are reproducible and annihilate swallowed packets") {
    const auto setup = testutil::minkowski_setup(40, 1.0, 0.2);
    const QuasiLindbladEvolution evo(setup);
    auto fs = std::make_shared<const FockSpace>(80, 1, Statistics::Fermionic);
    SectoredDensityMatrix rho =
        SectoredDensityMatrix::pure(fs, 1, gaussian_packet(setup.lattice, {12.0, 2.0, 0.0, 0.0}));
    restrict_to_active(rho, evo.schedule().mask(0));
    const double tr = rho.trace();
    rho.factor(1) /= std::sqrt(tr);
    const DensityTimeline tl = build_annihilation_timeline(evo, rho, 20);
    CHECK(tl.slices() == 21);
    EnsembleOptions opts;
    opts.size = 500;
    opts.seed = 99;
    opts.checkpoints = {0, 10, 20};
    opts.bins = 20;
    const EnsembleResult a = run_annihilation_ensemble(tl, opts);
    const EnsembleResult b = run_annihilation_ensemble(tl, opts);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      CHECK(a.events[i].path == b.events[i].path);
      CHECK(a.events[i].t == b.events[i].t);
      CHECK(a.events[i].position == b.events[i].position);
    }
    CHECK(rho.factor(1).squaredNorm() == doctest::Approx(1.0));
    const double survive = evo.evolve(rho, 20).sector_trace(1);
    CHECK(survive < 1e-4);
    CHECK(static_cast<int>(a.events.size()) == opts.size);
    CHECK(a.flagged_paths == 0);
    for (const auto& e : a.events) CHECK(!e.creation);
  }

  TEST_CASE("paths far from the surface keep their particles") {
    const auto setup = testutil::minkowski_setup(60, 40.0, 0.2);
    const QuasiLindbladEvolution evo(setup);
    auto fs = std::make_shared<const FockSpace>(120, 1, Statistics::Fermionic);
    const auto rho = SectoredDensityMatrix::pure(fs, 1, gaussian_packet(setup.lattice, {40.0, 3.0, 0.0, 0.5}));
    const DensityTimeline tl = build_annihilation_timeline(evo, rho, 10);
    EnsembleOptions opts;
    opts.size = 2000;
    opts.seed = 5;
    opts.checkpoints = {10};
    opts.bins = 30;
    const EnsembleResult r = run_annihilation_ensemble(tl, opts);
    CHECK(r.events.empty());
    REQUIRE(r.checkpoints.size() == 1);
    CHECK(r.checkpoints[0].sector_counts[1] == opts.size);
    CHECK(r.checkpoints[0].tv_distance <= 0.08);
  }

  TEST_CASE("cell configuration masses sum to the sector trace") {
    std::mt19937_64 rng(54);
    auto fs = std::make_shared<const FockSpace>(10, 2, Statistics::Fermionic);
    const auto rho = testutil::random_state(fs, 2, rng);
    const Eigen::VectorXd d = rho.diagonal(2);
    double s = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = i; j < 5; ++j) s += cell_configuration_mass(*fs, d, {i, j});
    CHECK(s == doctest::Approx(rho.sector_trace(2)).epsilon(1e-13));
    CHECK(cell_configuration_mass(*fs, d, {3, 1}) == cell_configuration_mass(*fs, d, {1, 3}));
  }
}
