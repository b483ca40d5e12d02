#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "qlindblad/errors.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/initial_state.hpp"

using namespace qlindblad;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Permutation parity of an integer tuple by counting inversions; 0 on repeats.
int parity(const std::vector<int>& v) {
  int inv = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[i] == v[j]) return 0;
      if (v[i] > v[j]) ++inv;
    }
  return inv % 2 ? -1 : 1;
}

}  // namespace

TEST_SUITE("fock") {
  TEST_CASE("sector dimensions and labels") {
    CHECK(FockSpace::sector_dimension(8, 3, Statistics::Fermionic) == 56);
    CHECK(FockSpace::sector_dimension(8, 3, Statistics::Bosonic) == 120);
    const FockSpace fs(8, 3, Statistics::Fermionic);
    for (int n = 0; n <= 3; ++n) {
      for (Eigen::Index i = 0; i < fs.dimension(n); ++i) {
        int m[kMaxParticles];
        for (int p = 0; p < n; ++p) m[p] = fs.config(n, i)[p];
        for (int p = 1; p < n; ++p) CHECK(m[p - 1] < m[p]);
        CHECK(fs.index_of(n, m) == i);
      }
    }
    int m[3] = {5, 1, 3};
    CHECK(sort_with_sign(m, 3, Statistics::Fermionic) == 1);
    int r[3] = {2, 1, 3};
    CHECK(sort_with_sign(r, 3, Statistics::Fermionic) == -1);
    int d[2] = {4, 4};
    CHECK(sort_with_sign(d, 2, Statistics::Fermionic) == 0);
    int b[2] = {4, 4};
    CHECK(sort_with_sign(b, 2, Statistics::Bosonic) == 1);
    const FockSpace bs(4, 2, Statistics::Bosonic);
    int occ[2] = {1, 1};
    CHECK(bs.occupation_factorial(2, occ) == 2.0);
    CHECK_THROWS_AS(FockSpace(4, 5, Statistics::Fermionic), ConfigError);
  }

  TEST_CASE("partial trace agrees with the first-quantized reduced density matrix") {
    constexpr int N = 3;
    const int modes = 8;
    auto space = std::make_shared<const FockSpace>(modes, N, Statistics::Fermionic);
    std::mt19937_64 rng(31);
    Eigen::VectorXcd a = testutil::random_vector(space->dimension(N), rng);
    a.normalize();
    const SectoredDensityMatrix rho = SectoredDensityMatrix::pure(space, N, a);
    for (const std::vector<int>& sites : {std::vector<int>{}, std::vector<int>{1, 2},
                                          std::vector<int>{0, 3}, std::vector<int>{0, 1, 2, 3}}) {
      std::vector<char> traced(modes, 0);
      for (int s : sites) traced[2 * s] = traced[2 * s + 1] = 1;
      const SectoredDensityMatrix red = partial_trace_over_region(rho, sites);
      CHECK(red.trace() == doctest::Approx(1.0).epsilon(1e-13));

      // psi(x1, x2, x3) = sign(x) a(sort x) / sqrt(N!)
      auto psi = [&](const std::vector<int>& x) -> cplx {
        const int s = parity(x);
        if (!s) return 0.0;
        std::vector<int> srt = x;
        std::sort(srt.begin(), srt.end());
        return static_cast<double>(s) * a[space->index_of(N, srt.data())] / std::sqrt(factorial(N));
      };
      std::vector<int> out_modes, in_modes;
      for (int m = 0; m < modes; ++m) (traced[m] ? in_modes : out_modes).push_back(m);
      for (int n = 0; n <= N; ++n) {
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(space->dimension(n), space->dimension(n));
        std::vector<std::vector<int>> qs, rs;
        std::function<void(std::vector<int>&, const std::vector<int>&, int, std::vector<std::vector<int>>&)> gen =
            [&](std::vector<int>& cur, const std::vector<int>& pool, int len, std::vector<std::vector<int>>& acc) {
              if (static_cast<int>(cur.size()) == len) {
                acc.push_back(cur);
                return;
              }
              for (int m : pool) {
                cur.push_back(m);
                gen(cur, pool, len, acc);
                cur.pop_back();
              }
            };
        std::vector<int> cur;
        gen(cur, out_modes, n, qs);
        gen(cur, in_modes, N - n, rs);
        for (const auto& q : qs) {
          if (!std::is_sorted(q.begin(), q.end()) || parity(q) == 0) continue;
          for (const auto& qp : qs) {
            if (!std::is_sorted(qp.begin(), qp.end()) || parity(qp) == 0) continue;
            cplx s = 0.0;
            for (const auto& r : rs) {
              std::vector<int> x = q, xp = qp;
              x.insert(x.end(), r.begin(), r.end());
              xp.insert(xp.end(), r.begin(), r.end());
              s += psi(x) * std::conj(psi(xp));
            }
            expected(space->index_of(n, q.data()), space->index_of(n, qp.data())) =
                binomial(N, n) * factorial(n) * s;
          }
        }
        CHECK((red.dense_block(n) - expected).cwiseAbs().maxCoeff() <= 1e-14);
      }
    }
  }

  TEST_CASE("partial trace preserves the trace for bosons and mixed inputs") {
    std::mt19937_64 rng(32);
    for (Statistics st : {Statistics::Fermionic, Statistics::Bosonic}) {
      auto space = std::make_shared<const FockSpace>(12, 3, st);
      const SectoredDensityMatrix rho = testutil::random_state(space, 3, rng);
      std::uniform_int_distribution<int> pick(0, 1);
      for (int r = 0; r < 10; ++r) {
        std::vector<char> mask(12);
        for (auto& c : mask) c = static_cast<char>(pick(rng));
        const auto red = partial_trace_modes(rho, mask);
        CHECK(red.trace() == doctest::Approx(1.0).epsilon(1e-13));
        for (int n = 0; n <= 3; ++n) CHECK(red.min_eigenvalue(n) >= -1e-13);
      }
    }
  }

  TEST_CASE("product states are antisymmetric and normalised") {
    auto space = std::make_shared<const FockSpace>(6, 2, Statistics::Fermionic);
    std::mt19937_64 rng(33);
    const Eigen::VectorXcd u = testutil::random_vector(6, rng), v = testutil::random_vector(6, rng);
    const Eigen::VectorXcd uv = product_state(*space, {u, v});
    const Eigen::VectorXcd vu = product_state(*space, {v, u});
    CHECK(uv.norm() == doctest::Approx(1.0));
    CHECK((uv + vu).norm() <= 1e-14);
    CHECK_THROWS_AS(product_state(*space, {u, u}), ArgumentError);
  }

  TEST_CASE("L-form and Kraus form of the gain agree") {
    std::mt19937_64 rng(34);
    auto space = std::make_shared<const FockSpace>(20, 3, Statistics::Fermionic);
    for (int r = 0; r < 20; ++r) {
      const SectoredDensityMatrix rho = testutil::random_state(space, 2, rng);
      const Eigen::Matrix2cd a = testutil::random_matrix(2, 2, rng);
      const SpinMatrix kernel = a * a.adjoint();
      const int site = r % 10;
      const auto dense = annihilate_at_boundary(rho, site, kernel);
      const auto kraus = annihilate_kraus(rho, site, kernel);
      const auto traces = annihilation_gain(rho, site, kernel);
      for (int n = 0; n < 3; ++n) {
        CHECK((dense[n] - kraus.dense_block(n)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(traces[n] == doctest::Approx(dense[n].trace().real()).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("kernel eigenvectors follow the phase convention") {
    const KernelEigen diag = kernel_eigen(SpinMatrix::Identity());
    CHECK(diag.values[0] == doctest::Approx(1.0));
    CHECK(std::abs(diag.vectors[0][0] - 1.0) <= 1e-15);
    CHECK(std::abs(diag.vectors[1][1] - 1.0) <= 1e-15);
    const KernelEigen k = kernel_eigen(2.0 * SpinMatrix::Identity() - pauli_z());
    CHECK(k.values[0] == doctest::Approx(1.0));
    CHECK(k.values[1] == doctest::Approx(3.0));
    for (const auto& v : k.vectors) {
      const cplx first = std::abs(v[0]) > 1e-12 ? v[0] : v[1];
      CHECK(first.imag() == doctest::Approx(0.0));
      CHECK(first.real() > 0.0);
    }
  }

  TEST_CASE("trace distance") {
    auto space = std::make_shared<const FockSpace>(6, 1, Statistics::Fermionic);
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(6), e1 = Eigen::VectorXcd::Zero(6);
    e0[0] = 1.0;
    e1[1] = 1.0;
    const auto a = SectoredDensityMatrix::pure(space, 1, e0);
    const auto b = SectoredDensityMatrix::pure(space, 1, e1);
    CHECK(compare(a, a).total == doctest::Approx(0.0));
    CHECK(compare(a, b).total == doctest::Approx(1.0));
    const auto other = std::make_shared<const FockSpace>(8, 1, Statistics::Fermionic);
    CHECK_THROWS_AS(compare(a, SectoredDensityMatrix::vacuum(other)), ArgumentError);
  }

  TEST_CASE("snapshots round-trip bit for bit") {
    std::mt19937_64 rng(35);
    auto space = std::make_shared<const FockSpace>(10, 2, Statistics::Fermionic);
    SectoredDensityMatrix rho = testutil::random_state(space, 3, rng);
    rho.time = 12.5;
    rho.step = 7;
    std::stringstream ss;
    write_snapshot(ss, rho);
    const SectoredDensityMatrix back = read_snapshot(ss);
    CHECK(back.time == rho.time);
    CHECK(back.step == rho.step);
    for (int n = 0; n <= 2; ++n) CHECK(back.factor(n) == rho.factor(n));
    std::stringstream bad("not a snapshot");
    CHECK_THROWS_AS(read_snapshot(bad), ArgumentError);
  }

  TEST_CASE("from_dense rejects non-PSD blocks") {
    auto space = std::make_shared<const FockSpace>(4, 1, Statistics::Fermionic);
    std::vector<Eigen::MatrixXcd> blocks{Eigen::MatrixXcd::Identity(1, 1), -Eigen::MatrixXcd::Identity(4, 4)};
    CHECK_THROWS_AS(SectoredDensityMatrix::from_dense(space, blocks), ArgumentError);
    blocks[1] = Eigen::MatrixXcd::Identity(4, 4);
    const auto rho = SectoredDensityMatrix::from_dense(space, blocks);
    CHECK(rho.trace() == doctest::Approx(5.0));
  }
}
