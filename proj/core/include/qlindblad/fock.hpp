#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qlindblad/dirac1p.hpp"

namespace qlindblad {

enum class Statistics { Fermionic, Bosonic };

constexpr int kMaxParticles = 4;

std::string to_string(Statistics s);
Statistics statistics_from_string(const std::string& s);

// Sorts modes ascending and returns the permutation parity (+1/-1).  For
// fermions a repeated mode yields 0.  Bosons always report +1.
int sort_with_sign(int* modes, int n, Statistics stats);

// Basis of the truncated Fock space over `modes` single-particle modes: sector n
// is spanned by sorted mode lists (strictly increasing for fermions,
// non-decreasing for bosons) in lexicographic order.
class FockSpace {
 public:
  FockSpace(int modes, int n_max, Statistics stats);

  int modes() const { return modes_; }
  int n_max() const { return n_max_; }
  Statistics statistics() const { return stats_; }
  Eigen::Index dimension(int n) const { return dims_[n]; }
  const std::uint16_t* config(int n, Eigen::Index idx) const {
    return configs_[n].data() + idx * n;
  }
  // Rank of a sorted mode list (must be a valid basis label).
  Eigen::Index index_of(int n, const int* sorted_modes) const;
  // prod_m n_m! of a sorted list; 1 for fermions.
  double occupation_factorial(int n, const int* sorted_modes) const;

  static Eigen::Index sector_dimension(int modes, int n, Statistics stats);

 private:
  int modes_;
  int n_max_;
  Statistics stats_;
  std::vector<Eigen::Index> dims_;
  std::vector<std::vector<std::uint16_t>> configs_;
  // prefix_[k][v] = number of k-tuples that complete a list whose previous
  // entry is below v, summed over the first entries < v.
  std::vector<std::vector<Eigen::Index>> prefix_;
};

// Block-diagonal density matrix over particle-number sectors.  Sector n is held
// as a factor V_n with rho_n = V_n V_n^dagger, in the orthonormal Fock basis with
// lattice weights absorbed, so tr rho = sum_n ||V_n||_F^2.
class SectoredDensityMatrix {
 public:
  SectoredDensityMatrix() = default;
  explicit SectoredDensityMatrix(std::shared_ptr<const FockSpace> space);

  static SectoredDensityMatrix vacuum(std::shared_ptr<const FockSpace> space);
  static SectoredDensityMatrix pure(std::shared_ptr<const FockSpace> space, int n,
                                    const Eigen::VectorXcd& amplitudes);
  // rho_n given densely; each block must be Hermitian PSD.
  static SectoredDensityMatrix from_dense(std::shared_ptr<const FockSpace> space,
                                          const std::vector<Eigen::MatrixXcd>& blocks);

  const FockSpace& space() const { return *space_; }
  const std::shared_ptr<const FockSpace>& space_ptr() const { return space_; }
  int n_max() const { return space_->n_max(); }

  const Eigen::MatrixXcd& factor(int n) const { return factors_[n]; }
  Eigen::MatrixXcd& factor(int n) { return factors_[n]; }
  void append_columns(int n, const Eigen::MatrixXcd& cols);

  double trace() const;
  double sector_trace(int n) const { return factors_[n].squaredNorm(); }
  std::vector<double> sector_traces() const;
  double purity() const;
  Eigen::MatrixXcd dense_block(int n) const;
  Eigen::VectorXd diagonal(int n) const;
  double min_eigenvalue(int n) const;
  double expectation(int n, const Eigen::VectorXcd& phi) const;

  // Drop null columns; re-factor through an eigendecomposition once a block
  // holds more columns than needed.
  void compress();

  double time = 0.0;
  int step = 0;

 private:
  std::shared_ptr<const FockSpace> space_;
  std::vector<Eigen::MatrixXcd> factors_;
};

// Single-particle map applied to every particle of a sector vector.
Eigen::VectorXcd apply_one_body(const FockSpace& space, int n, const OneBodyStep& u,
                                const Eigen::VectorXcd& v);
void apply_one_body(SectoredDensityMatrix& rho, const OneBodyStep& u);

// Trace over every particle that occupies a mode flagged in `traced_modes`;
// weight moves to lower sectors.
SectoredDensityMatrix partial_trace_modes(const SectoredDensityMatrix& rho,
                                          const std::vector<char>& traced_modes);
// Region given as lattice sites (both chiralities traced).
SectoredDensityMatrix partial_trace_over_region(const SectoredDensityMatrix& rho,
                                                const std::vector<int>& sites);

// Boundary gain at `site` with 2x2 PSD spin kernel K (rate units included):
// Delta rho_n(q; q') = tr_spin[ rho_{n+1}(q x; q' x) K ].
// Dense form, one block per target sector n in [0, n_max - 1].
std::vector<Eigen::MatrixXcd> annihilate_at_boundary(const SectoredDensityMatrix& rho, int site,
                                                     const SpinMatrix& kernel);
// Same increment as sum_s A_s rho A_s^dagger with A_s = sqrt(a_s) b_s^* psi(q, x)
// from the eigenpairs (a_s, b_s) of K; returned in factor form.
SectoredDensityMatrix annihilate_kraus(const SectoredDensityMatrix& rho, int site,
                                       const SpinMatrix& kernel);
// Traces of the increment per target sector without forming it.
std::vector<double> annihilation_gain(const SectoredDensityMatrix& rho, int site,
                                      const SpinMatrix& kernel);

struct KernelEigen {
  std::array<double, 2> values{};
  std::array<Eigen::Vector2cd, 2> vectors;
};
// Ascending eigenvalues; each eigenvector's first non-negligible entry is real
// positive; a degenerate kernel uses the chiral basis.
KernelEigen kernel_eigen(const SpinMatrix& kernel);

struct TraceDistance {
  std::vector<double> per_sector;
  double total = 0.0;
};
// 1/2 ||rho1 - rho2||_1 per block and summed; ArgumentError on shape mismatch.
TraceDistance compare(const SectoredDensityMatrix& a, const SectoredDensityMatrix& b);

// Binary snapshot: magic, sites, n_max, statistics, t, step, then per sector the
// factor shape and its entries row-major as (re, im) doubles.
void write_snapshot(std::ostream& os, const SectoredDensityMatrix& rho);
SectoredDensityMatrix read_snapshot(std::istream& is);
void write_snapshot(const std::string& path, const SectoredDensityMatrix& rho);
SectoredDensityMatrix read_snapshot(const std::string& path);

}  // namespace qlindblad
