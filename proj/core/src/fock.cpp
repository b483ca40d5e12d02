#include "qlindblad/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>

#include "qlindblad/errors.hpp"

namespace qlindblad {

namespace {

Eigen::Index binomial(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || n < k) return 0;
  Eigen::Index r = 1;
  for (Eigen::Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Number of sorted k-tuples with every entry >= lo.
Eigen::Index completions(int modes, int k, int lo, Statistics stats) {
  if (k == 0) return 1;
  if (lo >= modes) return 0;
  const Eigen::Index avail = modes - lo;
  return stats == Statistics::Fermionic ? binomial(avail, k) : binomial(avail + k - 1, k);
}

void enumerate(int modes, int n, Statistics stats, std::vector<std::uint16_t>& out) {
  if (n == 0) return;
  const int step = stats == Statistics::Fermionic ? 1 : 0;
  std::vector<int> cur(n);
  // iterative lexicographic generation
  for (int i = 0; i < n; ++i) cur[i] = step * i;
  if (cur[n - 1] >= modes) return;
  while (true) {
    for (int v : cur) out.push_back(static_cast<std::uint16_t>(v));
    int i = n - 1;
    while (i >= 0) {
      const int limit = modes - 1 - step * (n - 1 - i);
      if (cur[i] < limit) break;
      --i;
    }
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < n; ++j) cur[j] = cur[j - 1] + step;
  }
}

constexpr double kNullColumn = 1e-32;

}  // namespace

std::string to_string(Statistics s) {
  return s == Statistics::Fermionic ? "fermionic" : "bosonic";
}

Statistics statistics_from_string(const std::string& s) {
  if (s == "fermionic" || s == "fermion" || s == "fermions") return Statistics::Fermionic;
  if (s == "bosonic" || s == "boson" || s == "bosons") return Statistics::Bosonic;
  throw ConfigError("fock.statistics must be 'fermionic' or 'bosonic', got '" + s + "'");
}

int sort_with_sign(int* modes, int n, Statistics stats) {
  int sign = 1;
  for (int i = 1; i < n; ++i) {
    const int v = modes[i];
    int j = i - 1;
    while (j >= 0 && modes[j] > v) {
      modes[j + 1] = modes[j];
      --j;
      sign = -sign;
    }
    modes[j + 1] = v;
  }
  if (stats == Statistics::Bosonic) return 1;
  for (int i = 1; i < n; ++i) {
    if (modes[i] == modes[i - 1]) return 0;
  }
  return sign;
}

Eigen::Index FockSpace::sector_dimension(int modes, int n, Statistics stats) {
  return completions(modes, n, 0, stats);
}

FockSpace::FockSpace(int modes, int n_max, Statistics stats)
    : modes_(modes), n_max_(n_max), stats_(stats) {
  if (modes < 1 || modes > 65535) throw ConfigError("fock: mode count out of range");
  if (n_max < 0 || n_max > kMaxParticles) {
    throw ConfigError("fock.n_max must lie in [0, " + std::to_string(kMaxParticles) + "]");
  }
  const int f = stats == Statistics::Fermionic ? 1 : 0;
  dims_.resize(n_max + 1);
  configs_.resize(n_max + 1);
  prefix_.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    dims_[n] = sector_dimension(modes, n, stats);
    configs_[n].reserve(static_cast<std::size_t>(dims_[n] * n));
    enumerate(modes, n, stats, configs_[n]);
    auto& p = prefix_[n];
    p.assign(modes + 1, 0);
    for (int v = 0; v < modes; ++v) p[v + 1] = p[v] + completions(modes, n, v + f, stats);
  }
}

Eigen::Index FockSpace::index_of(int n, const int* q) const {
  const int f = stats_ == Statistics::Fermionic ? 1 : 0;
  Eigen::Index r = 0;
  int lo = 0;
  for (int i = 0; i < n; ++i) {
    const auto& p = prefix_[n - i - 1];
    r += p[q[i]] - p[lo];
    lo = q[i] + f;
  }
  return r;
}

double FockSpace::occupation_factorial(int n, const int* q) const {
  if (stats_ == Statistics::Fermionic) return 1.0;
  double f = 1.0;
  int run = 1;
  for (int i = 1; i < n; ++i) {
    run = q[i] == q[i - 1] ? run + 1 : 1;
    f *= run;
  }
  return f;
}

SectoredDensityMatrix::SectoredDensityMatrix(std::shared_ptr<const FockSpace> space)
    : space_(std::move(space)) {
  factors_.resize(space_->n_max() + 1);
  for (int n = 0; n <= space_->n_max(); ++n) factors_[n].resize(space_->dimension(n), 0);
}

SectoredDensityMatrix SectoredDensityMatrix::vacuum(std::shared_ptr<const FockSpace> space) {
  SectoredDensityMatrix r(std::move(space));
  r.factors_[0] = Eigen::MatrixXcd::Ones(1, 1);
  return r;
}

SectoredDensityMatrix SectoredDensityMatrix::pure(std::shared_ptr<const FockSpace> space, int n,
                                                  const Eigen::VectorXcd& amplitudes) {
  SectoredDensityMatrix r(std::move(space));
  if (n < 0 || n > r.n_max() || amplitudes.size() != r.space().dimension(n)) {
    throw ArgumentError("pure: amplitude vector does not match sector " + std::to_string(n));
  }
  r.factors_[n] = amplitudes;
  return r;
}

SectoredDensityMatrix SectoredDensityMatrix::from_dense(std::shared_ptr<const FockSpace> space,
                                                        const std::vector<Eigen::MatrixXcd>& blocks) {
  SectoredDensityMatrix r(std::move(space));
  if (static_cast<int>(blocks.size()) != r.n_max() + 1) {
    throw ArgumentError("from_dense: expected one block per sector");
  }
  for (int n = 0; n <= r.n_max(); ++n) {
    const Eigen::Index d = r.space().dimension(n);
    if (blocks[n].rows() != d || blocks[n].cols() != d) {
      throw ArgumentError("from_dense: block " + std::to_string(n) + " has the wrong shape");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blocks[n]);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (es.eigenvalues()[i] < -1e-12) {
        throw ArgumentError("from_dense: block " + std::to_string(n) + " is not PSD");
      }
      if (es.eigenvalues()[i] > kNullColumn) keep.push_back(i);
    }
    Eigen::MatrixXcd v(d, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
      v.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()[keep[c]]);
    }
    r.factors_[n] = std::move(v);
  }
  return r;
}

void SectoredDensityMatrix::append_columns(int n, const Eigen::MatrixXcd& cols) {
  if (cols.cols() == 0) return;
  auto& v = factors_[n];
  const Eigen::Index old = v.cols();
  v.conservativeResize(Eigen::NoChange, old + cols.cols());
  v.rightCols(cols.cols()) = cols;
}

double SectoredDensityMatrix::trace() const {
  double t = 0.0;
  for (const auto& v : factors_) t += v.squaredNorm();
  return t;
}

std::vector<double> SectoredDensityMatrix::sector_traces() const {
  std::vector<double> t;
  for (const auto& v : factors_) t.push_back(v.squaredNorm());
  return t;
}

double SectoredDensityMatrix::purity() const {
  double p = 0.0;
  for (const auto& v : factors_) {
    if (v.cols() == 0) continue;
    p += (v.adjoint() * v).squaredNorm();
  }
  return p;
}

Eigen::MatrixXcd SectoredDensityMatrix::dense_block(int n) const {
  return factors_[n] * factors_[n].adjoint();
}

Eigen::VectorXd SectoredDensityMatrix::diagonal(int n) const {
  return factors_[n].cwiseAbs2().rowwise().sum();
}

double SectoredDensityMatrix::min_eigenvalue(int n) const {
  const auto& v = factors_[n];
  if (v.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v.adjoint() * v, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return v.cols() < v.rows() ? std::min(lo, 0.0) : lo;
}

double SectoredDensityMatrix::expectation(int n, const Eigen::VectorXcd& phi) const {
  if (factors_[n].cols() == 0) return 0.0;
  return (factors_[n].adjoint() * phi).squaredNorm();
}

void SectoredDensityMatrix::compress() {
  for (auto& v : factors_) {
    std::vector<Eigen::Index> nz;
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (v.col(c).squaredNorm() > kNullColumn) nz.push_back(c);
    }
    if (static_cast<Eigen::Index>(nz.size()) != v.cols()) {
      Eigen::MatrixXcd w(v.rows(), nz.size());
      for (std::size_t c = 0; c < nz.size(); ++c) w.col(c) = v.col(nz[c]);
      v = std::move(w);
    }
    const Eigen::Index rows = v.rows();
    const Eigen::Index cols = v.cols();
    if (cols <= 1) continue;
    if (cols > rows) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v * v.adjoint());
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = rows - 1; i >= 0; --i) {
        if (es.eigenvalues()[i] > kNullColumn) keep.push_back(i);
      }
      Eigen::MatrixXcd w(rows, keep.size());
      for (std::size_t c = 0; c < keep.size(); ++c) {
        w.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()[keep[c]]);
      }
      v = std::move(w);
    } else if (cols > 64 && 2 * cols > rows) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v.adjoint() * v);
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = cols - 1; i >= 0; --i) {
        if (es.eigenvalues()[i] > kNullColumn) keep.push_back(i);
      }
      if (static_cast<Eigen::Index>(keep.size()) == cols) continue;
      Eigen::MatrixXcd basis(cols, keep.size());
      for (std::size_t c = 0; c < keep.size(); ++c) basis.col(c) = es.eigenvectors().col(keep[c]);
      v = v * basis;
    }
  }
}

Eigen::VectorXcd apply_one_body(const FockSpace& space, int n, const OneBodyStep& u,
                                const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  if (n == 0) {
    out = v;
    return out;
  }
  const bool bosons = space.statistics() == Statistics::Bosonic;
  const Eigen::Index dim = space.dimension(n);
  std::array<int, kMaxParticles> src{};
  std::array<int, kMaxParticles> dst{};
  std::array<int, kMaxParticles> pick{};
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const cplx a = v[idx];
    if (a == cplx(0.0)) continue;
    const std::uint16_t* q = space.config(n, idx);
    for (int i = 0; i < n; ++i) src[i] = q[i];
    const double in_norm = bosons ? 1.0 / std::sqrt(space.occupation_factorial(n, src.data())) : 1.0;
    pick.fill(0);
    while (true) {
      cplx amp = a * in_norm;
      for (int i = 0; i < n; ++i) {
        const auto& e = u.columns[src[i]][pick[i]];
        dst[i] = e.dest;
        amp *= e.amp;
      }
      const int sign = sort_with_sign(dst.data(), n, space.statistics());
      if (sign != 0) {
        if (bosons) amp *= std::sqrt(space.occupation_factorial(n, dst.data()));
        out[space.index_of(n, dst.data())] += static_cast<double>(sign) * amp;
      }
      int i = 0;
      while (i < n && ++pick[i] >= u.nnz[src[i]]) pick[i++] = 0;
      if (i == n) break;
    }
  }
  return out;
}

void apply_one_body(SectoredDensityMatrix& rho, const OneBodyStep& u) {
  const FockSpace& space = rho.space();
  for (int n = 1; n <= rho.n_max(); ++n) {
    Eigen::MatrixXcd& v = rho.factor(n);
    const Eigen::Index cols = v.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::VectorXcd col = v.col(c);
      v.col(c) = apply_one_body(space, n, u, col);
    }
  }
}

SectoredDensityMatrix partial_trace_modes(const SectoredDensityMatrix& rho,
                                          const std::vector<char>& traced) {
  const FockSpace& space = rho.space();
  if (static_cast<int>(traced.size()) != space.modes()) {
    throw ArgumentError("partial_trace_modes: mask size does not match the mode count");
  }
  const bool fermions = space.statistics() == Statistics::Fermionic;
  SectoredDensityMatrix out(rho.space_ptr());
  out.time = rho.time;
  out.step = rho.step;
  out.factor(0) = rho.factor(0);
  std::array<int, kMaxParticles> keep{};
  for (int n = 1; n <= rho.n_max(); ++n) {
    const Eigen::MatrixXcd& v = rho.factor(n);
    const Eigen::Index dim = space.dimension(n);
    Eigen::MatrixXcd stay = v;
    std::vector<std::vector<Eigen::VectorXcd>> moved(n + 1);
    for (Eigen::Index col = 0; col < v.cols(); ++col) {
      std::unordered_map<std::uint64_t, std::size_t> slot;
      std::vector<std::pair<int, Eigen::VectorXcd>> local;
      for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const cplx a = v(idx, col);
        const std::uint16_t* q = space.config(n, idx);
        int nt = 0;
        for (int i = 0; i < n; ++i) nt += traced[q[i]] ? 1 : 0;
        if (nt == 0) continue;
        stay(idx, col) = 0.0;
        if (a == cplx(0.0)) continue;
        std::uint64_t key = 0;
        int nk = 0;
        int parity = 0;
        int kept_after = 0;
        // walk from the end: a traced mode passes every kept mode to its right
        for (int i = n - 1; i >= 0; --i) {
          if (traced[q[i]]) {
            parity += kept_after;
          } else {
            ++kept_after;
          }
        }
        for (int i = 0; i < n; ++i) {
          if (traced[q[i]]) {
            key = (key << 16) | static_cast<std::uint64_t>(q[i] + 1);
          } else {
            keep[nk++] = q[i];
          }
        }
        auto [it, fresh] = slot.emplace(key, local.size());
        if (fresh) local.emplace_back(nk, Eigen::VectorXcd::Zero(space.dimension(nk)));
        const double sign = (fermions && (parity & 1)) ? -1.0 : 1.0;
        local[it->second].second[space.index_of(nk, keep.data())] += sign * a;
      }
      for (auto& [nk, w] : local) moved[nk].push_back(std::move(w));
    }
    out.append_columns(n, stay);
    for (int k = 0; k < n; ++k) {
      if (moved[k].empty()) continue;
      Eigen::MatrixXcd block(space.dimension(k), moved[k].size());
      for (std::size_t c = 0; c < moved[k].size(); ++c) block.col(c) = moved[k][c];
      out.append_columns(k, block);
    }
  }
  out.compress();
  return out;
}

SectoredDensityMatrix partial_trace_over_region(const SectoredDensityMatrix& rho,
                                                const std::vector<int>& sites) {
  std::vector<char> traced(rho.space().modes(), 0);
  for (int s : sites) {
    if (s < 0 || 2 * s + 1 >= rho.space().modes()) {
      throw ArgumentError("partial_trace_over_region: site " + std::to_string(s) + " out of range");
    }
    traced[mode_index(s, kRight)] = 1;
    traced[mode_index(s, kLeft)] = 1;
  }
  return partial_trace_modes(rho, traced);
}

namespace {

// B_s = a_{(site, s)} V for one factor, mapping sector n+1 to sector n.
std::array<Eigen::MatrixXcd, 2> lowered(const FockSpace& space, const Eigen::MatrixXcd& v, int n1,
                                        int site) {
  const int n = n1 - 1;
  std::array<Eigen::MatrixXcd, 2> b;
  for (auto& m : b) m = Eigen::MatrixXcd::Zero(space.dimension(n), v.cols());
  const bool fermions = space.statistics() == Statistics::Fermionic;
  std::array<int, kMaxParticles> rest{};
  for (Eigen::Index idx = 0; idx < space.dimension(n1); ++idx) {
    const std::uint16_t* q = space.config(n1, idx);
    for (int s = 0; s < 2; ++s) {
      const int m = mode_index(site, s);
      int pos = -1;
      int count = 0;
      for (int i = 0; i < n1; ++i) {
        if (q[i] == m) {
          if (pos < 0) pos = i;
          ++count;
        }
      }
      if (pos < 0) continue;
      int k = 0;
      for (int i = 0; i < n1; ++i) {
        if (i != pos) rest[k++] = q[i];
      }
      const double amp = fermions ? ((pos & 1) ? -1.0 : 1.0) : std::sqrt(static_cast<double>(count));
      b[s].row(space.index_of(n, rest.data())) += amp * v.row(idx);
    }
  }
  return b;
}

}  // namespace

KernelEigen kernel_eigen(const SpinMatrix& kernel) {
  KernelEigen out;
  Eigen::SelfAdjointEigenSolver<SpinMatrix> es(kernel);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (std::abs(es.eigenvalues()[1] - es.eigenvalues()[0]) <= 1e-14 * scale) {
    out.values = {es.eigenvalues()[0], es.eigenvalues()[1]};
    out.vectors = {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)};
    return out;
  }
  for (int k = 0; k < 2; ++k) {
    Eigen::Vector2cd b = es.eigenvectors().col(k);
    const int lead = std::abs(b[0]) > 1e-14 ? 0 : 1;
    b *= std::conj(b[lead]) / std::abs(b[lead]);
    b[lead] = std::abs(b[lead]);
    out.values[k] = es.eigenvalues()[k];
    out.vectors[k] = b;
  }
  return out;
}

std::vector<Eigen::MatrixXcd> annihilate_at_boundary(const SectoredDensityMatrix& rho, int site,
                                                     const SpinMatrix& kernel) {
  const FockSpace& space = rho.space();
  std::vector<Eigen::MatrixXcd> out;
  for (int n = 0; n < rho.n_max(); ++n) {
    const auto b = lowered(space, rho.factor(n + 1), n + 1, site);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(space.dimension(n), space.dimension(n));
    for (int s = 0; s < 2; ++s) {
      for (int sp = 0; sp < 2; ++sp) {
        if (kernel(sp, s) == cplx(0.0)) continue;
        d += kernel(sp, s) * b[s] * b[sp].adjoint();
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

SectoredDensityMatrix annihilate_kraus(const SectoredDensityMatrix& rho, int site,
                                       const SpinMatrix& kernel) {
  const FockSpace& space = rho.space();
  const KernelEigen ke = kernel_eigen(kernel);
  SectoredDensityMatrix out(rho.space_ptr());
  out.time = rho.time;
  out.step = rho.step;
  for (int n = 0; n < rho.n_max(); ++n) {
    const auto b = lowered(space, rho.factor(n + 1), n + 1, site);
    for (int k = 0; k < 2; ++k) {
      if (ke.values[k] <= 0.0) continue;
      const Eigen::Vector2cd& bk = ke.vectors[k];
      Eigen::MatrixXcd a = std::sqrt(ke.values[k]) *
                           (std::conj(bk[0]) * b[0] + std::conj(bk[1]) * b[1]);
      out.append_columns(n, a);
    }
  }
  return out;
}

std::vector<double> annihilation_gain(const SectoredDensityMatrix& rho, int site,
                                      const SpinMatrix& kernel) {
  const FockSpace& space = rho.space();
  std::vector<double> out;
  for (int n = 0; n < rho.n_max(); ++n) {
    const auto b = lowered(space, rho.factor(n + 1), n + 1, site);
    cplx t = 0.0;
    for (int s = 0; s < 2; ++s) {
      for (int sp = 0; sp < 2; ++sp) t += kernel(sp, s) * b[sp].conjugate().cwiseProduct(b[s]).sum();
    }
    out.push_back(t.real());
  }
  return out;
}

namespace {

double block_trace_distance(const Eigen::MatrixXcd& va, const Eigen::MatrixXcd& vb) {
  const Eigen::Index d = va.rows();
  const Eigen::Index k = va.cols() + vb.cols();
  if (k == 0) return 0.0;
  Eigen::MatrixXcd diff;
  if (k >= d || d <= 64) {
    diff = va * va.adjoint() - vb * vb.adjoint();
  } else {
    Eigen::MatrixXcd w(d, k);
    w << va, vb;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(w);
    const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::VectorXd j(k);
    j.head(va.cols()).setOnes();
    j.tail(vb.cols()).setConstant(-1.0);
    diff = r * j.asDiagonal() * r.adjoint();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace

TraceDistance compare(const SectoredDensityMatrix& a, const SectoredDensityMatrix& b) {
  const FockSpace& sa = a.space();
  const FockSpace& sb = b.space();
  if (sa.modes() != sb.modes() || sa.n_max() != sb.n_max() || sa.statistics() != sb.statistics()) {
    throw ArgumentError("compare: density matrices live on different Fock spaces");
  }
  TraceDistance td;
  for (int n = 0; n <= a.n_max(); ++n) {
    td.per_sector.push_back(block_trace_distance(a.factor(n), b.factor(n)));
    td.total += td.per_sector.back();
  }
  return td;
}

namespace {

constexpr char kMagic[8] = {'Q', 'L', 'S', 'N', 'A', 'P', '0', '1'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ArgumentError("read_snapshot: truncated stream");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const SectoredDensityMatrix& rho) {
  os.write(kMagic, sizeof(kMagic));
  put<std::int32_t>(os, rho.space().modes() / 2);
  put<std::int32_t>(os, rho.n_max());
  put<std::int32_t>(os, rho.space().statistics() == Statistics::Fermionic ? 0 : 1);
  put<double>(os, rho.time);
  put<std::int32_t>(os, rho.step);
  for (int n = 0; n <= rho.n_max(); ++n) {
    const auto& v = rho.factor(n);
    put<std::int64_t>(os, v.rows());
    put<std::int64_t>(os, v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        put<double>(os, v(i, j).real());
        put<double>(os, v(i, j).imag());
      }
    }
  }
}

SectoredDensityMatrix read_snapshot(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ArgumentError("read_snapshot: not a snapshot stream");
  }
  const int sites = get<std::int32_t>(is);
  const int n_max = get<std::int32_t>(is);
  const int stats = get<std::int32_t>(is);
  auto space = std::make_shared<const FockSpace>(2 * sites, n_max,
                                                 stats == 0 ? Statistics::Fermionic : Statistics::Bosonic);
  SectoredDensityMatrix rho(space);
  rho.time = get<double>(is);
  rho.step = get<std::int32_t>(is);
  for (int n = 0; n <= n_max; ++n) {
    const auto rows = get<std::int64_t>(is);
    const auto cols = get<std::int64_t>(is);
    if (rows != space->dimension(n)) throw ArgumentError("read_snapshot: block shape mismatch");
    Eigen::MatrixXcd v(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        v(i, j) = cplx(re, im);
      }
    }
    rho.factor(n) = std::move(v);
  }
  return rho;
}

void write_snapshot(const std::string& path, const SectoredDensityMatrix& rho) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("write_snapshot: cannot open " + path);
  write_snapshot(os, rho);
}

SectoredDensityMatrix read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("read_snapshot: cannot open " + path);
  return read_snapshot(is);
}

}  // namespace qlindblad
