#include "qlindblad/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlindblad/errors.hpp"

namespace qlindblad {

DensityTimeline build_annihilation_timeline(const QuasiLindbladEvolution& evo,
                                            const SectoredDensityMatrix& rho, int steps) {
  DensityTimeline tl;
  tl.lattice = evo.lattice();
  tl.space = rho.space_ptr();
  tl.t0 = evo.time(rho.step);
  tl.dt = evo.setup().dt;
  tl.first_step = rho.step;
  SectoredDensityMatrix cur = rho;
  for (int j = 0; j <= steps; ++j) {
    const int k = rho.step + j;
    const ActiveMask mask = evo.schedule().mask(k);
    SectoredDensityMatrix coined = cur;
    if (evo.setup().mass != 0.0) apply_one_body(coined, evo.walk().coin_operator(evo.time(k), mask));
    std::vector<Eigen::VectorXd> diag;
    for (int n = 0; n <= cur.n_max(); ++n) diag.push_back(coined.diagonal(n));
    tl.transport.push_back(std::move(diag));
    tl.sector_traces.push_back(cur.sector_traces());
    tl.active.push_back(mask);
    std::vector<double> b;
    for (const auto& c : evo.setup().surface.crossings(evo.time(k))) b.push_back(c.position);
    tl.boundaries.push_back(std::move(b));
    if (j < steps) cur = evo.lindblad_step(cur);
  }
  return tl;
}

namespace {

// Labelled-configuration amplitude factor and Fock index for the modes of
// `sites` with chirality bits `spins`; returns false if the configuration is
// excluded (fermions sharing a mode).
bool labelled_index(const FockSpace& space, const std::vector<int>& sites, unsigned spins,
                    Eigen::Index* idx, double* coef) {
  const int n = static_cast<int>(sites.size());
  int m[kMaxParticles];
  for (int i = 0; i < n; ++i) m[i] = mode_index(sites[i], (spins >> i) & 1u);
  const int sign = sort_with_sign(m, n, space.statistics());
  if (sign == 0) return false;
  *idx = space.index_of(n, m);
  *coef = sign * std::sqrt(space.occupation_factorial(n, m));
  return true;
}

void check_sites(const FockSpace& space, const Lattice& lattice, const std::vector<int>& sites) {
  const int n = static_cast<int>(sites.size());
  if (n < 1 || n > space.n_max()) throw ArgumentError("velocity: configuration size out of range");
  for (int s : sites) {
    if (s < 0 || s >= lattice.sites) throw ArgumentError("velocity: site outside the lattice");
  }
}

}  // namespace

std::vector<double> velocity(const SectoredDensityMatrix& rho, const ChartGeometry& chart,
                             const Lattice& lattice, const std::vector<int>& sites, double t) {
  const FockSpace& space = rho.space();
  check_sites(space, lattice, sites);
  const int n = static_cast<int>(sites.size());
  const unsigned dim = 1u << n;
  const Eigen::MatrixXcd& v = rho.factor(n);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, v.cols());
  for (unsigned s = 0; s < dim; ++s) {
    Eigen::Index idx;
    double coef;
    if (labelled_index(space, sites, s, &idx, &coef)) a.row(s) = coef * v.row(idx);
  }
  const Eigen::MatrixXcd spin = a * a.adjoint();
  const double norm = spin.trace().real();
  if (!(norm > 1e-300)) throw NodeError("velocity: configuration density vanishes");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const double x = lattice.position(sites[k]);
    const MetricScalars ms = chart.metric_scalars(t, x);
    const SpinMatrix a1 = chart.alpha1(t, x);
    cplx tr = 0.0;
    for (unsigned s = 0; s < dim; ++s) {
      for (unsigned sp = 0; sp < dim; ++sp) {
        if (((s ^ sp) & ~(1u << k)) != 0) continue;
        tr += spin(s, sp) * a1((sp >> k) & 1u, (s >> k) & 1u);
      }
    }
    out[k] = ms.d4 / ms.d3 * tr.real() / norm;
  }
  return out;
}

std::vector<double> bohm_dirac_velocity(const FockSpace& space, int n, const Eigen::VectorXcd& psi,
                                        const ChartGeometry& chart, const Lattice& lattice,
                                        const std::vector<int>& sites, double t) {
  check_sites(space, lattice, sites);
  if (static_cast<int>(sites.size()) != n) throw ArgumentError("bohm_dirac_velocity: size mismatch");
  const unsigned dim = 1u << n;
  Eigen::VectorXcd spinor = Eigen::VectorXcd::Zero(dim);
  for (unsigned s = 0; s < dim; ++s) {
    Eigen::Index idx;
    double coef;
    if (labelled_index(space, sites, s, &idx, &coef)) spinor[s] = coef * psi[idx];
  }
  const double norm = spinor.squaredNorm();
  if (!(norm > 1e-300)) throw NodeError("bohm_dirac_velocity: wave function vanishes");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const double x = lattice.position(sites[k]);
    const MetricScalars ms = chart.metric_scalars(t, x);
    const SpinMatrix a1 = chart.alpha1(t, x);
    Eigen::VectorXcd moved = Eigen::VectorXcd::Zero(dim);
    for (unsigned s = 0; s < dim; ++s) {
      const unsigned bit = (s >> k) & 1u;
      for (unsigned r = 0; r < 2; ++r) {
        const unsigned target = (s & ~(1u << k)) | (r << k);
        moved[target] += a1(r, bit) * spinor[s];
      }
    }
    out[k] = ms.d4 / ms.d3 * spinor.dot(moved).real() / norm;
  }
  return out;
}

std::vector<double> field_velocity(const DensityTimeline& tl, int slice,
                                   const std::vector<double>& x, double tau, double* weight) {
  const int n = static_cast<int>(x.size());
  std::vector<double> u(n, 0.0);
  if (n == 0) {
    if (weight) *weight = 1.0;
    return u;
  }
  const FockSpace& space = *tl.space;
  const Eigen::VectorXd& diag = tl.transport[slice][n];
  const ActiveMask& mask = tl.active[slice];
  const Lattice& lat = tl.lattice;
  const double speed = lat.dx / tl.dt;
  auto alive = [&](int c) { return c >= 0 && c < lat.sites && mask[c]; };
  int own[kMaxParticles];
  for (int i = 0; i < n; ++i) {
    own[i] = lat.cell_of(x[i]);
    if (!alive(own[i])) {
      // on a cell edge next to a dead cell: belongs to the live side
      const int lo = lat.cell_of(x[i] - 1e-9 * lat.dx);
      const int hi = lat.cell_of(x[i] + 1e-9 * lat.dx);
      own[i] = alive(lo) ? lo : hi;
    }
    if (!alive(own[i])) {
      if (weight) *weight = 0.0;
      return u;
    }
  }
  double total = 0.0;
  int m[kMaxParticles];
  for (unsigned s = 0; s < (1u << n); ++s) {
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      const int chir = (s >> i) & 1u;
      const double v = chir == kRight ? speed : -speed;
      const double src = x[i] - v * tau;
      int c = lat.cell_of(src);
      int src_chir = chir;
      if (!alive(c)) {
        // the walk reflects at every end of an active segment, so mass that
        // would come from a dead cell is the mirrored opposite mover
        const double edge = lat.position(own[i]) + (v > 0 ? -0.5 : 0.5) * lat.dx;
        c = lat.cell_of(2.0 * edge - src);
        src_chir = 1 - chir;
      }
      if (!alive(c)) {
        inside = false;
        break;
      }
      m[i] = mode_index(c, src_chir);
    }
    if (!inside) continue;
    const int sign = sort_with_sign(m, n, space.statistics());
    if (sign == 0) continue;
    const double w = diag[space.index_of(n, m)] * space.occupation_factorial(n, m);
    if (w == 0.0) continue;
    total += w;
    for (int i = 0; i < n; ++i) u[i] += (((s >> i) & 1u) == kRight ? speed : -speed) * w;
  }
  if (weight) *weight = total;
  if (total > 0.0) {
    for (double& ui : u) ui /= total;
  }
  return u;
}

double cell_configuration_mass(const FockSpace& space, const Eigen::VectorXd& diag,
                               std::vector<int> cells) {
  const int n = static_cast<int>(cells.size());
  if (n == 0) return diag.size() ? diag[0] : 0.0;
  std::sort(cells.begin(), cells.end());
  // distinct Fock labels: within a run of equal cells only the count of
  // right-movers matters
  double mass = 0.0;
  int m[kMaxParticles];
  for (unsigned s = 0; s < (1u << n); ++s) {
    bool canonical = true;
    for (int i = 1; i < n; ++i) {
      if (cells[i] == cells[i - 1] && ((s >> i) & 1u) < ((s >> (i - 1)) & 1u)) canonical = false;
    }
    if (!canonical) continue;
    for (int i = 0; i < n; ++i) m[i] = mode_index(cells[i], (s >> i) & 1u);
    if (sort_with_sign(m, n, space.statistics()) == 0) continue;
    mass += diag[space.index_of(n, m)];
  }
  return mass;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

int nearest_side(const std::vector<double>& boundaries, double x) {
  int best = 0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (std::abs(boundaries[i] - x) < d) {
      d = std::abs(boundaries[i] - x);
      best = static_cast<int>(i);
    }
  }
  return best;
}

double next_edge_time(const Lattice& lat, double y, double rate) {
  if (std::abs(rate) < 1e-15) return std::numeric_limits<double>::infinity();
  const double f = (y - lat.left_edge()) / lat.dx;
  double dist;
  if (rate > 0.0) {
    double nf = std::floor(f) + 1.0;
    if (nf - f < 1e-10) nf += 1.0;
    dist = (nf - f) * lat.dx;
  } else {
    double pf = std::ceil(f) - 1.0;
    if (f - pf < 1e-10) pf -= 1.0;
    dist = (f - pf) * lat.dx;
  }
  return dist / std::abs(rate);
}

// Time until the field seen by the particles changes: any shifted coordinate
// x_i -+ tau or any particle position crossing a cell edge.
double next_event(const DensityTimeline& tl, const std::vector<double>& x, double tau,
                  const std::vector<double>& u) {
  const double speed = tl.lattice.dx / tl.dt;
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double v : {speed, -speed, 0.0}) {
      h = std::min(h, next_edge_time(tl.lattice, x[i] - v * tau, u[i] - v));
    }
  }
  return h;
}

bool alive_cell(const DensityTimeline& tl, const ActiveMask& mask, double x, double dir) {
  const int c = tl.lattice.cell_of(x + (dir > 0 ? 1e-9 : dir < 0 ? -1e-9 : 0.0) * tl.lattice.dx);
  return c >= 0 && c < tl.lattice.sites && mask[c];
}

}  // namespace

StepReport transport_step(const DensityTimeline& tl, int slice, PathState& state, int path) {
  StepReport rep;
  std::vector<double>& x = state.x;
  const int n = static_cast<int>(x.size());
  if (n == 0 || slice + 1 >= tl.slices()) return rep;
  const ActiveMask& mask = tl.active[slice];
  std::vector<char> ghost(n, 0);
  std::vector<double> cross(n, 0.0);
  double tau = 0.0;
  const double end = tl.dt;
  for (int guard = 0; tau < end * (1.0 - 1e-14); ++guard) {
    if (guard > 100000) {
      state.flagged = true;
      rep.node = true;
      break;
    }
    const double hmax = end - tau;
    double w = 0.0;
    std::vector<double> u = field_velocity(tl, slice, x, tau, &w);
    double h = std::min(hmax, next_event(tl, x, tau, u));
    std::vector<double> xm(n);
    for (int it = 0; it < 6; ++it) {
      for (int i = 0; i < n; ++i) xm[i] = x[i] + 0.5 * h * u[i];
      double wm = 0.0;
      std::vector<double> um = field_velocity(tl, slice, xm, tau + 0.5 * h, &wm);
      // node: shrink the piece down to dt/64 before giving up
      double hs = h;
      while (wm == 0.0 && hs > tl.dt / 64.0) {
        hs *= 0.5;
        for (int i = 0; i < n; ++i) xm[i] = x[i] + 0.5 * hs * u[i];
        um = field_velocity(tl, slice, xm, tau + 0.5 * hs, &wm);
      }
      if (wm == 0.0) {
        state.flagged = true;
        rep.node = true;
        break;
      }
      h = hs;
      if (um == u) break;
      u = um;
      h = std::min(hmax, next_event(tl, x, tau, u));
    }
    state.min_piece = std::min(state.min_piece, h / tl.dt);
    for (int i = 0; i < n; ++i) x[i] += h * u[i];
    tau += h;
    if (!tl.creation) {
      for (int i = 0; i < n; ++i) {
        if (!ghost[i] && !alive_cell(tl, mask, x[i], u[i])) {
          ghost[i] = 1;
          cross[i] = tl.time(slice) + tau;
        }
      }
    }
  }
  if (tl.creation) return rep;
  const ActiveMask& next = tl.active[slice + 1];
  std::vector<double> kept;
  for (int i = 0; i < n; ++i) {
    const bool dies = ghost[i] || !alive_cell(tl, next, x[i], 0.0);
    if (!dies) {
      kept.push_back(x[i]);
      continue;
    }
    ParticleEvent e;
    e.path = path;
    e.t = ghost[i] ? cross[i] : tl.time(slice + 1);
    e.step = tl.first_step + slice + 1;
    e.position = x[i];
    e.side = nearest_side(tl.boundaries[slice + 1], x[i]);
    rep.events.push_back(e);
  }
  x = std::move(kept);
  return rep;
}

namespace {

class ConfigurationSampler {
 public:
  ConfigurationSampler(const DensityTimeline& tl, int slice) : tl_(tl), slice_(slice) {
    const auto& tr = tl.sector_traces[slice];
    double acc = 0.0;
    for (double t : tr) {
      acc += std::max(t, 0.0);
      sector_cdf_.push_back(acc);
    }
    for (int n = 0; n < static_cast<int>(tr.size()); ++n) {
      const Eigen::VectorXd& d = tl.transport[slice][n];
      std::vector<double> c(d.size());
      double a = 0.0;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        a += std::max(d[i], 0.0);
        c[i] = a;
      }
      cdf_.push_back(std::move(c));
    }
  }

  std::vector<double> draw(std::mt19937_64& rng) const {
    const double total = sector_cdf_.back();
    const double r = uniform01(rng) * total;
    int n = static_cast<int>(std::upper_bound(sector_cdf_.begin(), sector_cdf_.end(), r) -
                             sector_cdf_.begin());
    n = std::min(n, static_cast<int>(sector_cdf_.size()) - 1);
    while (n > 0 && cdf_[n].back() <= 0.0) --n;
    std::vector<double> x;
    if (n == 0) return x;
    const auto& c = cdf_[n];
    const double rr = uniform01(rng) * c.back();
    Eigen::Index idx = std::upper_bound(c.begin(), c.end(), rr) - c.begin();
    idx = std::min<Eigen::Index>(idx, static_cast<Eigen::Index>(c.size()) - 1);
    const std::uint16_t* q = tl_.space->config(n, idx);
    for (int i = 0; i < n; ++i) {
      const int cell = mode_site(q[i]);
      x.push_back(tl_.lattice.position(cell) + (uniform01(rng) - 0.5) * tl_.lattice.dx);
    }
    return x;
  }

 private:
  const DensityTimeline& tl_;
  int slice_;
  std::vector<double> sector_cdf_;
  std::vector<std::vector<double>> cdf_;
};

}  // namespace

std::vector<double> sample_configuration(const DensityTimeline& tl, int slice, std::mt19937_64& rng) {
  return ConfigurationSampler(tl, slice).draw(rng);
}

std::vector<std::vector<double>> reference_marginals(const DensityTimeline& tl, int slice, int bins) {
  const FockSpace& space = *tl.space;
  const Lattice& lat = tl.lattice;
  const int nmax = space.n_max();
  std::vector<std::vector<double>> ref(nmax + 1, std::vector<double>(bins, 0.0));
  const double lo = lat.left_edge();
  const double width = (lat.right_edge() - lo) / bins;
  ref[0].assign(bins, 0.0);
  ref[0][0] = tl.transport[slice][0].size() ? tl.transport[slice][0][0] : 0.0;
  for (int n = 1; n <= nmax; ++n) {
    std::vector<double> cell(lat.sites, 0.0);
    const Eigen::VectorXd& d = tl.transport[slice][n];
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] == 0.0) continue;
      const std::uint16_t* q = space.config(n, i);
      for (int p = 0; p < n; ++p) cell[mode_site(q[p])] += d[i] / n;
    }
    for (int c = 0; c < lat.sites; ++c) {
      if (cell[c] == 0.0) continue;
      const double a = lat.position(c) - 0.5 * lat.dx;
      const double b = a + lat.dx;
      const int b0 = std::clamp(static_cast<int>(std::floor((a - lo) / width)), 0, bins - 1);
      const int b1 = std::clamp(static_cast<int>(std::floor((b - lo) / width - 1e-12)), 0, bins - 1);
      for (int bb = b0; bb <= b1; ++bb) {
        const double l = std::max(a, lo + bb * width);
        const double r = std::min(b, lo + (bb + 1) * width);
        if (r > l) ref[n][bb] += cell[c] * (r - l) / lat.dx;
      }
    }
  }
  return ref;
}

CheckpointStats checkpoint_stats(const DensityTimeline& tl, int slice, int bins,
                                 const std::vector<std::vector<double>>& configs) {
  const int nmax = tl.space->n_max();
  const Lattice& lat = tl.lattice;
  CheckpointStats st;
  st.slice = slice;
  st.t = tl.time(slice);
  st.reference = reference_marginals(tl, slice, bins);
  st.empirical.assign(nmax + 1, std::vector<double>(bins, 0.0));
  st.sector_counts.assign(nmax + 1, 0);
  const double total = static_cast<double>(configs.size());
  const double lo = lat.left_edge();
  const double width = (lat.right_edge() - lo) / bins;
  for (const auto& x : configs) {
    const int n = static_cast<int>(x.size());
    ++st.sector_counts[n];
    if (n == 0) {
      st.empirical[0][0] += 1.0 / total;
      continue;
    }
    for (double xi : x) {
      const int b = std::clamp(static_cast<int>(std::floor((xi - lo) / width)), 0, bins - 1);
      st.empirical[n][b] += 1.0 / (n * total);
    }
  }
  double tv = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    for (int b = 0; b < bins; ++b) tv += std::abs(st.empirical[n][b] - st.reference[n][b]);
  }
  st.tv_distance = 0.5 * tv;
  double trace = 0.0;
  for (double t : tl.sector_traces[slice]) trace += t;
  for (int n = 0; n <= nmax; ++n) {
    const double p = std::clamp(tl.sector_traces[slice][n] / trace, 0.0, 1.0);
    st.expected_counts.push_back(p * total);
    st.sector_sigma.push_back(std::sqrt(total * p * (1.0 - p)));
    const double dev = std::abs(st.sector_counts[n] - p * total);
    if (dev > std::max(3.0 * st.sector_sigma.back(), 0.5)) st.sectors_within_3sigma = false;
  }
  return st;
}

EnsembleResult run_annihilation_ensemble(const DensityTimeline& tl, const EnsembleOptions& opts) {
  if (opts.size < 1) throw ConfigError("ensemble.size must be positive");
  for (int c : opts.checkpoints) {
    if (c < 0 || c >= tl.slices()) throw ConfigError("ensemble checkpoint outside the timeline");
  }
  const ConfigurationSampler sampler(tl, 0);
  const int ncp = static_cast<int>(opts.checkpoints.size());
  std::vector<std::vector<std::vector<double>>> at(ncp, std::vector<std::vector<double>>(opts.size));
  std::vector<std::vector<ParticleEvent>> events(opts.size);
  std::vector<std::vector<PathRecord>> recorded(opts.size);
  std::vector<char> flagged(opts.size, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (int p = 0; p < opts.size; ++p) {
    auto rng = path_rng(opts.seed, static_cast<std::uint64_t>(p));
    PathState st;
    st.x = sampler.draw(rng);
    for (int s = 0; s < tl.slices(); ++s) {
      for (int c = 0; c < ncp; ++c) {
        if (opts.checkpoints[c] == s) at[c][p] = st.x;
      }
      if (p < opts.recorded_paths) recorded[p].push_back({p, s, tl.time(s), st.x});
      if (s + 1 < tl.slices()) {
        StepReport r = transport_step(tl, s, st, p);
        for (auto& e : r.events) events[p].push_back(e);
      }
    }
    flagged[p] = st.flagged;
  }
  EnsembleResult res;
  res.size = opts.size;
  for (int c = 0; c < ncp; ++c) {
    res.checkpoints.push_back(checkpoint_stats(tl, opts.checkpoints[c], opts.bins, at[c]));
  }
  for (int p = 0; p < opts.size; ++p) {
    res.events.insert(res.events.end(), events[p].begin(), events[p].end());
    res.recorded.insert(res.recorded.end(), recorded[p].begin(), recorded[p].end());
    res.flagged_paths += flagged[p];
  }
  return res;
}

}  // namespace qlindblad
