#include "qlindblad/creation.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <functional>

#include "qlindblad/errors.hpp"

namespace qlindblad {

namespace {

// Fock index permutation of the chirality swap in sector n, with fermionic signs.
void swap_map(const FockSpace& space, int n, std::vector<Eigen::Index>& target,
              std::vector<double>& sign) {
  const Eigen::Index d = space.dimension(n);
  target.resize(d);
  sign.resize(d);
  int m[kMaxParticles];
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::uint16_t* q = space.config(n, i);
    for (int p = 0; p < n; ++p) m[p] = q[p] ^ 1;
    sign[i] = sort_with_sign(m, n, space.statistics());
    target[i] = space.index_of(n, m);
  }
}

Eigen::VectorXd reflect_diagonal(const FockSpace& space, int n, const Eigen::VectorXd& diag) {
  std::vector<Eigen::Index> target;
  std::vector<double> sign;
  swap_map(space, n, target, sign);
  Eigen::VectorXd out(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) out[target[i]] = diag[i];
  return out;
}

std::vector<Eigen::VectorXd> reflected_diagonals(const SectoredDensityMatrix& rho) {
  std::vector<Eigen::VectorXd> out;
  for (int n = 0; n <= rho.n_max(); ++n) out.push_back(reflect_diagonal(rho.space(), n, rho.diagonal(n)));
  return out;
}

std::vector<double> crossing_positions(const EvolutionSetup& setup, double t) {
  std::vector<double> b;
  for (const auto& c : setup.surface.crossings(t)) b.push_back(c.position);
  return b;
}

// Distinct Fock labels (sorted modes) whose cells are `cells`.
std::vector<std::array<int, kMaxParticles>> spin_labels(const FockSpace& space,
                                                        std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  const int n = static_cast<int>(cells.size());
  std::vector<std::array<int, kMaxParticles>> out;
  for (unsigned s = 0; s < (1u << n); ++s) {
    bool canonical = true;
    for (int i = 1; i < n; ++i) {
      if (cells[i] == cells[i - 1] && ((s >> i) & 1u) < ((s >> (i - 1)) & 1u)) canonical = false;
    }
    if (!canonical) continue;
    std::array<int, kMaxParticles> m{};
    for (int i = 0; i < n; ++i) m[i] = mode_index(cells[i], (s >> i) & 1u);
    if (sort_with_sign(m.data(), n, space.statistics()) == 0) continue;
    out.push_back(m);
  }
  return out;
}

}  // namespace

SectoredDensityMatrix time_reflect(const SectoredDensityMatrix& rho) {
  const FockSpace& space = rho.space();
  SectoredDensityMatrix out(rho.space_ptr());
  out.time = -rho.time;
  out.step = rho.step;
  std::vector<Eigen::Index> target;
  std::vector<double> sign;
  for (int n = 0; n <= rho.n_max(); ++n) {
    const Eigen::MatrixXcd& v = rho.factor(n);
    swap_map(space, n, target, sign);
    Eigen::MatrixXcd w(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) w.row(target[i]) = sign[i] * v.row(i).conjugate();
    out.factor(n) = std::move(w);
  }
  return out;
}

ReversedTimeline reversed_dm_timeline(const EvolutionSetup& reflected_setup,
                                      const SectoredDensityMatrix& rho_final, int steps) {
  if (steps < 1) throw ArgumentError("reversed_dm_timeline: need at least one step");
  const QuasiLindbladEvolution evo(reflected_setup);
  const auto& sched = evo.schedule();
  SectoredDensityMatrix cur = time_reflect(rho_final);
  cur.step = 0;
  cur.time = evo.time(0);
  restrict_to_active(cur, sched.mask(0));
  if (std::abs(cur.trace() - rho_final.trace()) > 1e-12) {
    throw ArgumentError("reversed_dm_timeline: final state has weight beyond the surface");
  }

  std::vector<SectoredDensityMatrix> states{cur};
  std::vector<SectoredDensityMatrix> walked(1, cur);
  for (int j = 1; j <= steps; ++j) {
    SectoredDensityMatrix w;
    cur = evo.lindblad_step(cur, &w);
    states.push_back(cur);
    walked.push_back(std::move(w));
  }

  ReversedTimeline rt;
  rt.steps = steps;
  DensityTimeline& rf = rt.reflected;
  rf.lattice = reflected_setup.lattice;
  rf.space = rho_final.space_ptr();
  rf.t0 = evo.time(0);
  rf.dt = reflected_setup.dt;
  for (int j = 0; j <= steps; ++j) {
    SectoredDensityMatrix coined = states[j];
    if (reflected_setup.mass != 0.0) {
      apply_one_body(coined, evo.walk().coin_operator(evo.time(j), sched.mask(j)));
    }
    std::vector<Eigen::VectorXd> d;
    for (int n = 0; n <= coined.n_max(); ++n) d.push_back(coined.diagonal(n));
    rf.transport.push_back(std::move(d));
    rf.sector_traces.push_back(states[j].sector_traces());
    rf.active.push_back(sched.mask(j));
    rf.boundaries.push_back(crossing_positions(reflected_setup, evo.time(j)));
  }

  DensityTimeline& cr = rt.creation;
  cr.lattice = reflected_setup.lattice;
  cr.space = rho_final.space_ptr();
  cr.t0 = -evo.time(steps);
  cr.dt = reflected_setup.dt;
  cr.creation = true;
  for (int k = 0; k <= steps; ++k) {
    const int j = steps - k;
    cr.pre_jump.push_back(reflected_diagonals(states[j]));
    if (k < steps) {
      cr.transport.push_back(reflected_diagonals(walked[j]));
      cr.sector_traces.push_back(walked[j].sector_traces());
      cr.active.push_back(sched.mask(j - 1));
      cr.created_cells.push_back(sched.swallowed(j - 1));
    } else {
      cr.transport.push_back(reflected_diagonals(states[0]));
      cr.sector_traces.push_back(states[0].sector_traces());
      cr.active.push_back(sched.mask(0));
      cr.created_cells.emplace_back();
    }
    cr.boundaries.push_back(crossing_positions(reflected_setup, evo.time(j)));
  }
  return rt;
}

double minimal_jump_rate(const RateMeasure& measure, int target, int source) {
  const double den = measure.source_weight(source);
  if (!(den > 1e-300)) throw NodeError("minimal_jump_rate: source configuration has no weight");
  return std::max(measure.weighted_trace(target, source).real(), 0.0) / den;
}

PastSingularityMeasure::PastSingularityMeasure(const SectoredDensityMatrix& rho,
                                               std::vector<int> q_cells,
                                               std::vector<BoundaryCell> boundary)
    : rho_(rho), q_(std::move(q_cells)), boundary_(std::move(boundary)) {
  if (static_cast<int>(q_.size()) >= rho.n_max()) {
    throw ArgumentError("PastSingularityMeasure: no sector above the configuration");
  }
}

cplx PastSingularityMeasure::weighted_trace(int target, int source) const {
  if (source != 0) throw ArgumentError("PastSingularityMeasure: single source configuration");
  const BoundaryCell& bc = boundary_.at(target);
  const FockSpace& space = rho_.space();
  const int n = static_cast<int>(q_.size());
  const Eigen::MatrixXcd& v = rho_.factor(n + 1);
  cplx tr = 0.0;
  for (const auto& lab : spin_labels(space, q_)) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, v.cols());
    for (int s = 0; s < 2; ++s) {
      int m[kMaxParticles];
      for (int i = 0; i < n; ++i) m[i] = lab[i];
      m[n] = mode_index(bc.site, s);
      const int sign = sort_with_sign(m, n + 1, space.statistics());
      if (sign == 0) continue;
      a.row(s) = sign * std::sqrt(space.occupation_factorial(n + 1, m)) * v.row(space.index_of(n + 1, m));
    }
    tr += (a * a.adjoint() * bc.fock_kernel).trace();
  }
  return tr;
}

double PastSingularityMeasure::source_weight(int source) const {
  if (source != 0) throw ArgumentError("PastSingularityMeasure: single source configuration");
  const int n = static_cast<int>(q_.size());
  double w = 0.0;
  for (const auto& lab : spin_labels(rho_.space(), q_)) {
    w += rho_.factor(n).row(rho_.space().index_of(n, lab.data())).squaredNorm() *
         rho_.space().occupation_factorial(n, lab.data());
  }
  return w;
}

CustomMeasure::CustomMeasure(Eigen::MatrixXcd rho, std::vector<std::vector<Eigen::MatrixXcd>> jump,
                             std::vector<Eigen::MatrixXcd> projector)
    : rho_(std::move(rho)), jump_(std::move(jump)), projector_(std::move(projector)) {}

cplx CustomMeasure::weighted_trace(int target, int source) const {
  return (rho_ * jump_.at(target).at(source)).trace();
}

double CustomMeasure::source_weight(int source) const {
  return (rho_ * projector_.at(source)).trace().real();
}

double creation_rate(const SectoredDensityMatrix& rho, const std::vector<int>& q_cells,
                     const BoundaryCell& boundary) {
  const FockSpace& space = rho.space();
  const int n = static_cast<int>(q_cells.size());
  if (n >= rho.n_max()) throw ArgumentError("creation_rate: no sector above the configuration");
  if (std::find(q_cells.begin(), q_cells.end(), boundary.site) != q_cells.end()) {
    throw ArgumentError("creation_rate: boundary cell already occupied by the configuration");
  }
  const Eigen::MatrixXcd& lo = rho.factor(n);
  const Eigen::MatrixXcd& hi = rho.factor(n + 1);
  const bool fermions = space.statistics() == Statistics::Fermionic;
  double den = 0.0;
  cplx num = 0.0;
  for (const auto& lab : spin_labels(space, q_cells)) {
    den += lo.row(space.index_of(n, lab.data())).squaredNorm() * space.occupation_factorial(n, lab.data());
    std::array<Eigen::RowVectorXcd, 2> row;
    for (int s = 0; s < 2; ++s) {
      const int mode = mode_index(boundary.site, s);
      int m[kMaxParticles];
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        if (lab[i] < mode) ++pos;
      }
      for (int i = 0, k = 0; i <= n; ++i) m[i] = i == pos ? mode : lab[k++];
      // a_x lowers |Q + x> to |Q> with (-1)^{modes before x}; symmetric weight
      // sqrt(prod n!) carried by the labelled amplitude of q
      const double sign = fermions && (pos & 1) ? -1.0 : 1.0;
      row[s] = sign * std::sqrt(space.occupation_factorial(n, lab.data())) *
               hi.row(space.index_of(n + 1, m));
    }
    for (int s = 0; s < 2; ++s) {
      for (int sp = 0; sp < 2; ++sp) num += boundary.fock_kernel(sp, s) * row[s].dot(row[sp]);
    }
  }
  if (!(den > 1e-300)) throw NodeError("creation_rate: configuration has no weight");
  return num.real() / den;
}

double JumpLaw::jump_probability() const {
  double p = 0.0;
  for (double v : probabilities) p += v;
  return p;
}

JumpLaw jump_law(const DensityTimeline& tl, int slice, const std::vector<int>& cells) {
  const FockSpace& space = *tl.space;
  const int n = static_cast<int>(cells.size());
  JumpLaw law;
  law.before = cell_configuration_mass(space, tl.pre_jump[slice][n], cells);
  if (!(law.before > 0.0)) return law;
  law.stay = cell_configuration_mass(space, tl.transport[slice][n], cells) / law.before;
  const std::vector<int>& fresh = tl.created_cells[slice];
  const int room = space.n_max() - n;
  std::vector<int> pick;
  // multisets of fresh cells, non-decreasing index order
  std::function<void(int)> rec = [&](int from) {
    if (!pick.empty()) {
      std::vector<int> all = cells;
      for (int p : pick) all.push_back(fresh[p]);
      const int m = static_cast<int>(all.size());
      const double mass = cell_configuration_mass(space, tl.transport[slice][m], all);
      if (mass > 0.0) {
        std::vector<int> add;
        for (int p : pick) add.push_back(fresh[p]);
        law.additions.push_back(std::move(add));
        law.probabilities.push_back(mass / law.before);
      }
    }
    if (static_cast<int>(pick.size()) == room) return;
    for (int i = from; i < static_cast<int>(fresh.size()); ++i) {
      pick.push_back(i);
      rec(i);
      pick.pop_back();
    }
  };
  rec(0);
  return law;
}

namespace {

double dilated_bound(const DensityTimeline& tl, int slice, const std::vector<int>& cells) {
  const int n = static_cast<int>(cells.size());
  double worst = 0.0;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    std::vector<int> moved(cells);
    int c = code;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      moved[i] += c % 3 - 1;
      c /= 3;
      if (moved[i] < 0 || moved[i] >= tl.lattice.sites) ok = false;
    }
    if (!ok) continue;
    const JumpLaw law = jump_law(tl, slice, moved);
    if (law.before > 0.0) worst = std::max(worst, law.jump_probability());
  }
  return std::min(1.0, 2.0 * worst);
}

std::vector<double> draw_from(const FockSpace& space, const Lattice& lat,
                              const std::vector<Eigen::VectorXd>& diag, std::mt19937_64& rng) {
  std::vector<double> sector;
  double total = 0.0;
  for (const auto& d : diag) {
    total += std::max(d.sum(), 0.0);
    sector.push_back(total);
  }
  const double r = uniform01(rng) * total;
  int n = static_cast<int>(std::upper_bound(sector.begin(), sector.end(), r) - sector.begin());
  n = std::min(n, static_cast<int>(diag.size()) - 1);
  std::vector<double> x;
  if (n == 0) return x;
  const Eigen::VectorXd& d = diag[n];
  double rr = uniform01(rng) * d.sum();
  Eigen::Index idx = 0;
  for (; idx + 1 < d.size(); ++idx) {
    rr -= std::max(d[idx], 0.0);
    if (rr < 0.0) break;
  }
  const std::uint16_t* q = space.config(n, idx);
  for (int i = 0; i < n; ++i) {
    x.push_back(lat.position(mode_site(q[i])) + (uniform01(rng) - 0.5) * lat.dx);
  }
  return x;
}

}  // namespace

CreationResult simulate_creation_process(const DensityTimeline& tl, const CreationOptions& opts) {
  if (!tl.creation) throw ArgumentError("simulate_creation_process: not a creation timeline");
  if (opts.size < 1) throw ConfigError("ensemble.size must be positive");
  const FockSpace& space = *tl.space;
  const int ncp = static_cast<int>(opts.checkpoints.size());
  std::vector<std::vector<std::vector<double>>> at(ncp, std::vector<std::vector<double>>(opts.size));
  std::vector<std::vector<ParticleEvent>> events(opts.size);
  std::vector<std::vector<PathRecord>> recorded(opts.size);
  std::vector<int> created(opts.size, 0);
  std::vector<int> retries(opts.size, 0);
  std::vector<char> flagged(opts.size, 0);
  std::vector<char> monotone(opts.size, 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (int p = 0; p < opts.size; ++p) {
    auto rng = path_rng(opts.seed, static_cast<std::uint64_t>(p));
    PathState st;
    st.x = draw_from(space, tl.lattice, tl.pre_jump[0], rng);
    for (int k = 0; k < tl.slices(); ++k) {
      if (k + 1 < tl.slices() && !tl.created_cells[k].empty() &&
          static_cast<int>(st.x.size()) < space.n_max()) {
        std::vector<int> cells;
        for (double xi : st.x) cells.push_back(tl.lattice.cell_of(xi));
        const JumpLaw law = jump_law(tl, k, cells);
        if (!(law.before > 0.0)) {
          st.flagged = true;
        } else {
          const double pj = law.jump_probability();
          double bound = dilated_bound(tl, k, cells);
          while (pj > bound * (1.0 + 1e-12)) {
            ++retries[p];
            bound = std::min(1.0, 2.0 * pj);
          }
          if (bound > 0.0 && uniform01(rng) < bound && uniform01(rng) * bound < pj) {
            double r = uniform01(rng) * pj;
            std::size_t pick = 0;
            for (; pick + 1 < law.probabilities.size(); ++pick) {
              r -= law.probabilities[pick];
              if (r < 0.0) break;
            }
            for (int c : law.additions[pick]) {
              const double pos = tl.lattice.position(c) + (uniform01(rng) - 0.5) * tl.lattice.dx;
              st.x.push_back(pos);
              ParticleEvent e;
              e.path = p;
              e.creation = true;
              e.t = tl.time(k);
              e.step = k;
              e.position = pos;
              int best = 0;
              double dist = 1e300;
              for (std::size_t b = 0; b < tl.boundaries[k].size(); ++b) {
                if (std::abs(tl.boundaries[k][b] - pos) < dist) {
                  dist = std::abs(tl.boundaries[k][b] - pos);
                  best = static_cast<int>(b);
                }
              }
              e.side = best;
              events[p].push_back(e);
              ++created[p];
            }
          }
        }
      }
      for (int c = 0; c < ncp; ++c) {
        if (opts.checkpoints[c] == k) at[c][p] = st.x;
      }
      if (p < opts.recorded_paths) recorded[p].push_back({p, k, tl.time(k), st.x});
      if (k + 1 < tl.slices()) {
        const std::size_t before = st.x.size();
        transport_step(tl, k, st, p);
        if (st.x.size() < before) monotone[p] = 0;
      }
    }
    flagged[p] = st.flagged;
  }
  CreationResult res;
  res.ensemble.size = opts.size;
  for (int c = 0; c < ncp; ++c) {
    res.ensemble.checkpoints.push_back(checkpoint_stats(tl, opts.checkpoints[c], opts.bins, at[c]));
  }
  for (int p = 0; p < opts.size; ++p) {
    res.ensemble.events.insert(res.ensemble.events.end(), events[p].begin(), events[p].end());
    res.ensemble.recorded.insert(res.ensemble.recorded.end(), recorded[p].begin(), recorded[p].end());
    res.ensemble.flagged_paths += flagged[p];
    res.bound_retries += retries[p];
    res.monotone = res.monotone && monotone[p];
  }
  res.creations_per_path = std::move(created);
  return res;
}

ChiSquareResult chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("chi_square_two_sample: bin count mismatch");
  ChiSquareResult out;
  out.first = a;
  out.second = b;
  double ra = 0.0;
  double rb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ra += a[i];
    rb += b[i];
  }
  if (ra <= 0.0 || rb <= 0.0) return out;
  int used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = a[i] + b[i];
    if (s <= 0.0) continue;
    const double d = std::sqrt(rb / ra) * a[i] - std::sqrt(ra / rb) * b[i];
    out.statistic += d * d / s;
    ++used;
  }
  out.dof = used - 1;
  if (out.dof < 1) return out;
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

std::vector<double> bin_events(const std::vector<ParticleEvent>& events, int steps, int time_bins,
                               int sides, bool reflected) {
  std::vector<double> h(static_cast<std::size_t>(time_bins) * sides, 0.0);
  for (const auto& e : events) {
    const int k = reflected ? steps - e.step : e.step;
    if (k < 0 || k >= steps) continue;
    const int b = std::min(time_bins - 1, k * time_bins / steps);
    const int s = std::clamp(e.side, 0, sides - 1);
    h[static_cast<std::size_t>(b) * sides + s] += 1.0;
  }
  return h;
}

}  // namespace qlindblad
