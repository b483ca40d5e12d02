#include "qlindblad/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qlindblad/errors.hpp"
#include "qlindblad/initial_state.hpp"
#include "qlindblad/oracle.hpp"

namespace qlindblad {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> checkpoint_slices(int steps, int count) {
  std::set<int> s;
  if (count == 1) {
    s.insert(steps);
  } else {
    for (int i = 0; i < count; ++i) {
      s.insert(static_cast<int>(std::lround(static_cast<double>(i) * steps / (count - 1))));
    }
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> sector_columns(int n_max, const std::string& prefix) {
  std::vector<std::string> c;
  for (int n = 0; n <= n_max; ++n) c.push_back(prefix + std::to_string(n));
  return c;
}

CsvTable step_table(const std::string& name, const MonitoredRun& run, int n_max) {
  CsvTable t{name, {"step", "t", "trace", "purity"}, {}};
  for (auto& c : sector_columns(n_max, "sector_")) t.columns.push_back(c);
  t.columns.push_back("oracle_distance");
  t.columns.push_back("edge_weight");
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    std::vector<double> row{static_cast<double>(r.step), r.t, r.trace, r.purity};
    for (double s : r.sector_traces) row.push_back(s);
    row.push_back(i < run.oracle_distance.size() ? run.oracle_distance[i]
                                                 : std::numeric_limits<double>::quiet_NaN());
    row.push_back(r.edge_weight);
    t.add(std::move(row));
  }
  return t;
}

CsvTable event_table(const std::string& name, const std::vector<ParticleEvent>& events) {
  CsvTable t{name, {"path", "creation", "t", "step", "position", "side"}, {}};
  for (const auto& e : events) {
    t.add({static_cast<double>(e.path), e.creation ? 1.0 : 0.0, e.t, static_cast<double>(e.step),
           e.position, static_cast<double>(e.side)});
  }
  return t;
}

CsvTable path_table(const std::string& name, const std::vector<PathRecord>& recs, int n_max) {
  CsvTable t{name, {"t", "path", "n"}, {}};
  for (int p = 0; p < n_max; ++p) t.columns.push_back("x" + std::to_string(p + 1));
  for (const auto& r : recs) {
    std::vector<double> row{r.t, static_cast<double>(r.path), static_cast<double>(r.x.size())};
    for (int p = 0; p < n_max; ++p) {
      row.push_back(p < static_cast<int>(r.x.size()) ? r.x[p] : std::numeric_limits<double>::quiet_NaN());
    }
    t.add(std::move(row));
  }
  return t;
}

CsvTable checkpoint_table(const std::string& name, const std::vector<CheckpointStats>& cps,
                          int n_max) {
  CsvTable t{name, {"slice", "t", "tv_distance"}, {}};
  for (auto& c : sector_columns(n_max, "count_")) t.columns.push_back(c);
  for (auto& c : sector_columns(n_max, "expected_")) t.columns.push_back(c);
  for (const auto& c : cps) {
    std::vector<double> row{static_cast<double>(c.slice), c.t, c.tv_distance};
    for (int n = 0; n <= n_max; ++n) row.push_back(n < static_cast<int>(c.sector_counts.size()) ? c.sector_counts[n] : 0);
    for (int n = 0; n <= n_max; ++n) row.push_back(n < static_cast<int>(c.expected_counts.size()) ? c.expected_counts[n] : 0);
    t.add(std::move(row));
  }
  return t;
}

double max_sector_z(const std::vector<CheckpointStats>& cps) {
  double z = 0.0;
  for (const auto& c : cps) {
    for (std::size_t n = 0; n < c.sector_counts.size(); ++n) {
      const double dev = std::abs(c.sector_counts[n] - c.expected_counts[n]);
      const double sigma = c.sector_sigma[n];
      // a sector with zero variance must be matched exactly (within rounding)
      z = std::max(z, sigma > 0.0 ? dev / sigma : (dev > 0.5 ? std::numeric_limits<double>::infinity() : 0.0));
    }
  }
  return z;
}

std::string summary_text(const std::vector<std::pair<std::string, double>>& kv) {
  std::ostringstream os;
  os << "{\n  \"schema_version\": " << kSchemaVersion;
  for (const auto& [k, v] : kv) os << ",\n  \"" << k << "\": " << (std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\"");
  os << "\n}\n";
  return os.str();
}

}  // namespace

std::shared_ptr<const FockSpace> make_space(const RunConfig& cfg) {
  return std::make_shared<const FockSpace>(2 * cfg.sites, cfg.n_max, cfg.statistics);
}

SectoredDensityMatrix initial_state(const RunConfig& cfg, const QuasiLindbladEvolution& evo,
                                    const std::shared_ptr<const FockSpace>& space) {
  std::vector<Eigen::VectorXcd> orbitals;
  for (const auto& p : cfg.packets) orbitals.push_back(gaussian_packet(evo.lattice(), p));
  const int n = static_cast<int>(orbitals.size());
  auto rho = SectoredDensityMatrix::pure(space, n, product_state(*space, orbitals));
  rho.step = 0;
  rho.time = evo.time(0);
  restrict_to_active(rho, evo.schedule().mask(0));
  const double tr = rho.trace();
  if (!(tr >= 0.5)) {
    throw ConfigError("initial packets: only " + format_double(tr) +
                      " of the weight lies in front of the surface at t_start");
  }
  rho.factor(n) /= std::sqrt(tr);
  return rho;
}

MonitoredRun monitored_run(const RunConfig& cfg, const MonitorOptions& opts, double epsilon_override) {
  const auto t_begin = Clock::now();
  const EvolutionSetup setup = cfg.setup(epsilon_override);
  const QuasiLindbladEvolution evo(setup);
  const auto space = make_space(cfg);
  SectoredDensityMatrix rho = initial_state(cfg, evo, space);
  const int n0 = static_cast<int>(cfg.packets.size());

  std::unique_ptr<UnitaryOracle> oracle;
  Eigen::VectorXcd psi;
  if (opts.oracle) {
    oracle = std::make_unique<UnitaryOracle>(setup, space);
    psi = rho.factor(n0).col(0);
  }

  MonitoredRun out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  const double purity0 = rho.purity();
  double prev_purity = purity0;
  double min_purity = purity0;

  auto observe = [&](const SectoredDensityMatrix& r) {
    StepRecord rec = evo.record(r);
    out.max_trace_error = std::max(out.max_trace_error, std::abs(rec.trace - 1.0));
    out.max_edge_weight = std::max(out.max_edge_weight, rec.edge_weight);
    out.max_purity_increase = std::max(out.max_purity_increase, rec.purity - prev_purity);
    prev_purity = rec.purity;
    min_purity = std::min(min_purity, rec.purity);
    if (opts.eigen_every > 0 && r.step % opts.eigen_every == 0) {
      for (int n = 0; n <= r.n_max(); ++n) out.min_eigenvalue = std::min(out.min_eigenvalue, r.min_eigenvalue(n));
    }
    if (oracle) {
      if (r.step > 0) psi = oracle->step(n0, psi, r.step - 1);
      const double d = compare(r, oracle->reduced_dm(n0, psi, r.step)).total;
      out.oracle_distance.push_back(d);
      out.max_oracle_distance = std::max(out.max_oracle_distance, d);
    }
    if (opts.lforms) {
      for (const auto& cell : evo.boundary_cells(r.step)) {
        const auto direct = annihilate_at_boundary(r, cell.site, cell.fock_kernel);
        const auto kraus = annihilate_kraus(r, cell.site, cell.fock_kernel);
        for (std::size_t n = 0; n < direct.size(); ++n) {
          const double diff = (direct[n] - kraus.dense_block(static_cast<int>(n))).cwiseAbs().maxCoeff();
          out.max_lform_difference = std::max(out.max_lform_difference, diff);
        }
      }
    }
    if (opts.snapshot_every > 0 && r.step % opts.snapshot_every == 0) out.snapshots.emplace_back(r.step, r);
    out.records.push_back(std::move(rec));
  };

  out.final_state = evo.run(rho, cfg.steps, observe);
  out.purity_drop = purity0 - min_purity;
  out.seconds = seconds_since(t_begin);
  return out;
}

DisentangledCheck disentangled_check(const RunConfig& cfg) {
  if (cfg.packets.size() != 2) throw ConfigError("disentangled check needs exactly two packets");
  const EvolutionSetup setup = cfg.setup();
  const QuasiLindbladEvolution evo(setup);
  const auto space = make_space(cfg);
  SectoredDensityMatrix rho = initial_state(cfg, evo, space);

  DisentangledCheck out;
  for (int k = 0; k <= cfg.steps; ++k) {
    if (k > 0) rho = evo.lindblad_step(rho);
    if (rho.sector_trace(2) <= 1e-10) {
      out.step = k;
      break;
    }
  }
  if (out.step < 0) return out;

  const UnitaryOracle oracle(setup, std::make_shared<const FockSpace>(2 * cfg.sites, 1, cfg.statistics));
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXcd phi = gaussian_packet(setup.lattice, cfg.packets[i]);
    phi = oracle.unitary_reference(1, phi, 0, out.step);
    const double f = rho.expectation(1, phi);
    if (f > out.fidelity) {
      out.fidelity = f;
      out.survivor = i;
    }
  }
  out.survivor_trace = rho.sector_trace(1);
  return out;
}

EquivarianceReport equivariance_run(const RunConfig& cfg) {
  const auto t_begin = Clock::now();
  const QuasiLindbladEvolution evo(cfg.setup());
  const auto space = make_space(cfg);
  const SectoredDensityMatrix rho = initial_state(cfg, evo, space);
  const DensityTimeline tl = build_annihilation_timeline(evo, rho, cfg.steps);

  EquivarianceReport rep;
  rep.checkpoints = checkpoint_slices(cfg.steps, cfg.checkpoints);
  EnsembleOptions opts;
  opts.size = cfg.ensemble_size;
  opts.seed = cfg.seed;
  opts.checkpoints = rep.checkpoints;
  opts.bins = cfg.bins;
  opts.recorded_paths = cfg.recorded_paths;
  rep.ensemble = run_annihilation_ensemble(tl, opts);

  for (const auto& c : rep.ensemble.checkpoints) rep.max_tv = std::max(rep.max_tv, c.tv_distance);
  rep.max_sector_z = max_sector_z(rep.ensemble.checkpoints);

  std::set<int> hit;
  for (const auto& e : rep.ensemble.events) {
    if (!e.creation) hit.insert(e.path);
  }
  const double size = rep.ensemble.size;
  const int n0 = static_cast<int>(cfg.packets.size());
  rep.annihilated_fraction = hit.size() / size;
  rep.expected_annihilated = 1.0 - tl.sector_traces.back()[n0];
  rep.annihilated_sigma = std::sqrt(std::max(rep.expected_annihilated * (1.0 - rep.expected_annihilated), 0.0) / size);
  rep.seconds = seconds_since(t_begin);
  return rep;
}

SweepReport epsilon_sweep(const RunConfig& cfg) {
  SweepReport rep;
  rep.epsilons = cfg.epsilons;
  std::sort(rep.epsilons.begin(), rep.epsilons.end(), std::greater<>());
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  MonitorOptions opts;
  opts.snapshot_every = cfg.snapshot_interval;
  for (double eps : rep.epsilons) {
    MonitoredRun run = monitored_run(cfg, opts, eps);
    rep.sector_traces.push_back(run.final_state.sector_traces());
    rep.max_trace_error = std::max(rep.max_trace_error, run.max_trace_error);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, run.min_eigenvalue);
    rep.runs.push_back(std::move(run));
  }
  for (std::size_t i = 0; i + 1 < rep.sector_traces.size(); ++i) {
    double d = 0.0;
    for (std::size_t n = 0; n < rep.sector_traces[i].size(); ++n) {
      d = std::max(d, std::abs(rep.sector_traces[i][n] - rep.sector_traces[i + 1][n]));
    }
    rep.diffs.push_back(d);
  }
  for (std::size_t i = 0; i + 1 < rep.diffs.size(); ++i) {
    if (rep.diffs[i + 1] > rep.diffs[i]) rep.monotone = false;
  }
  rep.final_diff = rep.diffs.empty() ? 0.0 : rep.diffs.back();
  return rep;
}

CreationReport creation_reversal(const RunConfig& cfg) {
  const auto t_begin = Clock::now();
  const EvolutionSetup reflected = cfg.setup();
  const auto space = make_space(cfg);
  // The configured packets describe the late-time state; time_reflect is an
  // involution, so reflecting the reflected-chart packet state gives it back.
  const QuasiLindbladEvolution probe(reflected);
  const SectoredDensityMatrix rho_final = time_reflect(initial_state(cfg, probe, space));
  const ReversedTimeline rt = reversed_dm_timeline(reflected, rho_final, cfg.steps);

  CreationReport rep;
  EnsembleOptions fwd;
  fwd.size = cfg.ensemble_size;
  fwd.seed = cfg.seed;
  fwd.checkpoints = {cfg.steps};
  fwd.bins = cfg.bins;
  const EnsembleResult forward = run_annihilation_ensemble(rt.reflected, fwd);
  rep.forward_events = forward.events;

  CreationOptions copt;
  copt.size = cfg.ensemble_size;
  copt.seed = cfg.seed + 0x9e3779b97f4a7c15ULL;
  copt.checkpoints = checkpoint_slices(cfg.steps, cfg.checkpoints);
  copt.bins = cfg.bins;
  copt.recorded_paths = cfg.recorded_paths;
  const CreationResult cr = simulate_creation_process(rt.creation, copt);
  rep.creation_events = cr.ensemble.events;
  rep.recorded = cr.ensemble.recorded;
  rep.monotone = cr.monotone;
  rep.bound_retries = cr.bound_retries;
  rep.flagged_fraction = std::max(forward.flagged_fraction(), cr.ensemble.flagged_fraction());
  rep.checkpoints = cr.ensemble.checkpoints;
  for (const auto& c : cr.ensemble.checkpoints) rep.max_tv = std::max(rep.max_tv, c.tv_distance);

  const auto a = bin_events(rep.creation_events, cfg.steps, 8, 2, false);
  const auto b = bin_events(rep.forward_events, cfg.steps, 8, 2, true);
  rep.chi = chi_square_two_sample(a, b);

  double mean = 0.0, sq = 0.0;
  for (int c : cr.creations_per_path) {
    mean += c;
    sq += static_cast<double>(c) * c;
  }
  const double n = static_cast<double>(cr.creations_per_path.size());
  mean /= n;
  const double var = std::max(sq / n - mean * mean, 0.0);
  rep.mean_creations = mean;
  rep.creation_sigma = std::sqrt(var / n);
  auto particles = [](const std::vector<double>& traces) {
    double s = 0.0;
    for (std::size_t k = 0; k < traces.size(); ++k) s += k * traces[k];
    return s;
  };
  // slice 0 is before its own jump, so start from the pre-jump weights
  std::vector<double> start(rt.creation.pre_jump[0].size());
  for (std::size_t k = 0; k < start.size(); ++k) start[k] = rt.creation.pre_jump[0][k].sum();
  rep.expected_creations = particles(rt.creation.sector_traces.back()) - particles(start);
  rep.seconds = seconds_since(t_begin);
  return rep;
}

DeletedNormReport deleted_norm_diagnostic(const RunConfig& cfg) {
  const QuasiLindbladEvolution evo(cfg.setup());
  const auto space = make_space(cfg);
  const int n0 = static_cast<int>(cfg.packets.size());
  SectoredDensityMatrix rho = initial_state(cfg, evo, space);
  DeletedNormReport rep;
  const Eigen::VectorXcd psi = rho.factor(n0).col(0);
  rep.deleted_norm = evo.deleted_norm_history(n0, psi, 0, cfg.steps);
  rep.top_sector.push_back(rho.sector_trace(n0));
  for (int k = 0; k < cfg.steps; ++k) {
    rho = evo.lindblad_step(rho);
    rep.top_sector.push_back(rho.sector_trace(n0));
  }
  for (std::size_t k = 0; k < rep.top_sector.size(); ++k) {
    rep.max_difference = std::max(rep.max_difference, std::abs(rep.top_sector[k] - rep.deleted_norm[k]));
  }
  return rep;
}

bool ScenarioResult::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

void edge_warning(ScenarioResult& res, const MonitoredRun& run) {
  if (run.max_edge_weight > kEdgeWeightWarning) {
    res.warnings.push_back("wave packet weight " + format_double(run.max_edge_weight) +
                           " reached the reflecting lattice edge (threshold " +
                           format_double(kEdgeWeightWarning) + ")");
  }
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& cfg) {
  ScenarioResult res;
  auto& files = res.artifacts;
  switch (cfg.scenario) {
    case Scenario::OracleCompare: {
      MonitorOptions opts;
      opts.oracle = true;
      opts.lforms = true;
      opts.snapshot_every = cfg.snapshot_interval;
      const MonitoredRun run = monitored_run(cfg, opts);
      edge_warning(res, run);
      res.verdicts.push_back(verdict_at_most("oracle_equivalence", run.max_oracle_distance, 1e-10));
      res.verdicts.push_back(verdict_at_most("trace_conservation", run.max_trace_error, 1e-7));
      res.verdicts.push_back(verdict_at_least("positivity", run.min_eigenvalue, -1e-10));
      res.verdicts.push_back(verdict_at_most("block_diagonality", run.cross_sector_elements, 0));
      res.verdicts.push_back(verdict_at_most("purity_non_increasing", run.max_purity_increase, 0.0));
      res.verdicts.push_back(verdict_at_least("purity_drop", run.purity_drop, 1e-4));
      res.verdicts.push_back(verdict_at_most("lform_agreement", run.max_lform_difference, 1e-12));
      if (cfg.disentangled) {
        const DisentangledCheck d = disentangled_check(cfg);
        res.verdicts.push_back(verdict_at_least("disentangled_independence", d.fidelity, 1.0 - 1e-6));
      }
      files.tables.push_back(step_table("steps", run, cfg.n_max));
      for (const auto& [k, s] : run.snapshots) files.snapshots.emplace_back("step_" + std::to_string(k) + ".qlsnap", s);
      files.snapshots.emplace_back("final.qlsnap", run.final_state);
      files.texts.emplace_back("summary.json",
                               summary_text({{"max_oracle_distance", run.max_oracle_distance},
                                             {"max_trace_error", run.max_trace_error},
                                             {"min_eigenvalue", run.min_eigenvalue},
                                             {"purity_drop", run.purity_drop},
                                             {"max_purity_increase", run.max_purity_increase},
                                             {"max_lform_difference", run.max_lform_difference},
                                             {"seconds", run.seconds}}));
      break;
    }
    case Scenario::Equivariance: {
      const EquivarianceReport rep = equivariance_run(cfg);
      res.verdicts.push_back(verdict_at_most("equivariance_tv", rep.max_tv, 0.05));
      res.verdicts.push_back(verdict_at_most("equivariance_sector_counts", rep.max_sector_z, 3.0));
      res.verdicts.push_back(verdict_at_most("flagged_paths", rep.ensemble.flagged_fraction(), 1e-3));
      const double z = rep.annihilated_sigma > 0.0
                           ? std::abs(rep.annihilated_fraction - rep.expected_annihilated) / rep.annihilated_sigma
                           : (std::abs(rep.annihilated_fraction - rep.expected_annihilated) > 0.5 / rep.ensemble.size
                                  ? std::numeric_limits<double>::infinity()
                                  : 0.0);
      res.verdicts.push_back(verdict_at_most("annihilation_fraction", z, 3.0));
      files.tables.push_back(checkpoint_table("checkpoints", rep.ensemble.checkpoints, cfg.n_max));
      files.tables.push_back(event_table("events", rep.ensemble.events));
      files.tables.push_back(path_table("paths", rep.ensemble.recorded, cfg.n_max));
      files.texts.emplace_back("summary.json",
                               summary_text({{"max_tv", rep.max_tv},
                                             {"max_sector_z", rep.max_sector_z},
                                             {"annihilated_fraction", rep.annihilated_fraction},
                                             {"expected_annihilated", rep.expected_annihilated},
                                             {"annihilated_sigma", rep.annihilated_sigma},
                                             {"flagged_fraction", rep.ensemble.flagged_fraction()},
                                             {"seconds", rep.seconds}}));
      break;
    }
    case Scenario::EpsilonSweep: {
      const SweepReport rep = epsilon_sweep(cfg);
      for (const auto& run : rep.runs) edge_warning(res, run);
      res.verdicts.push_back(verdict_at_most("trace_conservation", rep.max_trace_error, 1e-7));
      res.verdicts.push_back(verdict_at_least("positivity", rep.min_eigenvalue, -1e-10));
      Verdict v = verdict_at_most("epsilon_cauchy", rep.final_diff, 1e-3);
      v.pass = v.pass && rep.monotone;
      res.verdicts.push_back(v);
      CsvTable sweep{"epsilon_sweep", {"epsilon"}, {}};
      for (auto& c : sector_columns(cfg.n_max, "sector_")) sweep.columns.push_back(c);
      sweep.columns.push_back("diff_to_next");
      sweep.columns.push_back("max_trace_error");
      for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
        std::vector<double> row{rep.epsilons[i]};
        for (double s : rep.sector_traces[i]) row.push_back(s);
        row.push_back(i < rep.diffs.size() ? rep.diffs[i] : std::numeric_limits<double>::quiet_NaN());
        row.push_back(rep.runs[i].max_trace_error);
        sweep.add(std::move(row));
      }
      files.tables.push_back(std::move(sweep));
      for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const std::string tag = "eps_" + format_double(rep.epsilons[i]);
        files.tables.push_back(step_table("steps_" + tag, rep.runs[i], cfg.n_max));
        for (const auto& [k, s] : rep.runs[i].snapshots) {
          files.snapshots.emplace_back(tag + "_step_" + std::to_string(k) + ".qlsnap", s);
        }
      }
      files.texts.emplace_back("summary.json",
                               summary_text({{"final_diff", rep.final_diff},
                                             {"monotone", rep.monotone ? 1.0 : 0.0},
                                             {"max_trace_error", rep.max_trace_error},
                                             {"min_eigenvalue", rep.min_eigenvalue}}));
      break;
    }
    case Scenario::CreationReversal: {
      const CreationReport rep = creation_reversal(cfg);
      res.verdicts.push_back(verdict_at_least("creation_chi_square_p", rep.chi.p_value, 0.01));
      const double z = rep.creation_sigma > 0.0
                           ? std::abs(rep.mean_creations - rep.expected_creations) / rep.creation_sigma
                           : (std::abs(rep.mean_creations - rep.expected_creations) > 1e-9
                                  ? std::numeric_limits<double>::infinity()
                                  : 0.0);
      res.verdicts.push_back(verdict_at_most("creation_count", z, 3.0));
      res.verdicts.push_back(verdict_at_least("creation_monotone", rep.monotone ? 1.0 : 0.0, 1.0));
      res.verdicts.push_back(verdict_at_most("creation_equivariance_tv", rep.max_tv, 0.05));
      CsvTable bins{"creation_bins", {"time_bin", "side", "creation", "reflected_annihilation"}, {}};
      for (std::size_t i = 0; i < rep.chi.first.size(); ++i) {
        bins.add({static_cast<double>(i / 2), static_cast<double>(i % 2), rep.chi.first[i], rep.chi.second[i]});
      }
      files.tables.push_back(std::move(bins));
      files.tables.push_back(checkpoint_table("checkpoints", rep.checkpoints, cfg.n_max));
      files.tables.push_back(event_table("creation_events", rep.creation_events));
      files.tables.push_back(event_table("reflected_events", rep.forward_events));
      files.tables.push_back(path_table("paths", rep.recorded, cfg.n_max));
      files.texts.emplace_back("summary.json",
                               summary_text({{"chi_square", rep.chi.statistic},
                                             {"dof", static_cast<double>(rep.chi.dof)},
                                             {"p_value", rep.chi.p_value},
                                             {"mean_creations", rep.mean_creations},
                                             {"expected_creations", rep.expected_creations},
                                             {"creation_sigma", rep.creation_sigma},
                                             {"bound_retries", static_cast<double>(rep.bound_retries)},
                                             {"seconds", rep.seconds}}));
      break;
    }
    case Scenario::DeletedNormDiagnostic: {
      const DeletedNormReport rep = deleted_norm_diagnostic(cfg);
      res.verdicts.push_back(verdict_at_most("deleted_norm_matches_top_sector", rep.max_difference, 1e-10));
      CsvTable t{"deleted_norm", {"step", "deleted_norm", "top_sector_trace"}, {}};
      for (std::size_t k = 0; k < rep.top_sector.size(); ++k) {
        t.add({static_cast<double>(k), rep.deleted_norm[k], rep.top_sector[k]});
      }
      files.tables.push_back(std::move(t));
      break;
    }
  }
  files.texts.emplace_back("verdicts.json", verdicts_json(res.verdicts, to_string(cfg.scenario)));
  return res;
}

}  // namespace qlindblad
