#include "qlindblad/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "qlindblad/errors.hpp"

namespace qlindblad {

namespace pt = boost::property_tree;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::OracleCompare: return "oracle_compare";
    case Scenario::Equivariance: return "equivariance";
    case Scenario::EpsilonSweep: return "epsilon_sweep";
    case Scenario::CreationReversal: return "creation_reversal";
    case Scenario::DeletedNormDiagnostic: return "deleted_norm_diagnostic";
  }
  return "unknown";
}

namespace {

std::string summarize(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& i : issues) os << "\n  " << i.field << ": " << i.message;
  return os.str();
}

const std::set<std::string> kKnown = {
    "chart.kind", "chart.kappa", "chart.mass", "chart.surface_t0", "chart.orientation",
    "lattice.sites", "lattice.dx", "lattice.dt", "lattice.x0",
    "fock.n_max", "fock.statistics",
    "surface.epsilon", "surface.sweep",
    "dynamics.mass", "dynamics.t_start", "dynamics.steps",
    "initial.particles", "initial.packet1", "initial.packet2", "initial.packet3", "initial.packet4",
    "scenario.name", "scenario.checkpoints", "scenario.bins", "scenario.disentangled",
    "ensemble.size", "ensemble.seed", "ensemble.recorded_paths",
    "output.dir", "output.snapshot_interval"};

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& key, T& out) {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    std::istringstream is(*v);
    T tmp{};
    is >> tmp;
    if (!is || !(is >> std::ws).eof()) {
      issues.push_back({key, "cannot parse '" + *v + "'"});
      return;
    }
    out = tmp;
  }

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    auto v = raw(key);
    if (!v) return out;
    std::string s = *v;
    for (char& c : s) {
      if (c == ',') c = ' ';
    }
    std::istringstream is(s);
    double d;
    while (is >> d) out.push_back(d);
    if (!is.eof()) issues.push_back({key, "expected a list of numbers, got '" + *v + "'"});
    return out;
  }

  std::vector<ConfigIssue> issues;

 private:
  const pt::ptree& tree_;
};

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<ConfigIssue> issues)
    : ConfigError(summarize(issues)), issues_(std::move(issues)) {}

double RunConfig::resolved_x0() const {
  if (x0_set) return x0;
  // Kruskal lattices are centred on x' = 0, flat ones start at 0
  return chart == ChartKind::Kruskal ? -0.5 * (sites - 1) * dx : 0.0;
}

EvolutionSetup RunConfig::setup(double epsilon_override) const {
  EvolutionSetup s;
  s.lattice = Lattice{sites, dx, resolved_x0()};
  const double eps = epsilon_override >= 0.0 ? epsilon_override : epsilon;
  if (chart == ChartKind::Kruskal) {
    s.chart = ChartGeometry::kruskal(bh_mass);
    s.surface = AbsorbingSurface::kruskal_future(bh_mass, eps);
  } else {
    s.chart = ChartGeometry::minkowski_tilted(kappa);
    s.surface = AbsorbingSurface::tilted_line(surface_t0, surface_orientation * kappa);
  }
  s.mass = particle_mass;
  s.t_start = t_start;
  s.dt = dt;
  return s;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigValidationError({{"line " + std::to_string(e.line()), e.message()}});
  }
  Reader r(tree);
  for (const auto& sec : tree) {
    if (sec.second.empty()) {
      r.issues.push_back({sec.first, "key outside any [section]"});
      continue;
    }
    for (const auto& kv : sec.second) {
      const std::string key = sec.first + "." + kv.first;
      if (!kKnown.count(key)) r.issues.push_back({key, "unknown key"});
    }
  }
  RunConfig c;
  if (auto k = r.raw("chart.kind")) {
    if (*k == "kruskal") {
      c.chart = ChartKind::Kruskal;
    } else if (*k == "minkowski_tilted") {
      c.chart = ChartKind::MinkowskiTilted;
    } else {
      r.issues.push_back({"chart.kind", "expected 'kruskal' or 'minkowski_tilted', got '" + *k + "'"});
    }
  } else {
    r.issues.push_back({"chart.kind", "missing"});
  }
  r.get("chart.kappa", c.kappa);
  r.get("chart.mass", c.bh_mass);
  r.get("chart.surface_t0", c.surface_t0);
  r.get("chart.orientation", c.surface_orientation);
  r.get("lattice.sites", c.sites);
  r.get("lattice.dx", c.dx);
  c.dt = c.dx;
  r.get("lattice.dt", c.dt);
  if (r.raw("lattice.x0")) {
    r.get("lattice.x0", c.x0);
    c.x0_set = true;
  }
  r.get("fock.n_max", c.n_max);
  if (auto s = r.raw("fock.statistics")) {
    try {
      c.statistics = statistics_from_string(*s);
    } catch (const ConfigError& e) {
      r.issues.push_back({"fock.statistics", e.what()});
    }
  }
  r.get("surface.epsilon", c.epsilon);
  c.epsilons = r.numbers("surface.sweep");
  r.get("dynamics.mass", c.particle_mass);
  r.get("dynamics.t_start", c.t_start);
  r.get("dynamics.steps", c.steps);
  int particles = 0;
  r.get("initial.particles", particles);
  for (int i = 1; i <= particles && i <= kMaxParticles; ++i) {
    const std::string key = "initial.packet" + std::to_string(i);
    const auto v = r.numbers(key);
    if (v.size() != 4) {
      r.issues.push_back({key, "expected 'center width momentum right_fraction'"});
      continue;
    }
    c.packets.push_back({v[0], v[1], v[2], v[3]});
  }
  if (particles < 0 || particles > kMaxParticles) {
    r.issues.push_back({"initial.particles", "must lie in [0, " + std::to_string(kMaxParticles) + "]"});
  }
  if (auto s = r.raw("scenario.name")) {
    bool found = false;
    for (Scenario sc : {Scenario::OracleCompare, Scenario::Equivariance, Scenario::EpsilonSweep,
                        Scenario::CreationReversal, Scenario::DeletedNormDiagnostic}) {
      if (*s == to_string(sc)) {
        c.scenario = sc;
        found = true;
      }
    }
    if (!found) r.issues.push_back({"scenario.name", "unknown scenario '" + *s + "'"});
  }
  r.get("scenario.checkpoints", c.checkpoints);
  r.get("scenario.bins", c.bins);
  if (auto s = r.raw("scenario.disentangled")) {
    if (*s == "true") {
      c.disentangled = true;
    } else if (*s != "false") {
      r.issues.push_back({"scenario.disentangled", "expected true or false"});
    }
  }
  r.get("ensemble.size", c.ensemble_size);
  r.get("ensemble.seed", c.seed);
  r.get("ensemble.recorded_paths", c.recorded_paths);
  if (auto s = r.raw("output.dir")) c.output_dir = *s;
  r.get("output.snapshot_interval", c.snapshot_interval);

  std::vector<ConfigIssue> issues = r.issues;
  if (issues.empty()) {
    for (auto& i : validate(c)) issues.push_back(i);
  }
  if (!issues.empty()) throw ConfigValidationError(issues);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigValidationError({{"--config", "cannot read '" + path + "'"}});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

double estimated_memory_bytes(const RunConfig& cfg) {
  const double d = static_cast<double>(FockSpace::sector_dimension(2 * cfg.sites, cfg.n_max, cfg.statistics));
  // factored blocks of low rank plus an oracle vector and one diagonal per step
  // for trajectory timelines
  double bytes = 16.0 * d * 8.0 + 4.0 * d;
  if (cfg.scenario == Scenario::Equivariance || cfg.scenario == Scenario::CreationReversal) {
    bytes += 8.0 * d * (cfg.steps + 1) * 3.0;
  }
  return bytes;
}

std::vector<ConfigIssue> validate(const RunConfig& c) {
  std::vector<ConfigIssue> out;
  if (c.chart == ChartKind::MinkowskiTilted && !(c.kappa > 0.0 && c.kappa < 1.0)) {
    out.push_back({"chart.kappa", "must lie in (0, 1)"});
  }
  if (c.chart == ChartKind::Kruskal && !(c.bh_mass > 0.0)) out.push_back({"chart.mass", "must be positive"});
  if (c.surface_orientation != 1 && c.surface_orientation != -1) {
    out.push_back({"chart.orientation", "must be +1 or -1"});
  }
  if (c.sites < 2) out.push_back({"lattice.sites", "must be at least 2"});
  if (c.sites > 4096) out.push_back({"lattice.sites", "must not exceed 4096"});
  if (!(c.dx > 0.0)) out.push_back({"lattice.dx", "must be positive"});
  if (!(c.dt > 0.0)) {
    out.push_back({"lattice.dt", "must be positive"});
  } else if (c.dx > 0.0 && c.dt > c.dx * (1.0 + 1e-12)) {
    out.push_back({"lattice.dt", "must not exceed lattice.dx (at most one cell per step)"});
  } else if (c.dx > 0.0 && c.dt < c.dx * (1.0 - 1e-12)) {
    out.push_back({"lattice.dt", "the chiral shift scheme needs dt = dx"});
  }
  if (c.n_max < 1 || c.n_max > 3) out.push_back({"fock.n_max", "must lie in [1, 3]"});
  if (c.statistics == Statistics::Bosonic) {
    out.push_back({"fock.statistics", "bosonic statistics are only available through the library tests"});
  }
  auto on_grid = [&](double eps) {
    if (!(c.dx > 0.0)) return true;
    const double q = eps / c.dx;
    return eps >= 0.0 && std::abs(q - std::round(q)) <= 1e-9;
  };
  if (!on_grid(c.epsilon)) out.push_back({"surface.epsilon", "must be a non-negative multiple of lattice.dx"});
  for (double e : c.epsilons) {
    if (!on_grid(e)) out.push_back({"surface.sweep", "every value must be a non-negative multiple of lattice.dx"});
  }
  if (c.chart == ChartKind::Kruskal && c.epsilon == 0.0 && c.scenario != Scenario::EpsilonSweep) {
    out.push_back({"surface.epsilon", "the Kruskal cutoff must be positive (the metric diverges at r = 0)"});
  }
  if (c.scenario == Scenario::EpsilonSweep) {
    if (c.chart != ChartKind::Kruskal) out.push_back({"scenario.name", "epsilon_sweep needs chart.kind = kruskal"});
    if (c.epsilons.size() < 3) out.push_back({"surface.sweep", "needs at least three values"});
    for (double e : c.epsilons) {
      if (e <= 0.0) out.push_back({"surface.sweep", "values must be positive"});
    }
  }
  if (c.scenario == Scenario::CreationReversal && c.chart != ChartKind::Kruskal) {
    out.push_back({"scenario.name", "creation_reversal needs chart.kind = kruskal"});
  }
  if (c.steps < 1) out.push_back({"dynamics.steps", "must be positive"});
  if (c.particle_mass < 0.0) out.push_back({"dynamics.mass", "must be non-negative"});
  if (c.packets.empty()) out.push_back({"initial.particles", "at least one packet is required"});
  if (static_cast<int>(c.packets.size()) > c.n_max) {
    out.push_back({"initial.particles", "exceeds fock.n_max"});
  }
  for (std::size_t i = 0; i < c.packets.size(); ++i) {
    const std::string key = "initial.packet" + std::to_string(i + 1);
    if (!(c.packets[i].width > 0.0)) out.push_back({key, "width must be positive"});
    if (c.packets[i].right_fraction < 0.0 || c.packets[i].right_fraction > 1.0) {
      out.push_back({key, "right_fraction must lie in [0, 1]"});
    }
  }
  if (c.disentangled && c.packets.size() != 2) {
    out.push_back({"scenario.disentangled", "needs exactly two packets"});
  }
  if (c.checkpoints < 1) out.push_back({"scenario.checkpoints", "must be positive"});
  if (c.bins < 1) out.push_back({"scenario.bins", "must be positive"});
  if (c.ensemble_size < 1) out.push_back({"ensemble.size", "must be positive"});
  if (c.recorded_paths < 0) out.push_back({"ensemble.recorded_paths", "must be non-negative"});
  if (c.snapshot_interval < 0) out.push_back({"output.snapshot_interval", "must be non-negative"});
  if (c.output_dir.empty()) out.push_back({"output.dir", "must not be empty"});
  if (out.empty() && estimated_memory_bytes(c) > kMemoryBudgetBytes) {
    out.push_back({"fock.n_max", "run needs about " + std::to_string(estimated_memory_bytes(c) / 1e9) +
                                     " GB, above the 8 GB budget"});
  }
  return out;
}

}  // namespace qlindblad
