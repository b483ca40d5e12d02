#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qlindblad/config.hpp"
#include "qlindblad/errors.hpp"
#include "qlindblad/fock.hpp"
#include "qlindblad/scenarios.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriteria = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

void apply_thread_env() {
  if (const char* s = std::getenv("QLINDBLAD_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) omp_set_num_threads(n);
  }
}

int simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
             std::optional<std::string> out_dir) {
  qlindblad::RunConfig cfg;
  try {
    cfg = qlindblad::load_config(config_path);
  } catch (const qlindblad::ConfigValidationError& e) {
    std::cerr << config_path << ": invalid configuration\n";
    for (const auto& i : e.issues()) std::cerr << "  " << i.field << ": " << i.message << "\n";
    return kExitConfig;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.output_dir = *out_dir;

  qlindblad::ScenarioResult res;
  try {
    res = qlindblad::run_scenario(cfg);
  } catch (const qlindblad::DivergenceError& e) {
    std::cerr << "numerical divergence in invariant '" << e.invariant() << "': " << e.what() << "\n";
    return kExitDivergence;
  } catch (const qlindblad::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  res.artifacts.commit(cfg.output_dir);

  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

  for (const auto& v : res.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.id << " measured=" << qlindblad::format_double(v.measured)
              << " " << v.relation << " " << qlindblad::format_double(v.threshold) << "\n";
  }
  std::cout << "artifacts written to " << cfg.output_dir << "\n";
  return res.all_pass() ? kExitOk : kExitCriteria;
}

int inspect(const std::string& path) {
  const auto rho = qlindblad::read_snapshot(path);
  const auto& sp = rho.space();
  std::cout << "snapshot " << path << "\n"
            << "  sites " << sp.modes() / 2 << ", n_max " << sp.n_max() << ", "
            << qlindblad::to_string(sp.statistics()) << "\n"
            << "  t " << qlindblad::format_double(rho.time) << ", step " << rho.step << "\n";
  std::cout << std::setprecision(15);
  for (int n = 0; n <= rho.n_max(); ++n) {
    std::cout << "  sector " << n << ": trace " << rho.sector_trace(n) << ", rank<= " << rho.factor(n).cols()
              << "\n";
  }
  std::cout << "  trace " << rho.trace() << "\n  purity " << rho.purity() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"Quasi-Lindblad evolution and Bohmian trajectories at an absorbing spacelike surface"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  auto* sim = app.add_subcommand("simulate", "Run the scenario described by a config file");
  sim->add_option("--config", config_path, "Config file")->required();
  sim->add_option("--seed", seed, "Ensemble seed (overrides the config)");
  sim->add_option("--out", out_dir, "Output directory (overrides the config)");

  std::string snapshot_path;
  auto* ins = app.add_subcommand("inspect", "Print sector traces and purity of a snapshot");
  ins->add_option("--snapshot", snapshot_path, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return simulate(config_path, seed, out_dir);
    return inspect(snapshot_path);
  } catch (const qlindblad::DivergenceError& e) {
    std::cerr << "numerical divergence in invariant '" << e.invariant() << "': " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
