#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qlindblad/config.hpp"
#include "qlindblad/io.hpp"
#include "qlindblad/scenarios.hpp"

using namespace qlindblad;

namespace {

const char* kValid = R"(
[chart]
kind = minkowski_tilted
kappa = 0.5
[lattice]
sites = 24
dx = 1
[fock]
n_max = 1
[dynamics]
mass = 0.2
steps = 8
[initial]
particles = 1
packet1 = 12 2 0 0.5
[scenario]
name = equivariance
checkpoints = 3
bins = 12
[ensemble]
size = 300
seed = 4
recorded_paths = 2
)";

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigValidationError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& field) {
  for (const auto& i : issues) {
    if (i.field == field) return true;
  }
  return false;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("valid text parses") {
    const RunConfig c = parse_config(kValid);
    CHECK(c.sites == 24);
    CHECK(c.dt == 1.0);
    CHECK(c.scenario == Scenario::Equivariance);
    REQUIRE(c.packets.size() == 1);
    CHECK(c.packets[0].right_fraction == 0.5);
    CHECK(c.seed == 4u);
  }

  TEST_CASE("shipped configs validate") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(QLINDBLAD_CONFIG_DIR)) {
      if (entry.path().extension() != ".ini") continue;
      CHECK_NOTHROW(load_config(entry.path().string()));
      ++count;
    }
    CHECK(count >= 5);
  }

  TEST_CASE("malformed input names the offending field") {
    CHECK(mentions(issues_of(replace(kValid, "dx = 1", "dx = 1\ndt = 2")), "lattice.dt"));
    CHECK(mentions(issues_of(replace(kValid, "sites = 24", "sites = many")), "lattice.sites"));
    CHECK(mentions(issues_of(replace(kValid, "kappa = 0.5", "kappa = 1.5")), "chart.kappa"));
    CHECK(mentions(issues_of(replace(kValid, "n_max = 1", "n_max = 1\ncolour = red")), "fock.colour"));
    CHECK(mentions(issues_of(replace(kValid, "packet1 = 12 2 0 0.5", "packet1 = 12 2")), "initial.packet1"));
    CHECK(mentions(issues_of(replace(kValid, "name = equivariance", "name = nonsense")), "scenario.name"));
    CHECK(mentions(issues_of(replace(kValid, "kind = minkowski_tilted", "kind = sphere")), "chart.kind"));
    CHECK(!issues_of("[chart\nkind = x").empty());
    CHECK_THROWS_AS(load_config("/nonexistent/path.ini"), ConfigError);
  }

  TEST_CASE("validation covers surface and memory limits") {
    RunConfig c = parse_config(kValid);
    c.chart = ChartKind::Kruskal;
    c.bh_mass = 100.0;
    c.epsilon = 0.5;
    CHECK(mentions(validate(c), "surface.epsilon"));
    c.epsilon = 1.0;
    c.scenario = Scenario::EpsilonSweep;
    c.epsilons = {2.0, 1.0};
    CHECK(mentions(validate(c), "surface.sweep"));
    RunConfig big = parse_config(kValid);
    big.sites = 4000;
    big.n_max = 4;
    CHECK(estimated_memory_bytes(big) > kMemoryBudgetBytes);
    CHECK(!validate(big).empty());
  }
}

TEST_SUITE("io") {
  TEST_CASE("doubles round-trip through their text form") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  }

  TEST_CASE("csv carries the schema line and header") {
    CsvTable t{"x", {"a", "b"}, {}};
    t.add({1.0, 0.25});
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str() == "# schema_version=1\na,b\n1,0.25\n");
  }

  TEST_CASE("verdict json lists every criterion") {
    const std::vector<Verdict> v{verdict_at_most("a", 1e-12, 1e-10), verdict_at_least("b", 0.001, 0.01)};
    CHECK(v[0].pass);
    CHECK(!v[1].pass);
    const auto j = nlohmann::json::parse(verdicts_json(v, "oracle_compare"));
    CHECK(j["schema_version"] == 1);
    CHECK(j["all_pass"] == false);
    CHECK(j["criteria"].size() == 2);
    CHECK(j["criteria"][1]["id"] == "b");
  }

  TEST_CASE("artifacts are committed without leftover partial files") {
    const auto dir = std::filesystem::temp_directory_path() / "qlindblad_io_test";
    std::filesystem::remove_all(dir);
    ArtifactSet a;
    a.tables.push_back({"t", {"c"}, {{1.0}}});
    a.texts.push_back({"note.json", "{}"});
    a.commit(dir);
    CHECK(std::filesystem::exists(dir / "t.csv"));
    CHECK(std::filesystem::exists(dir / "note.json"));
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      CHECK(e.path().extension() != ".partial");
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("scenario output is identical for identical seeds") {
    const RunConfig c = parse_config(kValid);
    const ScenarioResult a = run_scenario(c);
    const ScenarioResult b = run_scenario(c);
    REQUIRE(a.artifacts.tables.size() == b.artifacts.tables.size());
    for (std::size_t i = 0; i < a.artifacts.tables.size(); ++i) {
      std::ostringstream x, y;
      write_csv(x, a.artifacts.tables[i]);
      write_csv(y, b.artifacts.tables[i]);
      CHECK(x.str() == y.str());
    }
  }
}
