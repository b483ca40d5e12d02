#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qlindblad/fock.hpp"

namespace qlindblad {

constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal form; "nan"/"inf" spelled out.
std::string format_double(double v);

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

// First line "# schema_version=1", then the header and rows.
void write_csv(std::ostream& os, const CsvTable& table);

struct Verdict {
  std::string id;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=" or ">="
  bool pass = false;
};

Verdict verdict_at_most(std::string id, double measured, double threshold);
Verdict verdict_at_least(std::string id, double measured, double threshold);

std::string verdicts_json(const std::vector<Verdict>& verdicts, const std::string& scenario);

// Files of one run, written by a single writer once the run has finished.
struct ArtifactSet {
  std::vector<CsvTable> tables;
  std::vector<std::pair<std::string, SectoredDensityMatrix>> snapshots;
  std::vector<std::pair<std::string, std::string>> texts;  // file name, contents

  // Every file goes to a temporary name first and is renamed into place.
  void commit(const std::filesystem::path& dir) const;
};

}  // namespace qlindblad
