#include "qlindblad/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include "json.hpp"
#include <ostream>
#include <system_error>

#include "qlindblad/errors.hpp"

namespace qlindblad {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const CsvTable& table) {
  os << "# schema_version=" << kSchemaVersion << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

Verdict verdict_at_most(std::string id, double measured, double threshold) {
  return {std::move(id), measured, threshold, "<=", measured <= threshold};
}

Verdict verdict_at_least(std::string id, double measured, double threshold) {
  return {std::move(id), measured, threshold, ">=", measured >= threshold};
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  const auto tmp = path.string() + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp);
    body(os);
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string verdicts_json(const std::vector<Verdict>& verdicts, const std::string& scenario) {
  nlohmann::json out;
  out["schema_version"] = kSchemaVersion;
  out["scenario"] = scenario;
  bool all = true;
  auto arr = nlohmann::json::array();
  for (const auto& v : verdicts) {
    arr.push_back({{"id", v.id},
                   {"measured", number(v.measured)},
                   {"threshold", number(v.threshold)},
                   {"relation", v.relation},
                   {"pass", v.pass}});
    all = all && v.pass;
  }
  out["criteria"] = arr;
  out["all_pass"] = all;
  return out.dump(2) + "\n";
}

void ArtifactSet::commit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& t : tables) {
    write_file(dir / (t.name + ".csv"), [&](std::ostream& os) { write_csv(os, t); });
  }
  for (const auto& [name, rho] : snapshots) {
    write_file(dir / name, [&](std::ostream& os) { write_snapshot(os, rho); });
  }
  for (const auto& [name, text] : texts) {
    write_file(dir / name, [&](std::ostream& os) { os << text; });
  }
}

}  // namespace qlindblad
