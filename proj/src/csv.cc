#include "strstab/csv.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "strstab/errors.h"

namespace strstab {
namespace schema {
namespace {

// Column list in order; integer and text columns named explicitly, the rest
// are numbers.
CsvSchema Layout(std::string name, const std::vector<std::string>& order,
                 const std::vector<std::string>& integers,
                 const std::vector<std::string>& texts = {}) {
  auto has = [](const std::vector<std::string>& v, const std::string& c) {
    return std::find(v.begin(), v.end(), c) != v.end();
  };
  CsvSchema s;
  s.name = std::move(name);
  for (const std::string& c : order) {
    s.columns.push_back({c, has(integers, c) ? ColumnKind::kInteger
                            : has(texts, c)  ? ColumnKind::kText
                                             : ColumnKind::kNumber});
  }
  return s;
}

}  // namespace

const CsvSchema& Vehicles() {
  static const CsvSchema s = Layout(
      "vehicles",
      {"vehicle", "f1", "f2", "f3", "S", "hinf", "peak_freq", "mimo_hinf",
       "l2_strict", "linf_monotone", "norm_equality", "mimo_sufficient"},
      {"vehicle", "l2_strict", "linf_monotone", "norm_equality",
       "mimo_sufficient"});
  return s;
}

const CsvSchema& Pairs() {
  static const CsvSchema s =
      Layout("pairs",
             {"l", "n", "gamma", "peak_freq", "product_of_norms",
              "weakly_stable"},
             {"l", "n", "weakly_stable"});
  return s;
}

const CsvSchema& Contour() {
  static const CsvSchema s = Layout("contour", {"a", "T", "S"}, {});
  return s;
}

const CsvSchema& Profile() {
  static const CsvSchema s =
      Layout("profile", {"vehicle", "l2", "linf"}, {"vehicle"});
  return s;
}

const CsvSchema& Trajectory() {
  static const CsvSchema s = Layout(
      "trajectory", {"time", "vehicle", "position", "speed", "acceleration"},
      {"vehicle"});
  return s;
}

const CsvSchema& Clamps() {
  static const CsvSchema s = Layout("clamps", {"time", "vehicle"}, {"vehicle"});
  return s;
}

const CsvSchema& Sweep() {
  static const CsvSchema s =
      Layout("sweep", {"amplitude", "vehicle", "l2", "linf", "clamp_events"},
             {"vehicle", "clamp_events"});
  return s;
}

const CsvSchema& Ring() {
  static const CsvSchema s = Layout(
      "ring", {"index", "real", "imag", "structural"}, {"index", "structural"});
  return s;
}

const CsvSchema& Samples() {
  static const CsvSchema s =
      Layout("samples", {"index", "a", "b", "T", "s0"}, {"index"});
  return s;
}

const CsvSchema& Optimization() {
  static const CsvSchema s = Layout(
      "optimization",
      {"vehicle", "param", "reference", "optimized", "lower", "upper"},
      {"vehicle"}, {"param"});
  return s;
}

const CsvSchema& Trace() {
  static const CsvSchema s =
      Layout("trace", {"proposal", "best_objective"}, {"proposal"});
  return s;
}

const CsvSchema& Experiment() {
  static const CsvSchema s = Layout(
      "experiment",
      {"seed", "arm", "label", "vehicle", "l2", "linf", "relative_l2"},
      {"seed", "arm", "vehicle"}, {"label"});
  return s;
}

const CsvSchema& ExperimentStats() {
  static const CsvSchema s = Layout(
      "experiment_stats",
      {"arm", "label", "vehicle", "runs", "mean_l2", "std_l2", "mean_rel",
       "min_rel", "max_rel"},
      {"arm", "vehicle", "runs"}, {"label"});
  return s;
}

const CsvSchema& ExperimentAvs() {
  static const CsvSchema s = Layout(
      "experiment_avs",
      {"seed", "arm", "vehicle", "a_ref", "b_ref", "T_ref", "s0_ref", "a_opt",
       "b_opt", "T_opt", "s0_opt", "gamma_before", "gamma_after"},
      {"seed", "arm", "vehicle"});
  return s;
}

const CsvSchema& ParamShifts() {
  static const CsvSchema s = Layout(
      "param_shifts",
      {"arm", "label", "param", "count", "reference_median",
       "optimized_median", "reference_mean", "optimized_mean"},
      {"arm", "count"}, {"label", "param"});
  return s;
}

const CsvSchema& Cells() {
  static const CsvSchema s =
      Layout("cells",
             {"seed", "arm", "label", "ok", "collision", "av_count",
              "clamp_events", "error"},
             {"seed", "arm", "ok", "collision", "av_count", "clamp_events"},
             {"label", "error"});
  return s;
}

const std::vector<const CsvSchema*>& All() {
  static const std::vector<const CsvSchema*> all = {
      &Vehicles(),   &Pairs(),           &Contour(),       &Profile(),
      &Trajectory(), &Clamps(),          &Sweep(),         &Ring(),
      &Samples(),    &Optimization(),    &Trace(),         &Experiment(),
      &ExperimentStats(), &ExperimentAvs(), &ParamShifts(), &Cells()};
  return all;
}

}  // namespace schema

namespace {

// Text cells are quoted when they contain a separator, quote or newline.
std::string Escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> SplitRecords(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          cell += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      record.push_back(std::move(cell));
      cell.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (quoted) throw ConfigError("unterminated quoted CSV cell");
  if (any) {
    record.push_back(std::move(cell));
    records.push_back(std::move(record));
  }
  return records;
}

bool ParsesAs(const std::string& cell, ColumnKind kind) {
  if (kind == ColumnKind::kText) return true;
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (kind == ColumnKind::kInteger) {
    long long v = 0;
    const auto r = std::from_chars(first, last, v);
    if (r.ec == std::errc() && r.ptr == last) return true;
    unsigned long long u = 0;  // seeds may use the full 64 bits
    const auto ru = std::from_chars(first, last, u);
    return ru.ec == std::errc() && ru.ptr == last;
  }
  if (cell == "inf" || cell == "-inf" || cell == "nan") return true;
  double v = 0.0;
  const auto r = std::from_chars(first, last, v);
  return r.ec == std::errc() && r.ptr == last;
}

}  // namespace

std::string FormatNumber(double x) { return fmt::format("{}", x); }

CsvWriter::CsvWriter(const CsvSchema& schema) : schema_(schema) {}

void CsvWriter::AddRow(std::vector<std::string> cells) {
  if (cells.size() != schema_.columns.size()) {
    throw std::invalid_argument(fmt::format(
        "{} row has {} cells, schema has {}", schema_.name, cells.size(),
        schema_.columns.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::ToString() const {
  std::string out;
  for (std::size_t c = 0; c < schema_.columns.size(); ++c) {
    if (c) out += ',';
    out += schema_.columns[c].name;
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += Escape(row[c]);
    }
    out += '\n';
  }
  return out;
}

void CsvWriter::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << ToString();
  if (!out) throw Error(fmt::format("failed writing {}", path.string()));
}

CsvTable ParseCsv(std::string_view text, const CsvSchema& schema) {
  auto records = SplitRecords(text);
  if (records.empty()) {
    throw ConfigError(fmt::format("{}: empty CSV", schema.name));
  }
  CsvTable t;
  t.header = std::move(records.front());
  if (t.header.size() != schema.columns.size()) {
    throw ConfigError(fmt::format("{}: header has {} columns, expected {}",
                                  schema.name, t.header.size(),
                                  schema.columns.size()));
  }
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c] != schema.columns[c].name) {
      throw ConfigError(fmt::format("{}: column {} is '{}', expected '{}'",
                                    schema.name, c + 1, t.header[c],
                                    schema.columns[c].name));
    }
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& row = records[r];
    if (row.size() != schema.columns.size()) {
      throw ConfigError(fmt::format("{}: line {} has {} cells, expected {}",
                                    schema.name, r + 1, row.size(),
                                    schema.columns.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!ParsesAs(row[c], schema.columns[c].kind)) {
        throw ConfigError(fmt::format("{}: line {} column '{}' has bad value '{}'",
                                      schema.name, r + 1,
                                      schema.columns[c].name, row[c]));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable ReadCsv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCsv(buf.str(), schema);
}

const CsvSchema* SchemaForFile(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  const CsvSchema* best = nullptr;
  for (const CsvSchema* s : schema::All()) {
    const bool match = stem == s->name || stem.rfind(s->name + "_", 0) == 0;
    if (match && (!best || s->name.size() > best->name.size())) best = s;
  }
  return best;
}

}  // namespace strstab
