#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace strstab {

enum class ColumnKind { kNumber, kInteger, kText };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumber;
};

// Named, ordered column layout of one CSV file kind.
struct CsvSchema {
  std::string name;
  std::vector<Column> columns;
};

// Every file kind written by the command line front end.
namespace schema {
const CsvSchema& Vehicles();        // per-vehicle stability verdicts
const CsvSchema& Pairs();           // (l, n) chain gains
const CsvSchema& Contour();         // S over an (a, T) grid
const CsvSchema& Profile();         // per-vehicle L2 / Linf norms
const CsvSchema& Trajectory();      // long-format time series
const CsvSchema& Clamps();          // zero-speed clamp events
const CsvSchema& Sweep();           // amplitude sweep norms
const CsvSchema& Ring();            // ring eigenvalues
const CsvSchema& Samples();         // sampled parameters
const CsvSchema& Optimization();    // single-AV result
const CsvSchema& Trace();           // best-so-far objective
const CsvSchema& Experiment();      // per seed x arm x vehicle norms
const CsvSchema& ExperimentStats(); // mean/std/relative per arm x vehicle
const CsvSchema& ExperimentAvs();   // reference vs optimized per AV
const CsvSchema& ParamShifts();     // medians and means per arm x param
const CsvSchema& Cells();           // status of every seed x arm cell
const std::vector<const CsvSchema*>& All();
}  // namespace schema

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest text that parses back to the same double.
std::string FormatNumber(double x);

// Accumulates rows for one schema; each row must match the column count.
class CsvWriter {
 public:
  explicit CsvWriter(const CsvSchema& schema);

  // Cells are given already formatted; see FormatNumber.
  void AddRow(std::vector<std::string> cells);
  std::string ToString() const;
  void Save(const std::filesystem::path& path) const;

 private:
  const CsvSchema& schema_;
  std::vector<std::vector<std::string>> rows_;
};

// Parses text written by CsvWriter and validates it against the schema:
// exact header, column count and cell kinds. Throws ConfigError.
CsvTable ParseCsv(std::string_view text, const CsvSchema& schema);
CsvTable ReadCsv(const std::filesystem::path& path, const CsvSchema& schema);

// Schema matching a file name stem such as "profile_stable" (longest
// registered prefix), or nullptr.
const CsvSchema* SchemaForFile(const std::filesystem::path& path);

}  // namespace strstab
