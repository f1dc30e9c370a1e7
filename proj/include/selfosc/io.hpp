#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "selfosc/dynamics.hpp"
#include "selfosc/transport.hpp"

namespace selfosc {

/// One row of the observables table. `status` is pass, fail, info or
/// skipped; `tolerance` is NaN when the row is informational.
struct Observable {
  std::string name;
  double value = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double tolerance = 0.0;
  std::string status = "info";
};

inline const std::vector<std::string> kCoefficientColumns{"t",       "lambda", "D",  "D1_part",
                                                          "D2_part", "I1",     "I2", "ratio"};
inline const std::vector<std::string> kObservableColumns{"name",      "value",     "window_lo",
                                                         "window_hi", "tolerance", "status"};
inline const std::vector<std::string> kEnergyColumns{"t",      "E1",      "E2",      "E1_ref",
                                                     "E2_ref", "dE1",     "dE2",     "dE1_dt",
                                                     "dE2_dt"};
/// t, n1[, n2], dn1_dt[, dn2_dt].
std::vector<std::string> trajectory_columns(std::size_t channels);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string coefficients_csv(const CoefficientSeries& c);
std::string trajectory_csv(const Trajectory& t);
std::string observables_csv(const std::vector<Observable>& rows);
std::string energy_csv(const DeltaDissipation& d);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`; throws DomainError if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric(const std::string& name) const;
};

/// Minimal reader for the files written here (no quoting).
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

}  // namespace selfosc
