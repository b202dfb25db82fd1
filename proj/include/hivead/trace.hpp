#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "hivead/time.hpp"

namespace hivead {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct Column {
  std::string name;
  std::string unit;
};

/// Bookkeeping from ingest: rows the reader had to repair.
struct IngestStats {
  std::size_t rows_read = 0;
  std::size_t reordered_rows = 0;
  std::size_t duplicate_rows = 0;
  std::size_t skipped_rows = 0;
};

/// Timestamped readings of one hive. `values` is time x sensor; a missing
/// reading is stored as NaN.
struct SensorTrace {
  std::string hive_id;
  std::vector<Column> columns;
  std::vector<Timestamp> timestamps;
  Eigen::MatrixXd values;
  seconds utc_offset{0};
  IngestStats stats;

  std::size_t size() const { return timestamps.size(); }
  bool empty() const { return timestamps.empty(); }

  /// Column index or -1.
  Eigen::Index find_column(const std::string& name) const;
  /// Column index; throws UnknownSensor.
  Eigen::Index column_index(const std::string& name) const;

  auto sensor(const std::string& name) const { return values.col(column_index(name)); }

  Day day_of(std::size_t row) const { return local_day(timestamps[row], utc_offset); }

  /// Distinct local days covered by at least one row, ascending.
  std::set<Day> days() const;

  /// Median spacing of consecutive timestamps (60 s for traces with < 2 rows).
  seconds nominal_period() const;

  /// Rows with `from <= ts < to`.
  SensorTrace slice(Timestamp from, Timestamp to) const;

  /// Rows whose local day is in `keep`.
  SensorTrace restrict_to_days(const std::set<Day>& keep) const;

  /// Throws if timestamps are not strictly increasing or shapes disagree.
  void validate() const;
};

/// Default unit for a sensor column named `name`.
std::string default_unit(const std::string& name);

}  // namespace hivead
