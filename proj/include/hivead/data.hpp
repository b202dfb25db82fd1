#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hivead/normalization.hpp"
#include "hivead/time.hpp"
#include "hivead/trace.hpp"

namespace hivead {

inline constexpr double kBaseTemperature = 34.5;

// ---------------------------------------------------------------------------
// Ingest / resample

struct IngestOptions {
  char delimiter = ',';
  std::string hive_id;  ///< defaults to the file stem
  /// Out-of-order rows above this fraction of the file are an error.
  double max_reordered_fraction = 0.01;
};

/// Reads a delimited table with header `timestamp,<sensor>...`. A header cell
/// may carry its unit as `name[unit]`. Unparseable cells become missing
/// readings, duplicate timestamps keep the last occurrence.
SensorTrace ingest(const std::filesystem::path& path, const IngestOptions& options = {});
SensorTrace parse_trace(std::istream& in, const IngestOptions& options = {});

void write_trace(std::ostream& out, const SensorTrace& trace, char delimiter = ',');

/// Bucket means on a regular grid aligned to multiples of `period` since the epoch.
SensorTrace resample(const SensorTrace& trace, seconds period);

// ---------------------------------------------------------------------------
// Day labels and splits

enum class DayClass { Normal, Anomalous };
enum class LabelSource { Manual, Auto };

struct DayLabel {
  Day date;
  DayClass label = DayClass::Normal;
  LabelSource source = LabelSource::Manual;

  bool operator==(const DayLabel&) const = default;
};

struct AutoLabelRule {
  double base_temp = kBaseTemperature;
  double band = 3.0;
  int min_excess_minutes = 10;
  double max_missing_fraction = 0.2;
};

/// A day is anomalous when `sensor` leaves base_temp +- band for at least
/// min_excess_minutes (cumulative), or when more than max_missing_fraction of
/// its expected readings are absent.
std::vector<DayLabel> auto_label_days(const SensorTrace& trace, const std::string& sensor,
                                      const AutoLabelRule& rule = {});

std::vector<DayLabel> read_labels(const std::filesystem::path& path);
void write_labels(std::ostream& out, const std::vector<DayLabel>& labels);

/// Manual labels replace auto labels for the same day.
std::vector<DayLabel> merge_labels(const std::vector<DayLabel>& automatic, const std::vector<DayLabel>& manual);

struct SplitSet {
  std::set<Day> training;
  std::set<Day> validation;
  std::set<Day> holdout;
  std::map<std::string, std::set<Day>> test;

  bool operator==(const SplitSet&) const = default;
};

/// Normal days go chronologically to training (earliest) and validation (latest
/// round(f * n) days, at least one when n >= 2); anomalous days of the source
/// hive form the holdout, those of other hives the test sets.
SplitSet build_splits(const std::vector<DayLabel>& labels,
                      const std::map<std::string, std::vector<DayLabel>>& other_hives,
                      double validation_fraction);

void write_splits(std::ostream& out, const SplitSet& splits);
SplitSet read_splits(std::istream& in);

// ---------------------------------------------------------------------------
// Normalization and windows

/// Population mean/std of the non-missing readings of `sensor` on `days`.
NormalizationParams fit_normalization(const SensorTrace& trace, const std::string& sensor, const std::set<Day>& days);

struct Window {
  Timestamp start;
  Eigen::VectorXd values;
  bool normalized = false;
};

/// Sliding windows over every gap-free run of `sensor` restricted to `days`.
/// A run breaks at a missing reading, at a timestamp hole, and at a day not in
/// `days`. Offsets restart at 0 in each run.
std::vector<Window> make_windows(const SensorTrace& trace, const std::string& sensor, const std::set<Day>& days,
                                 int window_size, int stride, const NormalizationParams& params);

/// Column-per-window matrix.
Eigen::MatrixXd stack_windows(const std::vector<Window>& windows);

}  // namespace hivead
