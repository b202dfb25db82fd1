#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hivead/events.hpp"

namespace hivead {

/// One row of the AE/RBA comparison table.
struct ComparisonRow {
  std::string dataset;
  Timestamp timestamp;
  std::string label;  ///< anomaly kind, or the detector's class hint for unmatched events
  bool rba = false;
  bool ae = false;
  bool matched_truth = false;
};

/// True when [a.start, a.end] and [b.start - tolerance, b.end + tolerance] intersect.
bool overlaps(const DetectionEvent& a, const DetectionEvent& b, seconds tolerance = seconds{0});

/// Per reference event, which methods fired. With ground truth, one row per
/// truth event followed by detections that match none of it. Without truth, the
/// RBA events are the reference and AE events overlapping none of them follow.
std::vector<ComparisonRow> compare_events(const std::string& dataset, const std::vector<TruthEvent>& truth,
                                          const std::vector<DetectionEvent>& ae, const std::vector<DetectionEvent>& rba,
                                          seconds tolerance);

/// Columns dataset, timestamp, class, rba, ae; marks are `yes`/`no`.
void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows, seconds offset = seconds{0},
                      char delimiter = ',');

}  // namespace hivead
