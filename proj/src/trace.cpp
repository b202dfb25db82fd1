#include "hivead/trace.hpp"

#include <algorithm>
#include <cctype>

#include "hivead/error.hpp"

namespace hivead {

Eigen::Index SensorTrace::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<Eigen::Index>(i);
  return -1;
}

Eigen::Index SensorTrace::column_index(const std::string& name) const {
  const Eigen::Index idx = find_column(name);
  if (idx < 0) throw Error(ErrorCode::UnknownSensor, "unknown sensor '" + name + "'");
  return idx;
}

std::set<Day> SensorTrace::days() const {
  std::set<Day> out;
  for (std::size_t i = 0; i < size(); ++i) out.insert(day_of(i));
  return out;
}

seconds SensorTrace::nominal_period() const {
  if (size() < 2) return seconds{60};
  std::vector<long long> diffs;
  diffs.reserve(size() - 1);
  for (std::size_t i = 1; i < size(); ++i) diffs.push_back((timestamps[i] - timestamps[i - 1]).count());
  auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  return seconds{std::max(1LL, *mid)};
}

namespace {

SensorTrace take_rows(const SensorTrace& src, const std::vector<Eigen::Index>& rows) {
  SensorTrace out;
  out.hive_id = src.hive_id;
  out.columns = src.columns;
  out.utc_offset = src.utc_offset;
  out.timestamps.reserve(rows.size());
  out.values.resize(static_cast<Eigen::Index>(rows.size()), src.values.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.timestamps.push_back(src.timestamps[static_cast<std::size_t>(rows[k])]);
    out.values.row(static_cast<Eigen::Index>(k)) = src.values.row(rows[k]);
  }
  return out;
}

}  // namespace

SensorTrace SensorTrace::slice(Timestamp from, Timestamp to) const {
  const auto lo = std::lower_bound(timestamps.begin(), timestamps.end(), from);
  const auto hi = std::lower_bound(timestamps.begin(), timestamps.end(), to);
  std::vector<Eigen::Index> rows;
  for (auto it = lo; it < hi; ++it) rows.push_back(it - timestamps.begin());
  return take_rows(*this, rows);
}

SensorTrace SensorTrace::restrict_to_days(const std::set<Day>& keep) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < size(); ++i)
    if (keep.contains(day_of(i))) rows.push_back(static_cast<Eigen::Index>(i));
  return take_rows(*this, rows);
}

void SensorTrace::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(timestamps.size()) ||
      values.cols() != static_cast<Eigen::Index>(columns.size()))
    throw Error(ErrorCode::ShapeMismatch, "trace values do not match timestamps/columns");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw Error(ErrorCode::NonMonotonicTimestamps, "timestamps not strictly increasing at row " + std::to_string(i));
}

std::string default_unit(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower.rfind("weight", 0) == 0) return "kg";
  return "°C";
}

}  // namespace hivead
