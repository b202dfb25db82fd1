#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hivead/events.hpp"
#include "hivead/trace.hpp"

namespace hivead {

enum class Layout { Hobos13, We4bee5, Single };

std::string_view to_string(Layout l);
std::optional<Layout> parse_layout(std::string_view s);

/// Temperature sensors of a layout by role.
struct SensorRoles {
  std::vector<std::string> core;
  std::vector<std::string> edge;
  std::vector<std::string> outside;
  /// The sensor the detectors watch and sensor failures hit.
  std::string primary;
};

SensorRoles sensor_roles(Layout l);

struct ScheduledAnomaly {
  int day = 0;  ///< 0-based day of the generated trace
  AnomalyClass kind = AnomalyClass::Swarm;
  int start_minute = 0;  ///< minute of that day, [0, 1440)

  bool operator==(const ScheduledAnomaly&) const = default;
};

/// `day:kind:minute` entries separated by commas or semicolons.
std::vector<ScheduledAnomaly> parse_schedule(std::string_view text);
std::string format_schedule(const std::vector<ScheduledAnomaly>& schedule);

struct SynthConfig {
  int days = 1;
  Layout layout = Layout::Hobos13;
  std::uint64_t seed = 0;
  std::vector<ScheduledAnomaly> schedule;
  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2019} / 5 / 1}};
  std::string hive_id = "synth";
};

struct SynthOutput {
  SensorTrace trace;
  std::vector<TruthEvent> truth;
};

/// Length of an anomaly's ground-truth interval.
std::chrono::minutes anomaly_duration(AnomalyClass kind);

/// One-minute synthetic hive trace with the scheduled anomalies injected.
/// Throws InvalidSchedule for days or minutes out of range, anomalies running
/// past the end of the trace, or overlapping anomalies.
SynthOutput generate(const SynthConfig& config);

}  // namespace hivead
