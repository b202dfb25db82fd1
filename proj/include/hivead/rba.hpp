#pragma once

#include <string>
#include <vector>

#include "hivead/data.hpp"
#include "hivead/events.hpp"

namespace hivead {

struct RbaConfig {
  double base_temp = kBaseTemperature;
  double band = 1.0;
  int min_duration = 2;   ///< minutes, inclusive
  int max_duration = 20;  ///< minutes, inclusive

  void validate() const;
};

/// Rule-based swarm detector. An excursion is a maximal run of readings
/// strictly above base_temp + band, split at missing readings and timestamp
/// holes; runs lasting [min_duration, max_duration] minutes become events
/// peaking at their maximum (earliest on ties).
std::vector<DetectionEvent> rba_detect(const SensorTrace& trace, const std::string& sensor,
                                       const RbaConfig& config = {});

}  // namespace hivead
