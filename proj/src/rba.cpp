#include "hivead/rba.hpp"

#include <cmath>

#include "hivead/error.hpp"

namespace hivead {

void RbaConfig::validate() const {
  if (!(band > 0.0)) throw Error(ErrorCode::InvalidArgument, "rba band must be positive");
  if (!std::isfinite(base_temp)) throw Error(ErrorCode::InvalidArgument, "rba base temperature must be finite");
  if (min_duration <= 0 || min_duration > max_duration)
    throw Error(ErrorCode::InvalidArgument, "rba durations must satisfy 0 < min <= max");
}

std::vector<DetectionEvent> rba_detect(const SensorTrace& trace, const std::string& sensor, const RbaConfig& config) {
  config.validate();
  const auto column = trace.values.col(trace.column_index(sensor));
  const seconds period = trace.nominal_period();
  const double limit = config.base_temp + config.band;
  std::vector<DetectionEvent> out;

  std::size_t run_start = 0, run_len = 0, peak_row = 0;
  auto close_run = [&] {
    if (run_len == 0) return;
    const auto minutes = static_cast<double>(run_len) * static_cast<double>(period.count()) / 60.0;
    if (minutes >= config.min_duration && minutes <= config.max_duration) {
      const double peak = column(static_cast<Eigen::Index>(peak_row));
      out.push_back({trace.timestamps[run_start], trace.timestamps[run_start + run_len - 1], trace.timestamps[peak_row],
                     peak - config.base_temp, Method::RBA, ClassHint::SwarmLike});
    }
    run_len = 0;
  };

  for (std::size_t r = 0; r < trace.size(); ++r) {
    const double v = column(static_cast<Eigen::Index>(r));
    if (run_len > 0 && trace.timestamps[r] - trace.timestamps[r - 1] > period) close_run();
    if (is_missing(v) || !(v > limit)) {
      close_run();
      continue;
    }
    if (run_len == 0) {
      run_start = r;
      peak_row = r;
    } else if (v > column(static_cast<Eigen::Index>(peak_row))) {
      peak_row = r;
    }
    ++run_len;
  }
  close_run();
  return out;
}

}  // namespace hivead
