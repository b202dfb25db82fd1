#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hivead/data.hpp"
#include "hivead/events.hpp"
#include "hivead/nn/autoencoder.hpp"

namespace hivead {

enum class ThresholdMethod { Manual, Quantile, MaxValidation };

std::string_view to_string(ThresholdMethod m);

inline constexpr double kSafetyMargin = 1.05;

/// Reconstruction-error cutoff alpha, in normalized units.
struct Threshold {
  double alpha = 0.0;
  ThresholdMethod method = ThresholdMethod::Manual;
  double max_val_error = 0.0;
  double quantile_used = 1.0;
  std::size_t validation_count = 0;
  /// Holdout windows scoring >= alpha. Reported only; never changes alpha.
  std::optional<std::size_t> holdout_exceeding;
  std::size_t holdout_count = 0;

  static Threshold manual(double alpha);
};

/// Order statistic at ceil(q * n) (1-based) of `errors`.
double lower_quantile(std::vector<double> errors, double q);

/// alpha = margin x lower_quantile(validation_errors, q).
Threshold calibrate_from_errors(const std::vector<double>& validation_errors, double quantile,
                                double margin = kSafetyMargin);

/// Calibrates on the model's validation reconstruction errors; holdout windows,
/// when given, are scored against the result and counted.
Threshold calibrate(const nn::Autoencoder<double>& model, const Eigen::MatrixXd& validation_windows,
                    const std::optional<Eigen::MatrixXd>& holdout_windows, double quantile = 1.0);

void write_threshold(std::ostream& out, const Threshold& t);
Threshold read_threshold(std::istream& in);
Threshold read_threshold(const std::filesystem::path& path);

struct WindowScore {
  Timestamp start;
  double error = 0.0;
};

/// Inclusive span of consecutive missing readings.
struct GapSpan {
  Timestamp start;
  Timestamp end;
};

struct TraceScores {
  std::vector<WindowScore> windows;
  std::vector<GapSpan> gaps;
  seconds period{60};
  int window_size = 0;

  seconds window_span() const { return period * (window_size - 1); }
};

/// Missing-reading runs of `sensor`, including timestamp holes.
std::vector<GapSpan> find_gaps(const SensorTrace& trace, const std::string& sensor);

/// One reconstruction error per constructible window (every day of the trace,
/// normalized with `params`), plus the data gaps that prevented the others.
TraceScores score_trace(const nn::Autoencoder<double>& model, const SensorTrace& trace, const std::string& sensor,
                        const NormalizationParams& params, int stride = 1);

struct DetectOptions {
  seconds merge_gap{600};
  /// Emit an AE event (score +inf, class data-gap) for each gap of at least `min_gap`.
  bool report_gaps = true;
  seconds min_gap{0};
};

/// Windows with error >= alpha are hits. A hit joins the current event when it
/// starts no more than merge_gap after the event's last covered reading; the
/// event spans the union of its windows and peaks at the centre of its
/// highest-error window (earliest on ties).
std::vector<DetectionEvent> detect(const TraceScores& scores, const Threshold& threshold,
                                   const DetectOptions& options = {});

/// Advisory class hints for AE events: data-gap next to a gap, swarm-like when
/// the mean raw reading exceeds base_temp, low-temperature when it is more
/// than 1 degree below. Detection itself is unaffected.
void assign_class_hints(std::vector<DetectionEvent>& events, const SensorTrace& trace, const std::string& sensor,
                        const std::vector<GapSpan>& gaps, double base_temp = kBaseTemperature,
                        seconds adjacency = seconds{600});

}  // namespace hivead
