#include "hivead/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "hivead/error.hpp"

namespace hivead {

std::string_view to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::Manual: return "manual";
    case ThresholdMethod::Quantile: return "quantile";
    case ThresholdMethod::MaxValidation: return "max_validation";
  }
  return "manual";
}

Threshold Threshold::manual(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive and finite");
  Threshold t;
  t.alpha = alpha;
  t.method = ThresholdMethod::Manual;
  t.quantile_used = 0.0;
  return t;
}

double lower_quantile(std::vector<double> errors, double q) {
  if (errors.empty()) throw Error(ErrorCode::EmptyValidation, "no validation errors to take a quantile of");
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile must lie in (0, 1]");
  const auto n = errors.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  auto it = errors.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(errors.begin(), it, errors.end());
  return *it;
}

Threshold calibrate_from_errors(const std::vector<double>& validation_errors, double quantile, double margin) {
  Threshold t;
  t.quantile_used = quantile;
  t.method = quantile == 1.0 ? ThresholdMethod::MaxValidation : ThresholdMethod::Quantile;
  t.alpha = margin * lower_quantile(validation_errors, quantile);
  t.max_val_error = *std::max_element(validation_errors.begin(), validation_errors.end());
  t.validation_count = validation_errors.size();
  if (!(t.alpha > 0.0))
    throw Error(ErrorCode::EmptyValidation, "calibrated alpha is not positive; validation errors are all zero");
  return t;
}

namespace {

std::vector<double> errors_of(const nn::Autoencoder<double>& model, const Eigen::MatrixXd& windows) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(windows.cols()));
  constexpr Eigen::Index chunk = 512;
  for (Eigen::Index start = 0; start < windows.cols(); start += chunk) {
    const Eigen::Index len = std::min(chunk, windows.cols() - start);
    const Eigen::VectorXd e = nn::window_errors(model, windows.middleCols(start, len));
    out.insert(out.end(), e.data(), e.data() + e.size());
  }
  return out;
}

}  // namespace

Threshold calibrate(const nn::Autoencoder<double>& model, const Eigen::MatrixXd& validation_windows,
                    const std::optional<Eigen::MatrixXd>& holdout_windows, double quantile) {
  if (validation_windows.cols() == 0) throw Error(ErrorCode::EmptyValidation, "no validation windows");
  Threshold t = calibrate_from_errors(errors_of(model, validation_windows), quantile);
  if (holdout_windows && holdout_windows->cols() > 0) {
    const auto errs = errors_of(model, *holdout_windows);
    t.holdout_count = errs.size();
    t.holdout_exceeding = static_cast<std::size_t>(
        std::count_if(errs.begin(), errs.end(), [&](double e) { return e >= t.alpha; }));
  }
  return t;
}

void write_threshold(std::ostream& out, const Threshold& t) {
  nlohmann::ordered_json j;
  j["alpha"] = t.alpha;
  j["method"] = std::string(to_string(t.method));
  j["max_val_error"] = t.max_val_error;
  j["quantile"] = t.quantile_used;
  j["validation_count"] = t.validation_count;
  j["holdout_count"] = t.holdout_count;
  if (t.holdout_exceeding)
    j["holdout_exceeding"] = *t.holdout_exceeding;
  else
    j["holdout_exceeding"] = nullptr;
  out << j.dump(2) << '\n';
}

Threshold read_threshold(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    Threshold t;
    t.alpha = j.at("alpha").get<double>();
    const auto method = j.at("method").get<std::string>();
    if (method == "manual")
      t.method = ThresholdMethod::Manual;
    else if (method == "quantile")
      t.method = ThresholdMethod::Quantile;
    else if (method == "max_validation")
      t.method = ThresholdMethod::MaxValidation;
    else
      throw Error(ErrorCode::MalformedFile, "unknown threshold method '" + method + "'");
    t.max_val_error = j.value("max_val_error", 0.0);
    t.quantile_used = j.value("quantile", 1.0);
    t.validation_count = j.value("validation_count", std::size_t{0});
    t.holdout_count = j.value("holdout_count", std::size_t{0});
    if (j.contains("holdout_exceeding") && !j["holdout_exceeding"].is_null())
      t.holdout_exceeding = j["holdout_exceeding"].get<std::size_t>();
    if (!(t.alpha > 0.0)) throw Error(ErrorCode::MalformedFile, "threshold alpha must be positive");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("malformed threshold file: ") + e.what());
  }
}

Threshold read_threshold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  return read_threshold(in);
}

std::vector<GapSpan> find_gaps(const SensorTrace& trace, const std::string& sensor) {
  const auto column = trace.values.col(trace.column_index(sensor));
  const seconds period = trace.nominal_period();
  std::vector<GapSpan> out;
  std::optional<GapSpan> open;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const Timestamp ts = trace.timestamps[r];
    if (r > 0 && ts - trace.timestamps[r - 1] > period) {
      if (!open)
        open = GapSpan{trace.timestamps[r - 1] + period, ts - period};
      else
        open->end = ts - period;
    }
    if (is_missing(column(static_cast<Eigen::Index>(r)))) {
      if (!open)
        open = GapSpan{ts, ts};
      else
        open->end = ts;
    } else if (open) {
      out.push_back(*open);
      open.reset();
    }
  }
  if (open) out.push_back(*open);
  return out;
}

TraceScores score_trace(const nn::Autoencoder<double>& model, const SensorTrace& trace, const std::string& sensor,
                        const NormalizationParams& params, int stride) {
  TraceScores out;
  out.window_size = model.window_size;
  out.period = trace.nominal_period();
  trace.column_index(sensor);
  if (trace.size() < static_cast<std::size_t>(model.window_size)) return out;

  out.gaps = find_gaps(trace, sensor);
  const auto windows = make_windows(trace, sensor, trace.days(), model.window_size, stride, params);
  if (windows.empty()) return out;
  const auto errors = errors_of(model, stack_windows(windows));
  out.windows.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out.windows.push_back({windows[i].start, errors[i]});
  return out;
}

std::vector<DetectionEvent> detect(const TraceScores& scores, const Threshold& threshold, const DetectOptions& options) {
  std::vector<DetectionEvent> events;
  const seconds span = scores.window_span();
  const seconds to_centre = scores.period * (scores.window_size / 2);

  std::optional<DetectionEvent> current;
  double current_peak = -std::numeric_limits<double>::infinity();
  for (const auto& w : scores.windows) {
    if (!(w.error >= threshold.alpha)) continue;
    if (current && w.start - current->end <= options.merge_gap) {
      current->end = std::max(current->end, w.start + span);
      if (w.error > current_peak) {
        current_peak = w.error;
        current->peak = w.start + to_centre;
        current->peak_score = w.error;
      }
      continue;
    }
    if (current) events.push_back(*current);
    current = DetectionEvent{w.start, w.start + span, w.start + to_centre, w.error, Method::AE, ClassHint::Unknown};
    current_peak = w.error;
  }
  if (current) events.push_back(*current);

  if (options.report_gaps) {
    for (const auto& g : scores.gaps) {
      if (g.end - g.start + scores.period < options.min_gap) continue;
      const Timestamp mid = g.start + (g.end - g.start) / 2;
      events.push_back({g.start, g.end, mid, std::numeric_limits<double>::infinity(), Method::AE, ClassHint::DataGap});
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const DetectionEvent& a, const DetectionEvent& b) { return a.start < b.start; });
  }
  return events;
}

void assign_class_hints(std::vector<DetectionEvent>& events, const SensorTrace& trace, const std::string& sensor,
                        const std::vector<GapSpan>& gaps, double base_temp, seconds adjacency) {
  const auto column = trace.values.col(trace.column_index(sensor));
  for (auto& ev : events) {
    if (ev.method != Method::AE || ev.class_hint == ClassHint::DataGap) continue;
    const bool near_gap = std::any_of(gaps.begin(), gaps.end(), [&](const GapSpan& g) {
      return g.start - ev.end <= adjacency && ev.start - g.end <= adjacency;
    });
    if (near_gap) {
      ev.class_hint = ClassHint::DataGap;
      continue;
    }
    const auto lo = std::lower_bound(trace.timestamps.begin(), trace.timestamps.end(), ev.start);
    const auto hi = std::upper_bound(trace.timestamps.begin(), trace.timestamps.end(), ev.end);
    double sum = 0.0;
    std::size_t n = 0;
    for (auto it = lo; it < hi; ++it) {
      const double v = column(it - trace.timestamps.begin());
      if (is_missing(v)) continue;
      sum += v;
      ++n;
    }
    ev.class_hint = ClassHint::Unknown;
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    if (mean > base_temp)
      ev.class_hint = ClassHint::SwarmLike;
    else if (mean < base_temp - 1.0)
      ev.class_hint = ClassHint::LowTemperature;
  }
}

}  // namespace hivead
