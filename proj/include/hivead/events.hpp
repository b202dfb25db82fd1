#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hivead/time.hpp"

namespace hivead {

enum class Method { AE, RBA, Truth };
enum class ClassHint { SwarmLike, LowTemperature, DataGap, Unknown };

/// Scheduled anomaly kinds of the synthetic generator.
enum class AnomalyClass { Swarm, Opening, VarroaTreatment, SensorFailure };

std::string_view to_string(Method m);
std::string_view to_string(ClassHint c);
std::string_view to_string(AnomalyClass c);
std::optional<Method> parse_method(std::string_view s);
std::optional<ClassHint> parse_class_hint(std::string_view s);
std::optional<AnomalyClass> parse_anomaly_class(std::string_view s);

ClassHint hint_for(AnomalyClass c);

/// An anomaly interval. `end` is the timestamp of the last reading covered.
struct DetectionEvent {
  Timestamp start;
  Timestamp end;
  Timestamp peak;
  double peak_score = 0.0;
  Method method = Method::AE;
  ClassHint class_hint = ClassHint::Unknown;

  bool operator==(const DetectionEvent&) const = default;
};

/// Ground truth of a generated anomaly.
struct TruthEvent {
  DetectionEvent event;
  AnomalyClass kind = AnomalyClass::Swarm;

  bool operator==(const TruthEvent&) const = default;
};

/// Delimited table `start,end,peak,peak_score,method,class_hint`, ISO-8601 times.
void write_events(std::ostream& out, const std::vector<DetectionEvent>& events, seconds offset = seconds{0},
                  char delimiter = ',');
std::vector<DetectionEvent> read_events(std::istream& in, char delimiter = ',');
std::vector<DetectionEvent> read_events(const std::filesystem::path& path, char delimiter = ',');

/// Ground truth in the same columns, method `TRUTH`, the class column carrying
/// the anomaly kind (swarm, opening, varroa-treatment, sensor-failure).
void write_truth(std::ostream& out, const std::vector<TruthEvent>& truth, seconds offset = seconds{0},
                 char delimiter = ',');
std::vector<TruthEvent> read_truth(std::istream& in, char delimiter = ',');
std::vector<TruthEvent> read_truth(const std::filesystem::path& path, char delimiter = ',');

/// Human-readable summary, one block per event.
void write_event_summary(std::ostream& out, const std::vector<DetectionEvent>& events, seconds offset = seconds{0});

/// Score formatting shared by every report: fixed 6 decimals, `inf` for unscoreable spans.
std::string format_score(double v);

}  // namespace hivead
