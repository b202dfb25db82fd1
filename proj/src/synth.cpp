#include "hivead/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hivead/data.hpp"
#include "hivead/error.hpp"
#include "hivead/random.hpp"
#include "text.hpp"

namespace hivead {

namespace {

constexpr int kMinutesPerDay = 1440;
constexpr double kNoiseSigma = 0.1;
constexpr double kOutsideNoiseSigma = 0.2;
constexpr double kNoiseClip = 2.5;
constexpr double kRipple = 0.2;
constexpr double kAmbientMean = 18.0;
constexpr double kAmbientAmplitude = 8.0;
constexpr double kEdgeCoupling = 0.35;
constexpr double kBaseWeight = 40.0;
constexpr double kWeightDriftPerDay = 0.3;
constexpr double kWeightNoise = 0.02;

constexpr double kSwarmRise = 1.5;
constexpr int kSwarmRamp = 8;
constexpr int kSwarmDecay = 10;
constexpr double kSwarmWeight = -1.5;
constexpr double kOpeningDrop = -6.0;
constexpr int kOpeningOpen = 20;
constexpr double kOpeningTau = 3.0;
constexpr double kRecoveryTau = 8.0;
constexpr double kOpeningWeight = -2.0;
constexpr double kVarroaRise = 1.5;
constexpr int kVarroaPlateau = 30;
constexpr double kVarroaWeight = 0.5;
constexpr int kFailureMinutes = 45;

double truncated_normal(Rng& rng, double sigma) {
  double z;
  do {
    z = rng.normal();
  } while (std::abs(z) > kNoiseClip);
  return sigma * z;
}

/// Phase in radians of minute-of-day `m`; the ambient curve peaks at 15:00.
double diurnal_phase(int m) { return 2.0 * std::numbers::pi * (m - 540) / kMinutesPerDay; }

/// Per-minute perturbations accumulated from the schedule.
struct Effects {
  std::vector<double> core;
  std::vector<double> inside;
  std::vector<double> weight;
  std::vector<char> calm;  ///< core ripple suspended
  std::vector<char> failed;

  explicit Effects(std::size_t n) : core(n, 0.0), inside(n, 0.0), weight(n, 0.0), calm(n, 0), failed(n, 0) {}
};

void inject(Effects& fx, const ScheduledAnomaly& a, std::size_t at) {
  const auto len = static_cast<std::size_t>(anomaly_duration(a.kind).count());
  switch (a.kind) {
    case AnomalyClass::Swarm:
      for (std::size_t t = 0; t < len; ++t) {
        const double x = static_cast<double>(t);
        fx.core[at + t] += x <= kSwarmRamp ? kSwarmRise * x / kSwarmRamp
                                           : kSwarmRise * (1.0 - (x - kSwarmRamp) / kSwarmDecay);
        fx.calm[at + t] = 1;
      }
      for (std::size_t t = at + kSwarmRamp; t < fx.weight.size(); ++t) fx.weight[t] += kSwarmWeight;
      break;
    case AnomalyClass::Opening: {
      const double bottom = kOpeningDrop * (1.0 - std::exp(-kOpeningOpen / kOpeningTau));
      for (std::size_t t = 0; t < len; ++t) {
        const double x = static_cast<double>(t);
        fx.inside[at + t] += x < kOpeningOpen ? kOpeningDrop * (1.0 - std::exp(-x / kOpeningTau))
                                              : bottom * std::exp(-(x - kOpeningOpen) / kRecoveryTau);
        if (t < static_cast<std::size_t>(kOpeningOpen)) fx.weight[at + t] += kOpeningWeight;
      }
      break;
    }
    case AnomalyClass::VarroaTreatment:
      for (std::size_t t = 0; t < len; ++t) {
        const double level = t == 0 || t + 1 == len ? 0.0 : kVarroaRise;
        fx.core[at + t] += level;
        fx.calm[at + t] = 1;
      }
      for (std::size_t t = at; t < fx.weight.size(); ++t) fx.weight[t] += kVarroaWeight;
      break;
    case AnomalyClass::SensorFailure:
      for (std::size_t t = 0; t < len; ++t) fx.failed[at + t] = 1;
      break;
  }
}

double peak_offset_minutes(AnomalyClass kind) {
  switch (kind) {
    case AnomalyClass::Swarm: return kSwarmRamp;
    case AnomalyClass::Opening: return kOpeningOpen;
    case AnomalyClass::VarroaTreatment: return 1 + kVarroaPlateau / 2;
    case AnomalyClass::SensorFailure: return kFailureMinutes / 2;
  }
  return 0;
}

double truth_score(AnomalyClass kind) {
  switch (kind) {
    case AnomalyClass::Swarm: return kSwarmRise;
    case AnomalyClass::Opening: return kOpeningDrop;
    case AnomalyClass::VarroaTreatment: return kVarroaRise;
    case AnomalyClass::SensorFailure: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(Layout l) {
  switch (l) {
    case Layout::Hobos13: return "hobos-13";
    case Layout::We4bee5: return "we4bee-5";
    case Layout::Single: return "single";
  }
  return "single";
}

std::optional<Layout> parse_layout(std::string_view s) {
  for (auto l : {Layout::Hobos13, Layout::We4bee5, Layout::Single})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

SensorRoles sensor_roles(Layout l) {
  switch (l) {
    case Layout::Hobos13:
      return {{"T4", "T5", "T6", "T7", "T8", "T9", "T10"}, {"T1", "T2", "T3", "T11"}, {"T12", "T13"}, "T6"};
    case Layout::We4bee5:
      return {{"Tm", "Tr"}, {"Tl", "Ti"}, {"To"}, "Tm"};
    case Layout::Single:
      return {{"T"}, {}, {}, "T"};
  }
  return {};
}

std::chrono::minutes anomaly_duration(AnomalyClass kind) {
  switch (kind) {
    case AnomalyClass::Swarm: return std::chrono::minutes(kSwarmRamp + kSwarmDecay + 1);
    case AnomalyClass::Opening: return std::chrono::minutes(60);
    case AnomalyClass::VarroaTreatment: return std::chrono::minutes(kVarroaPlateau + 2);
    case AnomalyClass::SensorFailure: return std::chrono::minutes(kFailureMinutes);
  }
  return std::chrono::minutes(0);
}

std::vector<ScheduledAnomaly> parse_schedule(std::string_view input) {
  std::vector<ScheduledAnomaly> out;
  std::string normalized(input);
  std::replace(normalized.begin(), normalized.end(), ';', ',');
  for (auto entry : text::split(normalized, ',')) {
    if (entry.empty()) continue;
    const auto parts = text::split(entry, ':');
    if (parts.size() != 3) throw Error(ErrorCode::InvalidSchedule, "schedule entry '" + std::string(entry) + "' is not day:kind:minute");
    ScheduledAnomaly a;
    double day = 0, minute = 0;
    const auto kind = parse_anomaly_class(parts[1]);
    if (!text::parse_double(parts[0], day) || day != std::floor(day) || !kind ||
        !text::parse_double(parts[2], minute) || minute != std::floor(minute))
      throw Error(ErrorCode::InvalidSchedule, "bad schedule entry '" + std::string(entry) + "'");
    a.day = static_cast<int>(day);
    a.kind = *kind;
    a.start_minute = static_cast<int>(minute);
    out.push_back(a);
  }
  return out;
}

std::string format_schedule(const std::vector<ScheduledAnomaly>& schedule) {
  std::string out;
  for (const auto& a : schedule) {
    if (!out.empty()) out += ',';
    out += std::to_string(a.day) + ":" + std::string(to_string(a.kind)) + ":" + std::to_string(a.start_minute);
  }
  return out;
}

SynthOutput generate(const SynthConfig& config) {
  if (config.days < 1) throw Error(ErrorCode::InvalidSchedule, "generator needs at least one day");
  const auto n = static_cast<std::size_t>(config.days) * kMinutesPerDay;

  std::vector<ScheduledAnomaly> schedule = config.schedule;
  std::stable_sort(schedule.begin(), schedule.end(), [](const auto& a, const auto& b) {
    return std::pair(a.day, a.start_minute) < std::pair(b.day, b.start_minute);
  });
  Effects fx(n);
  std::vector<TruthEvent> truth;
  std::size_t free_from = 0;
  for (const auto& a : schedule) {
    if (a.day < 0 || a.day >= config.days)
      throw Error(ErrorCode::InvalidSchedule, "scheduled day " + std::to_string(a.day) + " outside the generated range");
    if (a.start_minute < 0 || a.start_minute >= kMinutesPerDay)
      throw Error(ErrorCode::InvalidSchedule, "start minute " + std::to_string(a.start_minute) + " outside [0, 1440)");
    const auto at = static_cast<std::size_t>(a.day) * kMinutesPerDay + static_cast<std::size_t>(a.start_minute);
    const auto len = static_cast<std::size_t>(anomaly_duration(a.kind).count());
    if (at + len > n) throw Error(ErrorCode::InvalidSchedule, "anomaly runs past the end of the trace");
    if (at < free_from) throw Error(ErrorCode::InvalidSchedule, "scheduled anomalies overlap");
    free_from = at + len;
    inject(fx, a, at);

    TruthEvent t;
    t.kind = a.kind;
    t.event.start = config.start + std::chrono::minutes(at);
    t.event.end = config.start + std::chrono::minutes(at + len - 1);
    t.event.peak = t.event.start + std::chrono::minutes(static_cast<int>(peak_offset_minutes(a.kind)));
    t.event.peak_score = truth_score(a.kind);
    t.event.method = Method::Truth;
    t.event.class_hint = hint_for(a.kind);
    truth.push_back(t);
  }

  const auto roles = sensor_roles(config.layout);
  std::vector<std::string> names;
  switch (config.layout) {
    case Layout::Hobos13:
      for (int i = 1; i <= 13; ++i) names.push_back("T" + std::to_string(i));
      break;
    case Layout::We4bee5: names = {"Tl", "Tm", "Tr", "Ti", "To"}; break;
    case Layout::Single: names = {"T"}; break;
  }
  enum class Role { Core, Edge, Outside };
  std::vector<Role> role;
  for (const auto& name : names) {
    const auto in = [&](const std::vector<std::string>& v) { return std::find(v.begin(), v.end(), name) != v.end(); };
    role.push_back(in(roles.core) ? Role::Core : in(roles.edge) ? Role::Edge : Role::Outside);
  }

  SynthOutput out;
  auto& trace = out.trace;
  trace.hive_id = config.hive_id;
  for (const auto& name : names) trace.columns.push_back({name, "°C"});
  trace.columns.push_back({"weight", "kg"});
  const auto primary = static_cast<Eigen::Index>(std::find(names.begin(), names.end(), roles.primary) - names.begin());
  trace.timestamps.reserve(n);
  trace.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size() + 1));

  const int start_minute_of_day = static_cast<int>(
      std::chrono::duration_cast<std::chrono::minutes>(config.start - std::chrono::floor<std::chrono::days>(config.start))
          .count());
  Rng rng(derive_seed(config.seed, "synth"));
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    trace.timestamps.push_back(config.start + std::chrono::minutes(k));
    const int m = static_cast<int>((static_cast<std::size_t>(start_minute_of_day) + k) % kMinutesPerDay);
    const double ambient = kAmbientMean + kAmbientAmplitude * std::sin(diurnal_phase(m));
    const double ripple = fx.calm[k] ? 0.0 : kRipple * std::sin(diurnal_phase(m) + std::numbers::pi / 2);

    for (std::size_t c = 0; c < names.size(); ++c) {
      double v = 0.0;
      switch (role[c]) {
        case Role::Core:
          v = kBaseTemperature + ripple + fx.core[k] + fx.inside[k] + truncated_normal(rng, kNoiseSigma);
          break;
        case Role::Edge:
          v = kBaseTemperature - kEdgeCoupling * (kBaseTemperature - ambient) + fx.inside[k] +
              truncated_normal(rng, kNoiseSigma);
          break;
        case Role::Outside: v = ambient + truncated_normal(rng, kOutsideNoiseSigma); break;
      }
      trace.values(row, static_cast<Eigen::Index>(c)) = v;
    }
    if (fx.failed[k]) trace.values(row, primary) = kMissing;
    const double days_elapsed = static_cast<double>(k) / kMinutesPerDay;
    trace.values(row, static_cast<Eigen::Index>(names.size())) =
        kBaseWeight + kWeightDriftPerDay * days_elapsed + fx.weight[k] + truncated_normal(rng, kWeightNoise);
  }
  out.truth = std::move(truth);
  return out;
}

}  // namespace hivead
