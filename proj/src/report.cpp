#include "hivead/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "hivead/error.hpp"
#include "text.hpp"

namespace hivead {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::AE: return "AE";
    case Method::RBA: return "RBA";
    case Method::Truth: return "TRUTH";
  }
  return "AE";
}

std::string_view to_string(ClassHint c) {
  switch (c) {
    case ClassHint::SwarmLike: return "swarm-like";
    case ClassHint::LowTemperature: return "low-temperature";
    case ClassHint::DataGap: return "data-gap";
    case ClassHint::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(AnomalyClass c) {
  switch (c) {
    case AnomalyClass::Swarm: return "swarm";
    case AnomalyClass::Opening: return "opening";
    case AnomalyClass::VarroaTreatment: return "varroa-treatment";
    case AnomalyClass::SensorFailure: return "sensor-failure";
  }
  return "swarm";
}

std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::AE, Method::RBA, Method::Truth})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::optional<ClassHint> parse_class_hint(std::string_view s) {
  for (auto c : {ClassHint::SwarmLike, ClassHint::LowTemperature, ClassHint::DataGap, ClassHint::Unknown})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<AnomalyClass> parse_anomaly_class(std::string_view s) {
  for (auto c : {AnomalyClass::Swarm, AnomalyClass::Opening, AnomalyClass::VarroaTreatment, AnomalyClass::SensorFailure})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

ClassHint hint_for(AnomalyClass c) {
  switch (c) {
    case AnomalyClass::Swarm:
    case AnomalyClass::VarroaTreatment: return ClassHint::SwarmLike;
    case AnomalyClass::Opening: return ClassHint::LowTemperature;
    case AnomalyClass::SensorFailure: return ClassHint::DataGap;
  }
  return ClassHint::Unknown;
}

std::string format_score(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return text::fixed(v, 6);
}

namespace {

constexpr const char* kEventColumns[] = {"start", "end", "peak", "peak_score", "method", "class_hint"};

void write_header(std::ostream& out, char delimiter) {
  for (std::size_t i = 0; i < std::size(kEventColumns); ++i) out << (i ? std::string(1, delimiter) : "") << kEventColumns[i];
  out << '\n';
}

void write_row(std::ostream& out, const DetectionEvent& e, std::string_view cls, seconds offset, char delimiter) {
  out << format_time(e.start, offset) << delimiter << format_time(e.end, offset) << delimiter
      << format_time(e.peak, offset) << delimiter << format_score(e.peak_score) << delimiter << to_string(e.method)
      << delimiter << cls << '\n';
}

Timestamp time_cell(std::string_view cell) {
  const auto t = parse_time(cell);
  if (!t) throw Error(ErrorCode::MalformedFile, "bad timestamp '" + std::string(cell) + "' in events file");
  return t->utc;
}

/// Calls `row(event, class_cell)` for every data line.
template <typename F>
void read_rows(std::istream& in, char delimiter, F&& row) {
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    const auto view = text::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto cells = text::split(view, delimiter);
    if (!header) {
      if (cells.size() != std::size(kEventColumns) || !std::equal(cells.begin(), cells.end(), std::begin(kEventColumns)))
        throw Error(ErrorCode::MalformedHeader, "events file header must be start,end,peak,peak_score,method,class_hint");
      header = true;
      continue;
    }
    if (cells.size() != std::size(kEventColumns))
      throw Error(ErrorCode::MalformedFile, "events row with " + std::to_string(cells.size()) + " cells");
    DetectionEvent e;
    e.start = time_cell(cells[0]);
    e.end = time_cell(cells[1]);
    e.peak = time_cell(cells[2]);
    if (!text::parse_double(cells[3], e.peak_score))
      throw Error(ErrorCode::MalformedFile, "bad score '" + std::string(cells[3]) + "'");
    const auto method = parse_method(cells[4]);
    if (!method) throw Error(ErrorCode::MalformedFile, "unknown method '" + std::string(cells[4]) + "'");
    e.method = *method;
    row(e, cells[5]);
  }
  if (!header) throw Error(ErrorCode::MalformedHeader, "events file has no header");
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

void write_events(std::ostream& out, const std::vector<DetectionEvent>& events, seconds offset, char delimiter) {
  write_header(out, delimiter);
  for (const auto& e : events) write_row(out, e, to_string(e.class_hint), offset, delimiter);
}

std::vector<DetectionEvent> read_events(std::istream& in, char delimiter) {
  std::vector<DetectionEvent> out;
  read_rows(in, delimiter, [&](DetectionEvent e, std::string_view cls) {
    const auto hint = parse_class_hint(cls);
    if (!hint) throw Error(ErrorCode::MalformedFile, "unknown class hint '" + std::string(cls) + "'");
    e.class_hint = *hint;
    out.push_back(e);
  });
  return out;
}

std::vector<DetectionEvent> read_events(const std::filesystem::path& path, char delimiter) {
  auto in = open_or_throw(path);
  return read_events(in, delimiter);
}

void write_truth(std::ostream& out, const std::vector<TruthEvent>& truth, seconds offset, char delimiter) {
  write_header(out, delimiter);
  for (const auto& t : truth) write_row(out, t.event, to_string(t.kind), offset, delimiter);
}

std::vector<TruthEvent> read_truth(std::istream& in, char delimiter) {
  std::vector<TruthEvent> out;
  read_rows(in, delimiter, [&](DetectionEvent e, std::string_view cls) {
    const auto kind = parse_anomaly_class(cls);
    if (!kind) throw Error(ErrorCode::MalformedFile, "unknown anomaly class '" + std::string(cls) + "'");
    e.class_hint = hint_for(*kind);
    out.push_back({e, *kind});
  });
  return out;
}

std::vector<TruthEvent> read_truth(const std::filesystem::path& path, char delimiter) {
  auto in = open_or_throw(path);
  return read_truth(in, delimiter);
}

void write_event_summary(std::ostream& out, const std::vector<DetectionEvent>& events, seconds offset) {
  out << events.size() << " event(s)\n";
  std::size_t i = 0;
  for (const auto& e : events) {
    const auto minutes = std::chrono::duration_cast<std::chrono::minutes>(e.end - e.start).count();
    out << '\n'
        << "#" << ++i << ' ' << to_string(e.method) << ' ' << to_string(e.class_hint) << '\n'
        << "  from  " << format_time(e.start, offset) << '\n'
        << "  to    " << format_time(e.end, offset) << "  (" << minutes << " min)\n"
        << "  peak  " << format_time(e.peak, offset) << "  score " << format_score(e.peak_score) << '\n';
  }
}

bool overlaps(const DetectionEvent& a, const DetectionEvent& b, seconds tolerance) {
  return a.start <= b.end + tolerance && b.start - tolerance <= a.end;
}

std::vector<ComparisonRow> compare_events(const std::string& dataset, const std::vector<TruthEvent>& truth,
                                          const std::vector<DetectionEvent>& ae, const std::vector<DetectionEvent>& rba,
                                          seconds tolerance) {
  auto any_overlap = [&](const std::vector<DetectionEvent>& events, const DetectionEvent& ref) {
    return std::any_of(events.begin(), events.end(), [&](const DetectionEvent& e) { return overlaps(e, ref, tolerance); });
  };
  std::vector<ComparisonRow> rows;

  if (!truth.empty()) {
    std::vector<DetectionEvent> refs;
    for (const auto& t : truth) {
      rows.push_back({dataset, t.event.peak, std::string(to_string(t.kind)), any_overlap(rba, t.event),
                      any_overlap(ae, t.event), true});
      refs.push_back(t.event);
    }
    std::vector<ComparisonRow> extra;
    for (const auto* list : {&rba, &ae}) {
      for (const auto& e : *list) {
        if (any_overlap(refs, e)) continue;
        extra.push_back({dataset, e.peak, std::string(to_string(e.class_hint)), e.method == Method::RBA,
                         e.method == Method::AE, false});
      }
    }
    std::stable_sort(extra.begin(), extra.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) { return a.timestamp < b.timestamp; });
    rows.insert(rows.end(), extra.begin(), extra.end());
    return rows;
  }

  for (const auto& r : rba)
    rows.push_back({dataset, r.peak, std::string(to_string(r.class_hint)), true, any_overlap(ae, r), false});
  for (const auto& a : ae) {
    if (any_overlap(rba, a)) continue;
    rows.push_back({dataset, a.peak, std::string(to_string(a.class_hint)), false, true, false});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) { return a.timestamp < b.timestamp; });
  return rows;
}

void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows, seconds offset, char delimiter) {
  out << "dataset" << delimiter << "timestamp" << delimiter << "class" << delimiter << "rba" << delimiter << "ae\n";
  for (const auto& r : rows)
    out << r.dataset << delimiter << format_time(r.timestamp, offset) << delimiter << r.label << delimiter
        << (r.rba ? "yes" : "no") << delimiter << (r.ae ? "yes" : "no") << '\n';
}

}  // namespace hivead
