#include "hivead/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hivead/error.hpp"
#include "text.hpp"

namespace hivead {

namespace {

using text::lower;
using text::split;
using text::trim;

double parse_reading(std::string_view cell) {
  if (cell.empty()) return kMissing;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return kMissing;
  return v;
}

struct RawRow {
  Timestamp ts;
  std::size_t order;
  std::vector<double> values;
};

}  // namespace

SensorTrace parse_trace(std::istream& in, const IngestOptions& options) {
  std::string line;
  do {
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "missing header row");
  } while (trim(line).empty());

  const auto header = split(line, options.delimiter);
  std::string first = lower(header.front());
  if (!first.empty() && static_cast<unsigned char>(first[0]) == 0xEF) first.erase(0, 3);  // UTF-8 BOM
  if (header.size() < 2 || first != "timestamp")
    throw Error(ErrorCode::MalformedHeader, "header must be 'timestamp" + std::string(1, options.delimiter) + "<sensor>...'");

  SensorTrace trace;
  trace.hive_id = options.hive_id;
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string_view cell = header[i];
    if (cell.empty()) throw Error(ErrorCode::MalformedHeader, "empty sensor name in header");
    Column col;
    const auto open = cell.find('[');
    if (open != std::string_view::npos && cell.back() == ']') {
      col.name = std::string(trim(cell.substr(0, open)));
      col.unit = std::string(cell.substr(open + 1, cell.size() - open - 2));
    } else {
      col.name = std::string(cell);
      col.unit = default_unit(col.name);
    }
    for (const auto& existing : trace.columns)
      if (existing.name == col.name) throw Error(ErrorCode::MalformedHeader, "duplicate sensor '" + col.name + "'");
    trace.columns.push_back(std::move(col));
  }

  const std::size_t ncols = trace.columns.size();
  std::vector<RawRow> rows;
  bool offset_known = false;
  Timestamp latest = Timestamp::min();

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++trace.stats.rows_read;
    const auto cells = split(line, options.delimiter);
    const auto parsed = parse_time(cells.front());
    if (!parsed) {
      ++trace.stats.skipped_rows;
      continue;
    }
    if (!offset_known) {
      trace.utc_offset = parsed->offset;
      offset_known = true;
    }
    RawRow row{parsed->utc, rows.size(), std::vector<double>(ncols, kMissing)};
    for (std::size_t c = 0; c < ncols && c + 1 < cells.size(); ++c) row.values[c] = parse_reading(cells[c + 1]);
    if (row.ts < latest) ++trace.stats.reordered_rows;
    latest = std::max(latest, row.ts);
    rows.push_back(std::move(row));
  }

  if (!rows.empty() &&
      static_cast<double>(trace.stats.reordered_rows) > options.max_reordered_fraction * static_cast<double>(rows.size()))
    throw Error(ErrorCode::NonMonotonicTimestamps,
                std::to_string(trace.stats.reordered_rows) + " of " + std::to_string(rows.size()) + " rows out of order");

  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.ts < b.ts; });
  std::vector<RawRow> unique;
  unique.reserve(rows.size());
  for (auto& row : rows) {
    if (!unique.empty() && unique.back().ts == row.ts) {
      unique.back() = std::move(row);  // last occurrence wins
      ++trace.stats.duplicate_rows;
    } else {
      unique.push_back(std::move(row));
    }
  }

  trace.values.resize(static_cast<Eigen::Index>(unique.size()), static_cast<Eigen::Index>(ncols));
  trace.timestamps.reserve(unique.size());
  for (std::size_t r = 0; r < unique.size(); ++r) {
    trace.timestamps.push_back(unique[r].ts);
    for (std::size_t c = 0; c < ncols; ++c)
      trace.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = unique[r].values[c];
  }
  return trace;
}

SensorTrace ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  IngestOptions opts = options;
  if (opts.hive_id.empty()) opts.hive_id = path.stem().string();
  return parse_trace(in, opts);
}

void write_trace(std::ostream& out, const SensorTrace& trace, char delimiter) {
  out << "timestamp";
  for (const auto& col : trace.columns) out << delimiter << col.name << '[' << col.unit << ']';
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out << format_time(trace.timestamps[r], trace.utc_offset);
    for (Eigen::Index c = 0; c < trace.values.cols(); ++c) {
      out << delimiter;
      const double v = trace.values(static_cast<Eigen::Index>(r), c);
      if (is_missing(v)) continue;
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

SensorTrace resample(const SensorTrace& trace, seconds period) {
  if (period <= seconds{0}) throw Error(ErrorCode::InvalidArgument, "resample period must be positive");
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "cannot resample an empty trace");

  const long long p = period.count();
  auto bucket_of = [p](Timestamp ts) {
    const long long t = ts.time_since_epoch().count();
    return (t >= 0 ? t / p : -((-t + p - 1) / p));
  };
  const long long first = bucket_of(trace.timestamps.front());
  const long long last = bucket_of(trace.timestamps.back());
  const Eigen::Index nb = static_cast<Eigen::Index>(last - first + 1);
  const Eigen::Index nc = trace.values.cols();

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(nb, nc);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(nb, nc);
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const Eigen::Index b = static_cast<Eigen::Index>(bucket_of(trace.timestamps[r]) - first);
    for (Eigen::Index c = 0; c < nc; ++c) {
      const double v = trace.values(static_cast<Eigen::Index>(r), c);
      if (is_missing(v)) continue;
      sums(b, c) += v;
      counts(b, c) += 1;
    }
  }

  SensorTrace out;
  out.hive_id = trace.hive_id;
  out.columns = trace.columns;
  out.utc_offset = trace.utc_offset;
  out.stats = trace.stats;
  out.values.resize(nb, nc);
  out.timestamps.reserve(static_cast<std::size_t>(nb));
  for (Eigen::Index b = 0; b < nb; ++b) {
    out.timestamps.push_back(Timestamp{seconds{(first + b) * p}});
    for (Eigen::Index c = 0; c < nc; ++c)
      out.values(b, c) = counts(b, c) > 0 ? sums(b, c) / counts(b, c) : kMissing;
  }
  return out;
}

std::vector<DayLabel> auto_label_days(const SensorTrace& trace, const std::string& sensor, const AutoLabelRule& rule) {
  const Eigen::Index col = trace.column_index(sensor);
  if (!(rule.band > 0.0)) throw Error(ErrorCode::InvalidArgument, "band must be positive");
  if (trace.empty()) return {};

  const seconds period = trace.nominal_period();
  const double minutes_per_reading = static_cast<double>(period.count()) / 60.0;
  const Timestamp first = trace.timestamps.front();
  const Timestamp last_end = trace.timestamps.back() + period;

  std::vector<DayLabel> out;
  std::size_t r = 0;
  while (r < trace.size()) {
    const Day day = trace.day_of(r);
    std::size_t present = 0, excess = 0;
    for (; r < trace.size() && trace.day_of(r) == day; ++r) {
      const double v = trace.values(static_cast<Eigen::Index>(r), col);
      if (is_missing(v)) continue;
      ++present;
      if (std::abs(v - rule.base_temp) > rule.band) ++excess;
    }
    const Timestamp lo = std::max(day_start(day, trace.utc_offset), first);
    const Timestamp hi = std::min(day_start(day + std::chrono::days{1}, trace.utc_offset), last_end);
    const double expected = std::floor(static_cast<double>((hi - lo).count()) / static_cast<double>(period.count()));
    const double missing_fraction = expected > 0 ? std::max(0.0, expected - static_cast<double>(present)) / expected : 0.0;

    const bool hot = static_cast<double>(excess) * minutes_per_reading >= static_cast<double>(rule.min_excess_minutes);
    const bool gappy = missing_fraction > rule.max_missing_fraction;
    out.push_back({day, (hot || gappy) ? DayClass::Anomalous : DayClass::Normal, LabelSource::Auto});
  }
  return out;
}

std::vector<DayLabel> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  std::vector<DayLabel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto cells = split(line, ',');
    if (lineno == 1 && lower(cells.front()) == "date") continue;
    const auto day = parse_day(cells.front());
    const std::string label = cells.size() > 1 ? lower(cells[1]) : "";
    if (!day || (label != "normal" && label != "anomalous"))
      throw Error(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(lineno) + ": expected 'YYYY-MM-DD,normal|anomalous'");
    out.push_back({*day, label == "normal" ? DayClass::Normal : DayClass::Anomalous, LabelSource::Manual});
  }
  std::sort(out.begin(), out.end(), [](const DayLabel& a, const DayLabel& b) { return a.date < b.date; });
  return out;
}

void write_labels(std::ostream& out, const std::vector<DayLabel>& labels) {
  out << "date,label\n";
  for (const auto& l : labels) out << format_day(l.date) << ',' << (l.label == DayClass::Normal ? "normal" : "anomalous") << '\n';
}

std::vector<DayLabel> merge_labels(const std::vector<DayLabel>& automatic, const std::vector<DayLabel>& manual) {
  std::map<Day, DayLabel> merged;
  for (const auto& l : automatic) merged[l.date] = l;
  for (const auto& l : manual) merged[l.date] = l;
  std::vector<DayLabel> out;
  for (const auto& [day, label] : merged) out.push_back(label);
  return out;
}

SplitSet build_splits(const std::vector<DayLabel>& labels,
                      const std::map<std::string, std::vector<DayLabel>>& other_hives,
                      double validation_fraction) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "validation fraction must lie in (0, 1)");

  SplitSet out;
  std::vector<Day> normal;
  for (const auto& l : labels) {
    if (l.label == DayClass::Normal)
      normal.push_back(l.date);
    else
      out.holdout.insert(l.date);
  }
  if (normal.empty()) throw Error(ErrorCode::NoNormalDays, "no normal days to train on");
  std::sort(normal.begin(), normal.end());
  normal.erase(std::unique(normal.begin(), normal.end()), normal.end());

  const long long n = static_cast<long long>(normal.size());
  long long n_val = 0;
  if (n >= 2) n_val = std::clamp(std::llround(validation_fraction * static_cast<double>(n)), 1LL, n - 1);
  const auto cut = normal.end() - n_val;
  out.training.insert(normal.begin(), cut);
  out.validation.insert(cut, normal.end());

  for (const auto& [hive, hive_labels] : other_hives) {
    auto& days = out.test[hive];
    for (const auto& l : hive_labels)
      if (l.label == DayClass::Anomalous) days.insert(l.date);
  }
  return out;
}

namespace {

void write_day_set(std::ostream& out, const std::string& key, const std::set<Day>& days) {
  out << key << '=';
  bool first = true;
  for (const Day d : days) {
    if (!first) out << ',';
    out << format_day(d);
    first = false;
  }
  out << '\n';
}

}  // namespace

void write_splits(std::ostream& out, const SplitSet& splits) {
  out << "# hivead split manifest v1\n";
  write_day_set(out, "training", splits.training);
  write_day_set(out, "validation", splits.validation);
  write_day_set(out, "holdout", splits.holdout);
  for (const auto& [hive, days] : splits.test) write_day_set(out, "test." + hive, days);
}

SplitSet read_splits(std::istream& in) {
  SplitSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::MalformedFile, "split manifest line without '='");
    const std::string key(trim(view.substr(0, eq)));
    std::set<Day> days;
    const auto rest = trim(view.substr(eq + 1));
    if (!rest.empty()) {
      for (auto cell : split(rest, ',')) {
        const auto d = parse_day(cell);
        if (!d) throw Error(ErrorCode::MalformedFile, "bad date '" + std::string(cell) + "' in split manifest");
        days.insert(*d);
      }
    }
    if (key == "training")
      out.training = std::move(days);
    else if (key == "validation")
      out.validation = std::move(days);
    else if (key == "holdout")
      out.holdout = std::move(days);
    else if (key.rfind("test.", 0) == 0)
      out.test[key.substr(5)] = std::move(days);
    else
      throw Error(ErrorCode::MalformedFile, "unknown split '" + key + "'");
  }
  return out;
}

NormalizationParams fit_normalization(const SensorTrace& trace, const std::string& sensor, const std::set<Day>& days) {
  const Eigen::Index col = trace.column_index(sensor);
  std::vector<double> vals;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const double v = trace.values(static_cast<Eigen::Index>(r), col);
    if (!is_missing(v) && days.contains(trace.day_of(r))) vals.push_back(v);
  }
  if (vals.size() < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 readings to fit normalization");

  const Eigen::Map<const Eigen::ArrayXd> a(vals.data(), static_cast<Eigen::Index>(vals.size()));
  const double mean = a.mean();
  const double var = (a - mean).square().mean();
  const double sd = std::sqrt(var);
  if (sd < 1e-9) throw Error(ErrorCode::DegenerateStd, "sensor '" + sensor + "' is constant on the fitting days");
  return {mean, sd};
}

std::vector<Window> make_windows(const SensorTrace& trace, const std::string& sensor, const std::set<Day>& days,
                                 int window_size, int stride, const NormalizationParams& params) {
  if (window_size < 2) throw Error(ErrorCode::InvalidArgument, "window size must be >= 2");
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  const Eigen::Index col = trace.column_index(sensor);
  const seconds period = trace.nominal_period();
  const auto column = trace.values.col(col);

  std::vector<Window> out;
  auto emit_run = [&](std::size_t begin, std::size_t end) {
    if (end - begin < static_cast<std::size_t>(window_size)) return;
    for (std::size_t s = begin; s + static_cast<std::size_t>(window_size) <= end; s += static_cast<std::size_t>(stride)) {
      Window w;
      w.start = trace.timestamps[s];
      w.values = params.normalize(column.segment(static_cast<Eigen::Index>(s), window_size).array()).matrix();
      w.normalized = true;
      out.push_back(std::move(w));
    }
  };

  std::size_t run_begin = 0;
  bool in_run = false;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const bool usable = !is_missing(column(static_cast<Eigen::Index>(r))) && days.contains(trace.day_of(r));
    const bool contiguous = in_run && trace.timestamps[r] - trace.timestamps[r - 1] == period;
    if (usable && contiguous) continue;
    if (in_run) emit_run(run_begin, r);
    in_run = usable;
    run_begin = r;
  }
  if (in_run) emit_run(run_begin, trace.size());
  return out;
}

Eigen::MatrixXd stack_windows(const std::vector<Window>& windows) {
  if (windows.empty()) return {};
  Eigen::MatrixXd out(windows.front().values.size(), static_cast<Eigen::Index>(windows.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].values.size() != out.rows()) throw Error(ErrorCode::LengthMismatch, "windows differ in length");
    out.col(static_cast<Eigen::Index>(i)) = windows[i].values;
  }
  return out;
}

}  // namespace hivead
