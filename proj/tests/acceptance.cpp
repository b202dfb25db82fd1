// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "hivead/analysis.hpp"
#include "hivead/detector.hpp"
#include "hivead/nn/checkpoint.hpp"
#include "hivead/nn/trainer.hpp"
#include "hivead/random.hpp"
#include "hivead/rba.hpp"
#include "hivead/report.hpp"
#include "hivead/synth.hpp"
#include "oracles.hpp"

using namespace hivead;
using std::chrono::minutes;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

int failures = 0;

void report(int id, const std::string& title, const Verdict& v, double elapsed, const std::string& summary) {
  if (!v.pass) ++failures;
  std::printf("criterion %d: %s: %s (%s, %.1f s)%s%s\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), summary.c_str(),
              elapsed, v.detail.empty() ? "" : ": ", v.detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

void gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  int configs = 0;
  for (int hs = 2; hs <= 4; ++hs) {
    for (int n = 1; n <= 2; ++n) {
      for (int w : {2, 5, 8}) {
        for (int rep = 0; rep < 2; ++rep) {
          auto model = nn::init_autoencoder<double>(hs, n, w, gen());
          Eigen::MatrixXd x(w, 1 + rep);
          for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(gen);
          const Eigen::VectorXd analytic = nn::backward(model, x).flatten();
          const Eigen::VectorXd numeric = oracle::numeric_gradient(model, x, 1e-5);
          for (Eigen::Index i = 0; i < analytic.size(); ++i)
            worst = std::max(worst, oracle::relative_error(analytic(i), numeric(i)));
          ++configs;
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.require(configs >= 20, "fewer than 20 configurations");
  v.require(worst < 1e-4, "max relative error too large");
  v.require(elapsed < 60.0, "slower than 1 min");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d configs, max relative error %.3g", configs, worst);
  report(1, "gradient check", v, elapsed, buf);
}

// ---------------------------------------------------------------------------

void rba_oracle() {
  const auto t0 = Clock::now();
  int mismatched = 0, events = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto day = fixture::random_day(derive_seed(seed, "acceptance.rba"));
    const RbaConfig c;
    const auto col = day.trace.sensor("T6");
    const std::vector<double> v(col.begin(), col.end());
    std::vector<DetectionEvent> want;
    for (const auto& r : oracle::rba(v, c.base_temp, c.band, c.min_duration, c.max_duration))
      want.push_back({day.trace.timestamps[r.first], day.trace.timestamps[r.last], day.trace.timestamps[r.peak],
                      v[r.peak] - c.base_temp, Method::RBA, ClassHint::SwarmLike});
    const auto got = rba_detect(day.trace, "T6", c);
    events += static_cast<int>(got.size());
    if (got != want) ++mismatched;
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.require(mismatched == 0, std::to_string(mismatched) + " days differ from the oracle");
  v.require(events > 0, "no events exercised");
  v.require(elapsed < 60.0, "slower than 1 min");
  report(2, "RBA oracle equivalence", v, elapsed, "200 days, " + std::to_string(events) + " events");
}

// ---------------------------------------------------------------------------

void pearson_check() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(77);
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  int undefined = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t n = 10 + gen() % 500;
    const double rho = n01(gen) / 2.0;
    const double shift = 40.0 * n01(gen);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = shift + n01(gen);
      y[i] = rho * x[i] + n01(gen);
      if (gen() % 25 == 0) x[i] = kMissing;
    }
    const auto r = pearson(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n)),
                           Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n)));
    const auto o = oracle::pearson(x, y);
    if (!r || !o) {
      ++undefined;
      continue;
    }
    worst = std::max(worst, std::abs(*r - *o));
  }
  bool exact = true;
  for (auto layout : {Layout::Hobos13, Layout::We4bee5}) {
    SynthConfig cfg;
    cfg.layout = layout;
    cfg.seed = 5;
    cfg.schedule = {{0, AnomalyClass::SensorFailure, 100}, {0, AnomalyClass::Swarm, 700}};
    const auto day = generate(cfg);
    std::vector<std::string> sensors;
    for (const auto& c : day.trace.columns) sensors.push_back(c.name);
    const auto m = pearson_matrix(day.trace, sensors);
    for (std::size_t i = 0; i < sensors.size(); ++i) {
      exact = exact && m.at(i, i) == std::optional<double>(1.0);
      for (std::size_t j = 0; j < sensors.size(); ++j) exact = exact && m.at(i, j) == m.at(j, i);
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.require(undefined == 0, "oracle and library disagree on definedness");
  v.require(worst < 1e-10, "deviation above 1e-10");
  v.require(exact, "diagonal or symmetry not exact");
  char buf[96];
  std::snprintf(buf, sizeof buf, "100 pairs, max |r - oracle| %.3g", worst);
  report(3, "Pearson correctness", v, elapsed, buf);
}

// ---------------------------------------------------------------------------

constexpr int kDays = 31;
constexpr int kHeldOutDay = 30;
const char* const kSchedule = "5:swarm:600,11:opening:720,17:swarm:540,23:varroa-treatment:900,28:sensor-failure:600";
const std::string kSensor = "T6";

struct EndToEnd {
  SynthOutput data;
  nn::Autoencoder<double> model;
  Threshold threshold;
  TraceScores scores;
  std::vector<DetectionEvent> ae;
  std::vector<DetectionEvent> rba;
  std::vector<ComparisonRow> rows;
  int epochs = 0;
  std::string bundle;  ///< every report, concatenated
};

EndToEnd run_pipeline(std::uint64_t seed) {
  EndToEnd e;
  SynthConfig cfg;
  cfg.days = kDays;
  cfg.seed = seed;
  cfg.schedule = parse_schedule(kSchedule);
  e.data = generate(cfg);
  const auto& trace = e.data.trace;

  std::set<int> anomalous;
  for (const auto& a : cfg.schedule) anomalous.insert(a.day);
  std::vector<DayLabel> labels;
  int index = 0;
  for (const auto& d : trace.days()) {
    if (index != kHeldOutDay)
      labels.push_back({d, anomalous.contains(index) ? DayClass::Anomalous : DayClass::Normal, LabelSource::Manual});
    ++index;
  }
  const auto splits = build_splits(labels, {}, 0.2);
  const auto norm = fit_normalization(trace, kSensor, splits.training);
  const auto train = stack_windows(make_windows(trace, kSensor, splits.training, 60, 4, norm));
  const auto val = stack_windows(make_windows(trace, kSensor, splits.validation, 60, 4, norm));

  auto model = nn::init_autoencoder<double>(16, 1, 60, derive_seed(seed, "model"));
  model.norm = norm;
  nn::TrainConfig tc;
  tc.max_epochs = 30;
  tc.patience = 5;
  tc.batch_size = 64;
  tc.seed = derive_seed(seed, "shuffle");
  auto trained = nn::train(std::move(model), train, val, tc);
  e.model = std::move(trained.model);
  e.epochs = trained.epochs_run();

  const auto val_full = stack_windows(make_windows(trace, kSensor, splits.validation, 60, 1, norm));
  const auto holdout = stack_windows(make_windows(trace, kSensor, splits.holdout, 60, 1, norm));
  e.threshold = calibrate(e.model, val_full, holdout, 1.0);

  e.scores = score_trace(e.model, trace, kSensor, norm, 1);
  e.ae = detect(e.scores, e.threshold);
  assign_class_hints(e.ae, trace, kSensor, e.scores.gaps);
  e.rba = rba_detect(trace, kSensor);
  e.rows = compare_events("synth", e.data.truth, e.ae, e.rba, minutes(60));

  std::ostringstream out;
  nn::save_checkpoint(out, e.model);
  write_threshold(out, e.threshold);
  write_events(out, e.ae);
  write_events(out, e.rba);
  write_truth(out, e.data.truth);
  write_comparison(out, e.rows);
  e.bundle = out.str();
  return e;
}

bool hit(const std::vector<DetectionEvent>& events, const DetectionEvent& ref) {
  return std::any_of(events.begin(), events.end(), [&](const DetectionEvent& d) { return overlaps(d, ref, minutes(60)); });
}

void end_to_end(const EndToEnd& e, double elapsed) {
  Verdict v;
  std::vector<DetectionEvent> swarms;
  std::string found;
  for (const auto& t : e.data.truth) {
    const bool ae = hit(e.ae, t.event);
    found += std::string(found.empty() ? "" : ", ") + std::string(to_string(t.kind)) + (ae ? " AE" : "") +
             (hit(e.rba, t.event) ? "+RBA" : "");
    if (t.kind == AnomalyClass::Swarm) swarms.push_back(t.event);
    if (t.kind != AnomalyClass::VarroaTreatment) v.require(ae, std::string("AE missed ") + std::string(to_string(t.kind)));
  }
  for (const auto& s : swarms) v.require(hit(e.rba, s), "RBA missed a swarm");
  v.require(e.rba.size() == swarms.size(), "RBA reported " + std::to_string(e.rba.size()) + " events");
  for (const auto& r : e.rba) v.require(hit(swarms, r), "RBA event outside every swarm");

  const auto days = e.data.trace.days();
  const Day held_out = *std::next(days.begin(), kHeldOutDay);
  const DetectionEvent day_span{day_start(held_out, seconds{0}), day_start(held_out + std::chrono::days{1}, seconds{0}) - minutes(1),
                                {}, 0.0, Method::Truth, ClassHint::Unknown};
  const auto on_held_out = std::count_if(e.ae.begin(), e.ae.end(), [&](const DetectionEvent& d) { return overlaps(d, day_span); });
  v.require(on_held_out == 0, std::to_string(on_held_out) + " AE events on the held-out normal day");
  v.require(elapsed < 600.0, "slower than 10 min");

  char buf[256];
  std::snprintf(buf, sizeof buf, "%d epochs, alpha %.4f, %zu AE / %zu RBA events; %s", e.epochs, e.threshold.alpha,
                e.ae.size(), e.rba.size(), found.c_str());
  report(4, "end-to-end synthetic detection", v, elapsed, buf);
}

/// Event counts at `steps` thresholds spaced geometrically over [lo, hi].
std::vector<std::size_t> sweep(const TraceScores& scores, double lo, double hi, int steps) {
  std::vector<std::size_t> counts;
  for (int k = 0; k < steps; ++k)
    counts.push_back(detect(scores, Threshold::manual(lo * std::pow(hi / lo, k / (steps - 1.0)))).size());
  return counts;
}

bool non_increasing(const std::vector<std::size_t>& counts) {
  return std::is_sorted(counts.rbegin(), counts.rend());
}

std::string join(const std::vector<std::size_t>& counts) {
  std::string out;
  for (auto c : counts) out += (out.empty() ? "" : " ") + std::to_string(c);
  return out;
}

void monotonicity(const EndToEnd& e) {
  const auto t0 = Clock::now();
  double top = 0.0;
  for (const auto& w : e.scores.windows) top = std::max(top, w.error);
  // Upward from the calibrated threshold of the run to its largest window error.
  const auto counts = sweep(e.scores, e.threshold.alpha, top, 20);
  // Below the calibrated threshold, for the record.
  const auto below = sweep(e.scores, e.threshold.alpha / 4.0, e.threshold.alpha, 20);
  Verdict v;
  for (std::size_t k = 1; k < counts.size(); ++k)
    v.require(counts[k] <= counts[k - 1], "count rose at step " + std::to_string(k));
  report(5, "threshold monotonicity", v, seconds_since(t0),
         "event counts " + join(counts) + " for alpha in [calibrated, max error]; below calibrated alpha the counts " +
             (non_increasing(below) ? "also never rise" : "do rise") + ": " + join(below));
}

void determinism(const EndToEnd& first) {
  const auto t0 = Clock::now();
  const auto second = run_pipeline(11);
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.require(second.bundle == first.bundle, "reports differ");
  report(6, "determinism", v, elapsed, std::to_string(first.bundle.size()) + " report bytes compared");
}

// ---------------------------------------------------------------------------

void window_invariants() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0.0, 0.1);
  int count_failures = 0, oracle_failures = 0, roundtrip_failures = 0, standard_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = 2 + static_cast<int>(gen() % 60);
    const std::size_t n = static_cast<std::size_t>(w) + gen() % 2000;
    std::vector<double> v(n);
    const double phase = static_cast<double>(gen() % 1440);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = 34.5 + 0.2 * std::sin((static_cast<double>(i) + phase) * 2.0 * std::numbers::pi / 1440.0) + noise(gen);
    const auto clean = fixture::series(v);
    const auto p = fit_normalization(clean, "T", clean.days());
    const auto all = make_windows(clean, "T", clean.days(), w, 1, p);
    if (all.size() != n - static_cast<std::size_t>(w) + 1) ++count_failures;

    for (double x : v)
      if (std::abs(p.denormalize(p.normalize(x)) - x) > 1e-12 * std::max(1.0, std::abs(x))) ++roundtrip_failures;

    // Training sets are whole days, so the standardization check runs on 1 to 3 full days.
    const std::size_t whole = 1440 * (1 + gen() % 3);
    std::vector<double> days_v(whole);
    for (std::size_t i = 0; i < whole; ++i)
      days_v[i] = 34.5 + 0.2 * std::sin((static_cast<double>(i) + phase) * 2.0 * std::numbers::pi / 1440.0) + noise(gen);
    const auto training = fixture::series(days_v);
    const auto tp = fit_normalization(training, "T", training.days());
    const Eigen::MatrixXd m = stack_windows(make_windows(training, "T", training.days(), w, 1, tp));
    const double mean = m.mean();
    const double sd = std::sqrt((m.array() - mean).square().mean());
    if (!(std::abs(mean) < 0.05 && sd >= 0.9 && sd <= 1.1)) ++standard_failures;

    auto holed = v;
    for (auto& x : holed)
      if (gen() % 200 == 0) x = kMissing;
    auto gappy = fixture::series(holed);
    if (gen() % 2) {
      const std::size_t at = gen() % n;
      for (std::size_t i = at; i < n; ++i) gappy.timestamps[i] += minutes(2);
    }
    const int stride = 1 + static_cast<int>(gen() % 4);
    const auto got = make_windows(gappy, "T", gappy.days(), w, stride, p);
    const auto want = oracle::window_starts(gappy, "T", gappy.days(), w, stride);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i].start == gappy.timestamps[want[i]];
    if (!same) ++oracle_failures;
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.require(count_failures == 0, std::to_string(count_failures) + " gap-free counts wrong");
  v.require(oracle_failures == 0, std::to_string(oracle_failures) + " traces disagree with the window oracle");
  v.require(roundtrip_failures == 0, std::to_string(roundtrip_failures) + " round-trip failures");
  v.require(standard_failures == 0, std::to_string(standard_failures) + " traces not standardized");
  v.require(elapsed < 30.0, "slower than 30 s");
  report(7, "window and normalization invariants", v, elapsed, "1000 traces");
}

}  // namespace

int main() {
  gradients();
  rba_oracle();
  pearson_check();

  const auto t0 = Clock::now();
  const auto e = run_pipeline(11);
  const double elapsed = seconds_since(t0);
  end_to_end(e, elapsed);
  monotonicity(e);
  determinism(e);

  window_invariants();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}
