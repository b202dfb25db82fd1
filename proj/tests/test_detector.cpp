#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hivead/detector.hpp"
#include "hivead/error.hpp"
#include "hivead/synth.hpp"

using namespace hivead;
using std::chrono::minutes;

namespace {

template <typename F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Scores on a one-minute grid starting at t0(), one per entry of `errors`.
TraceScores scores_of(const std::vector<double>& errors, int window_size = 60) {
  TraceScores s;
  s.window_size = window_size;
  for (std::size_t i = 0; i < errors.size(); ++i)
    s.windows.push_back({fixture::t0() + minutes(static_cast<long>(i)), errors[i]});
  return s;
}

DetectOptions no_gaps(seconds merge_gap = minutes(10)) {
  DetectOptions o;
  o.merge_gap = merge_gap;
  o.report_gaps = false;
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// calibration

TEST(Calibrate, Examples) {
  EXPECT_NEAR(calibrate_from_errors({0.1, 0.2, 0.4}, 1.0).alpha, 0.42, 1e-12);
  EXPECT_NEAR(calibrate_from_errors({0.2, 0.2, 0.2, 0.2}, 1.0).alpha, 0.21, 1e-12);
  const auto q = calibrate_from_errors({0.3, 0.1, 0.2}, 0.5);
  EXPECT_NEAR(q.alpha, 0.21, 1e-12);
  EXPECT_EQ(q.method, ThresholdMethod::Quantile);
  EXPECT_EQ(calibrate_from_errors({0.1}, 1.0).method, ThresholdMethod::MaxValidation);
  EXPECT_EQ(calibrate_from_errors({0.1, 0.2}, 1.0).validation_count, 2u);
}

TEST(Calibrate, LowerQuantileRanks) {
  const std::vector<double> e{5, 1, 4, 2, 3};
  EXPECT_EQ(lower_quantile(e, 1.0), 5);
  EXPECT_EQ(lower_quantile(e, 0.5), 3);
  EXPECT_EQ(lower_quantile(e, 0.2), 1);
  EXPECT_EQ(lower_quantile(e, 0.21), 2);
  EXPECT_EQ(lower_quantile(e, 1e-9), 1);
}

TEST(Calibrate, Errors) {
  expect_code(ErrorCode::EmptyValidation, [] { calibrate_from_errors({}, 1.0); });
  expect_code(ErrorCode::InvalidArgument, [] { calibrate_from_errors({0.1}, 0.0); });
  expect_code(ErrorCode::InvalidArgument, [] { calibrate_from_errors({0.1}, 1.5); });
  expect_code(ErrorCode::EmptyValidation, [] { calibrate_from_errors({0.0, 0.0}, 1.0); });
  expect_code(ErrorCode::InvalidArgument, [] { Threshold::manual(0.0); });
  expect_code(ErrorCode::InvalidArgument, [] { Threshold::manual(std::numeric_limits<double>::infinity()); });
  auto m = nn::make_autoencoder<double>(2, 1, 4);
  expect_code(ErrorCode::EmptyValidation, [&] { calibrate(m, Eigen::MatrixXd(4, 0), std::nullopt); });
}

TEST(CalibrateProperty, MaxValidationIsSound) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> ex(2.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> e(1 + gen() % 50);
    for (auto& v : e) v = ex(gen) + 1e-9;
    const auto t = calibrate_from_errors(e, 1.0);
    for (double v : e) ASSERT_LT(v, t.alpha);
    EXPECT_EQ(t.max_val_error, *std::max_element(e.begin(), e.end()));
  }
}

TEST(Calibrate, HoldoutIsReportedNotApplied) {
  auto m = nn::make_autoencoder<double>(2, 1, 3);
  Eigen::MatrixXd val(3, 2), hold(3, 3);
  val << 0.1, 0.2, 0.1, 0.2, 0.1, 0.2;
  hold.setZero();
  hold.col(1).setConstant(5.0);
  const auto without = calibrate(m, val, std::nullopt);
  const auto with = calibrate(m, val, hold);
  EXPECT_EQ(with.alpha, without.alpha);
  EXPECT_NEAR(with.alpha, 0.04 * 1.05, 1e-15);
  EXPECT_FALSE(without.holdout_exceeding.has_value());
  ASSERT_TRUE(with.holdout_exceeding.has_value());
  EXPECT_EQ(*with.holdout_exceeding, 1u);
  EXPECT_EQ(with.holdout_count, 3u);
}

TEST(Threshold, JsonRoundTrip) {
  auto t = calibrate_from_errors({0.1, 0.3, 0.2}, 0.5);
  t.holdout_exceeding = 4;
  t.holdout_count = 9;
  std::stringstream buf;
  write_threshold(buf, t);
  const auto back = read_threshold(buf);
  EXPECT_EQ(back.alpha, t.alpha);
  EXPECT_EQ(back.method, t.method);
  EXPECT_EQ(back.quantile_used, 0.5);
  EXPECT_EQ(back.holdout_exceeding, t.holdout_exceeding);
  EXPECT_EQ(back.validation_count, 3u);

  std::stringstream bad("{\"alpha\": -1, \"method\": \"manual\"}");
  expect_code(ErrorCode::MalformedFile, [&] { read_threshold(bad); });
  std::stringstream junk("[");
  expect_code(ErrorCode::MalformedFile, [&] { read_threshold(junk); });
}

// ---------------------------------------------------------------------------
// scoring

TEST(ScoreTrace, ShorterThanWindowYieldsNothing) {
  auto m = nn::make_autoencoder<double>(2, 1, 60);
  const auto s = score_trace(m, fixture::series(std::vector<double>(59, 34.5)), "T", {34.5, 1.0});
  EXPECT_TRUE(s.windows.empty());
  EXPECT_TRUE(s.gaps.empty());
}

TEST(ScoreTrace, MissingMinuteRemovesOverlappingWindowsAndReportsGap) {
  std::vector<double> v(240, 34.5);
  v[120] = kMissing;
  auto m = nn::make_autoencoder<double>(2, 1, 60);
  const auto trace = fixture::series(v);
  const auto s = score_trace(m, trace, "T", {34.5, 1.0});
  EXPECT_EQ(s.windows.size(), (240u - 59u) - 60u);
  const Timestamp missing = fixture::t0() + minutes(120);
  for (const auto& w : s.windows) EXPECT_TRUE(w.start > missing || w.start + minutes(59) < missing);
  ASSERT_EQ(s.gaps.size(), 1u);
  EXPECT_EQ(s.gaps[0].start, missing);
  EXPECT_EQ(s.gaps[0].end, missing);
  expect_code(ErrorCode::UnknownSensor, [&] { score_trace(m, trace, "nope", {}); });
}

TEST(FindGaps, TimestampHoleIsAGap) {
  auto trace = fixture::series(std::vector<double>(10, 1.0));
  trace.timestamps.erase(trace.timestamps.begin() + 4, trace.timestamps.begin() + 6);
  Eigen::MatrixXd vals(8, 1);
  vals.setOnes();
  vals(6, 0) = kMissing;
  trace.values = vals;
  const auto gaps = find_gaps(trace, "T");
  ASSERT_EQ(gaps.size(), 2u);
  EXPECT_EQ(gaps[0].start, fixture::t0() + minutes(4));
  EXPECT_EQ(gaps[0].end, fixture::t0() + minutes(5));
  EXPECT_EQ(gaps[1].start, fixture::t0() + minutes(8));
}

// ---------------------------------------------------------------------------
// detection

TEST(Detect, NothingAboveAlpha) {
  EXPECT_TRUE(detect(scores_of(std::vector<double>(100, 0.1)), Threshold::manual(0.5), no_gaps()).empty());
}

TEST(Detect, SixtyOneConsecutiveHitsMergeIntoOne) {
  std::vector<double> e(200, 0.0);
  for (int i = 50; i < 111; ++i) e[static_cast<std::size_t>(i)] = 1.0 + (i == 80 ? 1.0 : 0.0);
  const auto ev = detect(scores_of(e), Threshold::manual(0.5), no_gaps());
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start, fixture::t0() + minutes(50));
  EXPECT_EQ(ev[0].end, fixture::t0() + minutes(110 + 59));
  EXPECT_EQ(ev[0].peak, fixture::t0() + minutes(80 + 30));
  EXPECT_EQ(ev[0].peak_score, 2.0);
  EXPECT_EQ(ev[0].method, Method::AE);
}

TEST(Detect, ClustersThirtyMinutesApartStaySeparate) {
  // stride-60 scores: clusters cover [0, 59] and [90, 149], separated by 30 min.
  TraceScores s;
  s.window_size = 60;
  s.windows = {{fixture::t0(), 1.0}, {fixture::t0() + minutes(90), 1.0}};
  EXPECT_EQ(detect(s, Threshold::manual(0.5), no_gaps()).size(), 2u);
  s.windows[1].start = fixture::t0() + minutes(69);
  EXPECT_EQ(detect(s, Threshold::manual(0.5), no_gaps()).size(), 1u);
  s.windows[1].start = fixture::t0() + minutes(70);
  EXPECT_EQ(detect(s, Threshold::manual(0.5), no_gaps()).size(), 2u);
}

TEST(Detect, GapsBecomeInfiniteScoreEvents) {
  auto s = scores_of({1.0, 0.0});
  s.gaps = {{fixture::t0() + minutes(300), fixture::t0() + minutes(309)}};
  const auto on = detect(s, Threshold::manual(0.5));
  ASSERT_EQ(on.size(), 2u);
  EXPECT_EQ(on[1].class_hint, ClassHint::DataGap);
  EXPECT_TRUE(std::isinf(on[1].peak_score));
  EXPECT_EQ(on[1].peak, fixture::t0() + minutes(304) + seconds(30));
  EXPECT_EQ(detect(s, Threshold::manual(0.5), no_gaps()).size(), 1u);
  DetectOptions longer;
  longer.min_gap = minutes(11);
  EXPECT_EQ(detect(s, Threshold::manual(0.5), longer).size(), 1u);
}

TEST(DetectProperty, EventsDisjointOrderedAndCoverAHit) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 2 + static_cast<int>(gen() % 60);
    std::vector<double> e(50 + gen() % 400);
    for (auto& v : e) v = u(gen) < 0.05 ? 1.0 + u(gen) : u(gen) * 0.5;
    const auto s = scores_of(e, w);
    const auto ev = detect(s, Threshold::manual(0.6), no_gaps(minutes(static_cast<long>(gen() % 30))));
    for (std::size_t i = 0; i < ev.size(); ++i) {
      ASSERT_LE(ev[i].start, ev[i].peak);
      ASSERT_LE(ev[i].peak, ev[i].end);
      if (i > 0) {
        ASSERT_LT(ev[i - 1].end, ev[i].start);
      }
      bool has_hit = false;
      for (const auto& ws : s.windows) has_hit = has_hit || (ws.error >= 0.6 && ws.start >= ev[i].start && ws.start <= ev[i].end);
      ASSERT_TRUE(has_hit);
    }
    for (const auto& ws : s.windows) {
      if (ws.error < 0.6) continue;
      ASSERT_EQ(std::count_if(ev.begin(), ev.end(), [&](const DetectionEvent& d) {
                  return ws.start >= d.start && ws.start + s.window_span() <= d.end;
                }),
                1);
    }
  }
}

TEST(DetectProperty, RaisingAlphaNeverAddsEventsForSeparatedBumps) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    // Unimodal bumps separated by more than the merge gap plus the window span.
    std::vector<double> e;
    const int bumps = 1 + static_cast<int>(gen() % 6);
    for (int b = 0; b < bumps; ++b) {
      e.insert(e.end(), 100, 0.0);
      const double height = 0.5 + u(gen) * 2.0;
      const int width = 5 + static_cast<int>(gen() % 40);
      for (int k = 0; k < width; ++k) e.push_back(height * std::sin(3.14159265358979 * (k + 0.5) / width));
    }
    e.insert(e.end(), 100, 0.0);
    const auto s = scores_of(e, 30);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double alpha = 0.05; alpha < 3.0; alpha += 0.05) {
      const auto n = detect(s, Threshold::manual(alpha), no_gaps()).size();
      ASSERT_LE(n, prev) << "alpha " << alpha;
      prev = n;
    }
  }
}

TEST(Detect, ThinningHitsCanSplitAnEvent) {
  // A high window either side of a lower one: at the lower alpha the middle
  // hit bridges both, at the higher alpha the survivors are too far apart.
  TraceScores s;
  s.window_size = 10;
  s.windows = {{fixture::t0(), 2.0}, {fixture::t0() + minutes(15), 1.0}, {fixture::t0() + minutes(30), 2.0}};
  const auto opts = no_gaps(minutes(10));
  EXPECT_EQ(detect(s, Threshold::manual(0.5), opts).size(), 1u);
  EXPECT_EQ(detect(s, Threshold::manual(1.5), opts).size(), 2u);
}

TEST(Detect, SwarmFoundAtEveryWindowPhase) {
  for (int offset = 0; offset < 60; offset += 1) {
    SynthConfig cfg;
    cfg.days = 3;
    cfg.layout = Layout::Single;
    cfg.seed = 100 + static_cast<std::uint64_t>(offset);
    cfg.schedule = {{2, AnomalyClass::Swarm, 600 + offset}};
    const auto out = generate(cfg);
    const auto& trace = out.trace;
    const auto days = trace.days();
    const std::set<Day> normal(days.begin(), std::next(days.begin(), 2));
    const auto norm = fit_normalization(trace, "T", normal);
    auto model = nn::make_autoencoder<double>(2, 1, 60);
    const auto val = stack_windows(make_windows(trace, "T", normal, 60, 1, norm));
    const auto threshold = calibrate(model, val, std::nullopt);
    const auto day2 = trace.restrict_to_days({*days.rbegin()});
    const auto scores = score_trace(model, day2, "T", norm, 60);
    const auto events = detect(scores, threshold);
    const auto& truth = out.truth.at(0).event;
    const bool found = std::any_of(events.begin(), events.end(), [&](const DetectionEvent& e) {
      return e.start <= truth.end && truth.start <= e.end;
    });
    EXPECT_TRUE(found) << "offset " << offset;
  }
}

// ---------------------------------------------------------------------------
// class hints

TEST(ClassHints, MeanLevelAndGapAdjacency) {
  std::vector<double> v(600, 34.5);
  for (int i = 100; i < 120; ++i) v[static_cast<std::size_t>(i)] = 36.0;
  for (int i = 300; i < 330; ++i) v[static_cast<std::size_t>(i)] = 30.0;
  v[505] = kMissing;
  const auto trace = fixture::series(v);
  const auto at = [](int m) { return fixture::t0() + minutes(m); };
  std::vector<DetectionEvent> ev{
      {at(100), at(119), at(110), 2.0, Method::AE, ClassHint::Unknown},
      {at(300), at(329), at(315), 2.0, Method::AE, ClassHint::Unknown},
      {at(200), at(219), at(210), 2.0, Method::AE, ClassHint::Unknown},
      {at(510), at(520), at(515), 2.0, Method::AE, ClassHint::Unknown},
      {at(100), at(119), at(110), 2.0, Method::RBA, ClassHint::Unknown},
  };
  assign_class_hints(ev, trace, "T", find_gaps(trace, "T"));
  EXPECT_EQ(ev[0].class_hint, ClassHint::SwarmLike);
  EXPECT_EQ(ev[1].class_hint, ClassHint::LowTemperature);
  EXPECT_EQ(ev[2].class_hint, ClassHint::Unknown);
  EXPECT_EQ(ev[3].class_hint, ClassHint::DataGap);
  EXPECT_EQ(ev[4].class_hint, ClassHint::Unknown);
}
