#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hivead/analysis.hpp"
#include "hivead/data.hpp"
#include "hivead/detector.hpp"
#include "hivead/error.hpp"
#include "hivead/nn/checkpoint.hpp"
#include "hivead/rba.hpp"
#include "hivead/report.hpp"
#include "hivead/search.hpp"
#include "hivead/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hivead;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

char delimiter_for(const std::string& format) { return format == "tsv" ? '\t' : ','; }

std::string extension_for(const std::string& format) {
  if (format == "tsv") return ".tsv";
  if (format == "text") return ".txt";
  return ".csv";
}

/// Tab when the first non-comment line contains one, comma otherwise.
char sniff_delimiter(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line.front() != '#') return line.find('\t') != std::string::npos ? '\t' : ',';
  return ',';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write '" + path.string() + "'");
  return out;
}

/// Collects what a command read and wrote; written last as <command>.manifest.json.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  json seeds = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;

  void input(const std::string& key, const fs::path& path) {
    inputs[key] = {{"path", path.string()}, {"fnv1a64", hex64(fnv1a_file(path))}};
  }

  void write(const fs::path& dir) const {
    json j;
    j["tool"] = "hivead";
    j["version"] = kVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    auto out = open_out(dir / (command + ".manifest.json"));
    out << j.dump(2) << '\n';
  }
};

struct Common {
  std::string input;
  std::string sensor;
  std::string out_dir = ".";
  std::string format = "csv";
  std::uint64_t seed = 0;
  int window_size = 60;
  int stride = 1;
  int resample_seconds = 0;
};

SensorTrace load_trace(const Common& c, Manifest& m) {
  m.input("trace", c.input);
  auto trace = ingest(c.input);
  if (c.resample_seconds > 0) trace = resample(trace, seconds{c.resample_seconds});
  if (!c.sensor.empty()) trace.column_index(c.sensor);
  return trace;
}

fs::path prepare_out_dir(const Common& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

IntRange parse_range(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad range '" + text + "'; expected N or LO-HI");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<DayLabel> day_labels(const SensorTrace& trace, const std::string& sensor, const std::string& labels_path,
                                 Manifest& m) {
  auto labels = auto_label_days(trace, sensor);
  if (!labels_path.empty()) {
    m.input("labels", labels_path);
    labels = merge_labels(labels, read_labels(labels_path));
  }
  return labels;
}

SplitSet load_splits(const std::string& path, Manifest& m) {
  m.input("splits", path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path + "'");
  return read_splits(in);
}

json trace_config(const Common& c) {
  return {{"input", c.input}, {"sensor", c.sensor}, {"resample_seconds", c.resample_seconds}};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  int days = 30;
  std::string layout = "hobos-13";
  std::string schedule;
  std::string hive_id = "synth";
};

void run_synth(const Common& c, const SynthArgs& a, Manifest& m) {
  SynthConfig config;
  config.days = a.days;
  config.layout = *parse_layout(a.layout);
  config.seed = c.seed;
  config.schedule = parse_schedule(a.schedule);
  config.hive_id = a.hive_id;
  const auto out = generate(config);

  const auto dir = prepare_out_dir(c);
  const char delim = delimiter_for(c.format);
  const std::string ext = extension_for(c.format);
  {
    auto f = open_out(dir / ("trace" + ext));
    write_trace(f, out.trace, delim);
  }
  {
    auto f = open_out(dir / ("truth" + ext));
    write_truth(f, out.truth, out.trace.utc_offset, delim);
  }
  m.outputs = {"trace" + ext, "truth" + ext};
  m.config = {{"days", a.days}, {"layout", a.layout}, {"schedule", format_schedule(config.schedule)},
              {"hive_id", a.hive_id}, {"format", c.format}};
  m.seeds = {{"seed", c.seed}, {"synth", derive_seed(c.seed, "synth")}};
}

struct TrainArgs {
  int hs = 16;
  int layers = 1;
  std::string labels;
  std::string splits;
  double validation_fraction = 0.2;
  int epochs = 100;
  int batch_size = 64;
  int patience = 5;
  double learning_rate = 1e-3;
  // search only
  std::string hs_range = "2-64";
  std::string layer_range = "1-4";
  int trials = 20;
  int threads = 1;
};

struct Prepared {
  SplitSet splits;
  NormalizationParams norm;
  Eigen::MatrixXd train;
  Eigen::MatrixXd val;
};

Prepared prepare_training(const Common& c, const TrainArgs& a, const SensorTrace& trace, Manifest& m,
                          const fs::path& dir) {
  Prepared p;
  if (!a.splits.empty()) {
    p.splits = load_splits(a.splits, m);
  } else {
    const auto labels = day_labels(trace, c.sensor, a.labels, m);
    p.splits = build_splits(labels, {}, a.validation_fraction);
    auto lf = open_out(dir / "labels.csv");
    write_labels(lf, labels);
    m.outputs.push_back("labels.csv");
  }
  {
    auto sf = open_out(dir / "splits.txt");
    write_splits(sf, p.splits);
    m.outputs.push_back("splits.txt");
  }
  if (p.splits.training.empty()) throw Error(ErrorCode::NoNormalDays, "no normal days available for training");
  p.norm = fit_normalization(trace, c.sensor, p.splits.training);
  p.train = stack_windows(make_windows(trace, c.sensor, p.splits.training, c.window_size, c.stride, p.norm));
  p.val = stack_windows(make_windows(trace, c.sensor, p.splits.validation, c.window_size, c.stride, p.norm));
  return p;
}

nn::TrainConfig train_config(const TrainArgs& a) {
  nn::TrainConfig config;
  config.learning_rate = a.learning_rate;
  config.batch_size = a.batch_size;
  config.max_epochs = a.epochs;
  config.patience = a.patience;
  return config;
}

json train_json(const Common& c, const TrainArgs& a) {
  json j = trace_config(c);
  j["window_size"] = c.window_size;
  j["stride"] = c.stride;
  j["labels"] = a.labels;
  j["splits"] = a.splits;
  j["validation_fraction"] = a.validation_fraction;
  j["epochs"] = a.epochs;
  j["batch_size"] = a.batch_size;
  j["patience"] = a.patience;
  j["learning_rate"] = a.learning_rate;
  return j;
}

void run_train(const Common& c, const TrainArgs& a, Manifest& m) {
  const auto trace = load_trace(c, m);
  const auto dir = prepare_out_dir(c);
  const auto p = prepare_training(c, a, trace, m, dir);

  const std::uint64_t model_seed = derive_seed(c.seed, "model");
  auto model = nn::init_autoencoder<double>(a.hs, a.layers, c.window_size, model_seed);
  model.norm = p.norm;
  auto config = train_config(a);
  config.seed = derive_seed(c.seed, "shuffle");
  const auto result = nn::train(std::move(model), p.train, p.val, config);

  nn::save_checkpoint(dir / "model.json", result.model);
  {
    auto f = open_out(dir / "history.csv");
    f << "epoch,train_loss,val_loss\n";
    for (const auto& h : result.history) f << h.epoch << ',' << json(h.train_loss).dump() << ',' << json(h.val_loss).dump() << '\n';
  }
  m.outputs.push_back("model.json");
  m.outputs.push_back("history.csv");
  m.config = train_json(c, a);
  m.config["hs"] = a.hs;
  m.config["layers"] = a.layers;
  m.config["best_epoch"] = result.best_epoch;
  m.config["best_val_loss"] = result.best_val_loss;
  m.config["early_stopped"] = result.early_stopped;
  m.seeds = {{"seed", c.seed}, {"model", model_seed}, {"shuffle", config.seed}};
}

void run_search(const Common& c, const TrainArgs& a, Manifest& m) {
  const auto trace = load_trace(c, m);
  const auto dir = prepare_out_dir(c);
  const auto p = prepare_training(c, a, trace, m, dir);

  SearchSpace space;
  space.hidden_size = parse_range(a.hs_range);
  space.layers = parse_range(a.layer_range);
  space.trials = a.trials;
  space.seed = c.seed;
  SearchOptions options;
  options.window_size = c.window_size;
  options.norm = p.norm;
  options.model_dir = dir / "models";
  options.threads = a.threads;
  fs::create_directories(options.model_dir);
  const auto results = random_search(space, p.train, p.val, train_config(a), options);

  const std::string ext = extension_for(c.format);
  auto f = open_out(dir / ("search" + ext));
  write_search_report(f, results, delimiter_for(c.format));
  m.outputs.push_back("search" + ext);
  for (const auto& r : results) m.outputs.push_back(fs::relative(r.model_path, dir).generic_string());
  m.config = train_json(c, a);
  m.config["hs"] = a.hs_range;
  m.config["layers"] = a.layer_range;
  m.config["trials"] = a.trials;
  m.seeds = {{"seed", c.seed}, {"grid", derive_seed(c.seed, "search.grid")}};
}

struct CalibrateArgs {
  std::string model;
  std::string splits;
  double quantile = 1.0;
  std::optional<double> alpha;
};

void run_calibrate(const Common& c, const CalibrateArgs& a, Manifest& m) {
  const auto trace = load_trace(c, m);
  m.input("model", a.model);
  const auto model = nn::load_checkpoint(a.model);
  const auto splits = load_splits(a.splits, m);

  Threshold t;
  if (a.alpha) {
    t = Threshold::manual(*a.alpha);
  } else {
    const auto val = stack_windows(make_windows(trace, c.sensor, splits.validation, model.window_size, c.stride, model.norm));
    std::optional<Eigen::MatrixXd> holdout;
    if (!splits.holdout.empty())
      holdout = stack_windows(make_windows(trace, c.sensor, splits.holdout, model.window_size, c.stride, model.norm));
    t = calibrate(model, val, holdout, a.quantile);
  }
  const auto dir = prepare_out_dir(c);
  auto f = open_out(dir / "threshold.json");
  write_threshold(f, t);
  m.outputs.push_back("threshold.json");
  m.config = trace_config(c);
  m.config["stride"] = c.stride;
  m.config["quantile"] = a.quantile;
  m.config["alpha"] = a.alpha ? json(*a.alpha) : json(nullptr);
}

struct DetectArgs {
  std::string model;
  std::string threshold;
  std::optional<double> alpha;
  bool window_size_given = false;
  int merge_gap = 10;
  double base_temp = kBaseTemperature;
};

void run_detect(const Common& c, const DetectArgs& a, Manifest& m) {
  m.input("model", a.model);
  const auto model = nn::load_checkpoint(a.model);
  if (a.window_size_given && c.window_size != model.window_size)
    throw UsageError("--window-size " + std::to_string(c.window_size) + " does not match the model's window size " +
                     std::to_string(model.window_size));
  Threshold t;
  if (a.alpha) {
    t = Threshold::manual(*a.alpha);
  } else if (!a.threshold.empty()) {
    m.input("threshold", a.threshold);
    t = read_threshold(a.threshold);
  } else {
    throw UsageError("detect needs --threshold or --alpha");
  }
  const auto trace = load_trace(c, m);
  const auto scores = score_trace(model, trace, c.sensor, model.norm, c.stride);
  DetectOptions options;
  options.merge_gap = seconds{a.merge_gap * 60};
  auto events = detect(scores, t, options);
  assign_class_hints(events, trace, c.sensor, scores.gaps, a.base_temp);

  const auto dir = prepare_out_dir(c);
  const std::string name = "events" + extension_for(c.format);
  auto f = open_out(dir / name);
  if (c.format == "text")
    write_event_summary(f, events, trace.utc_offset);
  else
    write_events(f, events, trace.utc_offset, delimiter_for(c.format));
  m.outputs.push_back(name);
  m.config = trace_config(c);
  m.config["window_size"] = model.window_size;
  m.config["stride"] = c.stride;
  m.config["alpha"] = t.alpha;
  m.config["merge_gap_minutes"] = a.merge_gap;
  m.config["base_temp"] = a.base_temp;
  m.config["format"] = c.format;
}

void run_rba(const Common& c, const RbaConfig& config, Manifest& m) {
  const auto trace = load_trace(c, m);
  const auto events = rba_detect(trace, c.sensor, config);
  const auto dir = prepare_out_dir(c);
  const std::string name = "rba_events" + extension_for(c.format);
  auto f = open_out(dir / name);
  if (c.format == "text")
    write_event_summary(f, events, trace.utc_offset);
  else
    write_events(f, events, trace.utc_offset, delimiter_for(c.format));
  m.outputs.push_back(name);
  m.config = trace_config(c);
  m.config["base_temp"] = config.base_temp;
  m.config["band"] = config.band;
  m.config["min_duration"] = config.min_duration;
  m.config["max_duration"] = config.max_duration;
  m.config["format"] = c.format;
}

struct CorrArgs {
  std::string sensors;
  std::string days;
  std::string labels;
  std::string population = "all";
};

void run_corr(const Common& c, const CorrArgs& a, Manifest& m) {
  const auto trace = load_trace(c, m);
  std::vector<std::string> sensors = split_list(a.sensors);
  if (sensors.empty())
    for (const auto& col : trace.columns)
      if (col.unit == "°C") sensors.push_back(col.name);

  std::set<Day> days;
  Population population = Population::AllDays;
  for (const auto& d : split_list(a.days)) {
    const auto day = parse_day(d);
    if (!day) throw UsageError("bad day '" + d + "' in --days");
    days.insert(*day);
  }
  if (a.population != "all") {
    if (!days.empty()) throw UsageError("--days and --population are mutually exclusive");
    if (c.sensor.empty()) throw UsageError("--population needs --sensor for day labelling");
    const bool normal = a.population == "normal";
    population = normal ? Population::NormalDays : Population::AnomalousDays;
    for (const auto& l : day_labels(trace, c.sensor, a.labels, m))
      if ((l.label == DayClass::Normal) == normal) days.insert(l.date);
    if (days.empty()) throw Error(ErrorCode::InsufficientData, "no " + a.population + " days in the trace");
  }
  const auto matrix = pearson_matrix(trace, sensors, days, population);
  const auto dir = prepare_out_dir(c);
  const std::string name = "corr" + extension_for(c.format);
  auto f = open_out(dir / name);
  write_correlation(f, matrix, delimiter_for(c.format));
  m.outputs.push_back(name);
  m.config = trace_config(c);
  m.config["sensors"] = sensors;
  m.config["days"] = a.days;
  m.config["population"] = std::string(to_string(population));
  m.config["format"] = c.format;
}

struct ReportArgs {
  std::string ae;
  std::string rba;
  std::string truth;
  std::string dataset = "synth";
};

void run_report(const Common& c, const ReportArgs& a, Manifest& m) {
  std::vector<DetectionEvent> ae, rba;
  std::vector<TruthEvent> truth;
  if (!a.ae.empty()) {
    m.input("ae", a.ae);
    ae = read_events(fs::path(a.ae), sniff_delimiter(a.ae));
  }
  if (!a.rba.empty()) {
    m.input("rba", a.rba);
    rba = read_events(fs::path(a.rba), sniff_delimiter(a.rba));
  }
  if (!a.truth.empty()) {
    m.input("truth", a.truth);
    truth = read_truth(fs::path(a.truth), sniff_delimiter(a.truth));
  }
  const auto rows = compare_events(a.dataset, truth, ae, rba, std::chrono::minutes(c.window_size));
  const auto dir = prepare_out_dir(c);
  const std::string name = "report" + extension_for(c.format);
  auto f = open_out(dir / name);
  write_comparison(f, rows, seconds{0}, delimiter_for(c.format));
  m.outputs.push_back(name);
  m.config = {{"ae", a.ae}, {"rba", a.rba}, {"truth", a.truth}, {"dataset", a.dataset},
              {"tolerance_minutes", c.window_size}, {"format", c.format}};
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args);
int report_error(std::string_view code, std::string_view message, int exit);

int rerun(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + manifest_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("malformed manifest: ") + e.what());
  }
  if (!j.contains("argv") || !j["argv"].is_array()) throw Error(ErrorCode::MalformedFile, "manifest has no argv");
  auto argv = j["argv"].get<std::vector<std::string>>();
  if (!out_dir.empty()) {
    auto it = std::find(argv.begin(), argv.end(), "--out-dir");
    if (it != argv.end() && it + 1 != argv.end())
      *(it + 1) = out_dir;
    else
      argv.insert(argv.end(), {"--out-dir", out_dir});
  }
  return run(argv);
}

void add_common(CLI::App* cmd, Common& c, bool needs_input, bool needs_sensor) {
  auto* input = cmd->add_option("--input", c.input, "Sensor trace (delimited, header timestamp,<sensor>...)");
  if (needs_input) input->required()->check(CLI::ExistingFile);
  auto* sensor = cmd->add_option("--sensor", c.sensor, "Sensor column");
  if (needs_sensor) sensor->required();
  cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--resample", c.resample_seconds, "Resample to this period in seconds before use (0 = off)");
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Beehive sensor anomaly detection", "hivead"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  SynthArgs synth;
  TrainArgs train;
  CalibrateArgs cal;
  DetectArgs det;
  RbaConfig rba;
  CorrArgs corr;
  ReportArgs rep;
  std::string manifest_path;
  std::optional<double> detect_alpha, calibrate_alpha;
  const auto formats = CLI::IsMember({"csv", "tsv"});
  const auto event_formats = CLI::IsMember({"csv", "tsv", "text"});

  auto* s = app.add_subcommand("synth", "Generate a synthetic hive trace and its ground truth");
  s->add_option("--days", synth.days, "Days to generate")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--layout", synth.layout, "Sensor layout")->capture_default_str()->check(CLI::IsMember({"hobos-13", "we4bee-5", "single"}));
  s->add_option("--schedule", synth.schedule, "Anomalies as day:kind:minute,...");
  s->add_option("--hive-id", synth.hive_id, "Hive identifier")->capture_default_str();
  s->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  s->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  s->add_option("--format", c.format, "csv or tsv")->capture_default_str()->check(formats);

  auto add_training = [&](CLI::App* cmd) {
    add_common(cmd, c, true, true);
    cmd->add_option("--window-size", c.window_size, "Window length in samples")->capture_default_str()->check(CLI::Range(2, 100000));
    cmd->add_option("--stride", c.stride, "Window stride")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("--labels", train.labels, "Manual day labels (date,label)");
    cmd->add_option("--splits", train.splits, "Existing split manifest; skips labelling");
    cmd->add_option("--validation-fraction", train.validation_fraction, "Share of normal days for validation")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--epochs", train.epochs, "Maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", train.batch_size, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--patience", train.patience, "Early-stopping patience")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--learning-rate", train.learning_rate, "Adam step size")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* t = app.add_subcommand("train", "Train the LSTM autoencoder on normal days");
  add_training(t);
  t->add_option("--hs", train.hs, "Hidden size")->capture_default_str();
  t->add_option("--layers", train.layers, "Stacked LSTM layers")->capture_default_str();

  auto* sr = app.add_subcommand("search", "Random search over hidden size and layer count");
  add_training(sr);
  sr->add_option("--hs", train.hs_range, "Hidden size range LO-HI")->capture_default_str();
  sr->add_option("--layers", train.layer_range, "Layer range LO-HI")->capture_default_str();
  sr->add_option("--trials", train.trials, "Trials")->capture_default_str()->check(CLI::PositiveNumber);
  sr->add_option("--threads", train.threads, "Concurrent trials")->capture_default_str()->check(CLI::PositiveNumber);
  sr->add_option("--format", c.format, "csv or tsv")->capture_default_str()->check(formats);

  auto* cb = app.add_subcommand("calibrate", "Derive the detection threshold from validation errors");
  add_common(cb, c, true, true);
  cb->add_option("--model", cal.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cb->add_option("--splits", cal.splits, "Split manifest from train")->required()->check(CLI::ExistingFile);
  cb->add_option("--quantile", cal.quantile, "Validation error quantile")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cb->add_option("--alpha", calibrate_alpha, "Manual threshold");
  cb->add_option("--stride", c.stride, "Window stride")->capture_default_str()->check(CLI::PositiveNumber);

  auto* d = app.add_subcommand("detect", "Score a trace and report AE anomaly events");
  add_common(d, c, true, true);
  d->add_option("--model", det.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  d->add_option("--threshold", det.threshold, "Threshold file from calibrate")->check(CLI::ExistingFile);
  d->add_option("--alpha", detect_alpha, "Manual threshold");
  auto* ws = d->add_option("--window-size", c.window_size, "Must match the model when given")->capture_default_str();
  d->add_option("--stride", c.stride, "Window stride")->capture_default_str()->check(CLI::PositiveNumber);
  d->add_option("--merge-gap", det.merge_gap, "Merge hits this many minutes apart")->capture_default_str()->check(CLI::NonNegativeNumber);
  d->add_option("--base-temp", det.base_temp, "Baseline for class hints")->capture_default_str();
  d->add_option("--format", c.format, "csv, tsv or text")->capture_default_str()->check(event_formats);

  auto* r = app.add_subcommand("rba", "Rule-based swarm detection");
  add_common(r, c, true, true);
  r->add_option("--base-temp", rba.base_temp, "Base temperature")->capture_default_str();
  r->add_option("--band", rba.band, "Allowed fluctuation")->capture_default_str();
  r->add_option("--min-duration", rba.min_duration, "Minimum excursion minutes")->capture_default_str();
  r->add_option("--max-duration", rba.max_duration, "Maximum excursion minutes")->capture_default_str();
  r->add_option("--format", c.format, "csv, tsv or text")->capture_default_str()->check(event_formats);

  auto* co = app.add_subcommand("corr", "Pearson correlation between sensors");
  add_common(co, c, true, false);
  co->add_option("--sensors", corr.sensors, "Comma-separated sensors (default: all temperature columns)");
  co->add_option("--days", corr.days, "Comma-separated days YYYY-MM-DD");
  co->add_option("--labels", corr.labels, "Manual day labels for --population");
  co->add_option("--population", corr.population, "all, normal or anomalous days")
      ->capture_default_str()->check(CLI::IsMember({"all", "normal", "anomalous"}));
  co->add_option("--format", c.format, "csv or tsv")->capture_default_str()->check(formats);

  auto* rp = app.add_subcommand("report", "AE/RBA comparison table");
  rp->add_option("--ae", rep.ae, "AE events")->check(CLI::ExistingFile);
  rp->add_option("--rba", rep.rba, "RBA events")->check(CLI::ExistingFile);
  rp->add_option("--truth", rep.truth, "Ground-truth events")->check(CLI::ExistingFile);
  rp->add_option("--dataset", rep.dataset, "Dataset label")->capture_default_str();
  rp->add_option("--window-size", c.window_size, "Matching tolerance in minutes")->capture_default_str()->check(CLI::NonNegativeNumber);
  rp->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  rp->add_option("--format", c.format, "csv or tsv")->capture_default_str()->check(formats);

  auto* rr = app.add_subcommand("rerun", "Replay the command recorded in a manifest");
  rr->add_option("--manifest", manifest_path, "A <command>.manifest.json")->required()->check(CLI::ExistingFile);
  rr->add_option("--out-dir", c.out_dir, "Output directory (default: the recorded one)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("Usage", e.what(), kUsage);
  }

  Manifest m;
  m.argv = args;
  m.command = app.get_subcommands().front()->get_name();
  cal.alpha = calibrate_alpha;
  det.alpha = detect_alpha;
  det.window_size_given = ws->count() > 0;

  if (m.command == "rerun") return rerun(manifest_path, rr->get_option("--out-dir")->count() ? c.out_dir : "");
  if (m.command == "report" && rep.ae.empty() && rep.rba.empty())
    throw UsageError("report needs --ae and/or --rba");

  if (m.command == "synth") run_synth(c, synth, m);
  else if (m.command == "train") run_train(c, train, m);
  else if (m.command == "search") run_search(c, train, m);
  else if (m.command == "calibrate") run_calibrate(c, cal, m);
  else if (m.command == "detect") run_detect(c, det, m);
  else if (m.command == "rba") run_rba(c, rba, m);
  else if (m.command == "corr") run_corr(c, corr, m);
  else if (m.command == "report") run_report(c, rep, m);

  m.write(c.out_dir);
  return kOk;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidHyperparameter:
    case ErrorCode::InvalidSchedule: return kUsage;
    case ErrorCode::ShapeMismatch:
    case ErrorCode::LengthMismatch: return kInternal;
    default: return kData;
  }
}

std::string quoted(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

int report_error(std::string_view code, std::string_view message, int exit) {
  std::cerr << "error: code=" << code << " message=\"" << quoted(message) << "\"\n";
  return exit;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const UsageError& e) {
    return report_error("Usage", e.what(), kUsage);
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.what(), exit_code(e.code()));
  } catch (const fs::filesystem_error& e) {
    return report_error("FileSystem", e.what(), kData);
  } catch (const std::exception& e) {
    return report_error("Internal", e.what(), kInternal);
  }
}
