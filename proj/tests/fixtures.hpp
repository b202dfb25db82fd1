#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hivead/data.hpp"
#include "hivead/synth.hpp"

namespace fixture {

inline hivead::Timestamp t0() { return hivead::Timestamp{std::chrono::sys_days{std::chrono::year{2019} / 5 / 1}}; }

/// Single-sensor trace, one reading per `period` starting at t0().
inline hivead::SensorTrace series(const std::vector<double>& values, const std::string& name = "T",
                                  hivead::seconds period = hivead::seconds{60}, hivead::Timestamp start = t0()) {
  hivead::SensorTrace t;
  t.hive_id = "test";
  t.columns.push_back({name, "°C"});
  t.values.resize(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.timestamps.push_back(start + period * static_cast<long>(i));
    t.values(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return t;
}

inline hivead::SensorTrace parse(const std::string& csv) {
  std::istringstream in(csv);
  return hivead::parse_trace(in);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hivead_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// One synthetic day with up to three anomalies of random kind and start.
inline hivead::SynthOutput random_day(std::uint64_t seed, hivead::Layout layout = hivead::Layout::Hobos13) {
  std::mt19937_64 gen(seed);
  hivead::SynthConfig cfg;
  cfg.days = 1;
  cfg.layout = layout;
  cfg.seed = seed;
  const int count = static_cast<int>(gen() % 4);
  int cursor = 0;
  for (int k = 0; k < count; ++k) {
    const auto kind = static_cast<hivead::AnomalyClass>(gen() % 4);
    const int room = 1440 / count - 70;
    const int start = cursor + static_cast<int>(gen() % static_cast<std::uint64_t>(room));
    cfg.schedule.push_back({0, kind, start});
    cursor += 1440 / count;
  }
  return hivead::generate(cfg);
}

}  // namespace fixture
