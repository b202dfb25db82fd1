#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hivead/nn/trainer.hpp"

namespace hivead {

struct IntRange {
  int lo = 0;
  int hi = 0;

  int count() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(int v) const { return v >= lo && v <= hi; }
};

struct SearchSpace {
  IntRange hidden_size{nn::kMinHiddenSize, nn::kMaxHiddenSize};
  IntRange layers{nn::kMinLayers, nn::kMaxLayers};
  int trials = 20;
  std::uint64_t seed = 0;
  /// Allow ranges outside [2, 64] x [1, 4].
  bool allow_out_of_bounds = false;

  int grid_size() const { return hidden_size.count() * layers.count(); }
};

struct SearchOptions {
  int window_size = 60;
  /// Stored in every trial checkpoint.
  NormalizationParams norm;
  /// Trial checkpoints are written here when non-empty.
  std::filesystem::path model_dir;
  /// Concurrent trials; results do not depend on it.
  int threads = 1;
};

struct TrialResult {
  int hidden_size = 0;
  int layers = 0;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  std::string model_path;
  std::uint64_t model_seed = 0;
};

/// The (hs, n) pairs a search with this space visits, in visiting order:
/// the first `min(trials, grid)` entries of a seeded shuffle of the grid.
std::vector<std::pair<int, int>> sample_grid(const SearchSpace& space);

/// Random search without replacement over the (hs, n) grid. Each trial trains
/// a fresh model; results are sorted by best validation loss, ties broken by
/// smaller hs, then smaller n. Requesting more trials than the grid holds runs
/// the whole grid.
std::vector<TrialResult> random_search(const SearchSpace& space, const Eigen::MatrixXd& train_windows,
                                       const Eigen::MatrixXd& val_windows, const nn::TrainConfig& config,
                                       const SearchOptions& options = {});

/// Delimited table with columns hs, n, best_val_loss, epochs_run, model_path.
void write_search_report(std::ostream& out, const std::vector<TrialResult>& trials, char delimiter = ',');

}  // namespace hivead
