#include "hivead/search.hpp"

#include <algorithm>
#include <exception>
#include <charconv>
#include <ostream>
#include <thread>

#include "hivead/error.hpp"
#include "hivead/nn/checkpoint.hpp"

namespace hivead {

std::vector<std::pair<int, int>> sample_grid(const SearchSpace& space) {
  if (space.trials < 1) throw Error(ErrorCode::InvalidArgument, "search needs at least one trial");
  if (space.grid_size() == 0) throw Error(ErrorCode::InvalidArgument, "empty search grid");
  if (!space.allow_out_of_bounds &&
      (space.hidden_size.lo < nn::kMinHiddenSize || space.hidden_size.hi > nn::kMaxHiddenSize ||
       space.layers.lo < nn::kMinLayers || space.layers.hi > nn::kMaxLayers))
    throw Error(ErrorCode::InvalidHyperparameter, "search ranges exceed hs in [2, 64], n in [1, 4]");

  std::vector<std::pair<int, int>> grid;
  for (int hs = space.hidden_size.lo; hs <= space.hidden_size.hi; ++hs)
    for (int n = space.layers.lo; n <= space.layers.hi; ++n) grid.emplace_back(hs, n);
  Rng rng(derive_seed(space.seed, "search.grid"));
  rng.shuffle(grid);
  grid.resize(std::min<std::size_t>(grid.size(), static_cast<std::size_t>(space.trials)));
  return grid;
}

std::vector<TrialResult> random_search(const SearchSpace& space, const Eigen::MatrixXd& train_windows,
                                       const Eigen::MatrixXd& val_windows, const nn::TrainConfig& config,
                                       const SearchOptions& options) {
  if (train_windows.cols() == 0 || val_windows.cols() == 0)
    throw Error(ErrorCode::EmptyDataset, "search needs training and validation windows");
  const auto pairs = sample_grid(space);
  std::vector<TrialResult> results(pairs.size());

  auto run_trial = [&](std::size_t i) {
    const auto [hs, n] = pairs[i];
    const std::uint64_t model_seed = derive_seed(space.seed, "search.trial." + std::to_string(hs) + "x" + std::to_string(n));
    nn::TrainConfig trial_config = config;
    trial_config.seed = derive_seed(model_seed, "shuffle");
    auto model = nn::init_autoencoder<double>(hs, n, options.window_size, model_seed);
    model.norm = options.norm;
    const auto trained = nn::train(std::move(model), train_windows, val_windows, trial_config);

    TrialResult r;
    r.hidden_size = hs;
    r.layers = n;
    r.best_val_loss = trained.best_val_loss;
    r.epochs_run = trained.epochs_run();
    r.model_seed = model_seed;
    if (!options.model_dir.empty()) {
      const auto path = options.model_dir / ("trial_hs" + std::to_string(hs) + "_n" + std::to_string(n) + ".json");
      nn::save_checkpoint(path, trained.model);
      r.model_path = path.string();
    }
    results[i] = std::move(r);
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, options.threads)), 1, pairs.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) run_trial(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < pairs.size(); i += workers) run_trial(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.best_val_loss != b.best_val_loss) return a.best_val_loss < b.best_val_loss;
    if (a.hidden_size != b.hidden_size) return a.hidden_size < b.hidden_size;
    return a.layers < b.layers;
  });
  return results;
}

void write_search_report(std::ostream& out, const std::vector<TrialResult>& trials, char delimiter) {
  out << "hs" << delimiter << "n" << delimiter << "best_val_loss" << delimiter << "epochs_run" << delimiter
      << "model_path\n";
  char buf[64];
  for (const auto& t : trials) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t.best_val_loss);
    out << t.hidden_size << delimiter << t.layers << delimiter << std::string_view(buf, static_cast<std::size_t>(ptr - buf))
        << delimiter << t.epochs_run << delimiter << t.model_path << '\n';
  }
}

}  // namespace hivead
