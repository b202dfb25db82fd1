#include "hivead/nn/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

namespace hivead::nn {

namespace {

constexpr const char* kFormat = "hivead-autoencoder";
constexpr const char* kVersion = "v1";

}  // namespace

void save_checkpoint(std::ostream& out, const Autoencoder<double>& model) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["hidden_size"] = model.hidden_size();
  j["layers"] = model.layers();
  j["window_size"] = model.window_size;
  j["seed"] = model.seed;
  j["normalization"] = {{"mean", model.norm.mean}, {"std", model.norm.std}};
  auto& blocks = j["blocks"] = nlohmann::ordered_json::array();
  model.for_each_block([&](const std::string& name, const double* data, Index rows, Index cols) {
    blocks.push_back({{"name", name},
                      {"rows", rows},
                      {"cols", cols},
                      {"data", std::vector<double>(data, data + rows * cols)}});
  });
  out << j.dump(1) << '\n';
}

void save_checkpoint(const std::filesystem::path& path, const Autoencoder<double>& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::FileUnreadable, "cannot write '" + path.string() + "'");
  save_checkpoint(out, model);
}

Autoencoder<double> load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw Error(ErrorCode::MalformedFile, "not an autoencoder checkpoint");
    if (j.at("version") != kVersion)
      throw Error(ErrorCode::MalformedFile, "unsupported checkpoint version " + j.at("version").dump());

    Autoencoder<double> model = make_autoencoder<double>(j.at("hidden_size").get<int>(), j.at("layers").get<int>(),
                                                         j.at("window_size").get<int>());
    model.seed = j.at("seed").get<std::uint64_t>();
    model.norm.mean = j.at("normalization").at("mean").get<double>();
    model.norm.std = j.at("normalization").at("std").get<double>();

    const auto& blocks = j.at("blocks");
    std::size_t k = 0;
    model.for_each_block([&](const std::string& name, double* data, Index rows, Index cols) {
      if (k >= blocks.size()) throw Error(ErrorCode::MalformedFile, "checkpoint is missing block " + name);
      const auto& b = blocks[k++];
      if (b.at("name") != name || b.at("rows").get<Index>() != rows || b.at("cols").get<Index>() != cols)
        throw Error(ErrorCode::MalformedFile, "checkpoint block " + name + " has unexpected name or shape");
      const auto values = b.at("data").get<std::vector<double>>();
      if (static_cast<Index>(values.size()) != rows * cols)
        throw Error(ErrorCode::MalformedFile, "checkpoint block " + name + " has wrong element count");
      std::copy(values.begin(), values.end(), data);
    });
    if (k != blocks.size()) throw Error(ErrorCode::MalformedFile, "checkpoint has extra blocks");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("malformed checkpoint: ") + e.what());
  }
}

Autoencoder<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileUnreadable, "cannot read '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace hivead::nn
