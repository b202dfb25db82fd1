#pragma once

#include <filesystem>
#include <iosfwd>

#include "hivead/nn/autoencoder.hpp"

namespace hivead::nn {

/// JSON container, format `hivead-autoencoder`, version `v1`: hyperparameters,
/// normalization, seed and every weight block with its name and shape.
/// Numbers are written in shortest round-trip form, so load(save(m)) == m.
void save_checkpoint(std::ostream& out, const Autoencoder<double>& model);
void save_checkpoint(const std::filesystem::path& path, const Autoencoder<double>& model);

Autoencoder<double> load_checkpoint(std::istream& in);
Autoencoder<double> load_checkpoint(const std::filesystem::path& path);

}  // namespace hivead::nn
