#pragma once

#include <Eigen/Core>

namespace hivead {

/// z-score statistics, in sensor units.
struct NormalizationParams {
  double mean = 0.0;
  double std = 1.0;

  template <typename Derived>
  auto normalize(const Eigen::ArrayBase<Derived>& v) const {
    return (v - mean) / std;
  }
  template <typename Derived>
  auto denormalize(const Eigen::ArrayBase<Derived>& v) const {
    return v * std + mean;
  }
  double normalize(double v) const { return (v - mean) / std; }
  double denormalize(double v) const { return v * std + mean; }

  bool operator==(const NormalizationParams&) const = default;
};

}  // namespace hivead
