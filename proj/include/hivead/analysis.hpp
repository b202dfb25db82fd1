#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hivead/trace.hpp"

namespace hivead {

enum class Population { NormalDays, AnomalousDays, AllDays };

std::string_view to_string(Population p);

/// Pairwise Pearson correlation. Undefined entries are NaN.
struct CorrelationMatrix {
  std::vector<std::string> sensors;
  Eigen::MatrixXd values;
  Population population = Population::AllDays;

  std::optional<double> at(std::size_t i, std::size_t j) const;
};

/// Pearson r of x and y over the positions where both are present; nullopt
/// with fewer than two such positions or when either side is constant there.
std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Correlation of every sensor pair over the rows of `days` (all rows when empty).
CorrelationMatrix pearson_matrix(const SensorTrace& trace, const std::vector<std::string>& sensors,
                                 const std::set<Day>& days = {}, Population population = Population::AllDays);

/// Matrix with a sensor-name header row and column; undefined cells are empty.
void write_correlation(std::ostream& out, const CorrelationMatrix& m, char delimiter = ',');

}  // namespace hivead
