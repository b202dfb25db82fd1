#include "hivead/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hivead/error.hpp"
#include "text.hpp"

namespace hivead {

std::string_view to_string(Population p) {
  switch (p) {
    case Population::NormalDays: return "normal-days";
    case Population::AnomalousDays: return "anomalous-days";
    case Population::AllDays: return "all-days";
  }
  return "all-days";
}

std::optional<double> CorrelationMatrix::at(std::size_t i, std::size_t j) const {
  const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson needs equal-length series");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!is_missing(x(i)) && !is_missing(y(i))) rows.push_back(i);
  if (rows.size() < 2) return std::nullopt;

  const auto constant = [&](const auto& v) {
    return std::all_of(rows.begin(), rows.end(), [&](Eigen::Index i) { return v(i) == v(rows.front()); });
  };
  if (constant(x) || constant(y)) return std::nullopt;

  double mx = 0.0, my = 0.0;
  for (auto i : rows) {
    mx += x(i);
    my += y(i);
  }
  mx /= static_cast<double>(rows.size());
  my /= static_cast<double>(rows.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (auto i : rows) {
    const double dx = x(i) - mx, dy = y(i) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const SensorTrace& trace, const std::vector<std::string>& sensors,
                                 const std::set<Day>& days, Population population) {
  if (sensors.size() < 2) throw Error(ErrorCode::InvalidArgument, "correlation needs at least two sensors");
  std::vector<Eigen::Index> cols;
  for (const auto& s : sensors) cols.push_back(trace.column_index(s));

  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < trace.size(); ++r)
    if (days.empty() || days.contains(trace.day_of(r))) rows.push_back(static_cast<Eigen::Index>(r));
  const Eigen::MatrixXd data = trace.values(rows, cols);

  const auto k = static_cast<Eigen::Index>(sensors.size());
  CorrelationMatrix m;
  m.sensors = sensors;
  m.population = population;
  m.values = Eigen::MatrixXd::Constant(k, k, kMissing);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const auto r = pearson(data.col(i), data.col(j));
      if (!r) continue;
      m.values(i, j) = m.values(j, i) = i == j ? 1.0 : *r;
    }
  }
  return m;
}

void write_correlation(std::ostream& out, const CorrelationMatrix& m, char delimiter) {
  out << "sensor";
  for (const auto& s : m.sensors) out << delimiter << s;
  out << '\n';
  for (std::size_t i = 0; i < m.sensors.size(); ++i) {
    out << m.sensors[i];
    for (std::size_t j = 0; j < m.sensors.size(); ++j) {
      out << delimiter;
      if (const auto v = m.at(i, j)) out << text::fixed(*v, 6);
    }
    out << '\n';
  }
}

}  // namespace hivead
