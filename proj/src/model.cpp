#include "voi/model.hpp"

#include "voi/errors.hpp"

namespace voi {

double BoundModel::log_posterior_local(const ParameterState& state, int /*block*/,
                                       int /*coord*/) const {
  const LogDensity d = log_posterior(state);
  return d.in_support ? d.value : -std::numeric_limits<double>::infinity();
}

LogDensity Model::log_posterior(const ParameterState& state, const Dataset& data) const {
  return bind(data)->log_posterior(state);
}

bool Model::supports_conditional_mean(const TargetSpec& /*target*/) const { return false; }

Eigen::VectorXd Model::conditional_mean_target(const ParameterState& /*state*/,
                                               const Dataset& /*data*/,
                                               const TargetSpec& target) const {
  throw_error(ErrorKind::Capability,
              "model '" + name() + "' has no closed-form conditional mean for target '" +
                  target.name + "'");
}

void Model::design_columns(const DataRow& pattern_cell, std::vector<std::string>& names) const {
  names.push_back("v:" + pattern_cell.source + "/" + std::to_string(pattern_cell.site) + "/" +
                  std::to_string(pattern_cell.year));
}

void Model::design_values(const DataRow& simulated_row, std::vector<double>& values) const {
  values.push_back(simulated_row.value);
}

std::vector<DataRow> make_pattern(const Dataset& data, std::span<const int> row_indices) {
  std::vector<DataRow> pattern;
  pattern.reserve(row_indices.size());
  for (int i : row_indices) {
    DataRow cell = data.row(i);
    cell.value = 0.0;
    cell.count = 0.0;
    if (data.has_population(cell.site, cell.year)) {
      cell.population = data.population(cell.site, cell.year);
    }
    pattern.push_back(std::move(cell));
  }
  return pattern;
}

}  // namespace voi
