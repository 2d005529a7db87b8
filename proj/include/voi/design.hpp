#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace voi {

// Predictor matrix with per-column standardization constants. Rows are Monte
// Carlo draws, columns are flattened simulated observation values for a fixed
// pattern, in pattern order. Zero-variance columns are centered only.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  static DesignMatrix standardized(Eigen::MatrixXd raw, std::vector<std::string> columns);

  const Eigen::MatrixXd& rows() const { return values_; }
  int row_count() const { return static_cast<int>(values_.rows()); }
  int col_count() const { return static_cast<int>(values_.cols()); }
  const std::vector<std::string>& columns() const { return columns_; }
  const Eigen::VectorXd& column_mean() const { return mean_; }
  const Eigen::VectorXd& column_scale() const { return scale_; }

  // Applies this matrix's standardization constants to new raw rows.
  Eigen::MatrixXd standardize(const Eigen::MatrixXd& raw) const;

  DesignMatrix select_rows(const std::vector<int>& indices) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> columns_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
};

// Deterministic max-min-distance subset selection (Euclidean distance on the
// given rows, which callers standardize first). Seeds with the two mutually
// farthest rows, then greedily adds the row with the largest minimum distance
// to the selected set; ties break toward the lower row index.
std::vector<int> kennard_stone_select(const Eigen::MatrixXd& rows, int count);

// Splits into (train, test) with train size round(train_fraction * n).
std::pair<std::vector<int>, std::vector<int>> kennard_stone_split(const Eigen::MatrixXd& rows,
                                                                  double train_fraction);

}  // namespace voi
