#include "voi/design.hpp"

#include <algorithm>
#include <cmath>

#include "voi/errors.hpp"

namespace voi {

DesignMatrix DesignMatrix::standardized(Eigen::MatrixXd raw, std::vector<std::string> columns) {
  if (static_cast<int>(columns.size()) != raw.cols()) {
    throw_error(ErrorKind::Usage, "design matrix: column-name count does not match data");
  }
  DesignMatrix out;
  out.columns_ = std::move(columns);
  const int n = static_cast<int>(raw.rows());
  out.mean_ = raw.colwise().mean();
  out.scale_.resize(raw.cols());
  for (int j = 0; j < raw.cols(); ++j) {
    const double var = (raw.col(j).array() - out.mean_[j]).square().sum() / std::max(1, n);
    const double sd = std::sqrt(var);
    out.scale_[j] = sd > 0.0 ? sd : 1.0;
  }
  out.values_ = out.standardize(raw);
  return out;
}

Eigen::MatrixXd DesignMatrix::standardize(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != mean_.size()) {
    throw_error(ErrorKind::Usage, "design matrix: raw row width does not match schema");
  }
  Eigen::MatrixXd out = raw;
  out.rowwise() -= mean_.transpose();
  out.array().rowwise() /= scale_.transpose().array();
  return out;
}

DesignMatrix DesignMatrix::select_rows(const std::vector<int>& indices) const {
  DesignMatrix out;
  out.columns_ = columns_;
  out.mean_ = mean_;
  out.scale_ = scale_;
  out.values_.resize(static_cast<long>(indices.size()), values_.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.values_.row(static_cast<long>(i)) = values_.row(indices[i]);
  }
  return out;
}

std::vector<int> kennard_stone_select(const Eigen::MatrixXd& rows, int count) {
  const int n = static_cast<int>(rows.rows());
  if (n < 2) throw_error(ErrorKind::Usage, "Kennard-Stone needs at least 2 rows");
  if (count < 1 || count > n) {
    throw_error(ErrorKind::Usage, "Kennard-Stone selection count out of range");
  }

  // Farthest pair; lexicographically smallest indices on ties.
  int seed_a = 0, seed_b = 1;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (rows.row(i) - rows.row(j)).squaredNorm();
      if (d > best) {
        best = d;
        seed_a = i;
        seed_b = j;
      }
    }
  }
  if (best <= 0.0) {
    throw_error(ErrorKind::Degenerate, "Kennard-Stone: all rows are identical");
  }

  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(count));
  Eigen::VectorXd min_dist(n);

  auto add = [&](int idx) {
    chosen[static_cast<std::size_t>(idx)] = 1;
    selected.push_back(idx);
    for (int r = 0; r < n; ++r) {
      if (chosen[static_cast<std::size_t>(r)]) continue;
      const double d = (rows.row(r) - rows.row(idx)).squaredNorm();
      if (selected.size() == 1 || d < min_dist[r]) min_dist[r] = d;
    }
  };

  add(seed_a);
  if (count >= 2) add(seed_b);
  while (static_cast<int>(selected.size()) < count) {
    int pick = -1;
    double best_min = -1.0;
    for (int r = 0; r < n; ++r) {
      if (chosen[static_cast<std::size_t>(r)]) continue;
      if (min_dist[r] > best_min) {
        best_min = min_dist[r];
        pick = r;
      }
    }
    add(pick);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::pair<std::vector<int>, std::vector<int>> kennard_stone_split(const Eigen::MatrixXd& rows,
                                                                  double train_fraction) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw_error(ErrorKind::Usage, "Kennard-Stone train fraction must lie in (0, 1)");
  }
  const int n = static_cast<int>(rows.rows());
  const int count = std::clamp(static_cast<int>(std::llround(train_fraction * n)), 1, n);
  std::vector<int> train = kennard_stone_select(rows, count);
  std::vector<int> test;
  test.reserve(static_cast<std::size_t>(n - count));
  std::size_t t = 0;
  for (int r = 0; r < n; ++r) {
    if (t < train.size() && train[t] == r) {
      ++t;
    } else {
      test.push_back(r);
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace voi
