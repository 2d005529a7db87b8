#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace voi {

// Declared support of a parameter block. Count blocks carry per-coordinate
// integer bounds (e.g. latent counts bounded by observed subgroup totals
// below and the known population above).
enum class Support { Real, Positive, UnitInterval, Count };

struct BlockSpec {
  std::string name;
  int size = 1;
  Support support = Support::Real;
  Eigen::VectorXd lower;  // Count only
  Eigen::VectorXd upper;  // Count only

  static BlockSpec real(std::string name, int size = 1);
  static BlockSpec positive(std::string name, int size = 1);
  static BlockSpec unit_interval(std::string name, int size = 1);
  static BlockSpec count(std::string name, Eigen::VectorXd lower, Eigen::VectorXd upper);
};

// Immutable flattened layout of a model's parameter space. Shared by every
// state and chain drawn from the same bound model.
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<BlockSpec> blocks);

  int block_count() const { return static_cast<int>(blocks_.size()); }
  const BlockSpec& spec(int b) const { return blocks_[b]; }
  int offset(int b) const { return offsets_[b]; }
  int total_size() const { return total_; }

  bool has(std::string_view name) const;
  int index_of(std::string_view name) const;  // schema error when absent

  // One name per scalar coordinate: "block" for scalars, "block[i]" otherwise.
  std::vector<std::string> coordinate_names() const;

  bool same_shape(const BlockLayout& other) const;

 private:
  std::vector<BlockSpec> blocks_;
  std::vector<int> offsets_;
  std::unordered_map<std::string, int> index_;
  int total_ = 0;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

// One point in a model's parameter space: a flat vector plus the shared
// layout describing its named blocks.
class ParameterState {
 public:
  ParameterState(LayoutPtr layout, Eigen::VectorXd values);
  static ParameterState zeros(LayoutPtr layout);

  const BlockLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  const Eigen::VectorXd& flat() const { return v_; }
  Eigen::VectorXd& flat() { return v_; }

  double get(int block, int i) const { return v_[layout_->offset(block) + i]; }
  void set(int block, int i, double x) { v_[layout_->offset(block) + i] = x; }

  Eigen::Map<const Eigen::VectorXd> block(int b) const;
  Eigen::Map<const Eigen::VectorXd> block(std::string_view name) const;
  Eigen::Map<Eigen::VectorXd> block_mut(int b);
  Eigen::Map<Eigen::VectorXd> block_mut(std::string_view name);

  double scalar(std::string_view name) const;  // size-1 block
  void set_scalar(std::string_view name, double x);

  // True when every coordinate lies in its block's declared support.
  bool in_declared_support() const;

 private:
  LayoutPtr layout_;
  Eigen::VectorXd v_;
};

bool value_in_support(double x, const BlockSpec& spec, int i);

}  // namespace voi
