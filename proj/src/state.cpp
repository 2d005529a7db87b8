#include "voi/state.hpp"

#include <cmath>

#include "voi/errors.hpp"

namespace voi {

BlockSpec BlockSpec::real(std::string name, int size) {
  return BlockSpec{std::move(name), size, Support::Real, {}, {}};
}

BlockSpec BlockSpec::positive(std::string name, int size) {
  return BlockSpec{std::move(name), size, Support::Positive, {}, {}};
}

BlockSpec BlockSpec::unit_interval(std::string name, int size) {
  return BlockSpec{std::move(name), size, Support::UnitInterval, {}, {}};
}

BlockSpec BlockSpec::count(std::string name, Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size()) {
    throw_error(ErrorKind::Schema, "count block '" + name + "': bound sizes differ");
  }
  BlockSpec spec{std::move(name), static_cast<int>(lower.size()), Support::Count,
                 std::move(lower), std::move(upper)};
  for (int i = 0; i < spec.size; ++i) {
    if (spec.lower[i] > spec.upper[i]) {
      throw_error(ErrorKind::Data, "count block '" + spec.name + "': empty range at coordinate " +
                                       std::to_string(i));
    }
  }
  return spec;
}

BlockLayout::BlockLayout(std::vector<BlockSpec> blocks) : blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const BlockSpec& spec = blocks_[b];
    if (spec.size <= 0) {
      throw_error(ErrorKind::Schema, "block '" + spec.name + "' has non-positive size");
    }
    if (!index_.emplace(spec.name, static_cast<int>(b)).second) {
      throw_error(ErrorKind::Schema, "duplicate block name '" + spec.name + "'");
    }
    offsets_.push_back(total_);
    total_ += spec.size;
  }
}

bool BlockLayout::has(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

int BlockLayout::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw_error(ErrorKind::Schema, "unknown block name '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> BlockLayout::coordinate_names() const {
  std::vector<std::string> names;
  names.reserve(total_);
  for (const BlockSpec& spec : blocks_) {
    if (spec.size == 1) {
      names.push_back(spec.name);
    } else {
      for (int i = 0; i < spec.size; ++i) {
        names.push_back(spec.name + "[" + std::to_string(i) + "]");
      }
    }
  }
  return names;
}

bool BlockLayout::same_shape(const BlockLayout& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].name != other.blocks_[b].name || blocks_[b].size != other.blocks_[b].size) {
      return false;
    }
  }
  return true;
}

ParameterState::ParameterState(LayoutPtr layout, Eigen::VectorXd values)
    : layout_(std::move(layout)), v_(std::move(values)) {
  if (v_.size() != layout_->total_size()) {
    throw_error(ErrorKind::Schema, "state vector size " + std::to_string(v_.size()) +
                                       " does not match layout size " +
                                       std::to_string(layout_->total_size()));
  }
}

ParameterState ParameterState::zeros(LayoutPtr layout) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout->total_size());
  return ParameterState(std::move(layout), std::move(v));
}

Eigen::Map<const Eigen::VectorXd> ParameterState::block(int b) const {
  return {v_.data() + layout_->offset(b), layout_->spec(b).size};
}

Eigen::Map<const Eigen::VectorXd> ParameterState::block(std::string_view name) const {
  return block(layout_->index_of(name));
}

Eigen::Map<Eigen::VectorXd> ParameterState::block_mut(int b) {
  return {v_.data() + layout_->offset(b), layout_->spec(b).size};
}

Eigen::Map<Eigen::VectorXd> ParameterState::block_mut(std::string_view name) {
  return block_mut(layout_->index_of(name));
}

double ParameterState::scalar(std::string_view name) const {
  const int b = layout_->index_of(name);
  if (layout_->spec(b).size != 1) {
    throw_error(ErrorKind::Usage, "block '" + std::string(name) + "' is not scalar");
  }
  return v_[layout_->offset(b)];
}

void ParameterState::set_scalar(std::string_view name, double x) {
  const int b = layout_->index_of(name);
  if (layout_->spec(b).size != 1) {
    throw_error(ErrorKind::Usage, "block '" + std::string(name) + "' is not scalar");
  }
  v_[layout_->offset(b)] = x;
}

bool value_in_support(double x, const BlockSpec& spec, int i) {
  if (!std::isfinite(x)) return false;
  switch (spec.support) {
    case Support::Real:
      return true;
    case Support::Positive:
      return x > 0.0;
    case Support::UnitInterval:
      return x > 0.0 && x < 1.0;
    case Support::Count:
      return x >= spec.lower[i] && x <= spec.upper[i] && x == std::floor(x);
  }
  return false;
}

bool ParameterState::in_declared_support() const {
  for (int b = 0; b < layout_->block_count(); ++b) {
    const BlockSpec& spec = layout_->spec(b);
    const int off = layout_->offset(b);
    for (int i = 0; i < spec.size; ++i) {
      if (!value_in_support(v_[off + i], spec, i)) return false;
    }
  }
  return true;
}

}  // namespace voi
