#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "voi/state.hpp"

namespace voi {

// The functional of parameters being estimated. Evaluation is deterministic;
// vector targets keep a fixed component order. `target_blocks` names the
// blocks the target depends on; every other block is nuisance relative to
// this target, so one fitted chain can serve many targets.
struct TargetSpec {
  std::string name;
  std::vector<std::string> components;     // one label per output component
  std::vector<std::string> target_blocks;  // blocks the evaluation reads
  std::function<Eigen::VectorXd(const ParameterState&)> evaluate;

  int arity() const { return static_cast<int>(components.size()); }

  // Scalar target reading one size-1 block verbatim.
  static TargetSpec scalar_block(const std::string& block_name);
};

// Checks the target's blocks exist in the state, then evaluates.
Eigen::VectorXd eval_target(const ParameterState& state, const TargetSpec& target);

}  // namespace voi
