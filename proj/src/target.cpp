#include "voi/target.hpp"

#include "voi/errors.hpp"

namespace voi {

TargetSpec TargetSpec::scalar_block(const std::string& block_name) {
  TargetSpec t;
  t.name = block_name;
  t.components = {block_name};
  t.target_blocks = {block_name};
  t.evaluate = [block_name](const ParameterState& state) {
    Eigen::VectorXd out(1);
    out[0] = state.scalar(block_name);
    return out;
  };
  return t;
}

Eigen::VectorXd eval_target(const ParameterState& state, const TargetSpec& target) {
  for (const std::string& block : target.target_blocks) {
    if (!state.layout().has(block)) {
      throw_error(ErrorKind::Schema,
                  "target '" + target.name + "' needs missing block '" + block + "'");
    }
  }
  Eigen::VectorXd value = target.evaluate(state);
  if (value.size() != target.arity()) {
    throw_error(ErrorKind::Schema, "target '" + target.name + "' produced " +
                                       std::to_string(value.size()) + " components, declared " +
                                       std::to_string(target.arity()));
  }
  return value;
}

}  // namespace voi
