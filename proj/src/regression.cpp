#include "voi/regression.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "voi/errors.hpp"
#include "voi/special_functions.hpp"

namespace voi {

double adadelta_step_scalar(double grad, double& acc_grad_sq, double& acc_delta_sq,
                            const AdadeltaConfig& config) {
  acc_grad_sq = config.rho * acc_grad_sq + (1.0 - config.rho) * grad * grad;
  const double delta = -std::sqrt(acc_delta_sq + config.epsilon) /
                       std::sqrt(acc_grad_sq + config.epsilon) * grad;
  acc_delta_sq = config.rho * acc_delta_sq + (1.0 - config.rho) * delta * delta;
  return delta;
}

void adadelta_update(const Eigen::ArrayXXd& grad, Eigen::ArrayXXd& acc_grad_sq,
                     Eigen::ArrayXXd& acc_delta_sq, Eigen::ArrayXXd& params,
                     const AdadeltaConfig& config) {
  acc_grad_sq = config.rho * acc_grad_sq + (1.0 - config.rho) * grad.square();
  const Eigen::ArrayXXd delta =
      -grad * ((acc_delta_sq + config.epsilon).sqrt() / (acc_grad_sq + config.epsilon).sqrt());
  acc_delta_sq = config.rho * acc_delta_sq + (1.0 - config.rho) * delta.square();
  params += delta;
}

void MlpSpec::validate() const {
  if (hidden_nodes.empty() || hidden_nodes.size() > 3) {
    throw_error(ErrorKind::Config, "MLP: hidden layer count must be between 1 and 3");
  }
  for (int nodes : hidden_nodes) {
    if (nodes < 1) throw_error(ErrorKind::Config, "MLP: layer widths must be positive");
  }
  if (!(dropout >= 0.0) || dropout >= 1.0) {
    throw_error(ErrorKind::Config, "MLP: dropout rate must lie in [0, 1)");
  }
  if (epochs < 1) throw_error(ErrorKind::Config, "MLP: epochs must be positive");
  if (batch_size < 1) throw_error(ErrorKind::Config, "MLP: batch size must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw_error(ErrorKind::Config, "MLP: validation fraction must lie in [0, 1)");
  }
}

std::string MlpSpec::describe() const {
  std::string s = "mlp L" + std::to_string(hidden_nodes.size()) + "(";
  for (std::size_t i = 0; i < hidden_nodes.size(); ++i) {
    s += (i ? "x" : "") + std::to_string(hidden_nodes[i]);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), ") d%.2f", dropout);
  s += buf;
  if (output_activation == OutputActivation::LogitInverse) s += " logit";
  return s;
}

namespace {

struct Network {
  std::vector<Eigen::MatrixXd> W;  // (in x out) per layer, output last
  std::vector<Eigen::VectorXd> b;

  int layer_count() const { return static_cast<int>(W.size()); }
};

std::vector<int> layer_sizes(int input_dim, const std::vector<int>& hidden_nodes) {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden_nodes.begin(), hidden_nodes.end());
  sizes.push_back(1);
  return sizes;
}

Network init_network(int input_dim, const std::vector<int>& hidden_nodes, RngStream& rng) {
  const std::vector<int> sizes = layer_sizes(input_dim, hidden_nodes);
  Network net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd W(fan_in, fan_out);
    for (int j = 0; j < fan_out; ++j) {
      for (int i = 0; i < fan_in; ++i) {
        W(i, j) = rng.uniform(-bound, bound);
      }
    }
    net.W.push_back(std::move(W));
    net.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::MatrixXd apply_sigmoid(Eigen::MatrixXd m) {
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i) {
      m(i, j) = sigmoid(m(i, j));
    }
  }
  return m;
}

// Forward pass with optional dropout masks (training only). Masks carry the
// inverted-dropout scale 1/(1-rate), so inference needs no rescaling.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> hidden;  // post-activation (and post-mask) per hidden layer
  Eigen::VectorXd output;               // post output-activation
};

ForwardTrace forward(const Network& net, const Eigen::MatrixXd& X, OutputActivation activation,
                     const std::vector<Eigen::MatrixXd>* masks) {
  ForwardTrace trace;
  Eigen::MatrixXd h = X;
  const int layers = net.layer_count();
  for (int l = 0; l + 1 < layers; ++l) {
    Eigen::MatrixXd pre = (h * net.W[l]).rowwise() + net.b[l].transpose();
    h = apply_sigmoid(std::move(pre));
    if (masks) h.array() *= (*masks)[static_cast<std::size_t>(l)].array();
    trace.hidden.push_back(h);
  }
  Eigen::VectorXd out = (h * net.W[layers - 1]).col(0) + Eigen::VectorXd::Constant(
                                                             h.rows(), net.b[layers - 1][0]);
  if (activation == OutputActivation::LogitInverse) {
    for (int i = 0; i < out.size(); ++i) out[i] = sigmoid(out[i]);
  }
  trace.output = std::move(out);
  return trace;
}

double mean_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& y, const LossSpec& loss) {
  if (loss.kind == LossSpec::Kind::Quadratic) {
    return (pred - y).squaredNorm() / static_cast<double>(pred.size());
  }
  double acc = 0.0;
  Eigen::VectorXd a(1), t(1);
  for (int i = 0; i < pred.size(); ++i) {
    a[0] = pred[i];
    t[0] = y[i];
    acc += loss(a, t);
  }
  return acc / static_cast<double>(pred.size());
}

// dL/d(output) averaged over the batch, including the output-activation
// derivative. Returns d(mean loss)/d(pre-activation of output).
Eigen::VectorXd output_delta(const Eigen::VectorXd& pred, const Eigen::VectorXd& y,
                             const LossSpec& loss, OutputActivation activation) {
  const int n = static_cast<int>(pred.size());
  Eigen::VectorXd delta(n);
  if (loss.kind == LossSpec::Kind::Quadratic) {
    delta = 2.0 * (pred - y);
  } else {
    Eigen::VectorXd a(1), t(1);
    for (int i = 0; i < n; ++i) {
      a[0] = pred[i];
      t[0] = y[i];
      delta[i] = loss.gradient(a, t)[0];
    }
  }
  if (activation == OutputActivation::LogitInverse) {
    delta.array() *= pred.array() * (1.0 - pred.array());
  }
  return delta / static_cast<double>(n);
}

struct Gradients {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
};

Gradients backprop(const Network& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   OutputActivation activation, const LossSpec& loss,
                   const std::vector<Eigen::MatrixXd>* masks, const ForwardTrace& trace) {
  const int layers = net.layer_count();
  Gradients grads;
  grads.W.resize(static_cast<std::size_t>(layers));
  grads.b.resize(static_cast<std::size_t>(layers));

  Eigen::MatrixXd delta = output_delta(trace.output, y, loss, activation);
  const Eigen::MatrixXd& last_hidden = trace.hidden.back();
  grads.W[static_cast<std::size_t>(layers - 1)] = last_hidden.transpose() * delta;
  grads.b[static_cast<std::size_t>(layers - 1)] = delta.colwise().sum().transpose();

  for (int l = layers - 2; l >= 0; --l) {
    Eigen::MatrixXd upstream = delta * net.W[static_cast<std::size_t>(l + 1)].transpose();
    const Eigen::MatrixXd& masked_h = trace.hidden[static_cast<std::size_t>(l)];
    if (masks) {
      const Eigen::MatrixXd& mask = (*masks)[static_cast<std::size_t>(l)];
      // gradient flows through the mask; recover the pre-mask activation
      // derivative h(1-h) where kept, zero where dropped
      Eigen::ArrayXXd kept = (mask.array() > 0.0).cast<double>();
      Eigen::ArrayXXd h = masked_h.array() / mask.array().max(1e-300);
      upstream.array() *= mask.array() * kept * h * (1.0 - h);
    } else {
      upstream.array() *= masked_h.array() * (1.0 - masked_h.array());
    }
    const Eigen::MatrixXd& below =
        l == 0 ? X : trace.hidden[static_cast<std::size_t>(l - 1)];
    grads.W[static_cast<std::size_t>(l)] = below.transpose() * upstream;
    grads.b[static_cast<std::size_t>(l)] = upstream.colwise().sum().transpose();
    delta = std::move(upstream);
  }
  return grads;
}

}  // namespace

int mlp_param_count(int input_dim, const std::vector<int>& hidden_nodes) {
  const std::vector<int> sizes = layer_sizes(input_dim, hidden_nodes);
  int count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  }
  return count;
}

namespace {

Network unflatten(const Eigen::VectorXd& flat, int input_dim,
                  const std::vector<int>& hidden_nodes) {
  const std::vector<int> sizes = layer_sizes(input_dim, hidden_nodes);
  Network net;
  int pos = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Eigen::MatrixXd W(sizes[l], sizes[l + 1]);
    for (int j = 0; j < W.cols(); ++j) {
      for (int i = 0; i < W.rows(); ++i) W(i, j) = flat[pos++];
    }
    Eigen::VectorXd b(sizes[l + 1]);
    for (int i = 0; i < b.size(); ++i) b[i] = flat[pos++];
    net.W.push_back(std::move(W));
    net.b.push_back(std::move(b));
  }
  return net;
}

Eigen::VectorXd flatten_grads(const Gradients& grads) {
  int total = 0;
  for (std::size_t l = 0; l < grads.W.size(); ++l) {
    total += static_cast<int>(grads.W[l].size() + grads.b[l].size());
  }
  Eigen::VectorXd flat(total);
  int pos = 0;
  for (std::size_t l = 0; l < grads.W.size(); ++l) {
    for (int j = 0; j < grads.W[l].cols(); ++j) {
      for (int i = 0; i < grads.W[l].rows(); ++i) flat[pos++] = grads.W[l](i, j);
    }
    for (int i = 0; i < grads.b[l].size(); ++i) flat[pos++] = grads.b[l][i];
  }
  return flat;
}

}  // namespace

double mlp_loss_flat(const Eigen::VectorXd& flat_params, const std::vector<int>& hidden_nodes,
                     OutputActivation activation, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const LossSpec& loss) {
  const Network net = unflatten(flat_params, static_cast<int>(X.cols()), hidden_nodes);
  const ForwardTrace trace = forward(net, X, activation, nullptr);
  return mean_loss(trace.output, y, loss);
}

Eigen::VectorXd mlp_grad_flat(const Eigen::VectorXd& flat_params,
                              const std::vector<int>& hidden_nodes, OutputActivation activation,
                              const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const LossSpec& loss) {
  const Network net = unflatten(flat_params, static_cast<int>(X.cols()), hidden_nodes);
  const ForwardTrace trace = forward(net, X, activation, nullptr);
  const Gradients grads = backprop(net, X, y, activation, loss, nullptr, trace);
  return flatten_grads(grads);
}

FittedRegressor fit_linear(const DesignMatrix& train, const Eigen::VectorXd& response) {
  if (train.row_count() != response.size()) {
    throw_error(ErrorKind::Usage, "linear fit: row/response count mismatch");
  }
  if (train.row_count() < 1) throw_error(ErrorKind::Usage, "linear fit: no rows");
  Eigen::MatrixXd A(train.row_count(), train.col_count() + 1);
  A.col(0).setOnes();
  A.rightCols(train.col_count()) = train.rows();
  // Complete orthogonal decomposition: least squares with the minimal-norm
  // solution on rank-deficient designs.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  FittedRegressor model;
  model.kind = FittedRegressor::Kind::Linear;
  model.description = "linear";
  model.columns = train.columns();
  model.column_mean = train.column_mean();
  model.column_scale = train.column_scale();
  model.linear_weights = cod.solve(response);
  return model;
}

FittedRegressor fit_mlp(const DesignMatrix& train, const Eigen::VectorXd& response,
                        const MlpSpec& spec, const LossSpec& loss) {
  spec.validate();
  const int n = train.row_count();
  if (n != response.size()) throw_error(ErrorKind::Usage, "MLP fit: row/response count mismatch");
  if (n < spec.batch_size) {
    throw_error(ErrorKind::Usage, "MLP fit: training rows must be >= batch size");
  }
  const bool standardize_response =
      loss.kind == LossSpec::Kind::Quadratic &&
      spec.output_activation == OutputActivation::Identity;
  double resp_mean = 0.0, resp_scale = 1.0;
  Eigen::VectorXd y = response;
  if (standardize_response) {
    resp_mean = y.mean();
    const double var = (y.array() - resp_mean).square().sum() / std::max(1, n);
    resp_scale = var > 0.0 ? std::sqrt(var) : 1.0;
    y = (y.array() - resp_mean) / resp_scale;
  }
  if (spec.output_activation == OutputActivation::LogitInverse) {
    for (int i = 0; i < y.size(); ++i) {
      if (!(y[i] > 0.0) || !(y[i] < 1.0)) {
        throw_error(ErrorKind::Config, "logit-inverse output needs responses in (0, 1)");
      }
    }
  }

  RngStream rng(spec.seed);
  const int input_dim = train.col_count();
  Network net = init_network(input_dim, spec.hidden_nodes, rng);

  // validation carve-out from a seeded shuffle of the training rows
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  }
  const int n_val = static_cast<int>(std::floor(spec.validation_fraction * n));
  std::vector<int> val_rows(order.begin(), order.begin() + n_val);
  std::vector<int> core_rows(order.begin() + n_val, order.end());
  const int n_core = static_cast<int>(core_rows.size());

  Eigen::MatrixXd X_core(n_core, input_dim);
  Eigen::VectorXd y_core(n_core);
  for (int i = 0; i < n_core; ++i) {
    X_core.row(i) = train.rows().row(core_rows[static_cast<std::size_t>(i)]);
    y_core[i] = y[core_rows[static_cast<std::size_t>(i)]];
  }
  Eigen::MatrixXd X_val(n_val, input_dim);
  Eigen::VectorXd y_val(n_val);
  for (int i = 0; i < n_val; ++i) {
    X_val.row(i) = train.rows().row(val_rows[static_cast<std::size_t>(i)]);
    y_val[i] = y[val_rows[static_cast<std::size_t>(i)]];
  }

  // Adadelta accumulators per parameter tensor
  std::vector<Eigen::ArrayXXd> acc_gW, acc_dW, acc_gb, acc_db;
  for (int l = 0; l < net.layer_count(); ++l) {
    acc_gW.emplace_back(Eigen::ArrayXXd::Zero(net.W[l].rows(), net.W[l].cols()));
    acc_dW.emplace_back(Eigen::ArrayXXd::Zero(net.W[l].rows(), net.W[l].cols()));
    acc_gb.emplace_back(Eigen::ArrayXXd::Zero(net.b[l].size(), 1));
    acc_db.emplace_back(Eigen::ArrayXXd::Zero(net.b[l].size(), 1));
  }

  std::vector<double> trace_values;
  trace_values.reserve(static_cast<std::size_t>(spec.epochs));
  double best_val = std::numeric_limits<double>::infinity();
  int flat_epochs = 0;
  Network best_net = net;
  const int batch = std::min(spec.batch_size, n_core);

  std::vector<int> epoch_order(core_rows.size());
  std::iota(epoch_order.begin(), epoch_order.end(), 0);

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    for (int i = n_core - 1; i > 0; --i) {
      std::swap(epoch_order[static_cast<std::size_t>(i)],
                epoch_order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n_core; start += batch) {
      const int size = std::min(batch, n_core - start);
      Eigen::MatrixXd Xb(size, input_dim);
      Eigen::VectorXd yb(size);
      for (int i = 0; i < size; ++i) {
        const int r = epoch_order[static_cast<std::size_t>(start + i)];
        Xb.row(i) = X_core.row(r);
        yb[i] = y_core[r];
      }
      std::vector<Eigen::MatrixXd> masks;
      std::vector<Eigen::MatrixXd>* mask_ptr = nullptr;
      if (spec.dropout > 0.0) {
        const double keep = 1.0 - spec.dropout;
        for (int nodes : spec.hidden_nodes) {
          Eigen::MatrixXd mask(size, nodes);
          for (int jj = 0; jj < nodes; ++jj) {
            for (int ii = 0; ii < size; ++ii) {
              mask(ii, jj) = rng.uniform() < keep ? 1.0 / keep : 0.0;
            }
          }
          masks.push_back(std::move(mask));
        }
        mask_ptr = &masks;
      }
      const ForwardTrace trace = forward(net, Xb, spec.output_activation, mask_ptr);
      epoch_loss += mean_loss(trace.output, yb, loss);
      batches += 1;
      const Gradients grads = backprop(net, Xb, yb, spec.output_activation, loss, mask_ptr, trace);
      for (int l = 0; l < net.layer_count(); ++l) {
        Eigen::ArrayXXd pW = net.W[l].array();
        adadelta_update(grads.W[l].array(), acc_gW[l], acc_dW[l], pW, spec.adadelta);
        net.W[l] = pW.matrix();
        Eigen::ArrayXXd pb = net.b[l].array();
        adadelta_update(grads.b[l].array(), acc_gb[l], acc_db[l], pb, spec.adadelta);
        net.b[l] = pb.matrix();
      }
    }
    epoch_loss /= std::max(1, batches);
    trace_values.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss)) {
      throw_error(ErrorKind::Divergence,
                  "MLP training diverged at epoch " + std::to_string(epoch) + " (" +
                      spec.describe() + "); trace length " + std::to_string(trace_values.size()));
    }
    if (n_val > 0) {
      const ForwardTrace vt = forward(net, X_val, spec.output_activation, nullptr);
      const double val_loss = mean_loss(vt.output, y_val, loss);
      if (val_loss < best_val - 1e-12) {
        best_val = val_loss;
        best_net = net;
        flat_epochs = 0;
      } else {
        flat_epochs += 1;
        if (flat_epochs >= spec.patience) break;
      }
    }
  }
  if (n_val > 0) net = best_net;

  FittedRegressor model;
  model.kind = FittedRegressor::Kind::Mlp;
  model.description = spec.describe();
  model.columns = train.columns();
  model.column_mean = train.column_mean();
  model.column_scale = train.column_scale();
  model.weights = std::move(net.W);
  model.biases = std::move(net.b);
  model.output_activation = spec.output_activation;
  model.response_mean = resp_mean;
  model.response_scale = resp_scale;
  model.loss_trace = std::move(trace_values);
  return model;
}

Eigen::VectorXd predict(const FittedRegressor& model, const Eigen::MatrixXd& raw_rows) {
  if (raw_rows.cols() != model.column_mean.size()) {
    throw_error(ErrorKind::Usage, "predict: row width does not match training schema");
  }
  Eigen::MatrixXd X = raw_rows;
  X.rowwise() -= model.column_mean.transpose();
  X.array().rowwise() /= model.column_scale.transpose().array();

  if (model.kind == FittedRegressor::Kind::Linear) {
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(X.rows(), model.linear_weights[0]);
    pred += X * model.linear_weights.tail(model.linear_weights.size() - 1);
    return pred;
  }
  Network net;
  net.W = model.weights;
  net.b = model.biases;
  const ForwardTrace trace = forward(net, X, model.output_activation, nullptr);
  if (model.output_activation == OutputActivation::Identity) {
    return (model.response_mean + model.response_scale * trace.output.array()).matrix();
  }
  return trace.output;
}

Eigen::VectorXd predict_checked(const FittedRegressor& model, const Eigen::MatrixXd& raw_rows,
                                const std::vector<std::string>& columns) {
  if (columns != model.columns) {
    throw_error(ErrorKind::Usage, "predict: column schema does not match training schema");
  }
  return predict(model, raw_rows);
}

SelectionResult select_regressor(const std::vector<FittedRegressor>& candidates,
                                 const Eigen::MatrixXd& test_raw_rows,
                                 const Eigen::VectorXd& test_response, const LossSpec& loss) {
  if (candidates.empty()) throw_error(ErrorKind::Usage, "select_regressor: no candidates");
  if (test_raw_rows.rows() == 0) throw_error(ErrorKind::Usage, "select_regressor: empty test set");
  SelectionResult result;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Eigen::VectorXd pred = predict(candidates[c], test_raw_rows);
    const double score = mean_loss(pred, test_response, loss);
    result.scores.push_back({candidates[c].description, score, false});
    if (score < best) {
      best = score;
      result.best_index = static_cast<int>(c);
    }
  }
  result.scores[static_cast<std::size_t>(result.best_index)].selected = true;
  return result;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<long>(j.size());
  const auto cols = rows > 0 ? static_cast<long>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long jj = 0; jj < cols; ++jj) m(i, jj) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)];
  }
  return m;
}

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd vec_from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

void save_regressor(const FittedRegressor& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format_version"] = "voikit-regressor-1";
  j["kind"] = model.kind == FittedRegressor::Kind::Linear ? "linear" : "mlp";
  j["description"] = model.description;
  j["columns"] = model.columns;
  j["column_mean"] = vec_to_std(model.column_mean);
  j["column_scale"] = vec_to_std(model.column_scale);
  j["response_mean"] = model.response_mean;
  j["response_scale"] = model.response_scale;
  j["output_activation"] =
      model.output_activation == OutputActivation::Identity ? "identity" : "logit-inverse";
  if (model.kind == FittedRegressor::Kind::Linear) {
    j["linear_weights"] = vec_to_std(model.linear_weights);
  } else {
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      nlohmann::ordered_json layer;
      layer["W"] = matrix_to_json(model.weights[l]);
      layer["b"] = vec_to_std(model.biases[l]);
      layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
  }
  j["loss_trace"] = model.loss_trace;
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

FittedRegressor load_regressor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorKind::Io, "bad regressor file " + path + ": " + e.what());
  }
  if (j.value("format_version", "") != "voikit-regressor-1") {
    throw_error(ErrorKind::Io, "unsupported regressor format in " + path);
  }
  FittedRegressor model;
  model.kind = j.at("kind") == "linear" ? FittedRegressor::Kind::Linear
                                        : FittedRegressor::Kind::Mlp;
  model.description = j.at("description");
  model.columns = j.at("columns").get<std::vector<std::string>>();
  model.column_mean = vec_from_std(j.at("column_mean").get<std::vector<double>>());
  model.column_scale = vec_from_std(j.at("column_scale").get<std::vector<double>>());
  model.response_mean = j.at("response_mean");
  model.response_scale = j.at("response_scale");
  model.output_activation = j.at("output_activation") == "identity"
                                ? OutputActivation::Identity
                                : OutputActivation::LogitInverse;
  if (model.kind == FittedRegressor::Kind::Linear) {
    model.linear_weights = vec_from_std(j.at("linear_weights").get<std::vector<double>>());
  } else {
    for (const auto& layer : j.at("layers")) {
      model.weights.push_back(matrix_from_json(layer.at("W")));
      model.biases.push_back(vec_from_std(layer.at("b").get<std::vector<double>>()));
    }
  }
  model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  return model;
}

}  // namespace voi
