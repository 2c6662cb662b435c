#pragma once

// Recurrent Q-network: one LSTM layer followed by a dense head with one
// output per action. All parameters live in a single flat vector so that
// optimizer, soft-update and checkpoint code can treat them uniformly;
// per-tensor views are row-major maps into it.

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "cavoid/random.hpp"

namespace cavoid {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

struct NetworkShape {
  int obs_dim = 0;
  int hidden_size = 0;
  int n_actions = 0;
  bool operator==(const NetworkShape&) const = default;
};

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Gate rows are stacked as [input, forget, output, candidate].
class QNetworkParams {
 public:
  QNetworkParams() = default;
  /// All-zero parameters of the given shape.
  explicit QNetworkParams(NetworkShape shape);

  /// Uniform in +-1/sqrt(fan_in): fan_in = obs_dim + hidden_size for the
  /// recurrent cell and hidden_size for the head.
  static QNetworkParams initialize(NetworkShape shape, Rng& rng);

  const NetworkShape& shape() const { return shape_; }
  int hidden_size() const { return shape_.hidden_size; }
  std::vector<TensorInfo> tensors() const;

  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  MatrixMap w_input();      ///< 4H x D
  MatrixMap w_recurrent();  ///< 4H x H
  VectorMap bias();         ///< 4H
  MatrixMap head_weight();  ///< A x H
  VectorMap head_bias();    ///< A
  ConstMatrixMap w_input() const;
  ConstMatrixMap w_recurrent() const;
  ConstVectorMap bias() const;
  ConstMatrixMap head_weight() const;
  ConstVectorMap head_bias() const;

  void set_zero() { flat_.setZero(); }
  bool all_finite() const { return flat_.allFinite(); }

  bool operator==(const QNetworkParams& o) const { return shape_ == o.shape_ && flat_ == o.flat_; }

 private:
  std::size_t offset_recurrent() const;
  std::size_t offset_bias() const;
  std::size_t offset_head_weight() const;
  std::size_t offset_head_bias() const;

  NetworkShape shape_;
  Eigen::VectorXd flat_;
};

/// Gradients share the parameter layout.
using Gradients = QNetworkParams;

/// Throws ConfigError unless a and b have the same shape.
void require_same_shape(const QNetworkParams& a, const QNetworkParams& b, const char* what);

struct RecurrentState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;

  static RecurrentState zeros(int hidden_size) {
    return {Eigen::VectorXd::Zero(hidden_size), Eigen::VectorXd::Zero(hidden_size)};
  }
};

RecurrentState recurrent_step(const Eigen::VectorXd& x, const RecurrentState& state, const QNetworkParams& params);

Eigen::VectorXd q_head(const Eigen::VectorXd& hidden, const QNetworkParams& params);

struct QForward {
  Eigen::VectorXd q_values;
  RecurrentState final_state;
};

/// Folds recurrent_step over the sequence from a zero state and applies the
/// head to the final hidden vector. Throws DomainError on an empty sequence.
QForward q_forward(const std::vector<Eigen::VectorXd>& sequence, const QNetworkParams& params);

double huber_loss(double a, double delta);
/// d/da of huber_loss.
double huber_grad(double a, double delta);

// Variable-length sequences packed right-aligned into T time-major slices:
// column b is live for t >= T - lengths[b]. Before that its inputs are
// ignored and its recurrent state is held at zero.
struct SequenceBatch {
  int obs_dim = 0;
  std::vector<int> lengths;
  std::vector<Eigen::MatrixXd> inputs;  ///< T entries of obs_dim x B

  int batch_size() const { return static_cast<int>(lengths.size()); }
  int steps() const { return static_cast<int>(inputs.size()); }

  static SequenceBatch pack(const std::vector<std::vector<Eigen::VectorXd>>& sequences);
};

/// Q-values (A x B) after the last step of each sequence.
Eigen::MatrixXd batch_q_forward(const SequenceBatch& batch, const QNetworkParams& params);

struct LossAndGrad {
  double loss = 0.0;                 ///< mean Huber loss over the batch
  Eigen::VectorXd selected_q;        ///< Q(history_b, action_b)
  Gradients grad;                    ///< d loss / d params
};

/// Mean over b of huber(Q(seq_b)[actions[b]] - targets[b]) and its gradient
/// by backpropagation through time.
LossAndGrad batch_huber_backward(const SequenceBatch& batch, const std::vector<int>& actions,
                                 const Eigen::VectorXd& targets, const QNetworkParams& params, double delta);

/// Single-sequence gradient of huber(Q(seq)[action] - td_target).
Gradients backward(const std::vector<Eigen::VectorXd>& sequence, int action, double td_target,
                   const QNetworkParams& params, double delta = 1.0);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static OptimizerState zeros_like(const QNetworkParams& params) {
    const auto n = params.flat().size();
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

void adam_step(QNetworkParams& params, const Gradients& grad, OptimizerState& state, const AdamConfig& cfg);

}  // namespace cavoid
