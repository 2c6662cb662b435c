#include "cavoid/neural.hpp"

#include <cmath>
#include <string>

#include "cavoid/errors.hpp"

namespace cavoid {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

// Eigen's double tanh is scalar; this form vectorizes through exp.
template <typename Derived>
Eigen::ArrayXXd fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  const Eigen::ArrayXXd e = (-2.0 * x.abs()).exp();
  const Eigen::ArrayXXd t = (1.0 - e) / (1.0 + e);
  return (x < 0.0).select(-t, t);
}

// Whole-batch activations. Column block t (width B) of gates/cell_tanh is
// step t; cell/hidden carry an extra leading zero block so that block t is
// the state entering step t and block t + 1 the state leaving it.
struct ForwardCache {
  MatrixXd inputs;  // D x TB
  MatrixXd gates;   // 4H x TB, activated
  MatrixXd cell;    // H x (T+1)B
  MatrixXd cell_tanh;
  MatrixXd hidden;  // H x (T+1)B

  auto last_hidden() const { return hidden.rightCols(hidden.cols() / (steps + 1)); }
  int steps = 0;
};

// Columns live at step t of a right-aligned batch.
Eigen::RowVectorXd live_mask(const SequenceBatch& batch, int t) {
  const int T = batch.steps();
  Eigen::RowVectorXd mask(batch.batch_size());
  for (int b = 0; b < batch.batch_size(); ++b) {
    mask[b] = batch.lengths[static_cast<std::size_t>(b)] >= T - t ? 1.0 : 0.0;
  }
  return mask;
}

void check_batch(const SequenceBatch& batch, const QNetworkParams& params) {
  if (batch.batch_size() == 0 || batch.steps() == 0) throw DomainError("empty sequence batch");
  if (batch.obs_dim != params.shape().obs_dim) {
    throw ConfigError("batch obs_dim " + std::to_string(batch.obs_dim) + " does not match network obs_dim " +
                      std::to_string(params.shape().obs_dim));
  }
}

void run_forward(const SequenceBatch& batch, const QNetworkParams& params, ForwardCache& c) {
  check_batch(batch, params);
  const int H = params.hidden_size();
  const int B = batch.batch_size();
  const int T = batch.steps();

  c.steps = T;
  c.inputs.resize(batch.obs_dim, T * B);
  for (int t = 0; t < T; ++t) c.inputs.middleCols(t * B, B) = batch.inputs[static_cast<std::size_t>(t)];
  c.gates.noalias() = params.w_input() * c.inputs;
  c.gates.colwise() += params.bias();
  c.cell.setZero(H, (T + 1) * B);
  c.hidden.setZero(H, (T + 1) * B);
  c.cell_tanh.resize(H, T * B);
  const auto Wh = params.w_recurrent();

  for (int t = 0; t < T; ++t) {
    auto G = c.gates.middleCols(t * B, B);
    G.noalias() += Wh * c.hidden.middleCols(t * B, B);
    G.topRows(3 * H) = sigmoid(G.topRows(3 * H).array()).matrix();
    G.bottomRows(H) = fast_tanh(G.bottomRows(H).array()).matrix();

    const auto i = G.middleRows(0, H).array();
    const auto f = G.middleRows(H, H).array();
    const auto o = G.middleRows(2 * H, H).array();
    const auto g = G.middleRows(3 * H, H).array();
    auto cell = c.cell.middleCols((t + 1) * B, B);
    auto tc = c.cell_tanh.middleCols(t * B, B);
    auto hid = c.hidden.middleCols((t + 1) * B, B);
    cell = (f * c.cell.middleCols(t * B, B).array() + i * g).matrix();
    tc = fast_tanh(cell.array()).matrix();
    hid = (o * tc.array()).matrix();

    const Eigen::RowVectorXd mask = live_mask(batch, t);
    if (mask.minCoeff() < 1.0) {
      cell.array().rowwise() *= mask.array();
      tc.array().rowwise() *= mask.array();
      hid.array().rowwise() *= mask.array();
    }
  }
}

// Training calls these with the same shapes every step; keeping the
// multi-megabyte buffers alive avoids the allocator returning and
// re-faulting them each time.
ForwardCache& forward_workspace() {
  thread_local ForwardCache c;
  return c;
}

ForwardCache& backward_workspace() {
  thread_local ForwardCache c;
  return c;
}

}  // namespace

// --- parameters -----------------------------------------------------------

QNetworkParams::QNetworkParams(NetworkShape shape) : shape_(shape) {
  if (shape.obs_dim < 1 || shape.hidden_size < 1 || shape.n_actions < 1) {
    throw ConfigError("network dimensions must be positive");
  }
  std::size_t total = 0;
  for (const auto& t : tensors()) total += t.size();
  flat_ = VectorXd::Zero(static_cast<Eigen::Index>(total));
}

std::vector<TensorInfo> QNetworkParams::tensors() const {
  const int D = shape_.obs_dim, H = shape_.hidden_size, A = shape_.n_actions;
  std::vector<TensorInfo> out{
      {"lstm.w_input", 4 * H, D, 0},
      {"lstm.w_recurrent", 4 * H, H, 0},
      {"lstm.bias", 4 * H, 1, 0},
      {"head.weight", A, H, 0},
      {"head.bias", A, 1, 0},
  };
  std::size_t off = 0;
  for (auto& t : out) {
    t.offset = off;
    off += t.size();
  }
  return out;
}

std::size_t QNetworkParams::offset_recurrent() const {
  return static_cast<std::size_t>(4 * shape_.hidden_size) * static_cast<std::size_t>(shape_.obs_dim);
}
std::size_t QNetworkParams::offset_bias() const {
  return offset_recurrent() +
         static_cast<std::size_t>(4 * shape_.hidden_size) * static_cast<std::size_t>(shape_.hidden_size);
}
std::size_t QNetworkParams::offset_head_weight() const {
  return offset_bias() + static_cast<std::size_t>(4 * shape_.hidden_size);
}
std::size_t QNetworkParams::offset_head_bias() const {
  return offset_head_weight() +
         static_cast<std::size_t>(shape_.n_actions) * static_cast<std::size_t>(shape_.hidden_size);
}

MatrixMap QNetworkParams::w_input() { return {flat_.data(), 4 * shape_.hidden_size, shape_.obs_dim}; }
MatrixMap QNetworkParams::w_recurrent() {
  return {flat_.data() + offset_recurrent(), 4 * shape_.hidden_size, shape_.hidden_size};
}
VectorMap QNetworkParams::bias() { return {flat_.data() + offset_bias(), 4 * shape_.hidden_size}; }
MatrixMap QNetworkParams::head_weight() {
  return {flat_.data() + offset_head_weight(), shape_.n_actions, shape_.hidden_size};
}
VectorMap QNetworkParams::head_bias() { return {flat_.data() + offset_head_bias(), shape_.n_actions}; }

ConstMatrixMap QNetworkParams::w_input() const { return {flat_.data(), 4 * shape_.hidden_size, shape_.obs_dim}; }
ConstMatrixMap QNetworkParams::w_recurrent() const {
  return {flat_.data() + offset_recurrent(), 4 * shape_.hidden_size, shape_.hidden_size};
}
ConstVectorMap QNetworkParams::bias() const { return {flat_.data() + offset_bias(), 4 * shape_.hidden_size}; }
ConstMatrixMap QNetworkParams::head_weight() const {
  return {flat_.data() + offset_head_weight(), shape_.n_actions, shape_.hidden_size};
}
ConstVectorMap QNetworkParams::head_bias() const {
  return {flat_.data() + offset_head_bias(), shape_.n_actions};
}

QNetworkParams QNetworkParams::initialize(NetworkShape shape, Rng& rng) {
  QNetworkParams p(shape);
  const double k_cell = 1.0 / std::sqrt(static_cast<double>(shape.obs_dim + shape.hidden_size));
  const double k_head = 1.0 / std::sqrt(static_cast<double>(shape.hidden_size));
  for (const auto& t : p.tensors()) {
    const double k = t.name.rfind("lstm.", 0) == 0 ? k_cell : k_head;
    std::uniform_real_distribution<double> u(-k, k);
    for (std::size_t j = 0; j < t.size(); ++j) p.flat_[static_cast<Eigen::Index>(t.offset + j)] = u(rng);
  }
  return p;
}

void require_same_shape(const QNetworkParams& a, const QNetworkParams& b, const char* what) {
  if (!(a.shape() == b.shape()) || a.flat().size() != b.flat().size()) {
    throw ConfigError(std::string(what) + ": parameter shapes differ");
  }
}

// --- single-sequence path ---------------------------------------------------

RecurrentState recurrent_step(const VectorXd& x, const RecurrentState& state, const QNetworkParams& params) {
  const int H = params.hidden_size();
  if (x.size() != params.shape().obs_dim || state.hidden.size() != H || state.cell.size() != H) {
    throw ConfigError("recurrent_step: input or state size does not match the network");
  }
  VectorXd z = params.w_input() * x + params.w_recurrent() * state.hidden + params.bias();
  const auto i = sigmoid(z.segment(0, H).array());
  const auto f = sigmoid(z.segment(H, H).array());
  const auto o = sigmoid(z.segment(2 * H, H).array());
  const auto g = z.segment(3 * H, H).array().tanh();
  RecurrentState next;
  next.cell = (f * state.cell.array() + i * g).matrix();
  next.hidden = (o * next.cell.array().tanh()).matrix();
  return next;
}

VectorXd q_head(const VectorXd& hidden, const QNetworkParams& params) {
  return params.head_weight() * hidden + params.head_bias();
}

QForward q_forward(const std::vector<VectorXd>& sequence, const QNetworkParams& params) {
  if (sequence.empty()) throw DomainError("q_forward needs a non-empty sequence");
  RecurrentState s = RecurrentState::zeros(params.hidden_size());
  for (const auto& x : sequence) s = recurrent_step(x, s, params);
  return {q_head(s.hidden, params), s};
}

double huber_loss(double a, double delta) {
  if (!(delta > 0.0)) throw DomainError("huber delta must be positive");
  const double abs_a = std::abs(a);
  return abs_a <= delta ? 0.5 * a * a : delta * (abs_a - 0.5 * delta);
}

double huber_grad(double a, double delta) {
  if (!(delta > 0.0)) throw DomainError("huber delta must be positive");
  if (std::abs(a) <= delta) return a;
  return a > 0.0 ? delta : -delta;
}

// --- batched path -------------------------------------------------------------

SequenceBatch SequenceBatch::pack(const std::vector<std::vector<VectorXd>>& sequences) {
  SequenceBatch batch;
  if (sequences.empty()) throw DomainError("cannot pack an empty batch");
  int T = 0;
  for (const auto& s : sequences) {
    if (s.empty()) throw DomainError("cannot pack an empty sequence");
    T = std::max(T, static_cast<int>(s.size()));
  }
  batch.obs_dim = static_cast<int>(sequences.front().front().size());
  const int B = static_cast<int>(sequences.size());
  batch.inputs.assign(static_cast<std::size_t>(T), MatrixXd::Zero(batch.obs_dim, B));
  for (int b = 0; b < B; ++b) {
    const auto& s = sequences[static_cast<std::size_t>(b)];
    const int len = static_cast<int>(s.size());
    batch.lengths.push_back(len);
    for (int k = 0; k < len; ++k) {
      if (s[static_cast<std::size_t>(k)].size() != batch.obs_dim) throw ConfigError("ragged observation sizes");
      batch.inputs[static_cast<std::size_t>(T - len + k)].col(b) = s[static_cast<std::size_t>(k)];
    }
  }
  return batch;
}

MatrixXd batch_q_forward(const SequenceBatch& batch, const QNetworkParams& params) {
  ForwardCache& cache = forward_workspace();
  run_forward(batch, params, cache);
  MatrixXd q = params.head_weight() * cache.last_hidden();
  q.colwise() += params.head_bias();
  return q;
}

LossAndGrad batch_huber_backward(const SequenceBatch& batch, const std::vector<int>& actions,
                                 const VectorXd& targets, const QNetworkParams& params, double delta) {
  ForwardCache& cache = backward_workspace();
  run_forward(batch, params, cache);
  const int H = params.hidden_size();
  const int B = batch.batch_size();
  const int T = batch.steps();
  const int A = params.shape().n_actions;
  if (static_cast<int>(actions.size()) != B || targets.size() != B) {
    throw ConfigError("actions/targets do not match batch size");
  }

  LossAndGrad out;
  out.grad = Gradients(params.shape());
  out.selected_q.resize(B);
  auto dWq = out.grad.head_weight();
  auto dbq = out.grad.head_bias();
  const auto Wq = params.head_weight();
  const MatrixXd h_last = cache.last_hidden();

  MatrixXd dH(H, B);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    const int a = actions[static_cast<std::size_t>(b)];
    if (a < 0 || a >= A) throw DomainError("action index out of range in batch");
    const double q = Wq.row(a).dot(h_last.col(b)) + params.head_bias()[a];
    out.selected_q[b] = q;
    const double err = q - targets[b];
    loss += huber_loss(err, delta);
    const double g = huber_grad(err, delta) / B;
    dWq.row(a) += g * h_last.col(b).transpose();
    dbq[a] += g;
    dH.col(b) = g * Wq.row(a).transpose();
  }
  out.loss = loss / B;

  const auto Wh = params.w_recurrent();

  MatrixXd dC = MatrixXd::Zero(H, B);
  thread_local MatrixXd dZ_all;
  dZ_all.resize(4 * H, T * B);
  MatrixXd dZt(B, 4 * H);
  MatrixXd dHt(B, H);
  for (int t = T - 1; t >= 0; --t) {
    const auto G = cache.gates.middleCols(t * B, B);
    const auto c_prev = cache.cell.middleCols(t * B, B).array();
    const auto i = G.middleRows(0, H).array();
    const auto f = G.middleRows(H, H).array();
    const auto o = G.middleRows(2 * H, H).array();
    const auto g = G.middleRows(3 * H, H).array();
    const auto tc = cache.cell_tanh.middleCols(t * B, B).array();
    auto dZ = dZ_all.middleCols(t * B, B);

    dC.array() += dH.array() * o * (1.0 - tc * tc);
    dZ.middleRows(0, H) = (dC.array() * g * i * (1.0 - i)).matrix();
    dZ.middleRows(H, H) = (dC.array() * c_prev * f * (1.0 - f)).matrix();
    dZ.middleRows(2 * H, H) = (dH.array() * tc * o * (1.0 - o)).matrix();
    dZ.middleRows(3 * H, H) = (dC.array() * i * (1.0 - g * g)).matrix();

    const Eigen::RowVectorXd mask = live_mask(batch, t);
    if (mask.minCoeff() < 1.0) dZ.array().rowwise() *= mask.array();

    if (t > 0) {
      // Batch-major product: a deep 4H inner dimension with a short H
      // output blocks poorly in the column-major form.
      dZt = dZ.transpose();
      dHt.noalias() = dZt * Wh;
      dH = dHt.transpose();
      dC.array() *= f;
    }
  }
  out.grad.w_input().noalias() = dZ_all * cache.inputs.transpose();
  out.grad.w_recurrent().noalias() = dZ_all * cache.hidden.leftCols(T * B).transpose();
  out.grad.bias() = dZ_all.rowwise().sum();
  return out;
}

Gradients backward(const std::vector<VectorXd>& sequence, int action, double td_target,
                   const QNetworkParams& params, double delta) {
  if (sequence.empty()) throw DomainError("backward needs a non-empty sequence");
  const SequenceBatch batch = SequenceBatch::pack({sequence});
  VectorXd target(1);
  target[0] = td_target;
  return batch_huber_backward(batch, {action}, target, params, delta).grad;
}

void adam_step(QNetworkParams& params, const Gradients& grad, OptimizerState& state, const AdamConfig& cfg) {
  require_same_shape(params, grad, "adam_step");
  const auto n = params.flat().size();
  if (state.m.size() != n || state.v.size() != n) throw ConfigError("adam_step: optimizer state shape mismatch");

  state.step += 1;
  const VectorXd& g = grad.flat();
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.flat().array() -=
      cfg.learning_rate * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace cavoid
