#pragma once

// Two-layer LSTM with a dense head (linear/MSE, block softmax/cross-entropy or
// single sigmoid unit/binary cross-entropy), trained with Adam.
//
// All parameters live in one flat vector so the optimizer, gradient checking
// and checkpoints work on a single buffer. Layout per layer: W (4H x in),
// U (4H x H), b (4H); then the head Wy (out x H2), by (out). Gate rows are
// ordered input, forget, candidate, output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <future>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kcnlp/error.hpp"
#include "kcnlp/io.hpp"

namespace kcnlp {

enum class HeadKind { Numeric, Categorical, Binary };

inline std::string_view to_string(HeadKind h) {
  switch (h) {
    case HeadKind::Numeric: return "numeric";
    case HeadKind::Categorical: return "categorical";
    case HeadKind::Binary: return "binary";
  }
  return "?";
}

inline HeadKind parse_head(std::string_view s) {
  if (s == "numeric") return HeadKind::Numeric;
  if (s == "categorical") return HeadKind::Categorical;
  if (s == "binary") return HeadKind::Binary;
  throw DataError("unknown head kind '" + std::string(s) + "'");
}

struct NetShape {
  int input_dim = 1;
  std::array<int, 2> hidden{32, 32};
  int output_dim = 1;
  HeadKind head = HeadKind::Numeric;
  std::vector<int> blocks;  // softmax block sizes (categorical head only)

  void validate() const {
    if (input_dim < 1 || hidden[0] < 1 || hidden[1] < 1 || output_dim < 1) throw UsageError("network dims must be >= 1");
    if (head == HeadKind::Binary && output_dim != 1) throw UsageError("binary head has exactly one output");
    if (head == HeadKind::Categorical) {
      if (blocks.empty() || std::accumulate(blocks.begin(), blocks.end(), 0) != output_dim)
        throw UsageError("categorical blocks must partition the output");
      for (int b : blocks)
        if (b < 1) throw UsageError("categorical blocks must be non-empty");
    }
  }

  int layer_input(int l) const { return l == 0 ? input_dim : hidden[0]; }

  std::size_t layer_size(int l) const {
    const std::size_t H = static_cast<std::size_t>(hidden[static_cast<std::size_t>(l)]);
    const std::size_t in = static_cast<std::size_t>(layer_input(l));
    return 4 * H * in + 4 * H * H + 4 * H;
  }

  std::size_t parameter_count() const {
    return layer_size(0) + layer_size(1) + static_cast<std::size_t>(output_dim) * (static_cast<std::size_t>(hidden[1]) + 1);
  }
};

/// One batch of sequences: entry t is the (dim x batch) matrix of step t.
using SeqBatch = std::vector<Eigen::MatrixXd>;

/// Packs per-instance sequences (instance -> step -> values) into a SeqBatch.
inline SeqBatch pack_sequences(const std::vector<std::vector<std::vector<double>>>& seqs) {
  if (seqs.empty() || seqs.front().empty()) throw UsageError("empty sequence batch");
  const auto T = seqs.front().size(), D = seqs.front().front().size();
  SeqBatch out(T, Eigen::MatrixXd(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(seqs.size())));
  for (std::size_t n = 0; n < seqs.size(); ++n) {
    if (seqs[n].size() != T) throw UsageError("sequences differ in length");
    for (std::size_t t = 0; t < T; ++t) {
      if (seqs[n][t].size() != D) throw UsageError("sequence vectors differ in dimension");
      for (std::size_t d = 0; d < D; ++d)
        out[t](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) = seqs[n][t][d];
    }
  }
  return out;
}

class LstmParams {
 public:
  using MatMap = Eigen::Map<Eigen::MatrixXd>;
  using CMatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<Eigen::VectorXd>;
  using CVecMap = Eigen::Map<const Eigen::VectorXd>;

  LstmParams() = default;
  explicit LstmParams(NetShape shape) : shape_(std::move(shape)) {
    shape_.validate();
    flat_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_.parameter_count()));
  }

  /// Uniform in +-1/sqrt(fan_in) per matrix, forget-gate bias 1, other biases 0.
  static LstmParams initialize(const NetShape& shape, std::uint64_t seed) {
    LstmParams p(shape);
    p.seed_ = seed;
    std::mt19937_64 rng(seed);
    auto fill = [&](auto&& m, double fan_in) {
      std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
    };
    for (int l = 0; l < 2; ++l) {
      fill(p.W(l), p.shape_.layer_input(l));
      fill(p.U(l), p.hidden(l));
      auto b = p.b(l);
      b.setZero();
      b.segment(p.hidden(l), p.hidden(l)).setConstant(1.0);
    }
    fill(p.Wy(), p.hidden(1));
    p.by().setZero();
    return p;
  }

  const NetShape& shape() const { return shape_; }
  int hidden(int l) const { return shape_.hidden[static_cast<std::size_t>(l)]; }
  Eigen::VectorXd& flat() { return flat_; }
  const Eigen::VectorXd& flat() const { return flat_; }

  std::uint64_t seed() const { return seed_; }
  int epochs_trained() const { return epochs_; }
  void set_epochs_trained(int e) { epochs_ = e; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  MatMap W(int l) { return MatMap(flat_.data() + off_W(l), 4 * hidden(l), shape_.layer_input(l)); }
  MatMap U(int l) { return MatMap(flat_.data() + off_U(l), 4 * hidden(l), hidden(l)); }
  VecMap b(int l) { return VecMap(flat_.data() + off_b(l), 4 * hidden(l)); }
  MatMap Wy() { return MatMap(flat_.data() + off_head(), shape_.output_dim, hidden(1)); }
  VecMap by() { return VecMap(flat_.data() + off_head() + shape_.output_dim * hidden(1), shape_.output_dim); }
  CMatMap W(int l) const { return CMatMap(flat_.data() + off_W(l), 4 * hidden(l), shape_.layer_input(l)); }
  CMatMap U(int l) const { return CMatMap(flat_.data() + off_U(l), 4 * hidden(l), hidden(l)); }
  CVecMap b(int l) const { return CVecMap(flat_.data() + off_b(l), 4 * hidden(l)); }
  CMatMap Wy() const { return CMatMap(flat_.data() + off_head(), shape_.output_dim, hidden(1)); }
  CVecMap by() const { return CVecMap(flat_.data() + off_head() + shape_.output_dim * hidden(1), shape_.output_dim); }

  /// Offsets into any vector with this parameter layout (used for gradients).
  Eigen::Index off_W(int l) const { return l == 0 ? 0 : static_cast<Eigen::Index>(shape_.layer_size(0)); }
  Eigen::Index off_U(int l) const { return off_W(l) + 4 * hidden(l) * shape_.layer_input(l); }
  Eigen::Index off_b(int l) const { return off_U(l) + 4 * hidden(l) * hidden(l); }
  Eigen::Index off_head() const { return static_cast<Eigen::Index>(shape_.layer_size(0) + shape_.layer_size(1)); }

 private:
  NetShape shape_;
  Eigen::VectorXd flat_;
  std::uint64_t seed_ = 0;
  int epochs_ = 0;
};

namespace detail {

// exp-based forms vectorize for doubles; std::tanh does not.
template <class A>
auto sigmoid(const A& z) {
  return 1.0 / (1.0 + (-z).exp());
}

template <class A>
auto fast_tanh(const A& z) {
  return 1.0 - 2.0 / ((2.0 * z).exp() + 1.0);
}

// A sequence batch stored step-major: column t * batch + n is step t of
// sequence n.
struct Steps {
  Eigen::MatrixXd data;
  Eigen::Index steps = 0, batch = 0;

  auto step(Eigen::Index t) { return data.middleCols(t * batch, batch); }
  auto step(Eigen::Index t) const { return data.middleCols(t * batch, batch); }
};

inline Steps to_steps(const SeqBatch& b) {
  Steps s;
  s.steps = static_cast<Eigen::Index>(b.size());
  s.batch = b.front().cols();
  s.data.resize(b.front().rows(), s.steps * s.batch);
  for (Eigen::Index t = 0; t < s.steps; ++t) {
    if (b[static_cast<std::size_t>(t)].cols() != s.batch || b[static_cast<std::size_t>(t)].rows() != s.data.rows())
      throw UsageError("ragged sequence batch");
    s.step(t) = b[static_cast<std::size_t>(t)];
  }
  return s;
}

struct LayerCache {
  Eigen::MatrixXd gates;  // activated i, f, g, o
  Eigen::MatrixXd c, tc;
  Steps h;
};

inline void layer_forward(const LstmParams& p, int l, const Steps& in, LayerCache& cache) {
  const auto W = p.W(l);
  const auto U = p.U(l);
  const auto b = p.b(l);
  if (in.data.rows() != W.cols()) throw UsageError("input dimension mismatch");
  const Eigen::Index H = p.hidden(l), B = in.batch, T = in.steps;
  cache.gates.noalias() = W * in.data;
  cache.gates.colwise() += b;
  cache.c.resize(H, T * B);
  cache.tc.resize(H, T * B);
  cache.h.data.resize(H, T * B);
  cache.h.steps = T;
  cache.h.batch = B;
  for (Eigen::Index t = 0; t < T; ++t) {
    auto z = cache.gates.middleCols(t * B, B);
    if (t > 0) z.noalias() += U * cache.h.step(t - 1);
    z.topRows(2 * H) = sigmoid(z.topRows(2 * H).array()).matrix();
    z.middleRows(2 * H, H) = fast_tanh(z.middleRows(2 * H, H).array()).matrix();
    z.bottomRows(H) = sigmoid(z.bottomRows(H).array()).matrix();
    auto c = cache.c.middleCols(t * B, B);
    if (t > 0)
      c = (z.middleRows(H, H).array() * cache.c.middleCols((t - 1) * B, B).array() +
           z.topRows(H).array() * z.middleRows(2 * H, H).array()).matrix();
    else
      c = (z.topRows(H).array() * z.middleRows(2 * H, H).array()).matrix();
    auto tc = cache.tc.middleCols(t * B, B);
    tc = fast_tanh(c.array()).matrix();
    cache.h.step(t) = (z.bottomRows(H).array() * tc.array()).matrix();
  }
}

// dh_above holds the loss gradient w.r.t. this layer's h at every step from
// outside the recurrence (zero columns where there is none). Accumulates
// parameter gradients into `grad` and, when dx is given, writes the gradient
// w.r.t. the input in the same step-major layout.
inline void layer_backward(const LstmParams& p, int l, const Steps& in, const LayerCache& cache,
                           const Eigen::MatrixXd& dh_above, Eigen::VectorXd& grad, Eigen::MatrixXd* dx) {
  const auto W = p.W(l);
  const auto U = p.U(l);
  const Eigen::Index H = p.hidden(l), B = in.batch, T = in.steps, in_dim = W.cols();
  Eigen::Map<Eigen::MatrixXd> gW(grad.data() + p.off_W(l), 4 * H, in_dim);
  Eigen::Map<Eigen::MatrixXd> gU(grad.data() + p.off_U(l), 4 * H, H);
  Eigen::Map<Eigen::VectorXd> gb(grad.data() + p.off_b(l), 4 * H);
  Eigen::MatrixXd dz(4 * H, T * B);
  Eigen::MatrixXd dh(H, B);
  Eigen::ArrayXXd dc(H, B), dc_next = Eigen::ArrayXXd::Zero(H, B);
  for (Eigen::Index t = T; t-- > 0;) {
    const auto s = cache.gates.middleCols(t * B, B).array();
    const auto i = s.topRows(H), f = s.middleRows(H, H), g = s.middleRows(2 * H, H), o = s.bottomRows(H);
    const auto tc = cache.tc.middleCols(t * B, B).array();
    if (t == T - 1)
      dh = dh_above.middleCols(t * B, B);
    else
      dh.noalias() += dh_above.middleCols(t * B, B);
    dc = dh.array() * o * (1.0 - tc.square()) + dc_next;
    auto d = dz.middleCols(t * B, B);
    d.topRows(H) = (dc * g * i * (1.0 - i)).matrix();
    if (t > 0)
      d.middleRows(H, H) = (dc * cache.c.middleCols((t - 1) * B, B).array() * f * (1.0 - f)).matrix();
    else
      d.middleRows(H, H).setZero();
    d.middleRows(2 * H, H) = (dc * i * (1.0 - g.square())).matrix();
    d.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc_next = dc * f;
    if (t > 0) dh.noalias() = U.transpose() * d;
  }
  gW.noalias() += dz * in.data.transpose();
  if (T > 1) gU.noalias() += dz.rightCols((T - 1) * B) * cache.h.data.leftCols((T - 1) * B).transpose();
  gb += dz.rowwise().sum();
  if (dx) dx->noalias() = W.transpose() * dz;
}

// Applies the head nonlinearity to raw outputs z (out x B) in place.
inline void activate(const NetShape& shape, Eigen::MatrixXd& z) {
  if (shape.head == HeadKind::Binary) {
    z = sigmoid(z.array()).matrix();
  } else if (shape.head == HeadKind::Categorical) {
    Eigen::Index row = 0;
    for (int bs : shape.blocks) {
      auto blk = z.middleRows(row, bs);
      for (Eigen::Index j = 0; j < blk.cols(); ++j) {
        const double mx = blk.col(j).maxCoeff();
        blk.col(j) = (blk.col(j).array() - mx).exp().matrix();
        blk.col(j) /= blk.col(j).sum();
      }
      row += bs;
    }
  }
}

// Summed (not averaged) loss of raw outputs z against targets y; writes
// d(sum loss)/dz into dz.
inline double head_loss(const NetShape& shape, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y, Eigen::MatrixXd& dz) {
  double loss = 0;
  dz.resize(z.rows(), z.cols());
  switch (shape.head) {
    case HeadKind::Numeric: {
      Eigen::MatrixXd r = z - y;
      loss = r.squaredNorm();
      dz = 2.0 * r;
      break;
    }
    case HeadKind::Binary: {
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double x = z(0, j), t = y(0, j);
        loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
        dz(0, j) = 1.0 / (1.0 + std::exp(-x)) - t;
      }
      break;
    }
    case HeadKind::Categorical: {
      Eigen::Index row = 0;
      for (int bs : shape.blocks) {
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
          auto zc = z.col(j).segment(row, bs);
          auto yc = y.col(j).segment(row, bs);
          const double mx = zc.maxCoeff();
          const double lse = mx + std::log((zc.array() - mx).exp().sum());
          loss += -(yc.array() * (zc.array() - lse)).sum();
          dz.col(j).segment(row, bs) = ((zc.array() - lse).exp() * yc.sum() - yc.array()).matrix();
        }
        row += bs;
      }
      break;
    }
  }
  return loss;
}

}  // namespace detail

struct LstmOutput {
  std::vector<Eigen::VectorXd> hidden;          // top-layer h_t per step
  std::array<Eigen::VectorXd, 2> final_hidden;  // per layer
  std::array<Eigen::VectorXd, 2> final_cell;
};

/// Runs both recurrent layers over one sequence.
inline LstmOutput lstm_forward(const LstmParams& params, const std::vector<Eigen::VectorXd>& sequence) {
  if (sequence.empty()) throw UsageError("empty sequence");
  detail::Steps in;
  in.steps = static_cast<Eigen::Index>(sequence.size());
  in.batch = 1;
  in.data.resize(params.shape().input_dim, in.steps);
  for (Eigen::Index t = 0; t < in.steps; ++t) {
    if (sequence[static_cast<std::size_t>(t)].size() != params.shape().input_dim)
      throw UsageError("input dimension mismatch");
    in.data.col(t) = sequence[static_cast<std::size_t>(t)];
  }
  detail::LayerCache c1, c2;
  detail::layer_forward(params, 0, in, c1);
  detail::layer_forward(params, 1, c1.h, c2);
  LstmOutput out;
  for (Eigen::Index t = 0; t < in.steps; ++t) out.hidden.emplace_back(c2.h.data.col(t));
  out.final_hidden = {c1.h.data.rightCols(1), c2.h.data.rightCols(1)};
  out.final_cell = {c1.c.rightCols(1), c2.c.rightCols(1)};
  return out;
}

namespace detail {

inline Eigen::MatrixXd predict_steps(const LstmParams& params, const Steps& in) {
  LayerCache c1, c2;
  layer_forward(params, 0, in, c1);
  layer_forward(params, 1, c1.h, c2);
  Eigen::MatrixXd z = params.Wy() * c2.h.step(in.steps - 1);
  z.colwise() += params.by();
  activate(params.shape(), z);
  return z;
}

inline double loss_sum_steps(const LstmParams& params, const Steps& in, const Eigen::MatrixXd& targets,
                             Eigen::VectorXd* grad) {
  if (targets.rows() != params.shape().output_dim || targets.cols() != in.batch)
    throw UsageError("target shape mismatch");
  LayerCache c1, c2;
  layer_forward(params, 0, in, c1);
  layer_forward(params, 1, c1.h, c2);
  const auto hT = c2.h.step(in.steps - 1);
  Eigen::MatrixXd z = params.Wy() * hT;
  z.colwise() += params.by();
  Eigen::MatrixXd dz;
  const double loss = head_loss(params.shape(), z, targets, dz);
  if (!grad) return loss;

  const auto H2 = params.hidden(1);
  const auto out = params.shape().output_dim;
  Eigen::Map<Eigen::MatrixXd>(grad->data() + params.off_head(), out, H2).noalias() += dz * hT.transpose();
  Eigen::Map<Eigen::VectorXd>(grad->data() + params.off_head() + out * H2, out) += dz.rowwise().sum();
  Eigen::MatrixXd dh2 = Eigen::MatrixXd::Zero(H2, in.steps * in.batch);
  dh2.rightCols(in.batch).noalias() = params.Wy().transpose() * dz;
  Eigen::MatrixXd dh1;
  layer_backward(params, 1, c1.h, c2, dh2, *grad, &dh1);
  layer_backward(params, 0, in, c1, dh1, *grad, nullptr);
  return loss;
}

// Columns `cols` of every step.
inline Steps gather(const Steps& s, const std::vector<Eigen::Index>& cols) {
  Steps out;
  out.steps = s.steps;
  out.batch = static_cast<Eigen::Index>(cols.size());
  out.data.resize(s.data.rows(), out.steps * out.batch);
  for (Eigen::Index t = 0; t < s.steps; ++t) {
    auto src = s.step(t);
    auto dst = out.step(t);
    for (Eigen::Index j = 0; j < out.batch; ++j) dst.col(j) = src.col(cols[static_cast<std::size_t>(j)]);
  }
  return out;
}

inline Steps block(const Steps& s, Eigen::Index start, Eigen::Index n) {
  Steps out;
  out.steps = s.steps;
  out.batch = n;
  out.data.resize(s.data.rows(), out.steps * n);
  for (Eigen::Index t = 0; t < s.steps; ++t) out.step(t) = s.step(t).middleCols(start, n);
  return out;
}

inline double loss_denominator(const LstmParams& params, Eigen::Index n) {
  double d = static_cast<double>(n);
  if (params.shape().head == HeadKind::Numeric) d *= params.shape().output_dim;
  return d;
}

inline constexpr Eigen::Index kChunk = 128;

// See mean_loss_and_gradient.
inline double mean_loss_and_gradient_steps(const LstmParams& params, const Steps& in, const Eigen::MatrixXd& targets,
                                           Eigen::VectorXd& grad, int threads) {
  const Eigen::Index n = targets.cols();
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  if (chunks == 1) {
    grad = Eigen::VectorXd::Zero(params.flat().size());
    const double loss = loss_sum_steps(params, in, targets, &grad);
    const double denom = loss_denominator(params, n);
    grad /= denom;
    return loss / denom;
  }
  std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(chunks));
  std::vector<double> losses(static_cast<std::size_t>(chunks), 0.0);
  auto work = [&](Eigen::Index c) {
    const Eigen::Index start = c * kChunk, len = std::min(kChunk, n - start);
    auto& g = grads[static_cast<std::size_t>(c)];
    g = Eigen::VectorXd::Zero(params.flat().size());
    losses[static_cast<std::size_t>(c)] = loss_sum_steps(params, block(in, start, len), targets.middleCols(start, len), &g);
  };
  if (threads <= 1) {
    for (Eigen::Index c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < threads; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (Eigen::Index c = w; c < chunks; c += threads) work(c);
      }));
    for (auto& j : jobs) j.get();
  }
  grad = Eigen::VectorXd::Zero(params.flat().size());
  double loss = 0;
  for (Eigen::Index c = 0; c < chunks; ++c) {
    grad += grads[static_cast<std::size_t>(c)];
    loss += losses[static_cast<std::size_t>(c)];
  }
  const double denom = loss_denominator(params, n);
  grad /= denom;
  return loss / denom;
}

}  // namespace detail

/// Head outputs for a batch: raw values (numeric), block softmax
/// probabilities (categorical) or sigmoid probabilities (binary).
inline Eigen::MatrixXd predict(const LstmParams& params, const SeqBatch& batch) {
  if (batch.empty()) throw UsageError("empty sequence batch");
  return detail::predict_steps(params, detail::to_steps(batch));
}

/// Summed loss over the batch; adds d(sum loss)/d(params) into grad if given.
inline double loss_sum(const LstmParams& params, const SeqBatch& batch, const Eigen::MatrixXd& targets,
                       Eigen::VectorXd* grad) {
  if (batch.empty()) throw UsageError("empty sequence batch");
  return detail::loss_sum_steps(params, detail::to_steps(batch), targets, grad);
}

/// Mean loss and gradient over a batch. Work is split into fixed-size column
/// chunks whose gradients are summed in chunk order, so the result does not
/// depend on `threads`.
inline double mean_loss_and_gradient(const LstmParams& params, const SeqBatch& batch, const Eigen::MatrixXd& targets,
                                     Eigen::VectorXd& grad, int threads = 1) {
  if (batch.empty()) throw UsageError("empty sequence batch");
  return detail::mean_loss_and_gradient_steps(params, detail::to_steps(batch), targets, grad, threads);
}

/// Mean loss without gradient.
inline double mean_loss(const LstmParams& params, const SeqBatch& batch, const Eigen::MatrixXd& targets) {
  return loss_sum(params, batch, targets, nullptr) / detail::loss_denominator(params, targets.cols());
}

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t rng_seed = 13;
  int hidden = 32;
  int threads = 1;
  std::function<void(int epoch, double loss)> on_epoch;

  void validate() const {
    if (epochs < 1) throw UsageError("epochs must be >= 1");
    if (!(learning_rate > 0)) throw UsageError("learning rate must be > 0");
    if (!(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1)) throw UsageError("adam betas must lie in (0, 1)");
    if (!(epsilon > 0)) throw UsageError("adam epsilon must be > 0");
    if (batch_size < 0 || hidden < 1) throw UsageError("batch size must be >= 0 and hidden >= 1");
  }
};

struct TrainResult {
  LstmParams params;
  std::vector<double> epoch_loss;  // mean training loss seen during each epoch
};

/// Adam over the flat parameter vector. Mini-batch order is shuffled per epoch
/// from cfg.rng_seed; full-batch training uses no randomness after init.
inline TrainResult train(LstmParams params, const SeqBatch& inputs, const Eigen::MatrixXd& targets,
                         const TrainConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = targets.cols();
  if (n == 0 || inputs.empty()) throw UsageError("no training instances");
  const detail::Steps all = detail::to_steps(inputs);
  const Eigen::Index bs = cfg.batch_size <= 0 || cfg.batch_size >= n ? n : cfg.batch_size;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.flat().size()), v = m, grad;
  std::mt19937_64 rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  TrainResult res;
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (bs < n) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index len = std::min(bs, n - start);
      double loss;
      if (bs == n) {
        loss = detail::mean_loss_and_gradient_steps(params, all, targets, grad, cfg.threads);
      } else {
        std::vector<Eigen::Index> cols(order.begin() + start, order.begin() + start + len);
        loss = detail::mean_loss_and_gradient_steps(params, detail::gather(all, cols), targets(Eigen::all, cols), grad,
                                                    cfg.threads);
      }
      if (!std::isfinite(loss)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(len);
      ++step;
      m = cfg.beta1 * m + (1 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1 - cfg.beta2) * grad.cwiseProduct(grad);
      const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(step));
      params.flat().array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    }
    epoch_loss /= static_cast<double>(n);
    res.epoch_loss.push_back(epoch_loss);
    if (cfg.on_epoch) cfg.on_epoch(epoch, epoch_loss);
  }
  params.set_epochs_trained(params.epochs_trained() + cfg.epochs);
  res.params = std::move(params);
  return res;
}

/// Trains a forecaster mapping each input sequence to its target column.
/// Numeric targets are next-step values; categorical targets are one-hot
/// blocks matching `blocks`.
inline TrainResult train_forecaster(const SeqBatch& inputs, const Eigen::MatrixXd& targets, HeadKind head,
                                    const TrainConfig& cfg, std::vector<int> blocks = {}) {
  if (head == HeadKind::Binary) throw UsageError("forecaster head must be numeric or categorical");
  NetShape shape;
  shape.input_dim = static_cast<int>(inputs.front().rows());
  shape.hidden = {cfg.hidden, cfg.hidden};
  shape.output_dim = static_cast<int>(targets.rows());
  shape.head = head;
  shape.blocks = std::move(blocks);
  return train(LstmParams::initialize(shape, cfg.rng_seed), inputs, targets, cfg);
}

/// Forecast for a single series (step -> values). Categorical outputs are
/// probability vectors per block; see one_hot_argmax.
inline Eigen::VectorXd forecast(const LstmParams& params, const std::vector<Eigen::VectorXd>& series) {
  if (series.empty()) throw UsageError("empty series");
  SeqBatch in;
  for (const auto& x : series) {
    if (x.size() != params.shape().input_dim) throw UsageError("input dimension mismatch");
    in.emplace_back(x);
  }
  return predict(params, in).col(0);
}

/// Replaces each softmax block by the one-hot vector of its argmax (first
/// maximum on ties).
inline Eigen::VectorXd one_hot_argmax(const Eigen::VectorXd& probs, const std::vector<int>& blocks) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(probs.size());
  Eigen::Index row = 0;
  for (int bs : blocks) {
    Eigen::Index arg;
    probs.segment(row, bs).maxCoeff(&arg);
    out(row + arg) = 1.0;
    row += bs;
  }
  return out;
}

/// LSTM + single sigmoid unit trained with binary cross-entropy.
inline TrainResult train_classifier(const SeqBatch& inputs, const std::vector<int>& labels, const TrainConfig& cfg) {
  if (labels.empty() || static_cast<Eigen::Index>(labels.size()) != inputs.front().cols())
    throw UsageError("labels do not match the batch");
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  if (pos == 0 || pos == static_cast<long>(labels.size())) throw DataError("classifier training set has a single class");
  Eigen::MatrixXd y(1, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(0, static_cast<Eigen::Index>(i)) = labels[i] != 0 ? 1.0 : 0.0;
  NetShape shape;
  shape.input_dim = static_cast<int>(inputs.front().rows());
  shape.hidden = {cfg.hidden, cfg.hidden};
  shape.output_dim = 1;
  shape.head = HeadKind::Binary;
  return train(LstmParams::initialize(shape, cfg.rng_seed), inputs, y, cfg);
}

/// Largest relative difference between the analytic gradient of the mean loss
/// and central finite differences (step h). Relative error is
/// |a - n| / max(|a| + |n|, 1e-6).
inline double gradient_check(const LstmParams& params, const SeqBatch& batch, const Eigen::MatrixXd& targets,
                             double h = 1e-5, Eigen::VectorXd* analytic_out = nullptr,
                             Eigen::VectorXd* numeric_out = nullptr) {
  Eigen::VectorXd analytic;
  mean_loss_and_gradient(params, batch, targets, analytic);
  LstmParams probe = params;
  Eigen::VectorXd numeric(analytic.size());
  double worst = 0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double orig = probe.flat()(i);
    probe.flat()(i) = orig + h;
    const double up = mean_loss(probe, batch, targets);
    probe.flat()(i) = orig - h;
    const double down = mean_loss(probe, batch, targets);
    probe.flat()(i) = orig;
    numeric(i) = (up - down) / (2 * h);
    const double rel = std::abs(analytic(i) - numeric(i)) / std::max(std::abs(analytic(i)) + std::abs(numeric(i)), 1e-6);
    worst = std::max(worst, rel);
  }
  if (analytic_out) *analytic_out = analytic;
  if (numeric_out) *numeric_out = numeric;
  return worst;
}

/// Text checkpoint; parameters are written as hexadecimal floats so a
/// save/load round trip is bit-exact.
inline std::string checkpoint_to_string(const LstmParams& p) {
  const auto& s = p.shape();
  std::ostringstream o;
  o << "kcnlp-lstm 1\n";
  o << "head " << to_string(s.head) << "\n";
  o << "input_dim " << s.input_dim << "\n";
  o << "hidden " << s.hidden[0] << " " << s.hidden[1] << "\n";
  o << "output_dim " << s.output_dim << "\n";
  o << "blocks";
  for (int b : s.blocks) o << " " << b;
  o << "\n";
  o << "seed " << p.seed() << "\n";
  o << "epochs " << p.epochs_trained() << "\n";
  o << "params " << p.flat().size() << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < p.flat().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%a\n", p.flat()(i));
    o << buf;
  }
  return o.str();
}

inline LstmParams checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  auto expect = [&](std::string_view key) {
    std::string k;
    if (!(in >> k) || k != key) throw DataError("checkpoint: expected '" + std::string(key) + "'");
  };
  int version = 0;
  expect("kcnlp-lstm");
  in >> version;
  if (version != 1) throw DataError("checkpoint: unsupported version");
  NetShape s;
  std::string head;
  expect("head");
  in >> head;
  s.head = parse_head(head);
  expect("input_dim");
  in >> s.input_dim;
  expect("hidden");
  in >> s.hidden[0] >> s.hidden[1];
  expect("output_dim");
  in >> s.output_dim;
  expect("blocks");
  std::string rest;
  std::getline(in, rest);
  std::istringstream bl(rest);
  for (int b; bl >> b;) s.blocks.push_back(b);
  std::uint64_t seed = 0;
  int epochs = 0;
  std::size_t count = 0;
  expect("seed");
  in >> seed;
  expect("epochs");
  in >> epochs;
  expect("params");
  in >> count;
  if (!in) throw DataError("checkpoint: malformed header");
  LstmParams p(s);
  if (count != static_cast<std::size_t>(p.flat().size())) throw DataError("checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    std::string tok;
    if (!(in >> tok)) throw DataError("checkpoint: truncated parameters");
    char* end = nullptr;
    p.flat()(static_cast<Eigen::Index>(i)) = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw DataError("checkpoint: bad parameter '" + tok + "'");
  }
  p.set_seed(seed);
  p.set_epochs_trained(epochs);
  return p;
}

}  // namespace kcnlp
