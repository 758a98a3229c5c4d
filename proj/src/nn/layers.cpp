#include "nn/layers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace vidial::nn {

void init_normal(Matrix& m, double stddev, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
}

void init_xavier(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = limit * (2.0 * rng.uniform() - 1.0);
}

Linear Linear::create(ParamSet& params, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                      bool with_bias) {
  Linear l;
  l.weight = params.add(prefix + ".weight", in, out);
  l.has_bias = with_bias;
  if (with_bias) l.bias = params.add_vector(prefix + ".bias", out);
  return l;
}

void Linear::init(ParamSet& params, Rng& rng) const {
  init_xavier(params[weight], rng);
  if (has_bias) params[bias].setZero();
}

Matrix Linear::forward(const ParamSet& p, const Matrix& x) const {
  Matrix y = x * p[weight];
  if (has_bias) y.rowwise() += p[bias].row(0);
  return y;
}

Matrix Linear::backward(const ParamSet& p, const Matrix& x, const Matrix& dy, ParamSet& g) const {
  g[weight].noalias() += x.transpose() * dy;
  if (has_bias) g[bias].row(0) += dy.colwise().sum();
  return dy * p[weight].transpose();
}

LayerNorm LayerNorm::create(ParamSet& params, const std::string& prefix, Eigen::Index dim) {
  LayerNorm ln;
  ln.gain = params.add_vector(prefix + ".gain", dim);
  ln.bias = params.add_vector(prefix + ".bias", dim);
  return ln;
}

void LayerNorm::init(ParamSet& params) const {
  params[gain].setOnes();
  params[bias].setZero();
}

Matrix LayerNorm::forward(const ParamSet& p, const Matrix& x, Cache* cache) const {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().sum() / static_cast<double>(d);
  Eigen::VectorXd inv_std = (var.array() + kEps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * p[gain].row(0).array();
  y.rowwise() += p[bias].row(0);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNorm::backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const {
  const double d = static_cast<double>(dy.cols());
  g[gain].row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  g[bias].row(0) += dy.colwise().sum();
  Matrix dxhat = dy.array().rowwise() * p[gain].row(0).array();
  Eigen::VectorXd mean_dxhat = dxhat.rowwise().sum() / d;
  Eigen::VectorXd mean_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum() / d;
  Matrix dx = dxhat;
  dx.colwise() -= mean_dxhat;
  dx.array() -= cache.xhat.array().colwise() * mean_dxhat_xhat.array();
  dx.array().colwise() *= cache.inv_std.array();
  return dx;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Matrix gelu(const Matrix& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v))); });
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  Matrix dx(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    dx.data()[i] = dy.data()[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
  }
  return dx;
}

FeedForward FeedForward::create(ParamSet& params, const std::string& prefix, Eigen::Index d_model,
                                Eigen::Index hidden) {
  return FeedForward{Linear::create(params, prefix + ".in", d_model, hidden),
                     Linear::create(params, prefix + ".out", hidden, d_model)};
}

void FeedForward::init(ParamSet& params, Rng& rng) const {
  in.init(params, rng);
  out.init(params, rng);
}

Matrix FeedForward::forward(const ParamSet& p, const Matrix& x, Cache* cache) const {
  Matrix pre = in.forward(p, x);
  Matrix act = gelu(pre);
  Matrix y = out.forward(p, act);
  if (cache != nullptr) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return y;
}

Matrix FeedForward::backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const {
  Matrix dact = out.backward(p, cache.act, dy, g);
  return in.backward(p, cache.x, gelu_backward(cache.pre, dact), g);
}

MultiHeadAttention MultiHeadAttention::create(ParamSet& params, const std::string& prefix, Eigen::Index d_model,
                                              int heads) {
  MultiHeadAttention a;
  a.q = Linear::create(params, prefix + ".q", d_model, d_model);
  a.k = Linear::create(params, prefix + ".k", d_model, d_model);
  a.v = Linear::create(params, prefix + ".v", d_model, d_model);
  a.o = Linear::create(params, prefix + ".o", d_model, d_model);
  a.heads = heads;
  return a;
}

void MultiHeadAttention::init(ParamSet& params, Rng& rng) const {
  q.init(params, rng);
  k.init(params, rng);
  v.init(params, rng);
  o.init(params, rng);
}

Matrix MultiHeadAttention::forward(const ParamSet& p, const Matrix& xq, const Matrix& xkv, KeyMask key_valid,
                                   bool causal, Cache* cache) const {
  Matrix queries = q.forward(p, xq);
  Matrix keys = k.forward(p, xkv);
  Matrix values = v.forward(p, xkv);
  if (cache != nullptr) {
    cache->xq = xq;
    cache->xkv = xkv;
  }
  return attend(p, queries, keys, values, key_valid, causal, cache);
}

Matrix MultiHeadAttention::attend(const ParamSet& p, const Matrix& queries, const Matrix& keys,
                                  const Matrix& values, KeyMask key_valid, bool causal, Cache* cache) const {
  const Eigen::Index lq = queries.rows();
  const Eigen::Index lk = keys.rows();
  const Eigen::Index dh = queries.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  Matrix concat(lq, queries.cols());
  if (cache != nullptr) cache->probs.assign(static_cast<std::size_t>(heads), Matrix());
  for (int h = 0; h < heads; ++h) {
    Matrix scores = queries.middleCols(h * dh, dh) * keys.middleCols(h * dh, dh).transpose() * scale;
    for (Eigen::Index i = 0; i < lq; ++i) {
      for (Eigen::Index j = 0; j < lk; ++j) {
        const bool masked = (!key_valid.empty() && key_valid[static_cast<std::size_t>(j)] == 0) || (causal && j > i);
        if (masked) scores(i, j) = kNegInf;
      }
      const double max = scores.row(i).maxCoeff();
      if (max == kNegInf) {
        scores.row(i).setZero();
        continue;
      }
      scores.row(i) = (scores.row(i).array() - max).exp();
      scores.row(i) /= scores.row(i).sum();
    }
    concat.middleCols(h * dh, dh).noalias() = scores * values.middleCols(h * dh, dh);
    if (cache != nullptr) cache->probs[static_cast<std::size_t>(h)] = std::move(scores);
  }
  if (cache != nullptr) {
    cache->queries = queries;
    cache->keys = keys;
    cache->values = values;
    cache->concat = concat;
  }
  return o.forward(p, concat);
}

void MultiHeadAttention::backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g,
                                  Matrix& dxq, Matrix& dxkv) const {
  const Eigen::Index dh = cache.queries.cols() / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix dconcat = o.backward(p, cache.concat, dy, g);
  Matrix dq = Matrix::Zero(cache.queries.rows(), cache.queries.cols());
  Matrix dk = Matrix::Zero(cache.keys.rows(), cache.keys.cols());
  Matrix dv = Matrix::Zero(cache.values.rows(), cache.values.cols());
  for (int h = 0; h < heads; ++h) {
    const Matrix& probs = cache.probs[static_cast<std::size_t>(h)];
    const auto d_out = dconcat.middleCols(h * dh, dh);
    Matrix dprobs = d_out * cache.values.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh).noalias() += probs.transpose() * d_out;
    Eigen::VectorXd row_dot = (dprobs.array() * probs.array()).rowwise().sum();
    Matrix dscores = probs.array() * (dprobs.colwise() - row_dot).array();
    dscores *= scale;
    dq.middleCols(h * dh, dh).noalias() += dscores * cache.keys.middleCols(h * dh, dh);
    dk.middleCols(h * dh, dh).noalias() += dscores.transpose() * cache.queries.middleCols(h * dh, dh);
  }
  dxq = q.backward(p, cache.xq, dq, g);
  dxkv = k.backward(p, cache.xkv, dk, g);
  dxkv += v.backward(p, cache.xkv, dv, g);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return {};
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < rate ? 0.0 : keep;
  return mask;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double max = out.row(i).maxCoeff();
    const double lse = max + std::log((out.row(i).array() - max).exp().sum());
    out.row(i).array() -= lse;
  }
  return out;
}

}  // namespace vidial::nn
