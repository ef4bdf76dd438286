#include "velopref/reward_model.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "velopref/grid_world.hpp"
#include "velopref/rng.hpp"
#include <json.hpp>

namespace velopref {

namespace {
constexpr int kBlock = 64;  // rows per reduction block in backward_batch
}

std::size_t RewardModel::weight_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
  }
  return off;
}

std::size_t RewardModel::bias_offset(int layer) const {
  return weight_offset(layer) +
         static_cast<std::size_t>(layer_out(layer)) * layer_in(layer);
}

int RewardModel::layer_in(int layer) const {
  return layer == 0 ? input_dim_ : width_;
}

int RewardModel::layer_out(int layer) const {
  return layer == depth_ ? 1 : width_;
}

RewardModel RewardModel::init(std::uint64_t seed, int input_dim, int width,
                              int depth) {
  if (input_dim < 1) throw Error("input_dim must be >= 1");
  if (depth < 0) throw Error("depth must be >= 0");
  if (depth > 0 && width < 1) throw Error("width must be >= 1");

  RewardModel m;
  m.input_dim_ = input_dim;
  m.width_ = depth > 0 ? width : 0;
  m.depth_ = depth;

  std::size_t count = 0;
  for (int l = 0; l <= depth; ++l) {
    count += static_cast<std::size_t>(m.layer_out(l)) * m.layer_in(l) +
             m.layer_out(l);
  }
  m.theta_.assign(count, 0.0);

  Rng rng(seed);
  for (int l = 0; l <= depth; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.layer_in(l)));
    double* w = m.theta_.data() + m.weight_offset(l);
    const std::size_t n = static_cast<std::size_t>(m.layer_out(l)) * m.layer_in(l);
    for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
    // biases stay zero
  }
  return m;
}

RewardModel RewardModel::linear(const std::vector<double>& weights, double bias) {
  RewardModel m;
  m.input_dim_ = static_cast<int>(weights.size());
  m.width_ = 0;
  m.depth_ = 0;
  m.theta_ = weights;
  m.theta_.push_back(bias);
  return m;
}

void RewardModel::forward_activations(std::span<const double> x,
                                      std::vector<double>& acts) const {
  // acts holds the post-ReLU hidden activations, depth_ * width_ values.
  acts.resize(static_cast<std::size_t>(depth_) * width_);
  const double* in = x.data();
  for (int l = 0; l < depth_; ++l) {
    const double* w = theta_.data() + weight_offset(l);
    const double* b = theta_.data() + bias_offset(l);
    double* out = acts.data() + static_cast<std::size_t>(l) * width_;
    const int nin = layer_in(l);
    for (int j = 0; j < width_; ++j) {
      double z = b[j];
      const double* wj = w + static_cast<std::size_t>(j) * nin;
      for (int k = 0; k < nin; ++k) z += wj[k] * in[k];
      out[j] = z > 0.0 ? z : 0.0;
    }
    in = out;
  }
}

double RewardModel::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_) {
    throw Error("feature dimension mismatch in forward");
  }
  thread_local std::vector<double> acts;
  forward_activations(x, acts);
  const double* in = depth_ == 0 ? x.data()
                                 : acts.data() + static_cast<std::size_t>(depth_ - 1) * width_;
  const int nin = layer_in(depth_);
  const double* w = theta_.data() + weight_offset(depth_);
  double out = theta_[bias_offset(depth_)];
  for (int k = 0; k < nin; ++k) out += w[k] * in[k];
  return out;
}

std::vector<double> RewardModel::forward_batch(const std::vector<double>& features,
                                               int n) const {
  if (features.size() != static_cast<std::size_t>(n) * input_dim_) {
    throw Error("feature matrix shape mismatch");
  }
  std::vector<double> out(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    out[i] = forward(std::span<const double>(
        features.data() + static_cast<std::size_t>(i) * input_dim_, input_dim_));
  }
  return out;
}

void RewardModel::backward(std::span<const double> x, double upstream,
                           std::span<double> grad) const {
  if (static_cast<int>(x.size()) != input_dim_) {
    throw Error("feature dimension mismatch in backward");
  }
  if (grad.size() != theta_.size()) throw Error("gradient shape mismatch");
  if (upstream == 0.0) return;

  thread_local std::vector<double> acts;
  thread_local std::vector<double> delta;
  forward_activations(x, acts);

  // Output layer: dR/dw_out = h_last, dR/db_out = 1.
  const double* last = depth_ == 0 ? x.data()
                                   : acts.data() + static_cast<std::size_t>(depth_ - 1) * width_;
  {
    double* gw = grad.data() + weight_offset(depth_);
    const int nin = layer_in(depth_);
    for (int k = 0; k < nin; ++k) gw[k] += upstream * last[k];
    grad[bias_offset(depth_)] += upstream;
  }
  if (depth_ == 0) return;

  // delta over the current layer's outputs; start from output-layer weights.
  delta.assign(width_, 0.0);
  {
    const double* w_out = theta_.data() + weight_offset(depth_);
    const double* h = last;
    for (int j = 0; j < width_; ++j) {
      delta[j] = h[j] > 0.0 ? upstream * w_out[j] : 0.0;
    }
  }

  for (int l = depth_ - 1; l >= 0; --l) {
    const double* in = l == 0 ? x.data()
                              : acts.data() + static_cast<std::size_t>(l - 1) * width_;
    const int nin = layer_in(l);
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    for (int j = 0; j < width_; ++j) {
      const double d = delta[j];
      if (d == 0.0) continue;
      double* gwj = gw + static_cast<std::size_t>(j) * nin;
      for (int k = 0; k < nin; ++k) gwj[k] += d * in[k];
      gb[j] += d;
    }
    if (l == 0) break;

    // Propagate delta to the previous hidden layer through W_l and ReLU.
    const double* w = theta_.data() + weight_offset(l);
    const double* h_prev = acts.data() + static_cast<std::size_t>(l - 1) * width_;
    std::vector<double> next(width_, 0.0);
    for (int j = 0; j < width_; ++j) {
      const double d = delta[j];
      if (d == 0.0) continue;
      const double* wj = w + static_cast<std::size_t>(j) * nin;
      for (int k = 0; k < nin; ++k) next[k] += d * wj[k];
    }
    for (int k = 0; k < width_; ++k) {
      if (h_prev[k] <= 0.0) next[k] = 0.0;
    }
    delta = next;
  }
}

GradientRecord RewardModel::backward_batch(const std::vector<double>& features,
                                           int n,
                                           const std::vector<double>& upstream) const {
  if (static_cast<int>(upstream.size()) != n) throw Error("upstream size mismatch");
  if (features.size() != static_cast<std::size_t>(n) * input_dim_) {
    throw Error("feature matrix shape mismatch");
  }
  const int nblocks = (n + kBlock - 1) / kBlock;
  std::vector<GradientRecord> partial(nblocks);

#pragma omp parallel for schedule(dynamic)
  for (int blk = 0; blk < nblocks; ++blk) {
    GradientRecord& g = partial[blk];
    g.assign(theta_.size(), 0.0);
    const int lo = blk * kBlock;
    const int hi = std::min(n, lo + kBlock);
    for (int i = lo; i < hi; ++i) {
      if (upstream[i] == 0.0) continue;
      backward(std::span<const double>(
                   features.data() + static_cast<std::size_t>(i) * input_dim_,
                   input_dim_),
               upstream[i], g);
    }
  }

  GradientRecord total(theta_.size(), 0.0);
  for (int blk = 0; blk < nblocks; ++blk) {
    for (std::size_t p = 0; p < total.size(); ++p) total[p] += partial[blk][p];
  }
  return total;
}

bool RewardModel::finite() const {
  for (double v : theta_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string RewardModel::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["input_dim"] = input_dim_;
  j["width"] = width_;
  j["depth"] = depth_;
  j["theta"] = theta_;
  return j.dump();
}

RewardModel RewardModel::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  RewardModel m;
  m.input_dim_ = j.at("input_dim").get<int>();
  m.width_ = j.at("width").get<int>();
  m.depth_ = j.at("depth").get<int>();
  m.theta_ = j.at("theta").get<std::vector<double>>();
  std::size_t count = 0;
  for (int l = 0; l <= m.depth_; ++l) {
    count += static_cast<std::size_t>(m.layer_out(l)) * m.layer_in(l) +
             m.layer_out(l);
  }
  if (m.theta_.size() != count) throw Error("checkpoint parameter count mismatch");
  return m;
}

GradientRecord prior_gradient(const RewardModel& model, double lambda) {
  if (lambda < 0.0) throw Error("lambda must be nonnegative");
  GradientRecord g(model.param_count(), 0.0);
  if (lambda == 0.0) return g;
  auto theta = model.theta();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -lambda * theta[i];
  return g;
}

void AdamState::step(std::span<double> theta, std::span<const double> ascent_grad,
                     double lambda, double lr_scale) {
  if (m.empty()) {
    m.assign(theta.size(), 0.0);
    v.assign(theta.size(), 0.0);
  }
  if (m.size() != theta.size() || ascent_grad.size() != theta.size()) {
    throw std::runtime_error("optimizer state shape mismatch");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  const double step_lr = lr * lr_scale;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * ascent_grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * ascent_grad[i] * ascent_grad[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    theta[i] += step_lr * (mhat / (std::sqrt(vhat) + eps) - lambda * theta[i]);
  }
}

}  // namespace velopref
