#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace velopref {

using GradientRecord = std::vector<double>;

// Fully-connected reward network: input_dim -> width x depth (ReLU) -> 1.
// depth == 0 degenerates to a linear model. Parameters live in one flat
// vector laid out layer by layer as [W row-major, b]; evaluation is
// read-only and safe to call concurrently.
class RewardModel {
 public:
  RewardModel() = default;

  // Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)],
  // deterministically from `seed`; biases zero.
  static RewardModel init(std::uint64_t seed, int input_dim, int width,
                          int depth);

  // Builds a linear model (depth 0) with the given weights and bias.
  static RewardModel linear(const std::vector<double>& weights, double bias);

  int input_dim() const { return input_dim_; }
  int width() const { return width_; }
  int depth() const { return depth_; }
  std::size_t param_count() const { return theta_.size(); }

  std::span<double> theta() { return theta_; }
  std::span<const double> theta() const { return theta_; }

  double forward(std::span<const double> x) const;

  // Rewards for every row of `features` (row-major, n x input_dim).
  // Parallelized over rows.
  std::vector<double> forward_batch(const std::vector<double>& features,
                                    int n) const;

  // Accumulates upstream * dR/dtheta into `grad` for a single input.
  void backward(std::span<const double> x, double upstream,
                std::span<double> grad) const;

  // Gradient of sum_i upstream[i] * R(x_i) over all feature rows.
  // Deterministic for any thread count: rows are processed in fixed-size
  // blocks and block results are reduced in index order.
  GradientRecord backward_batch(const std::vector<double>& features, int n,
                                const std::vector<double>& upstream) const;

  bool finite() const;

  std::string to_json() const;
  static RewardModel from_json(const std::string& json_text);

 private:
  friend class RewardModelTestAccess;

  int input_dim_ = 0;
  int width_ = 0;
  int depth_ = 0;
  std::vector<double> theta_;

  // Offsets of layer l's weight block and bias block inside theta_.
  std::size_t weight_offset(int layer) const;
  std::size_t bias_offset(int layer) const;
  int layer_in(int layer) const;
  int layer_out(int layer) const;
  int num_layers() const { return depth_ + 1; }

  void forward_activations(std::span<const double> x,
                           std::vector<double>& acts) const;
};

// Gradient of the zero-mean Gaussian log-prior, -lambda * theta. Added to
// the likelihood gradient for MAP ascent.
GradientRecord prior_gradient(const RewardModel& model, double lambda);

// Gradient ascent with per-parameter moment estimates (Adam). The prior
// is applied as a decoupled shrinkage term, outside the moments.
struct AdamState {
  double lr = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  void step(std::span<double> theta, std::span<const double> ascent_grad,
            double lambda, double lr_scale = 1.0);
};

}  // namespace velopref
