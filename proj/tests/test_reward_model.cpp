#include <doctest.h>

#include <cmath>
#include <vector>

#include "velopref/reward_model.hpp"
#include "velopref/rng.hpp"
#include "oracles.hpp"

using namespace velopref;

namespace {

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("init is deterministic in the seed") {
  const RewardModel a = RewardModel::init(123, 5, 8, 2);
  const RewardModel b = RewardModel::init(123, 5, 8, 2);
  const RewardModel c = RewardModel::init(124, 5, 8, 2);
  CHECK(std::vector<double>(a.theta().begin(), a.theta().end()) ==
        std::vector<double>(b.theta().begin(), b.theta().end()));
  CHECK(std::vector<double>(a.theta().begin(), a.theta().end()) !=
        std::vector<double>(c.theta().begin(), c.theta().end()));
}

TEST_CASE("depth 0 is a plain linear model") {
  RewardModel m = RewardModel::linear({0.0, 1.0, 0.0}, 0.0);
  CHECK(m.forward(std::vector<double>{0.3, 0.7, 0.9}) == doctest::Approx(0.7));
  m = RewardModel::linear({2.0, -1.0}, 0.25);
  CHECK(m.forward(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.75));
}

TEST_CASE("parameter count follows the layer shapes") {
  // d*w + w hidden input layer, (depth-1) hidden-to-hidden blocks, w+1 out.
  CHECK(RewardModel::init(1, 23, 64, 4).param_count() ==
        23 * 64 + 64 + 3 * (64 * 64 + 64) + 64 + 1);
  CHECK(RewardModel::init(1, 23, 64, 4).param_count() == 14081);
  CHECK(RewardModel::init(1, 3, 4, 2).param_count() ==
        3 * 4 + 4 + (4 * 4 + 4) + 4 + 1);
  CHECK(RewardModel::init(1, 7, 0, 0).param_count() == 8);
}

TEST_CASE("all-zero parameters give zero reward") {
  RewardModel m = RewardModel::init(1, 4, 6, 2);
  for (auto& v : m.theta()) v = 0.0;
  CHECK(m.forward(std::vector<double>{0.1, 0.9, 0.5, 0.3}) == 0.0);
}

TEST_CASE("single hidden unit clamped by ReLU passes only the output bias") {
  RewardModel m = RewardModel::init(1, 1, 1, 1);
  auto theta = m.theta();
  // layout: W0 (1x1), b0 (1), w_out (1), b_out (1)
  theta[0] = -1.0;
  theta[1] = 0.0;
  theta[2] = 5.0;
  theta[3] = 0.125;
  CHECK(m.forward(std::vector<double>{1.0}) == doctest::Approx(0.125));
}

TEST_CASE("forward is deterministic and batch matches single") {
  const RewardModel m = RewardModel::init(3, 6, 8, 3);
  Rng rng(4);
  std::vector<double> features(6 * 10);
  for (auto& v : features) v = rng.uniform();
  const auto batch = m.forward_batch(features, 10);
  for (int i = 0; i < 10; ++i) {
    const std::span<const double> x(features.data() + i * 6, 6);
    CHECK(batch[i] == m.forward(x));
    CHECK(m.forward(x) == m.forward(x));
  }
}

TEST_CASE("zero upstream gives a zero gradient") {
  const RewardModel m = RewardModel::init(5, 4, 8, 2);
  GradientRecord grad(m.param_count(), 0.0);
  m.backward(std::vector<double>{0.2, 0.4, 0.6, 0.8}, 0.0, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("depth-0 gradient is upstream times input") {
  const RewardModel m = RewardModel::linear({0.5, -0.25}, 1.0);
  GradientRecord grad(3, 0.0);
  m.backward(std::vector<double>{0.3, 0.9}, 2.0, grad);
  CHECK(grad[0] == doctest::Approx(0.6));
  CHECK(grad[1] == doctest::Approx(1.8));
  CHECK(grad[2] == doctest::Approx(2.0));
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    RewardModel m = RewardModel::init(1000 + trial, 3, 4, 2);
    std::vector<double> x(3);
    for (auto& v : x) v = rng.uniform();
    const double upstream = rng.uniform(-2.0, 2.0);

    GradientRecord grad(m.param_count(), 0.0);
    m.backward(x, upstream, grad);

    auto theta = m.theta();
    for (std::size_t p = 0; p < m.param_count(); ++p) {
      const double fd = oracles::central_difference(
          [&] { return upstream * m.forward(x); }, &theta[p], 1e-5);
      const double scale = std::max(std::abs(fd), 1e-8);
      CHECK(std::abs(grad[p] - fd) / scale < 1e-4);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("backward_batch accumulates weighted per-state gradients") {
  const RewardModel m = RewardModel::init(7, 4, 8, 2);
  Rng rng(8);
  const int n = 150;
  std::vector<double> features(4 * n);
  for (auto& v : features) v = rng.uniform();
  std::vector<double> upstream(n);
  for (auto& v : upstream) v = rng.uniform(-1.0, 1.0);

  const GradientRecord batch = m.backward_batch(features, n, upstream);
  GradientRecord manual(m.param_count(), 0.0);
  for (int i = 0; i < n; ++i) {
    m.backward(std::span<const double>(features.data() + i * 4, 4), upstream[i],
               manual);
  }
  for (std::size_t p = 0; p < manual.size(); ++p) {
    CHECK(batch[p] == doctest::Approx(manual[p]).epsilon(1e-12));
  }
}

TEST_CASE("prior gradient is -lambda * theta") {
  RewardModel m = RewardModel::init(2, 2, 0, 0);
  auto theta = m.theta();
  theta[0] = 2.0;
  theta[1] = -3.0;
  theta[2] = 0.0;
  const GradientRecord zero = prior_gradient(m, 0.0);
  for (double g : zero) CHECK(g == 0.0);
  const GradientRecord g1 = prior_gradient(m, 1.0);
  CHECK(g1[0] == doctest::Approx(-2.0));
  CHECK(g1[1] == doctest::Approx(3.0));
}

TEST_CASE("an ascent step on the prior alone shrinks theta") {
  RewardModel m = RewardModel::init(3, 3, 4, 1);
  const double before = norm(m.theta());
  AdamState adam;
  adam.lr = 0.01;
  const GradientRecord zeros(m.param_count(), 0.0);
  adam.step(m.theta(), zeros, 0.5);
  CHECK(norm(m.theta()) < before);
}

TEST_CASE("checkpoint JSON round-trips") {
  const RewardModel m = RewardModel::init(42, 5, 8, 3);
  const RewardModel back = RewardModel::from_json(m.to_json());
  CHECK(back.input_dim() == m.input_dim());
  CHECK(std::vector<double>(back.theta().begin(), back.theta().end()) ==
        std::vector<double>(m.theta().begin(), m.theta().end()));
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(back.forward(x) == m.forward(x));
}

TEST_CASE("non-finite parameters are detected") {
  RewardModel m = RewardModel::init(2, 3, 4, 1);
  CHECK(m.finite());
  m.theta()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK(!m.finite());
}
