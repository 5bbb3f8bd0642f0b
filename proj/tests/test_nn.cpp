#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "tinycompress/errors.hpp"
#include "tinycompress/nn.hpp"

using namespace tc;
using namespace tc::nn;

TEST(Architecture, DefaultDetectorParameterCount) {
  const auto arch = Architecture::fault_detector();
  EXPECT_EQ(arch.layer_sizes, (std::vector<std::size_t>{52, 64, 256, 128, 256, 128, 64, 2}));
  std::size_t expected = 0;
  for (std::size_t i = 0; i + 1 < arch.layer_sizes.size(); ++i)
    expected += arch.layer_sizes[i] * arch.layer_sizes[i + 1] + arch.layer_sizes[i + 1];
  EXPECT_EQ(expected, 127234u);
  EXPECT_EQ(arch.parameter_count(), 127234u);
  EXPECT_EQ(arch.weight_count(), 127234u - 898u);
  EXPECT_EQ(DenseModel::zeros(arch).parameter_count(), 127234u);
}

TEST(Architecture, Validation) {
  EXPECT_THROW(Architecture{{5}}.validate(), ArgumentError);
  EXPECT_THROW((Architecture{{5, 0, 2}}.validate()), ArgumentError);
  EXPECT_NO_THROW((Architecture{{2, 3, 2}}.validate()));
}

TEST(Forward, ZeroModelIsUniform) {
  const auto m = DenseModel::zeros(Architecture::fault_detector());
  std::vector<float> x(52, 3.0f);
  const auto p = forward(m, x);
  EXPECT_EQ(p, (Vector{0.5f, 0.5f}));
}

TEST(Forward, HandComputedTwoThreeTwo) {
  // Only two affine maps: the hidden layer is the last hidden layer and has
  // no activation. h = [1, 2, 2], z = [1, 2].
  DenseModel m = DenseModel::zeros(Architecture{{2, 3, 2}});
  m.layers[0].weights = Matrix{{1, 0}, {0, 1}, {1, 1}};
  m.layers[0].bias = {0, 0, -1};
  m.layers[1].weights = Matrix{{1, 0, 0}, {0, 0, 1}};
  const float x[] = {1, 2};
  const auto p = forward(m, x);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(1.0)), 1e-7);
  EXPECT_NEAR(p[1], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-7);
}

TEST(Forward, ReluOnlyBeforeLastHiddenLayer) {
  // Layer 1: z = [-2, 2] -> ReLU -> [0, 2]. Layer 2 (last hidden): [0, -2],
  // kept negative. Output: softmax([0, -2]).
  DenseModel m = DenseModel::zeros(Architecture{{2, 2, 2, 2}});
  m.layers[0].weights = Matrix{{1, -1}, {-1, 1}};
  m.layers[1].weights = Matrix{{1, 0}, {0, -1}};
  m.layers[2].weights = Matrix::identity(2);
  const float x[] = {1, 3};
  const auto p = forward(m, x);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-7);
  EXPECT_NEAR(p[1], std::exp(-2.0) / (1.0 + std::exp(-2.0)), 1e-7);
}

TEST(Forward, ShapeErrors) {
  const auto m = DenseModel::zeros(Architecture{{2, 3, 2}});
  const float x[] = {1, 2, 3};
  EXPECT_THROW(forward(m, x), ShapeError);
  EXPECT_THROW(forward_batch(m, Matrix(4, 3)), ShapeError);
}

TEST(Forward, ProbabilitiesSumToOne) {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    const auto m = testutil::random_model({4, 6, 5, 3}, rng, 2.0);
    std::vector<float> x(4);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-3, 3));
    const auto p = forward(m, x);
    double s = 0;
    for (float v : p) s += v;
    ASSERT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Forward, MatchesDoubleOracleAndBatchPath) {
  Rng rng(5);
  const auto m = testutil::random_model({5, 7, 6, 4, 3}, rng);
  const auto set = testutil::random_set(20, 5, 3, rng);
  const Matrix batch = forward_batch(m, set.inputs);
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto row = set.inputs.row(i);
    const auto single = forward(m, row);
    const auto oracle = testutil::forward_double(m, std::vector<double>(row.begin(), row.end()));
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(single[c], batch(i, c));
      EXPECT_NEAR(single[c], oracle[c], 1e-6);
    }
  }
  EXPECT_EQ(forward_batch(m, set.inputs), batch);
}

TEST(Loss, UniformModelIsLn2) {
  const auto m = DenseModel::zeros(Architecture{{3, 4, 2}});
  Rng rng(1);
  const auto set = testutil::random_set(10, 3, 2, rng);
  EXPECT_NEAR(loss(m, set, 0.0), std::log(2.0), 1e-7);
}

TEST(Loss, ConfidentModelLeavesOnlyPenalty) {
  DenseModel m = DenseModel::zeros(Architecture{{1, 2}});
  m.layers[0].weights = Matrix{{0.5f}, {-0.5f}};
  m.layers[0].bias = {200.0f, -200.0f};
  LabeledSet set{Matrix{{1.0f}, {2.0f}}, {0, 0}};
  EXPECT_NEAR(loss(m, set, 0.1), 0.1 * 0.5 * 0.5, 1e-9);
}

TEST(Loss, MatchesSummedOracle) {
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto m = testutil::random_model({4, 5, 5, 3}, rng);
    const auto set = testutil::random_set(16, 4, 3, rng);
    EXPECT_NEAR(loss(m, set, 1e-3), testutil::loss_double(m, set, 1e-3), 1e-6);
  }
  EXPECT_THROW(loss(DenseModel::zeros(Architecture{{2, 2}}), LabeledSet{Matrix(0, 2), {}}, 0.0), ArgumentError);
}

namespace {

// Central differences of the double-precision oracle loss around each float
// parameter.
void check_gradient(const DenseModel& m, const LabeledSet& set, double l2) {
  const Gradients g = backward(m, set, l2);
  const double eps = 1e-3;
  auto check = [&](float analytic, auto&& perturb) {
    DenseModel plus = m, minus = m;
    const double hp = perturb(plus, eps), hm = perturb(minus, -eps);
    const double fd = (testutil::loss_double(plus, set, l2) - testutil::loss_double(minus, set, l2)) / (hp - hm);
    const double tol = std::max(1e-2 * std::max(std::abs(fd), std::abs(double(analytic))), 1e-4);
    EXPECT_NEAR(analytic, fd, tol);
  };
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i)
      check(g.layers[l].weights.data()[i], [&](DenseModel& mm, double e) {
        float& w = mm.layers[l].weights.data()[i];
        const float before = w;
        w = static_cast<float>(before + e);
        return double(w) - double(before);
      });
    for (std::size_t i = 0; i < m.layers[l].bias.size(); ++i)
      check(g.layers[l].bias[i], [&](DenseModel& mm, double e) {
        float& b = mm.layers[l].bias[i];
        const float before = b;
        b = static_cast<float>(before + e);
        return double(b) - double(before);
      });
  }
}

}  // namespace

TEST(Backward, FiniteDifferencesTwoThreeTwo) {
  Rng rng(2024);
  for (int t = 0; t < 20; ++t) {
    const auto m = testutil::random_model({2, 3, 2}, rng);
    const auto set = testutil::random_set(8, 2, 2, rng);
    check_gradient(m, set, 1e-2);
  }
}

TEST(Backward, FiniteDifferencesWithRelu) {
  Rng rng(99);
  for (int t = 0; t < 5; ++t) {
    const auto m = testutil::random_model({3, 5, 4, 4, 2}, rng);
    const auto set = testutil::random_set(6, 3, 2, rng);
    check_gradient(m, set, 1e-3);
  }
}

TEST(Backward, DuplicatedBatchHasSameMeanGradient) {
  Rng rng(4);
  const auto m = testutil::random_model({3, 4, 4, 2}, rng);
  const auto set = testutil::random_set(10, 3, 2, rng);
  std::vector<std::size_t> twice;
  for (std::size_t i = 0; i < set.size(); ++i) twice.insert(twice.end(), {i, i});
  const auto g1 = backward(m, set, 1e-3);
  const auto g2 = backward(m, set.subset(twice), 1e-3);
  EXPECT_NEAR(g1.loss, g2.loss, 1e-6);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    for (std::size_t i = 0; i < g1.layers[l].weights.size(); ++i)
      EXPECT_NEAR(g1.layers[l].weights.data()[i], g2.layers[l].weights.data()[i], 1e-6);
    for (std::size_t i = 0; i < g1.layers[l].bias.size(); ++i)
      EXPECT_NEAR(g1.layers[l].bias[i], g2.layers[l].bias[i], 1e-6);
  }
}

TEST(Backward, ConfidentBatchHasNoOutputGradient) {
  Rng rng(6);
  auto m = testutil::random_model({3, 4, 2}, rng, 0.1);
  m.layers[1].bias = {500.0f, -500.0f};
  const auto set = testutil::random_set(8, 3, 1, rng);  // every label 0
  const auto g = backward(m, set, 0.0);
  for (float v : g.layers[1].weights.data()) EXPECT_NEAR(v, 0.0f, 1e-12);
  for (float v : g.layers[1].bias) EXPECT_NEAR(v, 0.0f, 1e-12);
}

namespace {

LabeledSet separable(std::size_t n, Rng& rng) {
  LabeledSet s{Matrix(n, 2), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double side = y ? 1.0 : -1.0;
    s.inputs(i, 0) = static_cast<float>(side * rng.uniform(0.5, 2.0));
    s.inputs(i, 1) = static_cast<float>(rng.uniform(-2.0, 2.0));
    s.labels[i] = y;
  }
  return s;
}

}  // namespace

TEST(Train, SeparableToyReachesNinetyNinePercent) {
  Rng rng(12);
  const auto set = separable(400, rng);
  Rng init(1);
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto result = train(DenseModel::he_uniform(Architecture{{2, 16, 16, 2}}, init), set, cfg);
  EXPECT_GE(accuracy(result.model, set), 99.0);
  EXPECT_EQ(result.loss_history.size(), 50u);
}

TEST(Train, ZeroEpochsLeavesModelUntouched) {
  Rng rng(2);
  const auto m = testutil::random_model({3, 4, 2}, rng);
  const auto set = testutil::random_set(10, 3, 2, rng);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train(m, set, cfg);
  EXPECT_EQ(r.model, m);
  EXPECT_TRUE(r.loss_history.empty());
}

TEST(Train, DeterministicGivenSeed) {
  Rng rng(2);
  const auto m = testutil::random_model({3, 8, 8, 2}, rng);
  const auto set = testutil::random_set(100, 3, 2, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 77;
  const auto a = train(m, set, cfg), b = train(m, set, cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.seed = 78;
  EXPECT_NE(train(m, set, cfg).model, a.model);
}

TEST(Train, SmallStepsMoveWeightsProportionally) {
  Rng rng(21);
  const auto m = testutil::random_model({3, 4, 2}, rng);
  const auto set = testutil::random_set(32, 3, 2, rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  auto moved = [&](double lr) {
    cfg.learning_rate = lr;
    const auto r = train(m, set, cfg);
    double d = 0;
    for (std::size_t l = 0; l < m.layers.size(); ++l)
      for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i)
        d = std::max(d, double(std::abs(r.model.layers[l].weights.data()[i] - m.layers[l].weights.data()[i])));
    return d;
  };
  const double d1 = moved(1e-4), d2 = moved(2e-4);
  EXPECT_GT(d1, 0.0);
  EXPECT_NEAR(d2 / d1, 2.0, 0.05);
}

TEST(Train, LogisticRegressionLossDecreases) {
  Rng rng(31);
  const auto set = separable(256, rng);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.learning_rate = 0.05;
  const auto r = train(DenseModel::zeros(Architecture{{2, 2}}), set, cfg);
  double first = 0, last = 0;
  for (int i = 0; i < 10; ++i) {
    first += r.loss_history[i];
    last += r.loss_history[30 + i];
  }
  EXPECT_LT(last, first);
}

TEST(Train, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Accuracy, ZeroModelTiesToClassZero) {
  const auto m = DenseModel::zeros(Architecture{{2, 2}});
  LabeledSet set{Matrix(10, 2, 1.0f), {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}};
  EXPECT_DOUBLE_EQ(accuracy(m, set), 50.0);
}

TEST(Accuracy, HandLabeledFixture) {
  // Identity scores: the prediction is the larger feature.
  DenseModel m = DenseModel::zeros(Architecture{{2, 2}});
  m.layers[0].weights = Matrix::identity(2);
  LabeledSet set{Matrix{{1, 0}, {0, 1}, {2, 3}, {5, 1}, {0, 0}, {-1, -2}, {3, 3}, {0.5, 0.4}, {7, 8}, {-3, 1}},
                 {0, 1, 0, 0, 1, 0, 0, 1, 1, 1}};
  // predictions: 0 1 1 0 0 0 0 0 1 1 -> correct at rows 0,1,3,5,6,8,9
  EXPECT_DOUBLE_EQ(accuracy(m, set), 70.0);
  EXPECT_THROW(accuracy(m, LabeledSet{Matrix(0, 2), {}}), ArgumentError);
}

TEST(Accuracy, PerfectModel) {
  DenseModel m = DenseModel::zeros(Architecture{{2, 2}});
  m.layers[0].weights = Matrix::identity(2);
  LabeledSet set{Matrix{{1, 0}, {0, 1}, {4, 2}}, {0, 1, 0}};
  EXPECT_DOUBLE_EQ(accuracy(m, set), 100.0);
}
