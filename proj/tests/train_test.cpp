//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "grappa/train.h"
#include "support/synthetic.h"

namespace grappa {
namespace {

using ad::Tensor;

Tensor column(std::vector<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i)
    m(static_cast<int>(i), 0) = v[i];
  return Tensor::constant(m);
}

TEST(Loss, ExactValues) {
  const Tensor zero = column({ 0.0, 0.0 });
  EXPECT_EQ(loss_mse(column({ 1.5, -2.0 }), column({ 1.5, -2.0 })).item(), 0.0);
  EXPECT_DOUBLE_EQ(loss_mse(column({ 1.0, -1.0 }), zero).item(), 1.0);
  EXPECT_DOUBLE_EQ(loss_mae(column({ 1.0, -1.0 }), zero).item(), 1.0);
  EXPECT_DOUBLE_EQ(loss_mse(column({ 0.5 }), column({ 0.0 })).item(), 0.25);
  EXPECT_DOUBLE_EQ(loss_huber(column({ 0.3 }), column({ 0.0 })).item(), 0.045);
  EXPECT_DOUBLE_EQ(loss_huber(column({ 1.0 }), column({ 0.0 })).item(), 0.375);
  EXPECT_DOUBLE_EQ(loss_huber(column({ 0.5 }), column({ 0.0 })).item(), 0.125);
}

TEST(Loss, Errors) {
  const Tensor empty = Tensor::constant(Matrix(0, 1));
  EXPECT_THROW(loss_mse(empty, empty), std::invalid_argument);
  EXPECT_THROW(loss_mae(empty, empty), std::invalid_argument);
  EXPECT_THROW(loss_huber(empty, empty), std::invalid_argument);
  EXPECT_THROW(loss_mse(column({ 1, 2 }), column({ 1 })), ShapeError);
  EXPECT_THROW(loss_huber(column({ 1 }), column({ 1 }), 0.0),
               std::invalid_argument);
}

TEST(Loss, HuberIsHalfSquareInsideAndC1AtThreshold) {
  const double delta = 0.5;
  for (double r = -0.5; r <= 0.5; r += 0.05)
    EXPECT_NEAR(loss_huber(column({ r }), column({ 0.0 }), delta).item(),
                0.5 * r * r, 1e-15);
  // Slopes from either side of |r| = delta agree.
  const double h = 1e-6;
  auto f = [&](double r) {
    return loss_huber(column({ r }), column({ 0.0 }), delta).item();
  };
  const double left = (f(delta) - f(delta - h)) / h;
  const double right = (f(delta + h) - f(delta)) / h;
  EXPECT_NEAR(left, right, 1e-5);
  EXPECT_NEAR(left, delta, 1e-5);
}

TEST(Loss, HuberGradientIsClipped) {
  Tensor pred = Tensor::parameter(Matrix(2, 1, { 0.2, 3.0 }));
  ad::backward(loss_huber(pred, column({ 0.0, 0.0 })));
  EXPECT_DOUBLE_EQ(pred.grad()(0, 0), 0.2 / 2);
  EXPECT_DOUBLE_EQ(pred.grad()(1, 0), 0.5 / 2);
}

TEST(AdamW, ZeroGradientZeroDecayLeavesParams) {
  Tensor x = Tensor::parameter(Matrix(2, 2, { 1, -2, 3, 0.5 }));
  const Matrix before = x.value();
  AdamW::Options o;
  o.weight_decay = 0.0;
  AdamW opt({ x }, o);
  opt.zero_grad();
  opt.step(0.1);
  EXPECT_EQ(x.value(), before);
}

TEST(AdamW, DecayOnlyShrinksByFactor) {
  Tensor x = Tensor::parameter(Matrix(1, 3, { 1, -2, 4 }));
  AdamW::Options o;
  o.weight_decay = 0.1;
  AdamW opt({ x }, o);
  opt.zero_grad();
  opt.step(0.01);
  const double f = 1.0 - 0.01 * 0.1;
  EXPECT_DOUBLE_EQ(x.value()(0, 0), 1.0 * f);
  EXPECT_DOUBLE_EQ(x.value()(0, 1), -2.0 * f);
  EXPECT_DOUBLE_EQ(x.value()(0, 2), 4.0 * f);
}

TEST(AdamW, TwoStepsOnSquareMatchHandReference) {
  Tensor x = Tensor::parameter(Matrix(1, 1, { 1.0 }));
  AdamW opt({ x });
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.01;
  double w = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    opt.zero_grad();
    ad::backward(ad::sum_all(ad::square(x)));
    opt.step(lr);

    const double g = 2.0 * w;
    w *= 1.0 - lr * wd;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    w -= lr * mhat / (std::sqrt(vhat) + eps);
    EXPECT_NEAR(x.value()(0, 0), w, 1e-15) << "step " << t;
  }
  EXPECT_EQ(opt.steps(), 2);
}

TEST(AdamW, NonFiniteGradientLeavesParamsUntouched) {
  Tensor a = Tensor::parameter(Matrix(1, 1, { 1.0 }));
  Tensor b = Tensor::parameter(Matrix(1, 1, { 2.0 }));
  AdamW opt({ a, b });
  opt.zero_grad();
  ad::backward(ad::sum_all(ad::add(a, b)));
  b.node()->ensure_grad()(0, 0) = std::nan("");
  EXPECT_THROW(opt.step(0.1), ad::NonFiniteError);
  EXPECT_EQ(a.value()(0, 0), 1.0);
  EXPECT_EQ(opt.steps(), 0);
}

TEST(AdamW, DecreasesConvexLoss) {
  // Linear model y = X w with quadratic loss.
  Rng rng(2);
  Matrix xs(20, 3), ys(20, 1);
  for (int i = 0; i < 20; ++i) {
    for (int c = 0; c < 3; ++c)
      xs(i, c) = rng.uniform(-1, 1);
    ys(i, 0) = 2 * xs(i, 0) - xs(i, 1) + 0.5 * xs(i, 2);
  }
  Tensor w = Tensor::parameter(Matrix(3, 1));
  AdamW opt({ w });
  auto loss = [&] {
    return loss_mse(ad::matmul(Tensor::constant(xs), w), Tensor::constant(ys));
  };
  double prev = loss().item();
  for (int it = 0; it < 50; ++it) {
    opt.zero_grad();
    ad::backward(loss());
    opt.step(1e-2);
    const double now = loss().item();
    EXPECT_LT(now, prev) << "step " << it;
    prev = now;
  }
}

TEST(OneCycle, PeakIsMaxLrAndEndsAtFinal) {
  for (long total: { 10L, 100L, 1234L }) {
    const OneCycle s(total, 1e-3);
    const double peak = s.peak_step();
    if (peak == std::floor(peak))
      EXPECT_DOUBLE_EQ(s.lr(static_cast<long>(peak)), 1e-3) << total;
    double mx = 0.0;
    for (long k = 0; k < total; ++k)
      mx = std::max(mx, s.lr(k));
    EXPECT_LE(mx, 1e-3 * (1 + 1e-15));
    EXPECT_NEAR(s.lr(0), 1e-3 / 25, 1e-18);
    EXPECT_NEAR(s.lr(total - 1), 1e-3 / 1e4, 1e-18);
  }
  EXPECT_DOUBLE_EQ(OneCycle(100, 0.01).lr(29), 0.01);
}

TEST(OneCycle, WarmUpRisesThenAnnealFalls) {
  const OneCycle s(200, 1e-3);
  for (long k = 1; k < 200; ++k) {
    if (k <= s.peak_step())
      EXPECT_GE(s.lr(k), s.lr(k - 1));
    else
      EXPECT_LE(s.lr(k), s.lr(k - 1));
  }
}

TEST(OneCycle, RejectsBadArguments) {
  EXPECT_THROW(OneCycle(0, 1e-3), std::invalid_argument);
  EXPECT_THROW(OneCycle(10, 0.0), std::invalid_argument);
  EXPECT_THROW(OneCycle(10, 1e-3, 1.0), std::invalid_argument);
}

TEST(Plateau, ImprovingMetricKeepsRate) {
  Plateau p(1e-3);
  for (int e = 0; e < 50; ++e)
    EXPECT_EQ(p.step(10.0 - 0.1 * e), 1e-3);
}

TEST(Plateau, SixFlatEpochsHalveOnce) {
  Plateau p(1e-3);
  for (int e = 0; e < 5; ++e)
    EXPECT_EQ(p.step(1.0), 1e-3);
  EXPECT_EQ(p.step(1.0), 5e-4);
  // The counter restarts after a reduction.
  for (int e = 0; e < 4; ++e)
    EXPECT_EQ(p.step(1.0), 5e-4);
  EXPECT_EQ(p.step(1.0), 2.5e-4);
}

TEST(Plateau, RespectsMinimumRate) {
  Plateau p(1e-3, 0.5, 1, 6e-4);
  p.step(1.0);
  EXPECT_EQ(p.step(1.0), 6e-4);
  EXPECT_EQ(p.step(1.0), 6e-4);
}

class FitTest: public ::testing::Test {
protected:
  void SetUp() override {
    const VpDataset ds = testing::synthetic_dataset(6);
    train = TrainingSet::from_dataset(ds.filter(Split::kTrain));
    valid = TrainingSet::from_dataset(ds.filter(Split::kValid));
    cfg.batch_size = 8;
    cfg.warmup_epochs = 3;
    cfg.main_epochs = 3;
    cfg.max_lr = 1e-2;
    cfg.main_lr = 3e-3;
    cfg.seed = 7;
  }

  TrainingSet train, valid;
  TrainConfig cfg;
};

TEST_F(FitTest, HistoryShapeAndBestCheckpoint) {
  GrappaModel model(cfg.arch, cfg.seed);
  const FitResult r = fit(model, train, valid, cfg);
  ASSERT_EQ(r.history.size(), 6u);
  EXPECT_EQ(r.history.front().phase, "warmup");
  EXPECT_EQ(r.history.back().phase, "main");
  for (const HistoryRow &row: r.history) {
    EXPECT_LE(r.best_valid_mape_i, row.valid_mape_i);
    EXPECT_TRUE(std::isfinite(row.train_loss));
  }
  EXPECT_EQ(r.history[r.best_epoch - 1].valid_mape_i, r.best_valid_mape_i);
  // The model holds the best checkpoint.
  EXPECT_EQ(model.state(), r.best_state);
  EXPECT_DOUBLE_EQ(mape_i(model, valid), r.best_valid_mape_i);
}

TEST_F(FitTest, BitwiseReproducible) {
  GrappaModel a(cfg.arch, cfg.seed), b(cfg.arch, cfg.seed);
  const FitResult ra = fit(a, train, valid, cfg);
  const FitResult rb = fit(b, train, valid, cfg);
  EXPECT_EQ(history_csv(ra.history), history_csv(rb.history));
  EXPECT_EQ(a.state(), b.state());
}

TEST_F(FitTest, RejectsOverlapAndEmptySets) {
  GrappaModel model(cfg.arch, 0);
  EXPECT_THROW(fit(model, train, train, cfg), std::invalid_argument);
  EXPECT_THROW(fit(model, train, TrainingSet{}, cfg), std::invalid_argument);
}

TEST_F(FitTest, EarlyStoppingTruncatesMainPhase) {
  cfg.warmup_epochs = 1;
  cfg.main_epochs = 30;
  cfg.main_lr = 0.5;  // diverging steps never improve
  cfg.early_stopping_patience = 2;
  GrappaModel model(cfg.arch, cfg.seed);
  const FitResult r = fit(model, train, valid, cfg);
  EXPECT_LT(r.history.size(), 31u);
}

TEST_F(FitTest, CsvHeader) {
  const std::string csv = history_csv({ { 1, "warmup", 1e-3, 0.5, 12.5 } });
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,phase,lr,train_loss,valid_mape_i");
}

TEST(Grid, FullGridHas120Cells) {
  const auto cells = enumerate_grid(GridSpec{});
  EXPECT_EQ(cells.size(), 120u);
  std::set<std::tuple<int, int, int, int>> seen;
  for (const GridCell &c: cells)
    seen.insert({ c.gat_layers, c.heads, c.hidden_layers,
                  static_cast<int>(c.pooling) });
  EXPECT_EQ(seen.size(), 120u);
}

TEST_F(FitTest, GridOfOneEqualsSingleFit) {
  cfg.grid.gat_layers = { 2 };
  cfg.grid.heads = { 1 };
  cfg.grid.hidden_layers = { 1 };
  cfg.grid.pooling = { Pooling::kSum };
  const auto results = grid_search(cfg, train, valid);
  ASSERT_EQ(results.size(), 1u);

  TrainConfig single = cfg;
  single.arch.gat_layers = 2;
  single.arch.heads = 1;
  single.arch.hidden_layers = 1;
  single.arch.pooling = Pooling::kSum;
  GrappaModel model(single.arch, single.seed);
  const FitResult r = fit(model, train, valid, single);
  EXPECT_EQ(results[0].valid_mape_i, r.best_valid_mape_i);
  EXPECT_EQ(results[0].best_epoch, r.best_epoch);
  EXPECT_EQ(results[0].num_parameters, model.num_parameters());
}

TEST_F(FitTest, GridRankingIsTotalAndDeterministic) {
  cfg.grid.gat_layers = { 2, 3 };
  cfg.grid.heads = { 1, 2 };
  cfg.grid.hidden_layers = { 1 };
  cfg.grid.pooling = { Pooling::kSum, Pooling::kInteraction };
  cfg.grid.warmup_epochs = 1;
  cfg.grid.main_epochs = 1;
  const auto a = grid_search(cfg, train, valid, 1);
  const auto b = grid_search(cfg, train, valid, 4);
  ASSERT_EQ(a.size(), 8u);
  EXPECT_EQ(grid_csv(a), grid_csv(b));
  for (std::size_t k = 1; k < a.size(); ++k)
    EXPECT_TRUE(a[k - 1].valid_mape_i < a[k].valid_mape_i
                || (a[k - 1].valid_mape_i == a[k].valid_mape_i
                    && a[k - 1].cell.index < a[k].cell.index));
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c;
  c.batch_size = 16;
  c.points_per_molecule = 1;
  c.recalibrate_batch_norm = true;
  c.max_lr = 3e-2;
  c.seed = 42;
  c.arch.pooling = Pooling::kSum;
  c.grid.heads = { 1, 3 };
  const TrainConfig back = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.seed, 42u);
  EXPECT_TRUE(back.recalibrate_batch_norm);
}

TEST(Config, DefaultsAndRejects) {
  const TrainConfig d = TrainConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(d.batch_size, 512);
  EXPECT_EQ(d.warmup_epochs, 100);
  EXPECT_EQ(d.main_epochs, 200);
  EXPECT_EQ(d.huber_delta, 0.5);
  EXPECT_EQ(d.max_lr, 1e-3);
  EXPECT_EQ(d.plateau_factor, 0.5);
  EXPECT_EQ(d.plateau_patience, 5);
  EXPECT_THROW(TrainConfig::from_json({ { "bogus", 1 } }),
               std::invalid_argument);
  EXPECT_THROW(TrainConfig::from_json({ { "batch_size", 0 } }),
               std::invalid_argument);
  EXPECT_THROW(TrainConfig::from_json({ { "max_lr", -1.0 } }),
               std::invalid_argument);
  TrainConfig c;
  c.grid.heads = { 6 };
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.grid.pooling = {};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace grappa
