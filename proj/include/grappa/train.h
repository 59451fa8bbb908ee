//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Losses, AdamW, learning-rate schedules, the two-phase training loop, and
// the hyperparameter grid search.

#ifndef GRAPPA_TRAIN_H_
#define GRAPPA_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "grappa/dataio.h"
#include "grappa/metrics.h"
#include "grappa/model.h"

namespace grappa {

// Mean losses over a column of predictions and targets (equal shapes).
ad::Tensor loss_mse(const ad::Tensor &pred, const ad::Tensor &target);
ad::Tensor loss_mae(const ad::Tensor &pred, const ad::Tensor &target);
ad::Tensor loss_huber(const ad::Tensor &pred, const ad::Tensor &target,
                      double delta = 0.5);

class AdamW {
public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW(std::vector<ad::Tensor> params, Options options);
  explicit AdamW(std::vector<ad::Tensor> params): AdamW(std::move(params), Options{}) { }

  // Applies one update from the accumulated gradients. Throws
  // ad::NonFiniteError on non-finite gradients before touching anything.
  void step(double lr);
  void zero_grad();
  long steps() const { return t_; }

private:
  std::vector<ad::Tensor> params_;
  std::vector<Matrix> m_, v_;
  Options opt_;
  long t_ = 0;
};

// Cosine warm-up from max_lr / div_factor to max_lr over the first
// pct_start of steps, then cosine annealing to max_lr / final_div_factor.
class OneCycle {
public:
  OneCycle(long total_steps, double max_lr, double pct_start = 0.3,
           double div_factor = 25.0, double final_div_factor = 1e4);
  double lr(long step) const;
  double peak_step() const { return peak_; }
  long total_steps() const { return total_; }

private:
  long total_;
  double max_lr_, initial_lr_, final_lr_, peak_;
};

// Multiplies the learning rate by factor once the metric has failed to
// improve strictly for `patience` consecutive epochs.
class Plateau {
public:
  Plateau(double lr, double factor = 0.5, int patience = 5,
          double min_lr = 0.0);
  // Records one epoch's metric and returns the learning rate to use next.
  double step(double metric);
  double lr() const { return lr_; }
  int bad_epochs() const { return bad_; }

private:
  double lr_, factor_, min_lr_;
  int patience_, bad_ = 0;
  bool has_best_ = false;
  double best_ = 0.0;
};

struct GridSpec {
  std::vector<int> gat_layers = { 2, 3, 4, 5 };
  std::vector<int> heads = { 1, 2, 3, 4, 5 };
  std::vector<int> hidden_layers = { 1, 2, 3 };
  std::vector<Pooling> pooling = { Pooling::kSum, Pooling::kInteraction };
  // Epoch budgets used per cell; negative keeps the main config values.
  int warmup_epochs = -1;
  int main_epochs = -1;
};

struct TrainConfig {
  Architecture arch;
  int batch_size = 512;  // molecules per optimizer step
  // Points each molecule contributes per step; 0 uses all of its points.
  // Smaller values give more steps per epoch while every step still sees
  // the same molecules, which keeps batch-norm statistics stable.
  int points_per_molecule = 0;
  // Reset batch-norm running statistics to the exact statistics of the
  // training molecules after every epoch (before validation).
  bool recalibrate_batch_norm = false;
  int warmup_epochs = 100;
  int main_epochs = 200;
  double huber_delta = 0.5;
  double max_lr = 1e-3;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  double main_lr = 1e-3;  // initial learning rate of the Huber phase
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  double weight_decay = 0.01;
  // Stop the Huber phase after this many epochs without a new best
  // validation MAPE_i; 0 disables.
  int early_stopping_patience = 0;
  double min_denominator = 1.0;  // floor on C + T during training, K
  std::uint64_t seed = 0;
  GridSpec grid;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys raise.
  static TrainConfig from_json(const nlohmann::json &j);
};

struct TrainingPoint {
  int graph = 0;
  double temperature_k = 0.0;
  double pressure_pa = 0.0;
  double ln_p_kpa = 0.0;
};

// Featurized components and their points, ready for batching.
struct TrainingSet {
  std::vector<std::string> component_ids;
  std::vector<MolGraph> graphs;
  std::vector<TrainingPoint> points;

  // All components of ds (use VpDataset::filter to select a split).
  static TrainingSet from_dataset(const VpDataset &ds);
  bool empty() const { return points.empty(); }
};

// Predicted pressures for every point; C + T is floored at
// min_denominator as during training.
std::vector<EvalPoint> evaluate_points(const GrappaModel &model,
                                       const TrainingSet &set,
                                       double min_denominator = 1.0);
double mape_i(const GrappaModel &model, const TrainingSet &set,
              double min_denominator = 1.0);

struct HistoryRow {
  int epoch = 0;  // 1-based over both phases
  std::string phase;  // "warmup" or "main"
  double lr = 0.0;  // learning rate at the end of the epoch
  double train_loss = 0.0;
  double valid_mape_i = 0.0;
};

struct FitResult {
  ModelState best_state;
  int best_epoch = 0;
  double best_valid_mape_i = 0.0;
  std::vector<HistoryRow> history;
};

using EpochCallback = std::function<void(const HistoryRow &)>;

// Two-phase training; the model ends up holding the best checkpoint.
FitResult fit(GrappaModel &model, const TrainingSet &train,
              const TrainingSet &valid, const TrainConfig &cfg,
              const EpochCallback &on_epoch = {});

std::string history_csv(const std::vector<HistoryRow> &history);

struct GridCell {
  int index = 0;
  int gat_layers = 0;
  int heads = 0;
  int hidden_layers = 0;
  Pooling pooling = Pooling::kSum;
};

std::vector<GridCell> enumerate_grid(const GridSpec &grid);

struct GridResult {
  GridCell cell;
  double valid_mape_i = 0.0;
  int best_epoch = 0;
  std::size_t num_parameters = 0;
};

// Trains every cell (jobs threads) and ranks by validation MAPE_i, ties by
// cell index.
std::vector<GridResult> grid_search(const TrainConfig &cfg,
                                    const TrainingSet &train,
                                    const TrainingSet &valid, int jobs = 1);
std::string grid_csv(const std::vector<GridResult> &results);

}  // namespace grappa

#endif  // GRAPPA_TRAIN_H_
