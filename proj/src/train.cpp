//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/train.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace grappa {
namespace {
using nlohmann::json;

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

void require_same(const ad::Tensor &pred, const ad::Tensor &target,
                  const char *what) {
  if (!pred.value().same_shape(target.value()))
    throw ShapeError(std::string(what) + ": prediction "
                     + pred.value().shape_string() + " vs target "
                     + target.value().shape_string());
  if (pred.value().size() == 0)
    throw std::invalid_argument(std::string(what) + ": empty batch");
}

template <class T>
bool subset_of(const std::vector<T> &values, const std::set<T> &allowed) {
  return std::all_of(values.begin(), values.end(),
                     [&](const T &v) { return allowed.count(v) > 0; });
}

// One optimizer step: molecules with the points they contribute.
using Step = std::vector<std::pair<int, std::vector<int>>>;

// Splits an epoch into steps. Molecules are chunked into groups of
// batch_size; with points_per_molecule > 0 every molecule contributes that
// many of its points per round, so one epoch holds several rounds. A group
// holding a single molecule is merged into its predecessor because
// training-mode batch norm needs two rows. The step count depends only on
// the point counts, never on the shuffle.
std::vector<Step> plan_epoch(const std::vector<int> &order,
                             const std::vector<std::vector<int>> &points_of,
                             int batch_size, int points_per_molecule) {
  std::size_t rounds = 1;
  if (points_per_molecule > 0) {
    for (int g: order) {
      const std::size_t k = points_of[g].size();
      rounds = std::max(rounds, (k + points_per_molecule - 1)
                                    / points_per_molecule);
    }
  }
  std::vector<Step> steps;
  for (std::size_t r = 0; r < rounds; ++r) {
    Step active;
    for (int g: order) {
      const auto &pts = points_of[g];
      if (points_per_molecule <= 0) {
        active.emplace_back(g, pts);
        continue;
      }
      const std::size_t begin = r * points_per_molecule;
      if (begin >= pts.size())
        continue;
      const std::size_t end =
          std::min(pts.size(), begin + points_per_molecule);
      active.emplace_back(g, std::vector<int>(pts.begin() + begin,
                                              pts.begin() + end));
    }
    for (std::size_t i = 0; i < active.size(); i += batch_size) {
      const std::size_t end = std::min(active.size(), i + batch_size);
      steps.emplace_back(active.begin() + i, active.begin() + end);
    }
    if (steps.size() > 1 && steps.back().size() == 1) {
      auto lone = std::move(steps.back().front());
      steps.pop_back();
      Step &prev = steps.back();
      auto it = std::find_if(prev.begin(), prev.end(), [&](const auto &e) {
        return e.first == lone.first;
      });
      if (it == prev.end())
        prev.push_back(std::move(lone));
      else
        it->second.insert(it->second.end(), lone.second.begin(),
                          lone.second.end());
    }
  }
  return steps;
}

struct BatchLoss {
  double loss = 0.0;
  std::size_t points = 0;
};

BatchLoss train_step(GrappaModel &model, const TrainingSet &set,
                     const Step &step, bool huber, const TrainConfig &cfg,
                     AdamW &opt, double lr) {
  std::vector<const MolGraph *> graphs;
  std::vector<int> molecule_rows;
  std::vector<int> rows;
  std::vector<double> temps;
  std::vector<double> targets;
  for (std::size_t k = 0; k < step.size(); ++k) {
    graphs.push_back(&set.graphs[step[k].first]);
    molecule_rows.push_back(static_cast<int>(k));
    for (int i: step[k].second) {
      rows.push_back(static_cast<int>(k));
      temps.push_back(set.points[i].temperature_k);
      targets.push_back(set.points[i].ln_p_kpa);
    }
  }
  const ad::Tensor per_molecule =
      model.forward(graphs, molecule_rows, ad::Mode::kTrain);
  const ad::Tensor params = ad::gather_rows(per_molecule, rows);
  const ad::Tensor pred =
      ln_vapor_pressure(params, temps, cfg.min_denominator);
  const int n = static_cast<int>(targets.size());
  const ad::Tensor y =
      ad::Tensor::constant(Matrix(n, 1, std::move(targets)));
  const ad::Tensor loss =
      huber ? loss_huber(pred, y, cfg.huber_delta) : loss_mse(pred, y);
  opt.zero_grad();
  ad::backward(loss);
  opt.step(lr);
  return { loss.item(), static_cast<std::size_t>(n) };
}

std::vector<ad::Tensor> trainable(const GrappaModel &model) {
  std::vector<ad::Tensor> out;
  for (auto &[name, t]: model.parameters())
    out.push_back(t);
  return out;
}

void standardize_counts(GrappaModel &model, const TrainingSet &train) {
  HeadParams &head = model.head();
  for (int k = 0; k < 2; ++k) {
    double mean = 0.0, sq = 0.0;
    for (const TrainingPoint &p: train.points) {
      const MolGraph &g = train.graphs[p.graph];
      const double v = k == 0 ? g.h_donors : g.h_acceptors;
      mean += v;
      sq += v * v;
    }
    const double n = static_cast<double>(train.points.size());
    mean /= n;
    const double var = std::max(sq / n - mean * mean, 0.0);
    head.count_shift[k] = mean;
    head.count_scale[k] = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
  }
}
}  // namespace

ad::Tensor loss_mse(const ad::Tensor &pred, const ad::Tensor &target) {
  require_same(pred, target, "loss_mse");
  return ad::mean_all(ad::square(ad::sub(pred, target)));
}

ad::Tensor loss_mae(const ad::Tensor &pred, const ad::Tensor &target) {
  require_same(pred, target, "loss_mae");
  return ad::mean_all(ad::abs(ad::sub(pred, target)));
}

ad::Tensor loss_huber(const ad::Tensor &pred, const ad::Tensor &target,
                      double delta) {
  require_same(pred, target, "loss_huber");
  if (!(delta > 0.0))
    throw std::invalid_argument("loss_huber: delta must be positive");
  return ad::mean_all(ad::huber(ad::sub(pred, target), delta));
}

AdamW::AdamW(std::vector<ad::Tensor> params, Options options)
    : params_(std::move(params)), opt_(options) {
  for (const ad::Tensor &p: params_) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void AdamW::step(double lr) {
  std::vector<Matrix> grads;
  grads.reserve(params_.size());
  for (const ad::Tensor &p: params_) {
    grads.push_back(p.grad());
    for (double g: grads.back().values())
      if (!std::isfinite(g))
        throw ad::NonFiniteError("AdamW: non-finite gradient");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Matrix &w = params_[k].mutable_value();
    const Matrix &g = grads[k];
    Matrix &m = m_[k];
    Matrix &v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] *= 1.0 - lr * opt_.weight_decay;
      m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g[i];
      v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + opt_.eps);
    }
  }
}

void AdamW::zero_grad() {
  for (ad::Tensor &p: params_)
    p.zero_grad();
}

OneCycle::OneCycle(long total_steps, double max_lr, double pct_start,
                   double div_factor, double final_div_factor)
    : total_(total_steps), max_lr_(max_lr),
      initial_lr_(max_lr / div_factor), final_lr_(max_lr / final_div_factor),
      peak_(pct_start * static_cast<double>(total_steps) - 1.0) {
  if (total_steps <= 0)
    throw std::invalid_argument("OneCycle: total_steps must be positive");
  if (!(max_lr > 0.0) || !(div_factor > 0.0) || !(final_div_factor > 0.0))
    throw std::invalid_argument("OneCycle: rates must be positive");
  if (!(pct_start > 0.0 && pct_start < 1.0))
    throw std::invalid_argument("OneCycle: pct_start must be in (0, 1)");
}

double OneCycle::lr(long step) const {
  auto cosine = [](double start, double end, double pct) {
    return end + 0.5 * (start - end) * (std::cos(M_PI * pct) + 1.0);
  };
  const double s = static_cast<double>(std::clamp(step, 0L, total_ - 1));
  const double last = static_cast<double>(total_ - 1);
  if (peak_ <= 0.0) {
    // Too few steps for a warm-up: start at the peak.
    return last <= 0.0 ? max_lr_ : cosine(max_lr_, final_lr_, s / last);
  }
  if (s <= peak_)
    return cosine(initial_lr_, max_lr_, s / peak_);
  if (last <= peak_)
    return max_lr_;
  return cosine(max_lr_, final_lr_, (s - peak_) / (last - peak_));
}

Plateau::Plateau(double lr, double factor, int patience, double min_lr)
    : lr_(lr), factor_(factor), min_lr_(min_lr), patience_(patience) {
  if (!(factor > 0.0 && factor < 1.0))
    throw std::invalid_argument("Plateau: factor must be in (0, 1)");
  if (patience < 1)
    throw std::invalid_argument("Plateau: patience must be >= 1");
}

double Plateau::step(double metric) {
  if (!has_best_ || metric < best_) {
    has_best_ = true;
    best_ = metric;
    bad_ = 0;
    return lr_;
  }
  if (++bad_ >= patience_) {
    lr_ = std::max(lr_ * factor_, min_lr_);
    bad_ = 0;
  }
  return lr_;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument("invalid training config: " + what);
  };
  arch.validate();
  if (batch_size < 2)
    fail("batch_size must be >= 2");
  if (points_per_molecule < 0)
    fail("points_per_molecule must be >= 0");
  if (warmup_epochs < 0 || main_epochs < 0 || warmup_epochs + main_epochs < 1)
    fail("epoch counts must be non-negative with at least one epoch");
  if (!(huber_delta > 0.0) || !(max_lr > 0.0) || !(main_lr > 0.0)
      || !(div_factor > 0.0) || !(final_div_factor > 0.0))
    fail("delta and learning rates must be positive");
  if (!(pct_start > 0.0 && pct_start < 1.0))
    fail("pct_start must be in (0, 1)");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    fail("plateau_factor must be in (0, 1)");
  if (plateau_patience < 1)
    fail("plateau_patience must be >= 1");
  if (weight_decay < 0.0)
    fail("weight_decay must be >= 0");
  if (early_stopping_patience < 0)
    fail("early_stopping_patience must be >= 0");
  if (!(min_denominator > 0.0))
    fail("min_denominator must be positive");
  if (grid.gat_layers.empty() || grid.heads.empty()
      || grid.hidden_layers.empty() || grid.pooling.empty())
    fail("grid lists must be non-empty");
  if (!subset_of(grid.gat_layers, { 2, 3, 4, 5 }))
    fail("grid.gat_layers must be drawn from {2,3,4,5}");
  if (!subset_of(grid.heads, { 1, 2, 3, 4, 5 }))
    fail("grid.heads must be drawn from {1,...,5}");
  if (!subset_of(grid.hidden_layers, { 1, 2, 3 }))
    fail("grid.hidden_layers must be drawn from {1,2,3}");
}

json TrainConfig::to_json() const {
  json pools = json::array();
  for (Pooling p: grid.pooling)
    pools.push_back(to_string(p));
  return { { "arch", arch.to_json() },
           { "batch_size", batch_size },
           { "points_per_molecule", points_per_molecule },
           { "recalibrate_batch_norm", recalibrate_batch_norm },
           { "warmup_epochs", warmup_epochs },
           { "main_epochs", main_epochs },
           { "huber_delta", huber_delta },
           { "max_lr", max_lr },
           { "pct_start", pct_start },
           { "div_factor", div_factor },
           { "final_div_factor", final_div_factor },
           { "main_lr", main_lr },
           { "plateau_factor", plateau_factor },
           { "plateau_patience", plateau_patience },
           { "weight_decay", weight_decay },
           { "early_stopping_patience", early_stopping_patience },
           { "min_denominator", min_denominator },
           { "seed", seed },
           { "grid",
             { { "gat_layers", grid.gat_layers },
               { "heads", grid.heads },
               { "hidden_layers", grid.hidden_layers },
               { "pooling", pools },
               { "warmup_epochs", grid.warmup_epochs },
               { "main_epochs", grid.main_epochs } } } };
}

TrainConfig TrainConfig::from_json(const json &j) {
  if (!j.is_object())
    throw std::invalid_argument("training config must be a JSON object");
  static const std::set<std::string> known = {
    "arch",        "batch_size",       "warmup_epochs",
    "main_epochs", "huber_delta",      "max_lr",
    "pct_start",   "div_factor",       "final_div_factor",
    "main_lr",     "plateau_factor",   "plateau_patience",
    "weight_decay", "early_stopping_patience", "min_denominator",
    "seed",        "grid",             "points_per_molecule",
    "recalibrate_batch_norm"
  };
  for (const auto &[key, value]: j.items())
    if (!known.count(key))
      throw std::invalid_argument("unknown training config key '" + key + "'");
  TrainConfig c;
  try {
    auto read = [&](const char *key, auto &field) {
      if (j.contains(key))
        field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("arch"))
      c.arch = Architecture::from_json(j.at("arch"));
    read("batch_size", c.batch_size);
    read("points_per_molecule", c.points_per_molecule);
    read("recalibrate_batch_norm", c.recalibrate_batch_norm);
    read("warmup_epochs", c.warmup_epochs);
    read("main_epochs", c.main_epochs);
    read("huber_delta", c.huber_delta);
    read("max_lr", c.max_lr);
    if (!j.contains("main_lr"))
      c.main_lr = c.max_lr;
    read("pct_start", c.pct_start);
    read("div_factor", c.div_factor);
    read("final_div_factor", c.final_div_factor);
    read("main_lr", c.main_lr);
    read("plateau_factor", c.plateau_factor);
    read("plateau_patience", c.plateau_patience);
    read("weight_decay", c.weight_decay);
    read("early_stopping_patience", c.early_stopping_patience);
    read("min_denominator", c.min_denominator);
    read("seed", c.seed);
    if (j.contains("grid")) {
      const json &g = j.at("grid");
      if (g.contains("gat_layers"))
        c.grid.gat_layers = g.at("gat_layers").get<std::vector<int>>();
      if (g.contains("heads"))
        c.grid.heads = g.at("heads").get<std::vector<int>>();
      if (g.contains("hidden_layers"))
        c.grid.hidden_layers = g.at("hidden_layers").get<std::vector<int>>();
      if (g.contains("pooling")) {
        c.grid.pooling.clear();
        for (const auto &name: g.at("pooling").get<std::vector<std::string>>()) {
          const auto p = parse_pooling(name);
          if (!p)
            throw std::invalid_argument("unknown pooling '" + name + "'");
          c.grid.pooling.push_back(*p);
        }
      }
      if (g.contains("warmup_epochs"))
        c.grid.warmup_epochs = g.at("warmup_epochs").get<int>();
      if (g.contains("main_epochs"))
        c.grid.main_epochs = g.at("main_epochs").get<int>();
    }
  } catch (const json::exception &e) {
    throw std::invalid_argument(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainingSet TrainingSet::from_dataset(const VpDataset &ds) {
  TrainingSet set;
  for (const Component &c: ds.components()) {
    if (c.points.empty())
      continue;
    const int g = static_cast<int>(set.graphs.size());
    set.graphs.push_back(featurize_smiles(c.smiles));
    set.component_ids.push_back(c.id);
    for (const VpPoint &p: c.points)
      set.points.push_back({ g, p.temperature_k, p.pressure_pa,
                             std::log(p.pressure_pa / 1000.0) });
  }
  return set;
}

std::vector<EvalPoint> evaluate_points(const GrappaModel &model,
                                       const TrainingSet &set,
                                       double min_denominator) {
  std::vector<AntoineParams> params;
  params.reserve(set.graphs.size());
  for (const MolGraph &g: set.graphs)
    params.push_back(model.predict(g));
  std::vector<EvalPoint> out;
  out.reserve(set.points.size());
  for (const TrainingPoint &p: set.points) {
    const AntoineParams &a = params[p.graph];
    const double denom = std::max(a.C + p.temperature_k, min_denominator);
    const double ln_p = a.A - a.B / denom;
    out.push_back({ set.component_ids[p.graph], p.temperature_k,
                    p.pressure_pa, 1000.0 * std::exp(ln_p),
                    set.graphs[p.graph].mol_weight });
  }
  return out;
}

double mape_i(const GrappaModel &model, const TrainingSet &set,
              double min_denominator) {
  std::vector<double> apes;
  for (const EvalPoint &p: evaluate_points(model, set, min_denominator))
    apes.push_back(p.ape());
  return median(std::move(apes));
}

FitResult fit(GrappaModel &model, const TrainingSet &train,
              const TrainingSet &valid, const TrainConfig &cfg,
              const EpochCallback &on_epoch) {
  cfg.validate();
  if (valid.empty())
    throw std::invalid_argument("fit: validation set is empty");
  {
    std::set<std::string> train_ids(train.component_ids.begin(),
                                    train.component_ids.end());
    for (const std::string &id: valid.component_ids)
      if (train_ids.count(id))
        throw std::invalid_argument("fit: component '" + id
                                    + "' is in both training and validation");
  }
  if (model.arch().standardize_counts)
    standardize_counts(model, train);

  std::vector<std::vector<int>> points_of(train.graphs.size());
  for (std::size_t i = 0; i < train.points.size(); ++i)
    points_of[train.points[i].graph].push_back(static_cast<int>(i));
  std::vector<int> order;
  for (std::size_t g = 0; g < train.graphs.size(); ++g)
    if (!points_of[g].empty())
      order.push_back(static_cast<int>(g));
  if (order.size() < 2)
    throw std::invalid_argument(
        "fit: training set needs at least 2 molecules with points");

  std::vector<const MolGraph *> train_graphs;
  for (int g: order)
    train_graphs.push_back(&train.graphs[g]);

  Rng rng(cfg.seed ^ kShuffleStream);
  const long steps_per_epoch = static_cast<long>(
      plan_epoch(order, points_of, cfg.batch_size, cfg.points_per_molecule)
          .size());

  FitResult result;
  result.best_valid_mape_i = std::numeric_limits<double>::infinity();
  int epoch = 0;
  int since_best = 0;

  auto run_epoch = [&](bool huber, AdamW &opt,
                       const std::function<double()> &next_lr) {
    ++epoch;
    rng.shuffle(order.begin(), order.end());
    for (int g: order)
      rng.shuffle(points_of[g].begin(), points_of[g].end());
    double loss_sum = 0.0;
    std::size_t points = 0;
    double lr = 0.0;
    const auto steps =
        plan_epoch(order, points_of, cfg.batch_size, cfg.points_per_molecule);
    for (std::size_t b = 0; b < steps.size(); ++b) {
      lr = next_lr();
      try {
        const BatchLoss bl =
            train_step(model, train, steps[b], huber, cfg, opt, lr);
        loss_sum += bl.loss * static_cast<double>(bl.points);
        points += bl.points;
      } catch (const ad::NonFiniteError &e) {
        throw ad::NonFiniteError(std::string(e.what()) + " (epoch "
                                 + std::to_string(epoch) + ", batch "
                                 + std::to_string(b + 1) + ", "
                                 + (huber ? "Huber" : "MSE") + " phase)");
      }
    }
    HistoryRow row;
    row.epoch = epoch;
    row.phase = huber ? "main" : "warmup";
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(points);
    if (cfg.recalibrate_batch_norm)
      model.recalibrate_batch_norm(train_graphs);
    row.valid_mape_i = mape_i(model, valid, cfg.min_denominator);
    if (row.valid_mape_i < result.best_valid_mape_i) {
      result.best_valid_mape_i = row.valid_mape_i;
      result.best_epoch = epoch;
      result.best_state = model.state();
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.push_back(row);
    if (on_epoch)
      on_epoch(row);
    return row.valid_mape_i;
  };

  AdamW::Options adam;
  adam.weight_decay = cfg.weight_decay;
  if (cfg.warmup_epochs > 0) {
    AdamW opt(trainable(model), adam);
    const OneCycle schedule(steps_per_epoch * cfg.warmup_epochs, cfg.max_lr,
                            cfg.pct_start, cfg.div_factor,
                            cfg.final_div_factor);
    long step = 0;
    for (int e = 0; e < cfg.warmup_epochs; ++e)
      run_epoch(false, opt, [&] { return schedule.lr(step++); });
  }
  if (cfg.main_epochs > 0) {
    AdamW opt(trainable(model), adam);
    Plateau plateau(cfg.main_lr, cfg.plateau_factor, cfg.plateau_patience);
    since_best = 0;
    for (int e = 0; e < cfg.main_epochs; ++e) {
      const double metric =
          run_epoch(true, opt, [&] { return plateau.lr(); });
      plateau.step(metric);
      if (cfg.early_stopping_patience > 0
          && since_best >= cfg.early_stopping_patience)
        break;
    }
  }
  model.load_state(result.best_state);
  return result;
}

std::string history_csv(const std::vector<HistoryRow> &history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,phase,lr,train_loss,valid_mape_i\n";
  for (const HistoryRow &r: history)
    out << r.epoch << ',' << r.phase << ',' << r.lr << ',' << r.train_loss
        << ',' << r.valid_mape_i << '\n';
  return out.str();
}

std::vector<GridCell> enumerate_grid(const GridSpec &grid) {
  std::vector<GridCell> cells;
  for (int layers: grid.gat_layers)
    for (int heads: grid.heads)
      for (int hidden: grid.hidden_layers)
        for (Pooling pooling: grid.pooling)
          cells.push_back({ static_cast<int>(cells.size()), layers, heads,
                            hidden, pooling });
  return cells;
}

std::vector<GridResult> grid_search(const TrainConfig &cfg,
                                    const TrainingSet &train,
                                    const TrainingSet &valid, int jobs) {
  cfg.validate();
  const std::vector<GridCell> cells = enumerate_grid(cfg.grid);
  std::vector<GridResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{ 0 };

  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        const GridCell &cell = cells[k];
        TrainConfig c = cfg;
        c.arch.gat_layers = cell.gat_layers;
        c.arch.heads = cell.heads;
        c.arch.hidden_layers = cell.hidden_layers;
        c.arch.pooling = cell.pooling;
        if (cfg.grid.warmup_epochs >= 0)
          c.warmup_epochs = cfg.grid.warmup_epochs;
        if (cfg.grid.main_epochs >= 0)
          c.main_epochs = cfg.grid.main_epochs;
        GrappaModel model(c.arch, c.seed);
        const FitResult fr = fit(model, train, valid, c);
        results[k] = { cell, fr.best_valid_mape_i, fr.best_epoch,
                       model.num_parameters() };
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const int threads = std::max(1, std::min<int>(jobs, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (std::thread &t: pool)
      t.join();
  }
  for (const auto &e: errors)
    if (e)
      std::rethrow_exception(e);

  std::sort(results.begin(), results.end(),
            [](const GridResult &a, const GridResult &b) {
              if (a.valid_mape_i != b.valid_mape_i)
                return a.valid_mape_i < b.valid_mape_i;
              return a.cell.index < b.cell.index;
            });
  return results;
}

std::string grid_csv(const std::vector<GridResult> &results) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,cell,gat_layers,heads,hidden_layers,pooling,parameters,"
         "best_epoch,valid_mape_i\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const GridResult &g = results[r];
    out << r + 1 << ',' << g.cell.index << ',' << g.cell.gat_layers << ','
        << g.cell.heads << ',' << g.cell.hidden_layers << ','
        << to_string(g.cell.pooling) << ',' << g.num_parameters << ','
        << g.best_epoch << ',' << g.valid_mape_i << '\n';
  }
  return out.str();
}

}  // namespace grappa
