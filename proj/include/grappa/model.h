//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// The full model: GAT encoder, pooling, and Antoine prediction head, with
// checkpoint serialization.
//
// Checkpoint JSON:
//   {"format_version": 1,
//    "arch": {...},
//    "tensors": {"<name>": {"shape": [rows, cols], "values": [...]}, ...}}
// Tensor names: gat.<layer>.<head>.{theta_v,theta_e,att}, pool.{Wq,Wk,Wv},
// head.<i>.lin.{weight,bias}, head.<i>.bn.{weight,bias,running_mean,
// running_var}, head.out.{weight,bias}. Weights are stored as in x out.

#ifndef GRAPPA_MODEL_H_
#define GRAPPA_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "grappa/antoine.h"
#include "grappa/gnn.h"
#include "grappa/molgraph.h"
#include "grappa/pooling.h"
#include "grappa/tensor.h"

namespace grappa {

inline constexpr int kCheckpointFormatVersion = 1;

struct Architecture {
  int gat_layers = 4;
  int heads = 2;
  int embed_dim = 32;
  int node_dim = node_feature::kWidth;
  int edge_dim = edge_feature::kWidth;
  Pooling pooling = Pooling::kInteraction;
  int hidden_layers = 3;
  int hidden_width = 16;
  ParamRanges ranges;
  // When set, donor/acceptor inputs are standardized with the statistics of
  // the training set (filled in by fit).
  bool standardize_counts = false;

  void validate() const;
  nlohmann::json to_json() const;
  static Architecture from_json(const nlohmann::json &j);
};

class CheckpointError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Every tensor of a model by canonical name, including batch-norm
// running statistics.
using ModelState = std::map<std::string, Matrix>;

struct AccountingRow {
  std::string component;
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t count() const { return static_cast<std::size_t>(rows) * cols; }
};

struct Prediction {
  AntoineParams params;
  std::optional<double> ln_p_kpa;
  std::optional<double> p_pa;
  std::optional<double> boiling_k;
};

class GrappaModel {
public:
  GrappaModel(const Architecture &arch, std::uint64_t seed);

  const Architecture &arch() const { return arch_; }
  std::span<const GatLayer> gat_layers() const { return layers_; }
  const std::optional<InteractionPoolParams> &pool() const { return pool_; }
  const HeadParams &head() const { return head_; }
  HeadParams &head() { return head_; }

  // Trainable tensors in canonical order.
  std::vector<std::pair<std::string, ad::Tensor>> parameters() const;
  std::size_t num_parameters() const;
  std::vector<AccountingRow> accounting() const;

  // Node embeddings after message passing (N x d).
  ad::Tensor node_embeddings(const MolGraph &graph) const;
  // Pooled molecule embedding (1 x d).
  ad::Tensor embed(const MolGraph &graph) const;

  // Predicted (A, B, C) for a batch of rows, row r belonging to
  // graphs[rows[r]]. Each distinct graph is encoded once.
  ad::Tensor forward(std::span<const MolGraph *const> graphs,
                     std::span<const int> rows, ad::Mode mode);
  ad::Tensor forward(std::span<const MolGraph *const> graphs,
                     std::span<const int> rows) const;

  // Inference-mode prediction; never records a tape.
  AntoineParams predict(const MolGraph &graph) const;
  std::vector<double> attention_scores(const MolGraph &graph) const;

  // Replaces the batch-norm running statistics with the exact (biased)
  // statistics of the given molecules, layer by layer, so inference matches
  // a training-mode pass over exactly this set.
  void recalibrate_batch_norm(std::span<const MolGraph *const> graphs);

  ModelState state() const;
  void load_state(const ModelState &state);

  nlohmann::json to_json() const;
  static GrappaModel from_json(const nlohmann::json &j);
  void save(const std::string &path) const;
  static GrappaModel load(const std::string &path);

private:
  GrappaModel() = default;
  std::vector<std::pair<std::string, Matrix *>> state_slots();

  Architecture arch_;
  std::vector<GatLayer> layers_;
  std::optional<InteractionPoolParams> pool_;
  HeadParams head_;
};

// parse, featurize, predict, and optionally evaluate at a temperature or
// invert at a pressure.
Prediction predict(const GrappaModel &model, std::string_view smiles,
                   std::optional<double> temperature_k = std::nullopt,
                   std::optional<double> pressure_pa = std::nullopt);

// Markdown table of the trainable parameters.
std::string accounting_markdown(const GrappaModel &model);

}  // namespace grappa

#endif  // GRAPPA_MODEL_H_
