//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace grappa {
namespace {
using nlohmann::json;

std::string gat_name(int layer, int head, const char *what) {
  return "gat." + std::to_string(layer) + "." + std::to_string(head) + "."
         + what;
}

std::string head_name(int layer, const char *what) {
  return "head." + std::to_string(layer) + "." + what;
}

template <class T>
T get_or(const json &j, const char *key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}
}  // namespace

void Architecture::validate() const {
  auto fail = [](const std::string &what) {
    throw std::invalid_argument("invalid architecture: " + what);
  };
  if (gat_layers < 1)
    fail("gat_layers must be >= 1");
  if (heads < 1)
    fail("heads must be >= 1");
  if (embed_dim < 1 || node_dim < 1 || edge_dim < 1)
    fail("dimensions must be >= 1");
  if (hidden_layers < 0 || hidden_width < 1)
    fail("head layout must have hidden_layers >= 0 and hidden_width >= 1");
  if (!(ranges.a_lo < ranges.a_hi && ranges.b_lo < ranges.b_hi
        && ranges.c_lo < ranges.c_hi))
    fail("parameter ranges must have lo < hi");
  if (ranges.b_lo <= 0.0)
    fail("B range must be positive");
}

json Architecture::to_json() const {
  return json{ { "gat_layers", gat_layers },
               { "heads", heads },
               { "embed_dim", embed_dim },
               { "node_dim", node_dim },
               { "edge_dim", edge_dim },
               { "pooling", to_string(pooling) },
               { "hidden_layers", hidden_layers },
               { "hidden_width", hidden_width },
               { "standardize_counts", standardize_counts },
               { "param_ranges",
                 { { "A", { ranges.a_lo, ranges.a_hi } },
                   { "B", { ranges.b_lo, ranges.b_hi } },
                   { "C", { ranges.c_lo, ranges.c_hi } } } } };
}

Architecture Architecture::from_json(const json &j) {
  Architecture a;
  a.gat_layers = get_or(j, "gat_layers", a.gat_layers);
  a.heads = get_or(j, "heads", a.heads);
  a.embed_dim = get_or(j, "embed_dim", a.embed_dim);
  a.node_dim = get_or(j, "node_dim", a.node_dim);
  a.edge_dim = get_or(j, "edge_dim", a.edge_dim);
  a.hidden_layers = get_or(j, "hidden_layers", a.hidden_layers);
  a.hidden_width = get_or(j, "hidden_width", a.hidden_width);
  a.standardize_counts =
      get_or(j, "standardize_counts", a.standardize_counts);
  if (j.contains("pooling")) {
    const auto p = parse_pooling(j.at("pooling").get<std::string>());
    if (!p)
      throw std::invalid_argument("unknown pooling '"
                                  + j.at("pooling").get<std::string>() + "'");
    a.pooling = *p;
  }
  if (j.contains("param_ranges")) {
    const json &r = j.at("param_ranges");
    auto range = [&](const char *key, double &lo, double &hi) {
      if (!r.contains(key))
        return;
      const auto v = r.at(key).get<std::vector<double>>();
      if (v.size() != 2)
        throw std::invalid_argument(std::string("param_ranges.") + key
                                    + " needs [lo, hi]");
      lo = v[0];
      hi = v[1];
    };
    range("A", a.ranges.a_lo, a.ranges.a_hi);
    range("B", a.ranges.b_lo, a.ranges.b_hi);
    range("C", a.ranges.c_lo, a.ranges.c_hi);
  }
  a.validate();
  return a;
}

GrappaModel::GrappaModel(const Architecture &arch, std::uint64_t seed)
    : arch_(arch) {
  arch_.validate();
  Rng rng(seed);
  int in = arch_.node_dim;
  for (int l = 0; l < arch_.gat_layers; ++l) {
    layers_.push_back(GatLayer::create(in, arch_.embed_dim, arch_.heads, rng,
                                       arch_.edge_dim));
    in = arch_.embed_dim;
  }
  if (arch_.pooling == Pooling::kInteraction)
    pool_ = InteractionPoolParams::create(arch_.embed_dim, rng);
  head_ = HeadParams::create(arch_.embed_dim, arch_.hidden_layers,
                             arch_.hidden_width, rng, arch_.ranges);
}

std::vector<std::pair<std::string, ad::Tensor>>
GrappaModel::parameters() const {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  for (int l = 0; l < static_cast<int>(layers_.size()); ++l) {
    for (int h = 0; h < layers_[l].num_heads(); ++h) {
      const GatHead &head = layers_[l].heads[h];
      out.emplace_back(gat_name(l, h, "theta_v"), head.theta_v);
      out.emplace_back(gat_name(l, h, "theta_e"), head.theta_e);
      out.emplace_back(gat_name(l, h, "att"), head.att);
    }
  }
  if (pool_) {
    out.emplace_back("pool.Wq", pool_->wq);
    out.emplace_back("pool.Wk", pool_->wk);
    out.emplace_back("pool.Wv", pool_->wv);
  }
  for (int i = 0; i < static_cast<int>(head_.hidden.size()); ++i) {
    const HeadLayer &layer = head_.hidden[i];
    out.emplace_back(head_name(i, "lin.weight"), layer.weight);
    out.emplace_back(head_name(i, "lin.bias"), layer.bias);
    out.emplace_back(head_name(i, "bn.weight"), layer.bn.gamma);
    out.emplace_back(head_name(i, "bn.bias"), layer.bn.beta);
  }
  out.emplace_back("head.out.weight", head_.out_weight);
  out.emplace_back("head.out.bias", head_.out_bias);
  return out;
}

std::size_t GrappaModel::num_parameters() const {
  std::size_t n = 0;
  for (const auto &[name, t]: parameters())
    n += t.value().size();
  return n;
}

std::vector<AccountingRow> GrappaModel::accounting() const {
  std::vector<AccountingRow> rows;
  for (const auto &[name, t]: parameters()) {
    const std::string component = name.substr(0, name.find('.'));
    rows.push_back({ component, name, t.rows(), t.cols() });
  }
  return rows;
}

ad::Tensor GrappaModel::node_embeddings(const MolGraph &graph) const {
  if (graph.node_features.cols() != arch_.node_dim)
    throw DimensionError("model expects " + std::to_string(arch_.node_dim)
                         + " node features");
  return encode(graph, layers_);
}

ad::Tensor GrappaModel::embed(const MolGraph &graph) const {
  const ad::Tensor x = node_embeddings(graph);
  return pool_ ? interaction_pool(x, *pool_) : sum_pool(x);
}

ad::Tensor GrappaModel::forward(std::span<const MolGraph *const> graphs,
                                std::span<const int> rows, ad::Mode mode) {
  if (rows.empty())
    throw std::invalid_argument("forward: empty batch");
  std::vector<ad::Tensor> embeddings;
  embeddings.reserve(graphs.size());
  Matrix counts(static_cast<int>(rows.size()), 2);
  for (const MolGraph *g: graphs)
    embeddings.push_back(embed(*g));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= static_cast<int>(graphs.size()))
      throw std::out_of_range("forward: row index outside the graph list");
    counts(static_cast<int>(r), 0) = graphs[rows[r]]->h_donors;
    counts(static_cast<int>(r), 1) = graphs[rows[r]]->h_acceptors;
  }
  const ad::Tensor h =
      ad::gather_rows(ad::concat_rows(embeddings), rows);
  return head_forward(h, counts, head_, mode);
}

ad::Tensor GrappaModel::forward(std::span<const MolGraph *const> graphs,
                                std::span<const int> rows) const {
  return const_cast<GrappaModel *>(this)->forward(graphs, rows,
                                                  ad::Mode::kInfer);
}

AntoineParams GrappaModel::predict(const MolGraph &graph) const {
  ad::NoGradGuard no_grad;
  return head_forward(embed(graph), graph.h_donors, graph.h_acceptors,
                      head_);
}

std::vector<double> GrappaModel::attention_scores(
    const MolGraph &graph) const {
  return grappa::attention_scores(graph, layers_);
}

void GrappaModel::recalibrate_batch_norm(
    std::span<const MolGraph *const> graphs) {
  if (graphs.size() < 2)
    throw std::invalid_argument(
        "recalibrate_batch_norm: needs at least two molecules");
  ad::NoGradGuard no_grad;
  std::vector<int> rows(graphs.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = static_cast<int>(i);
  // Training-mode pass on copies of the batch-norm states with momentum 1
  // stores the batch statistics as running statistics.
  HeadParams probe = head_;
  for (HeadLayer &layer: probe.hidden)
    layer.bn.momentum = 1.0;
  std::vector<ad::Tensor> embeddings;
  Matrix counts(static_cast<int>(graphs.size()), 2);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    embeddings.push_back(embed(*graphs[i]));
    counts(static_cast<int>(i), 0) = graphs[i]->h_donors;
    counts(static_cast<int>(i), 1) = graphs[i]->h_acceptors;
  }
  head_forward(ad::concat_rows(embeddings), counts, probe, ad::Mode::kTrain);
  const double n = static_cast<double>(graphs.size());
  for (std::size_t l = 0; l < head_.hidden.size(); ++l) {
    head_.hidden[l].bn.running_mean = probe.hidden[l].bn.running_mean;
    Matrix var = probe.hidden[l].bn.running_var;
    for (double &v: var.values())
      v *= (n - 1.0) / n;  // unbiased estimate back to the batch variance
    head_.hidden[l].bn.running_var = std::move(var);
  }
}

std::vector<std::pair<std::string, Matrix *>> GrappaModel::state_slots() {
  std::vector<std::pair<std::string, Matrix *>> slots;
  for (auto &[name, t]: parameters())
    slots.emplace_back(name, &ad::Tensor(t).mutable_value());
  for (int i = 0; i < static_cast<int>(head_.hidden.size()); ++i) {
    slots.emplace_back(head_name(i, "bn.running_mean"),
                       &head_.hidden[i].bn.running_mean);
    slots.emplace_back(head_name(i, "bn.running_var"),
                       &head_.hidden[i].bn.running_var);
  }
  return slots;
}

ModelState GrappaModel::state() const {
  ModelState out;
  for (auto &[name, m]: const_cast<GrappaModel *>(this)->state_slots())
    out.emplace(name, *m);
  return out;
}

void GrappaModel::load_state(const ModelState &state) {
  auto slots = state_slots();
  // Validate everything before touching any tensor.
  for (const auto &[name, m]: slots) {
    auto it = state.find(name);
    if (it == state.end())
      throw CheckpointError("checkpoint is missing tensor '" + name + "'");
    if (!it->second.same_shape(*m))
      throw CheckpointError("tensor '" + name + "' has shape "
                            + it->second.shape_string() + ", expected "
                            + m->shape_string());
    for (double v: it->second.values())
      if (!std::isfinite(v))
        throw CheckpointError("tensor '" + name + "' has non-finite values");
  }
  if (state.size() != slots.size()) {
    for (const auto &[name, m]: state) {
      const bool known =
          std::any_of(slots.begin(), slots.end(),
                      [&](const auto &s) { return s.first == name; });
      if (!known)
        throw CheckpointError("checkpoint has unexpected tensor '" + name
                              + "'");
    }
  }
  for (auto &[name, m]: slots)
    *m = state.at(name);
}

json GrappaModel::to_json() const {
  json tensors = json::object();
  for (const auto &[name, m]: state())
    tensors[name] = { { "shape", { m.rows(), m.cols() } },
                      { "values", m.values() } };
  json arch = arch_.to_json();
  arch["count_shift"] = { head_.count_shift[0], head_.count_shift[1] };
  arch["count_scale"] = { head_.count_scale[0], head_.count_scale[1] };
  return { { "format_version", kCheckpointFormatVersion },
           { "arch", std::move(arch) },
           { "tensors", std::move(tensors) } };
}

GrappaModel GrappaModel::from_json(const json &j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw CheckpointError("unsupported checkpoint format_version "
                            + std::to_string(version));
    const json &arch_json = j.at("arch");
    GrappaModel model(Architecture::from_json(arch_json), 0);
    if (arch_json.contains("count_shift")) {
      const auto shift = arch_json.at("count_shift").get<std::vector<double>>();
      const auto scale = arch_json.at("count_scale").get<std::vector<double>>();
      if (shift.size() != 2 || scale.size() != 2)
        throw CheckpointError("count_shift/count_scale need two entries");
      for (int k = 0; k < 2; ++k) {
        model.head_.count_shift[k] = shift[k];
        model.head_.count_scale[k] = scale[k];
      }
    }
    ModelState state;
    for (const auto &[name, t]: j.at("tensors").items()) {
      const auto shape = t.at("shape").get<std::vector<int>>();
      auto values = t.at("values").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0
          || static_cast<std::size_t>(shape[0]) * shape[1] != values.size())
        throw CheckpointError("tensor '" + name + "' has inconsistent shape");
      state.emplace(name, Matrix(shape[0], shape[1], std::move(values)));
    }
    model.load_state(state);
    return model;
  } catch (const json::exception &e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

void GrappaModel::save(const std::string &path) const {
  std::ofstream out(path);
  if (!out)
    throw CheckpointError("cannot write checkpoint '" + path + "'");
  // Doubles are written in shortest round-trip form.
  out << to_json().dump() << '\n';
  if (!out)
    throw CheckpointError("failed writing checkpoint '" + path + "'");
}

GrappaModel GrappaModel::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw CheckpointError("cannot read checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw CheckpointError("checkpoint '" + path + "' is not JSON: "
                          + e.what());
  }
  return from_json(j);
}

Prediction predict(const GrappaModel &model, std::string_view smiles,
                   std::optional<double> temperature_k,
                   std::optional<double> pressure_pa) {
  const MolGraph graph = featurize_smiles(smiles);
  Prediction p;
  p.params = model.predict(graph);
  if (temperature_k) {
    p.ln_p_kpa = ln_vapor_pressure(p.params, *temperature_k);
    p.p_pa = 1000.0 * std::exp(*p.ln_p_kpa);
  }
  if (pressure_pa)
    p.boiling_k = boiling_temperature(p.params, *pressure_pa);
  return p;
}

std::string accounting_markdown(const GrappaModel &model) {
  std::ostringstream out;
  out << "| component | tensor | shape | count |\n"
      << "|---|---|---|---:|\n";
  std::map<std::string, std::size_t> subtotal;
  std::vector<std::string> order;
  for (const AccountingRow &row: model.accounting()) {
    out << "| " << row.component << " | `" << row.name << "` | " << row.rows
        << " x " << row.cols << " | " << row.count() << " |\n";
    if (!subtotal.count(row.component))
      order.push_back(row.component);
    subtotal[row.component] += row.count();
  }
  out << "\n| component | parameters |\n|---|---:|\n";
  for (const std::string &c: order)
    out << "| " << c << " | " << subtotal[c] << " |\n";
  out << "| **total** | **" << model.num_parameters() << "** |\n";
  return out.str();
}

}  // namespace grappa
