//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// grappa: command-line front end. JSON results go to stdout, human-readable
// tables to stderr under --verbose.
//
// Exit codes: 0 success, 1 validation or domain error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grappa/dataio.h"
#include "grappa/metrics.h"
#include "grappa/model.h"
#include "grappa/train.h"

namespace {

using grappa::AntoineParams;
using nlohmann::json;

struct Common {
  std::optional<std::uint64_t> seed;
  bool verbose = false;

  std::uint64_t resolved_seed() const {
    if (seed)
      return *seed;
    if (const char *env = std::getenv("GRAPPA_SEED")) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used == std::string(env).size())
          return v;
      } catch (const std::exception &) {
      }
      throw std::invalid_argument("GRAPPA_SEED must be a non-negative integer");
    }
    return 0;
  }
};

void emit(const json &j) { std::cout << j.dump(2) << '\n'; }

json params_json(const AntoineParams &p) {
  return { { "A", p.A }, { "B", p.B }, { "C", p.C } };
}

AntoineParams parse_params(const std::string &text) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    v.push_back(std::stod(item));
  if (v.size() != 3)
    throw std::invalid_argument("--params needs three values A,B,C");
  return { v[0], v[1], v[2] };
}

grappa::VpDataset load_with_splits(const std::string &data,
                                   const std::string &splits) {
  grappa::LoadResult r = grappa::load_dataset(data);
  for (const grappa::RejectedRow &rej: r.rejects)
    std::cerr << data << ": row " << rej.row << " rejected: " << rej.reason
              << '\n';
  if (!splits.empty())
    grappa::apply_split_csv(r.dataset, grappa::read_file(splits));
  return std::move(r.dataset);
}

grappa::TrainConfig load_config(const std::string &path, std::uint64_t seed,
                                bool seed_given) {
  grappa::TrainConfig cfg;
  if (!path.empty())
    cfg = grappa::TrainConfig::from_json(json::parse(grappa::read_file(path)));
  if (seed_given)
    cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// Model parameters come either from a checkpoint plus SMILES or straight
// from --params.
struct ParamSource {
  std::string model;
  std::string smiles;
  std::string params;

  void add_to(CLI::App *cmd) {
    cmd->add_option("--model", model, "Model checkpoint (JSON)");
    auto *s = cmd->add_option("--smiles", smiles, "Molecule as SMILES");
    auto *p = cmd->add_option("--params", params,
                              "Antoine parameters A,B,C instead of a model");
    s->excludes(p);
  }

  AntoineParams resolve() const {
    if (!params.empty())
      return parse_params(params);
    if (model.empty() || smiles.empty())
      throw CLI::ValidationError("--model and --smiles (or --params) needed");
    return grappa::predict(grappa::GrappaModel::load(model), smiles).params;
  }
};

void print_history_row(const grappa::HistoryRow &r) {
  std::fprintf(stderr, "epoch %4d  %-6s  lr %.3e  loss %.5f  valid MAPE_i %.3f%%\n",
               r.epoch, r.phase.c_str(), r.lr, r.train_loss, r.valid_mape_i);
}

void print_bins(const char *title, const std::vector<grappa::BinRow> &rows) {
  std::fprintf(stderr, "%s\n", title);
  for (const grappa::BinRow &r: rows)
    std::fprintf(stderr, "  %-18s %6.2f%%  n=%-6zu median %8.3f  IQR [%.3f, %.3f]\n",
                 r.label.c_str(), r.percent, r.stats.n, r.stats.median,
                 r.stats.q1, r.stats.q3);
}

int run(int argc, char **argv) {
  CLI::App app{ "grappa: vapor-pressure prediction with a hybrid graph "
                "attention network" };
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed,
                 "Seed for all randomness (default: $GRAPPA_SEED, else 0)");
  app.add_flag("-v,--verbose", common.verbose, "Human-readable tables on stderr");

  // curate
  std::string cur_in, cur_out, cur_audit;
  grappa::CurationOptions cur_opt;
  auto *curate = app.add_subcommand("curate", "Filter a dataset and drop outliers");
  curate->add_option("--input", cur_in, "Raw dataset (CSV or JSONL)")
      ->required()->check(CLI::ExistingFile);
  curate->add_option("--output", cur_out, "Curated CSV")->required();
  curate->add_option("--audit", cur_audit, "Audit log (JSONL)");
  curate->add_option("--outlier-threshold", cur_opt.outlier_threshold,
                     "Relative deviation from the robust fit that drops a point");

  // split
  std::string split_in, split_out;
  grappa::SplitRatios ratios;
  int small_carbons = 5;
  auto *split = app.add_subcommand("split", "Component-wise train/valid/test split");
  split->add_option("--input", split_in, "Curated dataset")
      ->required()->check(CLI::ExistingFile);
  split->add_option("--output", split_out, "component_id,split CSV")->required();
  split->add_option("--train", ratios.train, "Train share");
  split->add_option("--valid", ratios.valid, "Validation share");
  split->add_option("--test", ratios.test, "Test share");
  split->add_option("--small-carbons", small_carbons,
                    "Components with fewer carbons always go to train");

  // fit-antoine
  std::string fa_in, fa_component;
  auto *fit_antoine =
      app.add_subcommand("fit-antoine", "Robust Antoine fit per component");
  fit_antoine->add_option("--input", fa_in, "Dataset")
      ->required()->check(CLI::ExistingFile);
  fit_antoine->add_option("--component", fa_component, "Only this component");

  // train
  std::string tr_config, tr_data, tr_splits, tr_model, tr_history;
  auto *train = app.add_subcommand("train", "Two-phase training");
  train->add_option("--config", tr_config, "TrainConfig JSON")
      ->check(CLI::ExistingFile);
  train->add_option("--data", tr_data, "Dataset")
      ->required()->check(CLI::ExistingFile);
  train->add_option("--splits", tr_splits, "Split CSV (else the data's split column)")
      ->check(CLI::ExistingFile);
  train->add_option("--model", tr_model, "Output checkpoint")->required();
  train->add_option("--history", tr_history, "Per-epoch history CSV");

  // grid-search
  std::string gs_config, gs_data, gs_splits, gs_output;
  int jobs = 1;
  auto *grid = app.add_subcommand("grid-search", "Train every grid cell and rank");
  grid->add_option("--config", gs_config, "TrainConfig JSON")
      ->check(CLI::ExistingFile);
  grid->add_option("--data", gs_data, "Dataset")
      ->required()->check(CLI::ExistingFile);
  grid->add_option("--splits", gs_splits, "Split CSV")->check(CLI::ExistingFile);
  grid->add_option("--output", gs_output, "Ranked results CSV");
  grid->add_option("--jobs", jobs, "Parallel cells")->check(CLI::PositiveNumber);

  // predict
  ParamSource pr_src;
  std::optional<double> pr_temp;
  auto *predict = app.add_subcommand("predict", "Antoine parameters for a molecule");
  pr_src.add_to(predict);
  predict->add_option("--temp", pr_temp, "Temperature in K");

  // boil
  ParamSource bo_src;
  double bo_pressure = 101325.0;
  auto *boil = app.add_subcommand("boil", "Boiling temperature at a pressure");
  bo_src.add_to(boil);
  boil->add_option("--pressure", bo_pressure, "Pressure in Pa (default 101325)");

  // evaluate
  std::string ev_model, ev_data, ev_splits, ev_split = "test";
  auto *evaluate = app.add_subcommand("evaluate", "Error metrics on a split");
  evaluate->add_option("--model", ev_model, "Checkpoint")
      ->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", ev_data, "Dataset")
      ->required()->check(CLI::ExistingFile);
  evaluate->add_option("--splits", ev_splits, "Split CSV")->check(CLI::ExistingFile);
  evaluate->add_option("--split", ev_split, "train|valid|test|all");

  // attention
  std::string at_model, at_smiles;
  auto *attention = app.add_subcommand("attention", "Per-atom attention scores");
  attention->add_option("--model", at_model, "Checkpoint")
      ->required()->check(CLI::ExistingFile);
  attention->add_option("--smiles", at_smiles, "Molecule")->required();

  // report
  std::string rp_model, rp_data, rp_splits, rp_split = "test", rp_dir;
  int rp_gridsize = 30;
  auto *report = app.add_subcommand("report", "Binned tables, hexbin grid, boiling points");
  report->add_option("--model", rp_model, "Checkpoint")
      ->required()->check(CLI::ExistingFile);
  report->add_option("--data", rp_data, "Dataset")
      ->required()->check(CLI::ExistingFile);
  report->add_option("--splits", rp_splits, "Split CSV")->check(CLI::ExistingFile);
  report->add_option("--split", rp_split, "train|valid|test|all");
  report->add_option("--output-dir", rp_dir, "Directory for CSV/JSON tables")
      ->required();
  report->add_option("--gridsize", rp_gridsize, "Hexbin cells across T")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::uint64_t seed = common.resolved_seed();
  const bool seed_given = common.seed || std::getenv("GRAPPA_SEED");

  auto select_split = [](const grappa::VpDataset &ds, const std::string &name) {
    if (name == "all")
      return ds;
    const auto s = grappa::parse_split(name);
    if (!s)
      throw CLI::ValidationError("--split must be train, valid, test or all");
    return ds.filter(*s);
  };

  if (*curate) {
    const grappa::LoadResult in = grappa::load_dataset(cur_in);
    const grappa::CurationResult r = grappa::curate(in.dataset, cur_opt);
    grappa::save_csv(r.dataset, cur_out);
    if (!cur_audit.empty())
      grappa::write_file(cur_audit, grappa::audit_jsonl(r.audit));
    json outliers = json::array(), conflicts = json::array();
    for (const grappa::AuditEntry &e: r.audit)
      if (e.rule == "outlier" && e.action == "drop")
        outliers.push_back({ { "component_id", e.component_id }, { "row", e.row } });
    for (const grappa::Conflict &c: r.conflicts)
      conflicts.push_back({ { "component_id", c.component_id },
                            { "source_a", c.source_a },
                            { "source_b", c.source_b },
                            { "max_relative_deviation", c.max_relative_deviation } });
    emit({ { "points_in", in.dataset.num_points() },
           { "points_out", r.dataset.num_points() },
           { "components_out", r.dataset.num_components() },
           { "rejected_rows", in.rejects.size() },
           { "audit_entries", r.audit.size() },
           { "outliers", outliers },
           { "conflicts", conflicts } });
    if (common.verbose)
      for (const grappa::AuditEntry &e: r.audit)
        std::fprintf(stderr, "%-24s row %-6d %-12s %-5s %s\n",
                     e.component_id.c_str(), e.row, e.rule.c_str(),
                     e.action.c_str(), e.detail.c_str());
  } else if (*split) {
    grappa::VpDataset ds = grappa::load_dataset(split_in).dataset;
    grappa::assign_splits(ds, seed, ratios, small_carbons);
    grappa::write_file(split_out, grappa::split_csv(ds));
    json counts = json::object();
    for (grappa::Split s: { grappa::Split::kTrain, grappa::Split::kValid,
                            grappa::Split::kTest })
      counts[grappa::to_string(s)] = ds.filter(s).num_components();
    emit({ { "seed", seed }, { "components", counts } });
  } else if (*fit_antoine) {
    const grappa::VpDataset ds = grappa::load_dataset(fa_in).dataset;
    json out = json::array();
    for (const grappa::Component &c: ds.components()) {
      if (!fa_component.empty() && c.id != fa_component)
        continue;
      std::vector<double> t, p;
      for (const grappa::VpPoint &pt: c.points) {
        t.push_back(pt.temperature_k);
        p.push_back(pt.pressure_pa);
      }
      json row = { { "component_id", c.id }, { "points", c.points.size() } };
      try {
        const grappa::RobustFit f = grappa::robust_antoine_fit(t, p);
        row["params"] = params_json(f.params);
        row["cost"] = f.cost;
        row["converged"] = f.converged;
        row["residual_scale"] = f.scale;
      } catch (const std::invalid_argument &e) {
        row["error"] = e.what();
      }
      out.push_back(row);
    }
    if (!fa_component.empty() && out.empty())
      throw std::invalid_argument("no component '" + fa_component + "'");
    emit(out);
  } else if (*train) {
    const grappa::TrainConfig cfg = load_config(tr_config, seed, seed_given);
    const grappa::VpDataset ds = load_with_splits(tr_data, tr_splits);
    const auto tset = grappa::TrainingSet::from_dataset(ds.filter(grappa::Split::kTrain));
    const auto vset = grappa::TrainingSet::from_dataset(ds.filter(grappa::Split::kValid));
    grappa::GrappaModel model(cfg.arch, cfg.seed);
    grappa::EpochCallback cb;
    if (common.verbose)
      cb = print_history_row;
    const grappa::FitResult r = grappa::fit(model, tset, vset, cfg, cb);
    model.save(tr_model);
    if (!tr_history.empty())
      grappa::write_file(tr_history, grappa::history_csv(r.history));
    emit({ { "model", tr_model },
           { "seed", cfg.seed },
           { "epochs", r.history.size() },
           { "best_epoch", r.best_epoch },
           { "best_valid_mape_i", r.best_valid_mape_i },
           { "train_mape_i", grappa::mape_i(model, tset, cfg.min_denominator) },
           { "parameters", model.num_parameters() } });
  } else if (*grid) {
    const grappa::TrainConfig cfg = load_config(gs_config, seed, seed_given);
    const grappa::VpDataset ds = load_with_splits(gs_data, gs_splits);
    const auto tset = grappa::TrainingSet::from_dataset(ds.filter(grappa::Split::kTrain));
    const auto vset = grappa::TrainingSet::from_dataset(ds.filter(grappa::Split::kValid));
    const auto results = grappa::grid_search(cfg, tset, vset, jobs);
    const std::string csv = grappa::grid_csv(results);
    if (!gs_output.empty())
      grappa::write_file(gs_output, csv);
    json ranked = json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
      const grappa::GridResult &g = results[k];
      ranked.push_back({ { "rank", k + 1 },
                         { "cell", g.cell.index },
                         { "gat_layers", g.cell.gat_layers },
                         { "heads", g.cell.heads },
                         { "hidden_layers", g.cell.hidden_layers },
                         { "pooling", grappa::to_string(g.cell.pooling) },
                         { "parameters", g.num_parameters },
                         { "best_epoch", g.best_epoch },
                         { "valid_mape_i", g.valid_mape_i } });
    }
    if (common.verbose)
      std::cerr << csv;
    emit(ranked);
  } else if (*predict) {
    json out;
    if (!pr_src.params.empty()) {
      const AntoineParams p = parse_params(pr_src.params);
      out = params_json(p);
      if (pr_temp) {
        out["ln_p_kPa"] = grappa::ln_vapor_pressure(p, *pr_temp);
        out["p_Pa"] = grappa::vapor_pressure_pa(p, *pr_temp);
      }
    } else {
      if (pr_src.model.empty() || pr_src.smiles.empty())
        throw CLI::ValidationError("--model and --smiles (or --params) needed");
      const grappa::Prediction p = grappa::predict(
          grappa::GrappaModel::load(pr_src.model), pr_src.smiles, pr_temp);
      out = params_json(p.params);
      if (p.ln_p_kpa) {
        out["ln_p_kPa"] = *p.ln_p_kpa;
        out["p_Pa"] = *p.p_pa;
      }
    }
    if (!pr_src.smiles.empty())
      out["smiles"] = pr_src.smiles;
    if (pr_temp)
      out["T_K"] = *pr_temp;
    emit(out);
  } else if (*boil) {
    const AntoineParams p = bo_src.resolve();
    json out = params_json(p);
    out["pressure_Pa"] = bo_pressure;
    out["T_boil_K"] = grappa::boiling_temperature(p, bo_pressure);
    if (!bo_src.smiles.empty())
      out["smiles"] = bo_src.smiles;
    emit(out);
  } else if (*evaluate) {
    const grappa::GrappaModel model = grappa::GrappaModel::load(ev_model);
    const grappa::VpDataset ds =
        select_split(load_with_splits(ev_data, ev_splits), ev_split);
    const auto set = grappa::TrainingSet::from_dataset(ds);
    const auto points = grappa::evaluate_points(model, set);
    const grappa::EvalReport r = grappa::summarize(points);
    json out = grappa::to_json(r);
    out["split"] = ev_split;
    emit(out);
    if (common.verbose) {
      std::fprintf(stderr, "points %zu  components %zu\n", r.points, r.components);
      std::fprintf(stderr, "MAE %.4f  MSE %.4f  MAPE_i %.3f%%\n", r.mae, r.mse,
                   r.mape_i);
      for (const grappa::ComponentFilterStats &s: r.by_min_points)
        std::fprintf(stderr, "K >= %d: %zu components, MAPE_C %.3f%%\n",
                     s.min_points, s.components, s.mape_c);
    }
  } else if (*attention) {
    const grappa::GrappaModel model = grappa::GrappaModel::load(at_model);
    const grappa::Molecule mol = grappa::parse_smiles(at_smiles);
    const std::vector<double> scores =
        model.attention_scores(grappa::featurize(mol));
    json atoms = json::array();
    for (int i = 0; i < mol.num_atoms(); ++i)
      atoms.push_back({ { "index", i },
                        { "element",
                          std::string(grappa::element_symbol(
                              mol.atoms()[i].atomic_number)) },
                        { "score", scores[i] } });
    emit({ { "smiles", at_smiles }, { "atoms", atoms } });
  } else if (*report) {
    const grappa::GrappaModel model = grappa::GrappaModel::load(rp_model);
    const grappa::VpDataset ds =
        select_split(load_with_splits(rp_data, rp_splits), rp_split);
    const auto set = grappa::TrainingSet::from_dataset(ds);
    const auto points = grappa::evaluate_points(model, set);
    const grappa::BinnedReports bins = grappa::binned_reports(points);
    const auto hex = grappa::hexbin(points, rp_gridsize);

    std::vector<AntoineParams> params;
    for (const grappa::MolGraph &g: set.graphs)
      params.push_back(model.predict(g));
    std::vector<double> boil_k;
    for (const grappa::TrainingPoint &p: set.points) {
      double t = std::nan("");
      try {
        t = grappa::boiling_temperature(params[p.graph], p.pressure_pa);
      } catch (const grappa::DomainError &) {
      }
      boil_k.push_back(t);
    }
    const grappa::BoilingPointReport bp =
        grappa::boiling_point_report(points, boil_k);

    const std::filesystem::path dir(rp_dir);
    std::filesystem::create_directories(dir);
    grappa::write_file((dir / "summary.json").string(),
                       grappa::to_json(grappa::summarize(points)).dump(2));
    grappa::write_file((dir / "bins.json").string(), grappa::to_json(bins).dump(2));
    grappa::write_file((dir / "bins_pressure.csv").string(), grappa::bins_csv(bins.pressure));
    grappa::write_file((dir / "bins_temperature.csv").string(),
                       grappa::bins_csv(bins.temperature));
    grappa::write_file((dir / "bins_mol_weight.csv").string(),
                       grappa::bins_csv(bins.mol_weight));
    grappa::write_file((dir / "bins_min_points.csv").string(),
                       grappa::bins_csv(bins.min_points));
    grappa::write_file((dir / "hexbin.csv").string(), grappa::hexbin_csv(hex));
    grappa::write_file((dir / "boiling_points.json").string(),
                       grappa::to_json(bp).dump(2));
    emit({ { "split", rp_split },
           { "points", points.size() },
           { "hexbin_cells", hex.size() },
           { "boiling_point_components", bp.rows.size() },
           { "boiling_point_mae_K", bp.mae_k },
           { "output_dir", rp_dir } });
    if (common.verbose) {
      print_bins("APE_i by pressure (Pa)", bins.pressure);
      print_bins("APE_i by temperature (K)", bins.temperature);
      print_bins("APE_C by molar mass (g/mol)", bins.mol_weight);
      print_bins("APE_C by minimum points", bins.min_points);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
