//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Error metrics on vapor-pressure predictions and binned report tables.

#ifndef GRAPPA_METRICS_H_
#define GRAPPA_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace grappa {

// |pred - exp| / exp * 100; exp must be positive.
double ape_i(double pred_pa, double exp_pa);
// Mean of per-point APE values; needs at least one.
double ape_c(std::span<const double> apes);
// Mean of the two central order statistics for even sizes.
double median(std::vector<double> values);
// Linear interpolation between order statistics, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct EvalPoint {
  std::string component_id;
  double temperature_k = 0.0;
  double exp_pa = 0.0;
  double pred_pa = 0.0;
  double mol_weight = 0.0;

  double exp_ln_p() const;
  double pred_ln_p() const;
  double ape() const { return ape_i(pred_pa, exp_pa); }
};

struct ComponentFilterStats {
  int min_points = 1;
  std::size_t components = 0;
  std::size_t points = 0;
  double mape_c = 0.0;
};

struct EvalReport {
  std::size_t points = 0;
  std::size_t components = 0;
  double mae = 0.0;  // on ln(p/kPa)
  double mse = 0.0;
  double mape_i = 0.0;
  std::vector<ComponentFilterStats> by_min_points;  // one per filter
};

// Per-component APE_C with the component's point count.
struct ComponentError {
  std::string component_id;
  std::size_t points = 0;
  double ape_c = 0.0;
  double mol_weight = 0.0;
};
std::vector<ComponentError> component_errors(std::span<const EvalPoint> points);

EvalReport summarize(std::span<const EvalPoint> points,
                     const std::vector<int> &min_point_filters = { 1, 2, 5 });

struct BoxStats {
  std::size_t n = 0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double whisker_lo = 0.0, whisker_hi = 0.0;  // furthest data within 1.5 IQR
  std::size_t outliers = 0;
};
BoxStats box_stats(std::vector<double> values);

struct BinRow {
  std::string label;
  double lo = 0.0, hi = 0.0;
  double percent = 0.0;  // share of the samples falling in this bin
  BoxStats stats;
};

struct BinEdges {
  std::vector<double> pressure_pa = { 1, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7 };
  std::vector<double> temperature_k = { 250, 300, 350, 400, 450, 500, 550,
                                        600 };
  std::vector<double> mol_weight = { 0, 100, 150, 200, 250, 300, 400, 1000 };
  std::vector<int> min_points = { 1, 2, 5, 10, 20, 50 };
};

// Bins on [edges[k], edges[k+1]); the last bin is closed. Values outside
// all bins are ignored.
std::vector<BinRow> bin_table(std::span<const double> keys,
                              std::span<const double> values,
                              const std::vector<double> &edges);

struct BinnedReports {
  std::vector<BinRow> pressure;     // APE_i
  std::vector<BinRow> temperature;  // APE_i
  std::vector<BinRow> mol_weight;   // APE_C
  std::vector<BinRow> min_points;   // APE_C, cumulative filters
};
BinnedReports binned_reports(std::span<const EvalPoint> points,
                             const BinEdges &edges = {});

struct HexCell {
  double t_center = 0.0;
  double lnp_center = 0.0;
  double mape_i = 0.0;  // median APE_i, clipped at clip
  std::size_t count = 0;
};
// Hexagonal binning over (T, ln p_exp) with gridsize cells across T.
std::vector<HexCell> hexbin(std::span<const EvalPoint> points,
                            int gridsize = 30, double clip = 50.0);
std::string hexbin_csv(const std::vector<HexCell> &cells);

struct BoilingPointRow {
  std::string component_id;
  std::size_t points = 0;
  double exp_k = 0.0;   // mean measured temperature
  double pred_k = 0.0;  // mean predicted boiling temperature
};
struct BoilingPointReport {
  std::vector<BoilingPointRow> rows;
  double mae_k = 0.0;
};
// Points with pressure in [lo, hi] Pa from components with >= min_points
// points; predicted temperature supplied per point by the caller.
BoilingPointReport boiling_point_report(std::span<const EvalPoint> points,
                                        std::span<const double> predicted_k,
                                        double lo_pa = 99e3,
                                        double hi_pa = 102e3,
                                        std::size_t min_points = 2);

nlohmann::json to_json(const EvalReport &r);
nlohmann::json to_json(const BinnedReports &r);
nlohmann::json to_json(const BoilingPointReport &r);
std::string bins_csv(const std::vector<BinRow> &rows);

}  // namespace grappa

#endif  // GRAPPA_METRICS_H_
