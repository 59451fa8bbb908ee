//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Vapor-pressure datasets: loading, curation, robust Antoine fitting, and
// component-wise splitting.
//
// CSV/JSONL columns: component_id, smiles, temperature_K, pressure_Pa,
// quality (ok|poor). Optional: source, stereo_ok (true|false|1|0), split.

#ifndef GRAPPA_DATAIO_H_
#define GRAPPA_DATAIO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grappa/antoine.h"

namespace grappa {

enum class Quality { kOk, kPoor };
enum class Split { kTrain, kValid, kTest, kUnassigned };

std::string to_string(Quality q);
std::string to_string(Split s);
std::optional<Split> parse_split(std::string_view text);

struct VpPoint {
  std::string component_id;
  std::string smiles;
  double temperature_k = 0.0;
  double pressure_pa = 0.0;
  Quality quality = Quality::kOk;
  std::string source;
  bool stereo_ok = true;
  int row = 0;  // 1-based data row in the input file, 0 if synthetic
};

struct Component {
  std::string id;
  std::string smiles;
  Split split = Split::kUnassigned;
  std::vector<VpPoint> points;
};

class DataError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Points grouped by component in order of first appearance.
class VpDataset {
public:
  // Throws DataError when the point's SMILES disagrees with the component's.
  void add(VpPoint point);
  void add_component(Component component);

  const std::vector<Component> &components() const { return components_; }
  std::vector<Component> &components() { return components_; }
  const Component *find(std::string_view id) const;
  Component *find(std::string_view id);
  std::size_t num_points() const;
  std::size_t num_components() const { return components_.size(); }

  VpDataset filter(Split split) const;
  void set_split(std::string_view id, Split split);

private:
  std::vector<Component> components_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct RejectedRow {
  int row = 0;
  std::string reason;
};

struct LoadResult {
  VpDataset dataset;
  std::vector<RejectedRow> rejects;
};

enum class DataFormat { kCsv, kJsonl };

LoadResult parse_csv(std::string_view text);
LoadResult parse_jsonl(std::string_view text);
// Format inferred from the extension (.jsonl/.json) unless given.
LoadResult load_dataset(const std::string &path,
                        std::optional<DataFormat> format = std::nullopt);

std::string to_csv(const VpDataset &ds, bool with_split = false);
void save_csv(const VpDataset &ds, const std::string &path,
              bool with_split = false);

// Robust Antoine fit: Huber loss on ln(p/kPa) minimized by
// Levenberg-Marquardt on iteratively reweighted residuals.
//
// With redescend the Huber fit is followed by a Tukey bisquare fit with
// cutoff bisquare_k * s, where s = 1.4826 * MAD(residuals) of the best of
// the Huber fit and its leave-one-out refits (floored at min_scale). Huber
// alone lets one gross outlier drag the strongly correlated (A, B, C) far
// from the clean curve.
struct FitOptions {
  double delta = 0.5;
  bool redescend = true;
  double bisquare_k = 4.685;
  double min_scale = 1e-3;
  std::size_t max_holdout_points = 50;
  int max_iterations = 200;
  double lambda_init = 1e-3;
  ParamRanges ranges;
  // Starting values for C; A and B follow by linear least squares.
  std::vector<double> c_starts = { 0.0, -40.0, -80.0, -150.0, -220.0 };
};

struct RobustFit {
  AntoineParams params;
  double cost = 0.0;
  std::vector<double> residuals;  // ln p_exp - ln p_fit
  bool converged = false;
  int iterations = 0;
  double scale = 0.0;  // robust residual scale, ln p units
  // Cost after every accepted step of the final fit (bisquare when
  // redescend is on).
  std::vector<double> cost_history;
};

// Needs >= 3 points and a temperature spread > 1 K (std::invalid_argument).
RobustFit robust_antoine_fit(std::span<const double> temperature_k,
                             std::span<const double> pressure_pa,
                             const FitOptions &options = {});

struct CurationOptions {
  double t_min = 250.0, t_max = 600.0;
  double p_min = 1.0, p_max = 1e7;
  std::size_t min_points_for_outliers = 5;
  double outlier_threshold = 0.5;
  double conflict_threshold = 0.5;
  FitOptions fit;
};

struct AuditEntry {
  std::string component_id;
  int row = 0;
  std::string rule;
  std::string action;
  std::string detail;
};

struct Conflict {
  std::string component_id;
  std::string source_a;
  std::string source_b;
  double max_relative_deviation = 0.0;
};

struct CurationResult {
  VpDataset dataset;
  std::vector<AuditEntry> audit;
  std::vector<Conflict> conflicts;
};

CurationResult curate(const VpDataset &ds, const CurationOptions &options = {});
std::string audit_jsonl(const std::vector<AuditEntry> &audit);

struct SplitRatios {
  double train = 0.8, valid = 0.1, test = 0.1;
};

// Components with fewer than small_carbon_limit carbons go to train; the
// rest are shuffled and partitioned by the ratios.
void assign_splits(VpDataset &ds, std::uint64_t seed,
                   const SplitRatios &ratios = {}, int small_carbon_limit = 5);

std::string split_csv(const VpDataset &ds);
// Reads component_id,split rows and applies them; unknown ids raise.
void apply_split_csv(VpDataset &ds, std::string_view text);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view text);

}  // namespace grappa

#endif  // GRAPPA_DATAIO_H_
