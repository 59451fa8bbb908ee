//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace grappa {
namespace {
using nlohmann::json;

std::string range_label(double lo, double hi) {
  std::ostringstream out;
  out << '[' << lo << ", " << hi << ')';
  return out.str();
}

json box_json(const BoxStats &b) {
  return { { "n", b.n },           { "q1", b.q1 },
           { "median", b.median }, { "q3", b.q3 },
           { "whisker_lo", b.whisker_lo }, { "whisker_hi", b.whisker_hi },
           { "outliers", b.outliers } };
}

json rows_json(const std::vector<BinRow> &rows) {
  json out = json::array();
  for (const BinRow &r: rows)
    out.push_back({ { "label", r.label },
                    { "lo", r.lo },
                    { "hi", r.hi },
                    { "percent", r.percent },
                    { "stats", box_json(r.stats) } });
  return out;
}
}  // namespace

double ape_i(double pred_pa, double exp_pa) {
  if (!(exp_pa > 0.0))
    throw std::invalid_argument("ape_i: experimental pressure must be > 0");
  return std::abs(pred_pa - exp_pa) / exp_pa * 100.0;
}

double ape_c(std::span<const double> apes) {
  if (apes.empty())
    throw std::invalid_argument("ape_c: component without points");
  double s = 0.0;
  for (double a: apes)
    s += a;
  return s / static_cast<double>(apes.size());
}

double median(std::vector<double> v) {
  if (v.empty())
    throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty())
    throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double EvalPoint::exp_ln_p() const { return std::log(exp_pa / 1000.0); }
double EvalPoint::pred_ln_p() const { return std::log(pred_pa / 1000.0); }

std::vector<ComponentError> component_errors(
    std::span<const EvalPoint> points) {
  std::map<std::string, std::size_t> slot;
  std::vector<ComponentError> out;
  std::vector<std::vector<double>> apes;
  for (const EvalPoint &p: points) {
    auto [it, inserted] = slot.emplace(p.component_id, out.size());
    if (inserted) {
      out.push_back({ p.component_id, 0, 0.0, p.mol_weight });
      apes.emplace_back();
    }
    apes[it->second].push_back(p.ape());
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].points = apes[k].size();
    out[k].ape_c = ape_c(apes[k]);
  }
  return out;
}

EvalReport summarize(std::span<const EvalPoint> points,
                     const std::vector<int> &min_point_filters) {
  if (points.empty())
    throw std::invalid_argument("summarize: no points to evaluate");
  EvalReport r;
  r.points = points.size();
  std::vector<double> apes;
  apes.reserve(points.size());
  for (const EvalPoint &p: points) {
    const double d = p.pred_ln_p() - p.exp_ln_p();
    r.mae += std::abs(d);
    r.mse += d * d;
    apes.push_back(p.ape());
  }
  r.mae /= static_cast<double>(points.size());
  r.mse /= static_cast<double>(points.size());
  r.mape_i = median(std::move(apes));

  const auto comps = component_errors(points);
  r.components = comps.size();
  for (int k: min_point_filters) {
    ComponentFilterStats s;
    s.min_points = k;
    std::vector<double> selected;
    for (const ComponentError &c: comps) {
      if (c.points >= static_cast<std::size_t>(k)) {
        selected.push_back(c.ape_c);
        s.points += c.points;
      }
    }
    s.components = selected.size();
    s.mape_c = selected.empty() ? 0.0 : median(std::move(selected));
    r.by_min_points.push_back(s);
  }
  return r;
}

BoxStats box_stats(std::vector<double> v) {
  BoxStats b;
  b.n = v.size();
  if (v.empty())
    return b;
  std::sort(v.begin(), v.end());
  b.q1 = quantile(v, 0.25);
  b.median = quantile(v, 0.5);
  b.q3 = quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double x: v) {
    if (x < lo_fence || x > hi_fence) {
      ++b.outliers;
      continue;
    }
    b.whisker_lo = std::min(b.whisker_lo, x);
    b.whisker_hi = std::max(b.whisker_hi, x);
  }
  return b;
}

std::vector<BinRow> bin_table(std::span<const double> keys,
                              std::span<const double> values,
                              const std::vector<double> &edges) {
  if (keys.size() != values.size())
    throw std::invalid_argument("bin_table: keys and values differ in size");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("bin_table: need >= 2 ascending edges");
  const std::size_t bins = edges.size() - 1;
  std::vector<std::vector<double>> members(bins);
  std::size_t total = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double k = keys[i];
    if (k < edges.front() || k > edges.back())
      continue;
    std::size_t b = static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), k) - edges.begin());
    b = std::min(b, bins) - 1;
    members[b].push_back(values[i]);
    ++total;
  }
  std::vector<BinRow> rows;
  for (std::size_t b = 0; b < bins; ++b) {
    if (members[b].empty())
      continue;
    BinRow row;
    row.lo = edges[b];
    row.hi = edges[b + 1];
    row.label = range_label(row.lo, row.hi);
    row.percent = 100.0 * static_cast<double>(members[b].size())
                  / static_cast<double>(total);
    row.stats = box_stats(std::move(members[b]));
    rows.push_back(std::move(row));
  }
  return rows;
}

BinnedReports binned_reports(std::span<const EvalPoint> points,
                             const BinEdges &edges) {
  BinnedReports out;
  std::vector<double> p, t, ape;
  for (const EvalPoint &pt: points) {
    p.push_back(pt.exp_pa);
    t.push_back(pt.temperature_k);
    ape.push_back(pt.ape());
  }
  out.pressure = bin_table(p, ape, edges.pressure_pa);
  out.temperature = bin_table(t, ape, edges.temperature_k);

  const auto comps = component_errors(points);
  std::vector<double> mw, apec;
  for (const ComponentError &c: comps) {
    mw.push_back(c.mol_weight);
    apec.push_back(c.ape_c);
  }
  out.mol_weight = bin_table(mw, apec, edges.mol_weight);

  for (int k: edges.min_points) {
    std::vector<double> selected;
    for (const ComponentError &c: comps)
      if (c.points >= static_cast<std::size_t>(k))
        selected.push_back(c.ape_c);
    if (selected.empty())
      continue;
    BinRow row;
    row.lo = k;
    row.hi = k;
    row.label = "K >= " + std::to_string(k);
    row.percent = 100.0 * static_cast<double>(selected.size())
                  / static_cast<double>(comps.size());
    row.stats = box_stats(std::move(selected));
    out.min_points.push_back(std::move(row));
  }
  return out;
}

std::vector<HexCell> hexbin(std::span<const EvalPoint> points, int gridsize,
                            double clip) {
  if (gridsize < 1)
    throw std::invalid_argument("hexbin: gridsize must be >= 1");
  if (points.empty())
    return {};
  double xmin = points[0].temperature_k, xmax = xmin;
  double ymin = points[0].exp_ln_p(), ymax = ymin;
  for (const EvalPoint &p: points) {
    xmin = std::min(xmin, p.temperature_k);
    xmax = std::max(xmax, p.temperature_k);
    ymin = std::min(ymin, p.exp_ln_p());
    ymax = std::max(ymax, p.exp_ln_p());
  }
  const int nx = gridsize;
  const int ny = std::max(1, static_cast<int>(nx / std::sqrt(3.0)));
  // Pad degenerate or exact extents like common plotting libraries.
  auto widen = [](double &lo, double &hi) {
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 1e-9 * (hi - lo);
    lo -= pad;
    hi += pad;
  };
  widen(xmin, xmax);
  widen(ymin, ymax);
  const double sx = (xmax - xmin) / nx;
  const double sy = (ymax - ymin) / ny;

  // Two interleaved rectangular lattices; each point goes to the nearer
  // center in hexagonal metric.
  std::map<std::pair<int, long long>, std::vector<double>> cells;
  std::map<std::pair<int, long long>, std::pair<double, double>> centers;
  for (const EvalPoint &p: points) {
    const double ix = (p.temperature_k - xmin) / sx;
    const double iy = (p.exp_ln_p() - ymin) / sy;
    const double ix1 = std::round(ix), iy1 = std::round(iy);
    const double ix2 = std::floor(ix), iy2 = std::floor(iy);
    const double d1 = (ix - ix1) * (ix - ix1) + 3.0 * (iy - iy1) * (iy - iy1);
    const double d2 = (ix - ix2 - 0.5) * (ix - ix2 - 0.5)
                      + 3.0 * (iy - iy2 - 0.5) * (iy - iy2 - 0.5);
    std::pair<int, long long> key;
    std::pair<double, double> center;
    if (d1 < d2) {
      key = { 0, static_cast<long long>(ix1) * (ny + 2) + static_cast<long long>(iy1) };
      center = { xmin + ix1 * sx, ymin + iy1 * sy };
    } else {
      key = { 1, static_cast<long long>(ix2) * (ny + 2) + static_cast<long long>(iy2) };
      center = { xmin + (ix2 + 0.5) * sx, ymin + (iy2 + 0.5) * sy };
    }
    cells[key].push_back(p.ape());
    centers[key] = center;
  }
  std::vector<HexCell> out;
  for (auto &[key, apes]: cells) {
    HexCell c;
    c.t_center = centers[key].first;
    c.lnp_center = centers[key].second;
    c.count = apes.size();
    c.mape_i = std::min(median(std::move(apes)), clip);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const HexCell &a, const HexCell &b) {
    return std::tie(a.t_center, a.lnp_center)
           < std::tie(b.t_center, b.lnp_center);
  });
  return out;
}

std::string hexbin_csv(const std::vector<HexCell> &cells) {
  std::ostringstream out;
  out.precision(10);
  out << "T_center,lnp_center,MAPE_i,count\n";
  for (const HexCell &c: cells)
    out << c.t_center << ',' << c.lnp_center << ',' << c.mape_i << ','
        << c.count << '\n';
  return out.str();
}

BoilingPointReport boiling_point_report(std::span<const EvalPoint> points,
                                        std::span<const double> predicted_k,
                                        double lo_pa, double hi_pa,
                                        std::size_t min_points) {
  if (points.size() != predicted_k.size())
    throw std::invalid_argument(
        "boiling_point_report: one predicted temperature per point needed");
  std::map<std::string, std::size_t> count;
  for (const EvalPoint &p: points)
    ++count[p.component_id];
  std::map<std::string, std::size_t> slot;
  BoilingPointReport r;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const EvalPoint &p = points[i];
    if (p.exp_pa < lo_pa || p.exp_pa > hi_pa
        || count[p.component_id] < min_points)
      continue;
    auto [it, inserted] = slot.emplace(p.component_id, r.rows.size());
    if (inserted)
      r.rows.push_back({ p.component_id, 0, 0.0, 0.0 });
    BoilingPointRow &row = r.rows[it->second];
    ++row.points;
    row.exp_k += p.temperature_k;
    row.pred_k += predicted_k[i];
  }
  for (BoilingPointRow &row: r.rows) {
    row.exp_k /= static_cast<double>(row.points);
    row.pred_k /= static_cast<double>(row.points);
    r.mae_k += std::abs(row.pred_k - row.exp_k);
  }
  if (!r.rows.empty())
    r.mae_k /= static_cast<double>(r.rows.size());
  return r;
}

json to_json(const EvalReport &r) {
  json filters = json::array();
  for (const ComponentFilterStats &s: r.by_min_points)
    filters.push_back({ { "min_points", s.min_points },
                        { "components", s.components },
                        { "points", s.points },
                        { "MAPE_C", s.mape_c } });
  return { { "points", r.points },   { "components", r.components },
           { "MAE", r.mae },         { "MSE", r.mse },
           { "MAPE_i", r.mape_i },   { "MAPE_C", std::move(filters) } };
}

json to_json(const BinnedReports &r) {
  return { { "pressure_Pa", rows_json(r.pressure) },
           { "temperature_K", rows_json(r.temperature) },
           { "mol_weight", rows_json(r.mol_weight) },
           { "min_points", rows_json(r.min_points) } };
}

json to_json(const BoilingPointReport &r) {
  json rows = json::array();
  for (const BoilingPointRow &row: r.rows)
    rows.push_back({ { "component_id", row.component_id },
                     { "points", row.points },
                     { "exp_K", row.exp_k },
                     { "pred_K", row.pred_k } });
  return { { "components", r.rows.size() },
           { "MAE_K", r.mae_k },
           { "rows", std::move(rows) } };
}

std::string bins_csv(const std::vector<BinRow> &rows) {
  std::ostringstream out;
  out.precision(10);
  out << "label,lo,hi,percent,n,q1,median,q3,whisker_lo,whisker_hi,outliers\n";
  for (const BinRow &r: rows)
    out << '"' << r.label << "\"," << r.lo << ',' << r.hi << ',' << r.percent
        << ',' << r.stats.n << ',' << r.stats.q1 << ',' << r.stats.median
        << ',' << r.stats.q3 << ',' << r.stats.whisker_lo << ','
        << r.stats.whisker_hi << ',' << r.stats.outliers << '\n';
  return out.str();
}

}  // namespace grappa
