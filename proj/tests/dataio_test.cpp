//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

#include "grappa/dataio.h"
#include "support/synthetic.h"

namespace grappa {
namespace {

const char *kHeader = "component_id,smiles,temperature_K,pressure_Pa,quality\n";

VpPoint point(const std::string &id, const std::string &smiles, double t,
              double p, int row = 0) {
  VpPoint v;
  v.component_id = id;
  v.smiles = smiles;
  v.temperature_k = t;
  v.pressure_pa = p;
  v.row = row;
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Sorted (component, row) pairs of the dropped outlier entries.
std::vector<std::pair<std::string, int>> dropped_outliers(
    const CurationResult &r) {
  std::vector<std::pair<std::string, int>> out;
  for (const AuditEntry &e: r.audit)
    if (e.rule == "outlier" && e.action == "drop")
      out.emplace_back(e.component_id, e.row);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(ParseCsv, HeaderOnlyIsEmpty) {
  const LoadResult r = parse_csv(kHeader);
  EXPECT_EQ(r.dataset.num_points(), 0u);
  EXPECT_TRUE(r.rejects.empty());
}

TEST(ParseCsv, OneRow) {
  const LoadResult r =
      parse_csv(std::string(kHeader) + "eth,CCO,300,8000,ok\n");
  ASSERT_EQ(r.dataset.num_points(), 1u);
  const VpPoint &p = r.dataset.components()[0].points[0];
  EXPECT_EQ(p.component_id, "eth");
  EXPECT_EQ(p.temperature_k, 300.0);
  EXPECT_EQ(p.pressure_pa, 8000.0);
  EXPECT_EQ(p.quality, Quality::kOk);
  EXPECT_EQ(p.row, 1);
}

TEST(ParseCsv, BadRowsRejectedWithRowNumber) {
  const LoadResult r = parse_csv(std::string(kHeader)
                                 + "eth,CCO,300,8000,ok\n"
                                   "eth,CCO,310,-5,ok\n"
                                   "eth,CCO,abc,100,ok\n"
                                   "eth,CCO,320,100\n"
                                   "eth,CCO,330,100,maybe\n");
  EXPECT_EQ(r.dataset.num_points(), 1u);
  ASSERT_EQ(r.rejects.size(), 4u);
  EXPECT_EQ(r.rejects[0].row, 2);
  EXPECT_EQ(r.rejects[1].row, 3);
  EXPECT_EQ(r.rejects[2].row, 4);
  EXPECT_EQ(r.rejects[3].row, 5);
}

TEST(ParseCsv, MissingColumnRaises) {
  EXPECT_THROW(parse_csv("component_id,smiles,temperature_K\n"), DataError);
  EXPECT_THROW(parse_csv(""), DataError);
}

TEST(ParseCsv, OptionalColumns) {
  const LoadResult r = parse_csv(
      "component_id,smiles,temperature_K,pressure_Pa,quality,source,stereo_ok,"
      "split\n"
      "a,CCO,300,8000,poor,lit1,false,test\n");
  ASSERT_EQ(r.dataset.num_points(), 1u);
  const Component &c = r.dataset.components()[0];
  EXPECT_EQ(c.points[0].quality, Quality::kPoor);
  EXPECT_EQ(c.points[0].source, "lit1");
  EXPECT_FALSE(c.points[0].stereo_ok);
  EXPECT_EQ(c.split, Split::kTest);
}

TEST(ParseJsonl, RecordsAndRejects) {
  const LoadResult r = parse_jsonl(
      R"({"component_id":"a","smiles":"CCO","temperature_K":300,"pressure_Pa":8000,"quality":"ok"})"
      "\n{not json\n"
      R"({"component_id":"a","smiles":"CCO","temperature_K":300})"
      "\n");
  EXPECT_EQ(r.dataset.num_points(), 1u);
  ASSERT_EQ(r.rejects.size(), 2u);
  EXPECT_EQ(r.rejects[0].row, 2);
  EXPECT_EQ(r.rejects[1].row, 3);
}

TEST(Dataset, ConflictingSmilesRaise) {
  VpDataset ds;
  ds.add(point("a", "CCO", 300, 1000));
  EXPECT_THROW(ds.add(point("a", "CCC", 300, 1000)), DataError);
}

TEST(Dataset, CsvRoundTrip) {
  const VpDataset ds = testing::synthetic_dataset(6);
  const LoadResult back = parse_csv(to_csv(ds, true));
  ASSERT_TRUE(back.rejects.empty());
  ASSERT_EQ(back.dataset.num_components(), ds.num_components());
  for (std::size_t k = 0; k < ds.num_components(); ++k) {
    const Component &a = ds.components()[k], &b = back.dataset.components()[k];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.split, b.split);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_EQ(a.points[i].temperature_k, b.points[i].temperature_k);
      EXPECT_EQ(a.points[i].pressure_pa, b.points[i].pressure_pa);
    }
  }
}

TEST(Dataset, FileLoadByExtension) {
  const std::string path = ::testing::TempDir() + "grappa_dataio_test.csv";
  save_csv(testing::synthetic_dataset(5), path);
  EXPECT_EQ(load_dataset(path).dataset.num_points(), 100u);
  std::remove(path.c_str());
  EXPECT_THROW(load_dataset(path), DataError);
}

TEST(RobustFit, RecoversNoiselessParameters) {
  const AntoineParams truth{ 10, 2000, -50 };
  std::vector<double> t, p;
  for (int i = 0; i < 8; ++i) {
    t.push_back(260.0 + 25.0 * i);
    p.push_back(vapor_pressure_pa(truth, t.back()));
  }
  const RobustFit fit = robust_antoine_fit(t, p);
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(rel(fit.params.A, truth.A), 1e-3);
  EXPECT_LT(rel(fit.params.B, truth.B), 1e-3);
  EXPECT_LT(rel(fit.params.C, truth.C), 1e-3);
}

TEST(RobustFit, OneGrossOutlierBarelyMoves) {
  const AntoineParams truth{ 10, 2000, -50 };
  std::vector<double> t, p;
  for (int i = 0; i < 10; ++i) {
    t.push_back(260.0 + 20.0 * i);
    p.push_back(vapor_pressure_pa(truth, t.back()));
  }
  p[4] *= 5.0;
  const RobustFit fit = robust_antoine_fit(t, p);
  EXPECT_LT(rel(fit.params.A, truth.A), 0.01);
  EXPECT_LT(rel(fit.params.B, truth.B), 0.01);
  EXPECT_LT(rel(fit.params.C, truth.C), 0.01);
}

TEST(RobustFit, OutlierAtCurveEndIsRejected) {
  const AntoineParams truth{ 13.81, 3360, -66 };
  std::vector<double> t, p;
  for (int i = 0; i < 8; ++i) {
    t.push_back(309.3 + 21.636 * i);
    p.push_back(vapor_pressure_pa(truth, t.back()) * (i == 0 ? 2.0 : 1.0));
  }
  const RobustFit fit = robust_antoine_fit(t, p);
  EXPECT_NEAR(fit.residuals[0], std::log(2.0), 1e-3);
  EXPECT_LT(rel(fit.params.C, truth.C), 1e-3);

  FitOptions plain;
  plain.redescend = false;
  // Huber alone is dragged far enough to hide the outlier.
  EXPECT_LT(robust_antoine_fit(t, p, plain).residuals[0], 0.5);
}

TEST(RobustFit, CostNeverIncreases) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const AntoineParams truth{ rng.uniform(8, 16), rng.uniform(2000, 5000),
                               rng.uniform(-120, -10) };
    std::vector<double> t, p;
    for (int i = 0; i < 9; ++i) {
      t.push_back(300.0 + 15.0 * i);
      p.push_back(vapor_pressure_pa(truth, t.back())
                  * std::exp(0.05 * rng.normal()));
    }
    const RobustFit fit = robust_antoine_fit(t, p);
    for (std::size_t k = 1; k < fit.cost_history.size(); ++k)
      EXPECT_LE(fit.cost_history[k], fit.cost_history[k - 1]);
    // The fit box is closed, so bounds themselves are reachable.
    const ParamRanges r;
    EXPECT_TRUE(fit.params.A >= r.a_lo && fit.params.A <= r.a_hi);
    EXPECT_TRUE(fit.params.B >= r.b_lo && fit.params.B <= r.b_hi);
    EXPECT_TRUE(fit.params.C >= r.c_lo && fit.params.C <= r.c_hi);
  }
}

TEST(RobustFit, Preconditions) {
  const std::vector<double> t2 = { 300, 310 }, p2 = { 1000, 2000 };
  EXPECT_THROW(robust_antoine_fit(t2, p2), std::invalid_argument);
  const std::vector<double> t3 = { 300, 300.5, 300.2 }, p3 = { 1, 2, 3 };
  EXPECT_THROW(robust_antoine_fit(t3, p3), std::invalid_argument);
}

TEST(Curate, FilterRules) {
  VpDataset ds;
  ds.add(point("eth", "CCO", 200.0, 1000.0, 1));   // temperature
  ds.add(point("eth", "CCO", 300.0, 0.5, 2));      // pressure
  ds.add(point("eth", "CCO", 300.0, 8000.0, 3));   // kept
  VpPoint poor = point("eth", "CCO", 310.0, 9000.0, 4);
  poor.quality = Quality::kPoor;
  ds.add(poor);
  VpPoint stereo = point("eth", "CCO", 320.0, 9500.0, 5);
  stereo.stereo_ok = false;
  ds.add(stereo);
  ds.add(point("water", "O", 300.0, 3000.0, 6));    // scope
  ds.add(point("junk", "C1CC", 300.0, 3000.0, 7));  // smiles
  const CurationResult r = curate(ds);
  ASSERT_EQ(r.dataset.num_components(), 1u);
  ASSERT_EQ(r.dataset.num_points(), 1u);
  EXPECT_EQ(r.dataset.components()[0].points[0].row, 3);
  std::set<std::pair<int, std::string>> got;
  for (const AuditEntry &e: r.audit)
    if (e.row > 0)
      got.insert({ e.row, e.rule });
  const std::set<std::pair<int, std::string>> want = {
    { 1, "temperature" }, { 2, "pressure" }, { 4, "quality" },
    { 5, "stereo" },      { 6, "scope" },    { 7, "smiles" },
  };
  EXPECT_EQ(got, want);
}

TEST(Curate, SmallComponentsSkipOutlierPass) {
  VpDataset ds;
  const AntoineParams truth{ 10, 2000, -50 };
  for (int i = 0; i < 4; ++i)
    ds.add(point("small", "CCCCC", 280.0 + 20 * i,
                 vapor_pressure_pa(truth, 280.0 + 20 * i) * (i == 2 ? 3 : 1),
                 i + 1));
  const CurationResult r = curate(ds);
  EXPECT_EQ(r.dataset.num_points(), 4u);
}

TEST(Curate, RemovesExactlyInjectedOutliers) {
  for (std::uint64_t seed: { 1u, 2u, 3u }) {
    auto data = testing::contaminated_dataset(seed);
    const CurationResult r = curate(data.dataset);
    std::sort(data.injected.begin(), data.injected.end());
    EXPECT_EQ(dropped_outliers(r), data.injected) << "seed " << seed;
    EXPECT_EQ(r.dataset.num_points(),
              data.dataset.num_points() - data.injected.size());
  }
}

TEST(Curate, Idempotent) {
  const auto data = testing::contaminated_dataset(4);
  const CurationResult once = curate(data.dataset);
  const CurationResult twice = curate(once.dataset);
  EXPECT_EQ(to_csv(once.dataset, true), to_csv(twice.dataset, true));
}

TEST(Curate, ConflictReport) {
  VpDataset ds;
  const AntoineParams a{ 10, 2000, -50 }, b{ 10.8, 2000, -50 };
  for (int i = 0; i < 5; ++i) {
    const double t = 280.0 + 15 * i;
    VpPoint p = point("c", "CCCCCC", t, vapor_pressure_pa(a, t), i + 1);
    p.source = "s1";
    ds.add(p);
    VpPoint q = point("c", "CCCCCC", t + 5, vapor_pressure_pa(b, t + 5),
                      i + 10);
    q.source = "s2";
    ds.add(q);
  }
  CurationOptions opt;
  opt.outlier_threshold = 10.0;  // keep every point
  const CurationResult r = curate(ds, opt);
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.conflicts[0].source_a, "s1");
  EXPECT_EQ(r.conflicts[0].source_b, "s2");
  EXPECT_NEAR(r.conflicts[0].max_relative_deviation, std::exp(0.8) - 1, 1e-3);
}

TEST(AuditJsonl, OneObjectPerLine) {
  const std::string text =
      audit_jsonl({ { "a", 3, "temperature", "drop", "T below" } });
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["rule"], "temperature");
  EXPECT_EQ(j["row"], 3);
}

VpDataset split_fixture() {
  VpDataset ds;
  const char *small[] = { "C", "CC", "CCC", "CCCC" };
  for (int i = 0; i < 4; ++i)
    ds.add(point("small" + std::to_string(i), small[i], 300, 1000));
  for (int i = 0; i < 30; ++i)
    ds.add(point("big" + std::to_string(i), std::string(5 + i % 7, 'C'), 300,
                 1000));
  return ds;
}

TEST(Split, SmallMoleculesAlwaysTrain) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    VpDataset ds = split_fixture();
    assign_splits(ds, seed);
    for (int i = 0; i < 4; ++i)
      EXPECT_EQ(ds.find("small" + std::to_string(i))->split, Split::kTrain);
  }
}

TEST(Split, DeterministicPartitionWithRatios) {
  VpDataset a = split_fixture(), b = split_fixture();
  assign_splits(a, 42);
  assign_splits(b, 42);
  EXPECT_EQ(split_csv(a), split_csv(b));
  int counts[3] = {};
  for (const Component &c: a.components()) {
    ASSERT_NE(c.split, Split::kUnassigned);
    if (c.id.starts_with("big"))
      ++counts[static_cast<int>(c.split)];
  }
  EXPECT_NEAR(counts[0], 24, 1);
  EXPECT_NEAR(counts[1], 3, 1);
  EXPECT_NEAR(counts[2], 3, 1);
  VpDataset c = split_fixture();
  assign_splits(c, 43);
  EXPECT_NE(split_csv(a), split_csv(c));
}

TEST(Split, BadRatiosRaise) {
  VpDataset ds = split_fixture();
  EXPECT_THROW(assign_splits(ds, 1, { 0.8, 0.1, 0.2 }),
               std::invalid_argument);
}

TEST(Split, CsvRoundTrip) {
  VpDataset a = split_fixture();
  assign_splits(a, 7);
  VpDataset b = split_fixture();
  apply_split_csv(b, split_csv(a));
  EXPECT_EQ(split_csv(a), split_csv(b));
  EXPECT_THROW(apply_split_csv(b, "component_id,split\nnope,train\n"),
               DataError);
}

}  // namespace
}  // namespace grappa
