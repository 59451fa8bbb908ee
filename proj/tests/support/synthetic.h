//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

// Synthetic vapor-pressure data generated from known Antoine parameters.
//
// Parameters follow a smooth group-contribution form over three homologous
// series (n-alkanes, 1-alkanols, n-alkylbenzenes), so held-out members of a
// series are interpolation targets for a structure-based model.

#ifndef GRAPPA_TESTS_SUPPORT_SYNTHETIC_H_
#define GRAPPA_TESTS_SUPPORT_SYNTHETIC_H_

#include <cmath>
#include <string>
#include <vector>

#include "grappa/antoine.h"
#include "grappa/dataio.h"
#include "grappa/random.h"

namespace grappa::testing {

struct SyntheticComponent {
  std::string id;
  std::string smiles;
  AntoineParams params;
};

inline AntoineParams series_params(int carbons, bool alcohol, bool aromatic) {
  const double n = carbons - 5;
  AntoineParams p;
  p.A = 13.8 + 0.02 * n + (alcohol ? 2.4 : 0.0) - (aromatic ? 0.05 : 0.0);
  p.B = 2480.0 + 210.0 * n + (alcohol ? 900.0 : 0.0) + (aromatic ? 250.0 : 0.0);
  p.C = -40.0 - 7.0 * n + (alcohol ? 5.0 : 0.0) - (aromatic ? 5.0 : 0.0);
  return p;
}

// 20 components: n-alkanes C5-C12, 1-alkanols C3-C8, alkylbenzenes C6-C11.
inline std::vector<SyntheticComponent> synthetic_components() {
  std::vector<SyntheticComponent> out;
  for (int n = 5; n <= 12; ++n)
    out.push_back({ "alkane_c" + std::to_string(n), std::string(n, 'C'),
                    series_params(n, false, false) });
  for (int n = 3; n <= 8; ++n)
    out.push_back({ "alkanol_c" + std::to_string(n),
                    std::string(n, 'C') + "O", series_params(n, true, false) });
  for (int k = 0; k <= 5; ++k)
    out.push_back({ "alkylbenzene_c" + std::to_string(6 + k),
                    "c1ccccc1" + std::string(k, 'C'),
                    series_params(6 + k, false, true) });
  return out;
}

// Interior members of each series, held out for validation.
inline std::vector<std::string> synthetic_holdout() {
  return { "alkane_c7", "alkane_c10", "alkanol_c5", "alkylbenzene_c8" };
}

// Temperatures spanning 1 kPa to 200 kPa, clipped to [250, 600] K.
inline std::vector<double> synthetic_temperatures(const AntoineParams &p,
                                                  int count) {
  double lo = p.B / p.A - p.C;
  double hi = p.B / (p.A - std::log(200.0)) - p.C;
  lo = std::max(lo, 250.0);
  hi = std::min(hi, 600.0);
  std::vector<double> t;
  for (int i = 0; i < count; ++i)
    t.push_back(lo + (hi - lo) * i / (count - 1));
  return t;
}

inline VpDataset synthetic_dataset(int points_per_component = 10) {
  VpDataset ds;
  for (const SyntheticComponent &c: synthetic_components()) {
    for (double t: synthetic_temperatures(c.params, points_per_component)) {
      VpPoint p;
      p.component_id = c.id;
      p.smiles = c.smiles;
      p.temperature_k = t;
      p.pressure_pa = vapor_pressure_pa(c.params, t);
      ds.add(p);
    }
  }
  for (Component &c: ds.components())
    c.split = Split::kTrain;
  for (const std::string &id: synthetic_holdout())
    ds.set_split(id, Split::kValid);
  return ds;
}

// Clean curve points plus, for components with at least five points, one
// point at twice the true pressure. Returns the injected rows.
struct Contaminated {
  VpDataset dataset;
  std::vector<std::pair<std::string, int>> injected;  // component, row
};

inline Contaminated contaminated_dataset(std::uint64_t seed) {
  Contaminated out;
  Rng rng(seed);
  int row = 0;
  const auto comps = synthetic_components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const SyntheticComponent &c = comps[k];
    // Every fifth component is small and must not lose points.
    const int count = k % 5 == 4 ? 4 : 8 + static_cast<int>(rng.below(5));
    const auto temps = synthetic_temperatures(c.params, count);
    const int bad = count >= 5 ? static_cast<int>(rng.below(count)) : -1;
    for (int i = 0; i < count; ++i) {
      VpPoint p;
      p.component_id = c.id;
      p.smiles = c.smiles;
      p.temperature_k = temps[i];
      p.pressure_pa = vapor_pressure_pa(c.params, temps[i]);
      p.row = ++row;
      if (i == bad) {
        p.pressure_pa *= 2.0;
        out.injected.emplace_back(c.id, p.row);
      }
      out.dataset.add(p);
    }
  }
  return out;
}

}  // namespace grappa::testing

#endif  // GRAPPA_TESTS_SUPPORT_SYNTHETIC_H_
