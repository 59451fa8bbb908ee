//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "grappa/dataio.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <cctype>
#include <sstream>

#include "json.hpp"

#include "grappa/molecule.h"
#include "grappa/random.h"

namespace grappa {
namespace {
using nlohmann::json;

const char *const kRequiredColumns[] = { "component_id", "smiles",
                                         "temperature_K", "pressure_Pa",
                                         "quality" };

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c: out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()
      || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  const std::string v = lower(trim(s));
  if (v.empty() || v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  return std::nullopt;
}

// Splits one CSV record; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c: s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos)
      break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

// Field access shared by the CSV and JSONL readers.
struct RawRow {
  std::map<std::string, std::string> fields;
  std::optional<std::string> get(const std::string &key) const {
    auto it = fields.find(key);
    if (it == fields.end())
      return std::nullopt;
    return it->second;
  }
};

// Validates one row into the dataset or returns a rejection reason.
std::optional<std::string> ingest(const RawRow &raw, int row,
                                  VpDataset &ds) {
  VpPoint p;
  p.row = row;
  p.component_id = std::string(trim(raw.get("component_id").value_or("")));
  p.smiles = std::string(trim(raw.get("smiles").value_or("")));
  if (p.component_id.empty())
    return "empty component_id";
  if (p.smiles.empty())
    return "empty smiles";
  const auto t = parse_double(raw.get("temperature_K").value_or(""));
  if (!t)
    return "temperature_K is not a number";
  if (!(*t > 0.0))
    return "temperature_K must be positive";
  const auto pr = parse_double(raw.get("pressure_Pa").value_or(""));
  if (!pr)
    return "pressure_Pa is not a number";
  if (!(*pr > 0.0))
    return "pressure_Pa must be positive";
  p.temperature_k = *t;
  p.pressure_pa = *pr;
  const std::string q = lower(trim(raw.get("quality").value_or("")));
  if (q.empty() || q == "ok")
    p.quality = Quality::kOk;
  else if (q == "poor")
    p.quality = Quality::kPoor;
  else
    return "unknown quality '" + q + "'";
  p.source = std::string(trim(raw.get("source").value_or("")));
  const auto stereo = parse_bool(raw.get("stereo_ok").value_or(""));
  if (!stereo)
    return "stereo_ok is not a boolean";
  p.stereo_ok = *stereo;

  std::optional<Split> split;
  if (const auto s = raw.get("split"); s && !trim(*s).empty()) {
    split = parse_split(lower(trim(*s)));
    if (!split)
      return "unknown split '" + *s + "'";
  }
  const Component *existing = ds.find(p.component_id);
  if (existing && existing->smiles != p.smiles)
    return "smiles differs from earlier rows of component '"
           + p.component_id + "'";
  if (existing && split && existing->split != *split)
    return "split differs from earlier rows of component '" + p.component_id
           + "'";
  const std::string id = p.component_id;
  ds.add(std::move(p));
  if (split)
    ds.set_split(id, *split);
  return std::nullopt;
}

double relative_deviation(double a, double b) {
  return std::max(std::abs(a / b - 1.0), std::abs(b / a - 1.0));
}
}  // namespace

std::string to_string(Quality q) { return q == Quality::kOk ? "ok" : "poor"; }

std::string to_string(Split s) {
  switch (s) {
  case Split::kTrain: return "train";
  case Split::kValid: return "valid";
  case Split::kTest: return "test";
  case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train")
    return Split::kTrain;
  if (text == "valid" || text == "validation")
    return Split::kValid;
  if (text == "test")
    return Split::kTest;
  if (text == "unassigned")
    return Split::kUnassigned;
  return std::nullopt;
}

void VpDataset::add(VpPoint point) {
  auto it = index_.find(point.component_id);
  if (it == index_.end()) {
    Component c;
    c.id = point.component_id;
    c.smiles = point.smiles;
    add_component(std::move(c));
    it = index_.find(point.component_id);
  }
  Component &c = components_[it->second];
  if (c.smiles != point.smiles)
    throw DataError("component '" + c.id + "' has conflicting SMILES");
  c.points.push_back(std::move(point));
}

void VpDataset::add_component(Component component) {
  if (index_.count(component.id))
    throw DataError("duplicate component '" + component.id + "'");
  index_.emplace(component.id, components_.size());
  components_.push_back(std::move(component));
}

const Component *VpDataset::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &components_[it->second];
}

Component *VpDataset::find(std::string_view id) {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &components_[it->second];
}

std::size_t VpDataset::num_points() const {
  std::size_t n = 0;
  for (const Component &c: components_)
    n += c.points.size();
  return n;
}

VpDataset VpDataset::filter(Split split) const {
  VpDataset out;
  for (const Component &c: components_)
    if (c.split == split)
      out.add_component(c);
  return out;
}

void VpDataset::set_split(std::string_view id, Split split) {
  Component *c = find(id);
  if (!c)
    throw DataError("unknown component '" + std::string(id) + "'");
  c->split = split;
}

LoadResult parse_csv(std::string_view text) {
  LoadResult result;
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty())
    ++first;
  if (first == lines.size())
    throw DataError("CSV input has no header");
  std::vector<std::string> header = split_record(lines[first]);
  for (std::string &h: header)
    h = std::string(trim(h));
  for (const char *col: kRequiredColumns)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw DataError(std::string("CSV is missing required column '") + col
                      + "'");
  int row = 0;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty())
      continue;
    ++row;
    const auto fields = split_record(lines[i]);
    if (fields.size() != header.size()) {
      result.rejects.push_back(
          { row, "expected " + std::to_string(header.size()) + " fields, got "
                     + std::to_string(fields.size()) });
      continue;
    }
    RawRow raw;
    for (std::size_t k = 0; k < header.size(); ++k)
      raw.fields[header[k]] = fields[k];
    if (auto reason = ingest(raw, row, result.dataset))
      result.rejects.push_back({ row, *reason });
  }
  return result;
}

LoadResult parse_jsonl(std::string_view text) {
  LoadResult result;
  int row = 0;
  for (std::string_view line: lines_of(text)) {
    if (trim(line).empty())
      continue;
    ++row;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      result.rejects.push_back({ row, std::string("invalid JSON: ") + e.what() });
      continue;
    }
    if (!j.is_object()) {
      result.rejects.push_back({ row, "record is not a JSON object" });
      continue;
    }
    RawRow raw;
    bool missing = false;
    for (const char *col: kRequiredColumns) {
      if (!j.contains(col) && std::string_view(col) != "quality") {
        result.rejects.push_back(
            { row, std::string("missing field '") + col + "'" });
        missing = true;
        break;
      }
    }
    if (missing)
      continue;
    for (const auto &[key, value]: j.items())
      raw.fields[key] = value.is_string() ? value.get<std::string>()
                                          : value.dump();
    if (auto reason = ingest(raw, row, result.dataset))
      result.rejects.push_back({ row, *reason });
  }
  return result;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out)
    throw DataError("failed writing '" + path + "'");
}

LoadResult load_dataset(const std::string &path,
                        std::optional<DataFormat> format) {
  if (!format) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : lower(path.substr(dot));
    format = ext == ".jsonl" || ext == ".json" ? DataFormat::kJsonl
                                               : DataFormat::kCsv;
  }
  const std::string text = read_file(path);
  return *format == DataFormat::kCsv ? parse_csv(text) : parse_jsonl(text);
}

std::string to_csv(const VpDataset &ds, bool with_split) {
  std::ostringstream out;
  out << "component_id,smiles,temperature_K,pressure_Pa,quality,source,"
         "stereo_ok";
  if (with_split)
    out << ",split";
  out << '\n';
  for (const Component &c: ds.components()) {
    for (const VpPoint &p: c.points) {
      out << csv_field(c.id) << ',' << csv_field(c.smiles) << ','
          << format_double(p.temperature_k) << ','
          << format_double(p.pressure_pa) << ',' << to_string(p.quality)
          << ',' << csv_field(p.source) << ','
          << (p.stereo_ok ? "true" : "false");
      if (with_split)
        out << ',' << to_string(c.split);
      out << '\n';
    }
  }
  return out.str();
}

void save_csv(const VpDataset &ds, const std::string &path, bool with_split) {
  write_file(path, to_csv(ds, with_split));
}

CurationResult curate(const VpDataset &ds, const CurationOptions &opt) {
  CurationResult result;
  auto log = [&](const std::string &id, int row, std::string rule,
                 std::string action, std::string detail) {
    result.audit.push_back(
        { id, row, std::move(rule), std::move(action), std::move(detail) });
  };

  for (const Component &in: ds.components()) {
    Component c = in;
    std::string molecule_problem;
    std::string molecule_rule;
    try {
      const ScopeVerdict verdict = validate_scope(parse_smiles(c.smiles));
      if (!verdict.accepted()) {
        molecule_rule = "scope";
        molecule_problem = verdict.reason();
      }
    } catch (const ParseError &e) {
      molecule_rule = "smiles";
      molecule_problem = e.what();
    } catch (const ValenceError &e) {
      molecule_rule = "smiles";
      molecule_problem = e.what();
    }
    if (!molecule_rule.empty()) {
      for (const VpPoint &p: c.points)
        log(c.id, p.row, molecule_rule, "drop", molecule_problem);
      continue;
    }

    std::vector<VpPoint> kept;
    for (const VpPoint &p: c.points) {
      std::ostringstream why;
      if (p.quality == Quality::kPoor) {
        log(c.id, p.row, "quality", "drop", "marked poor quality");
      } else if (!p.stereo_ok) {
        log(c.id, p.row, "stereo", "drop", "isomerism flagged as wrong");
      } else if (p.temperature_k < opt.t_min || p.temperature_k > opt.t_max) {
        why << "T = " << p.temperature_k << " K outside [" << opt.t_min
            << ", " << opt.t_max << "]";
        log(c.id, p.row, "temperature", "drop", why.str());
      } else if (p.pressure_pa < opt.p_min || p.pressure_pa > opt.p_max) {
        why << "p = " << p.pressure_pa << " Pa outside [" << opt.p_min
            << ", " << opt.p_max << "]";
        log(c.id, p.row, "pressure", "drop", why.str());
      } else {
        kept.push_back(p);
      }
    }

    // Refit until no further point is flagged, which makes curation
    // idempotent.
    while (kept.size() >= opt.min_points_for_outliers) {
      std::vector<double> t, pr;
      for (const VpPoint &p: kept) {
        t.push_back(p.temperature_k);
        pr.push_back(p.pressure_pa);
      }
      RobustFit fit;
      try {
        fit = robust_antoine_fit(t, pr, opt.fit);
      } catch (const std::invalid_argument &e) {
        log(c.id, 0, "outlier", "skip", e.what());
        break;
      }
      if (!fit.converged) {
        log(c.id, 0, "outlier", "skip", "robust Antoine fit did not converge");
        break;
      }
      std::vector<VpPoint> next;
      for (const VpPoint &p: kept) {
        const double fitted = vapor_pressure_pa(fit.params, p.temperature_k);
        const double dev = std::abs(p.pressure_pa - fitted) / fitted;
        if (dev > opt.outlier_threshold) {
          std::ostringstream why;
          why << "deviation " << 100.0 * dev << "% from robust Antoine fit";
          log(c.id, p.row, "outlier", "drop", why.str());
        } else {
          next.push_back(p);
        }
      }
      if (next.size() == kept.size())
        break;
      kept = std::move(next);
    }

    if (kept.empty()) {
      log(c.id, 0, "component", "drop", "no points left");
      continue;
    }
    c.points = std::move(kept);

    // Per-source disagreement for human review.
    std::map<std::string, std::vector<const VpPoint *>> by_source;
    for (const VpPoint &p: c.points)
      if (!p.source.empty())
        by_source[p.source].push_back(&p);
    std::vector<std::pair<std::string, AntoineParams>> source_fits;
    for (const auto &[source, pts]: by_source) {
      std::vector<double> t, pr;
      for (const VpPoint *p: pts) {
        t.push_back(p->temperature_k);
        pr.push_back(p->pressure_pa);
      }
      try {
        source_fits.emplace_back(source,
                                 robust_antoine_fit(t, pr, opt.fit).params);
      } catch (const std::invalid_argument &) {
        // Too few points from this source to compare.
      }
    }
    for (std::size_t a = 0; a < source_fits.size(); ++a) {
      for (std::size_t b = a + 1; b < source_fits.size(); ++b) {
        double worst = 0.0;
        for (const VpPoint &p: c.points)
          worst = std::max(
              worst,
              relative_deviation(
                  vapor_pressure_pa(source_fits[a].second, p.temperature_k),
                  vapor_pressure_pa(source_fits[b].second, p.temperature_k)));
        if (worst > opt.conflict_threshold)
          result.conflicts.push_back({ c.id, source_fits[a].first,
                                       source_fits[b].first, worst });
      }
    }
    result.dataset.add_component(std::move(c));
  }
  return result;
}

std::string audit_jsonl(const std::vector<AuditEntry> &audit) {
  std::string out;
  for (const AuditEntry &e: audit) {
    out += json{ { "component_id", e.component_id },
                 { "row", e.row },
                 { "rule", e.rule },
                 { "action", e.action },
                 { "detail", e.detail } }
               .dump();
    out += '\n';
  }
  return out;
}

void assign_splits(VpDataset &ds, std::uint64_t seed,
                   const SplitRatios &ratios, int small_carbon_limit) {
  const double sum = ratios.train + ratios.valid + ratios.test;
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0
      || std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must be non-negative and sum "
                                "to 1");
  std::vector<std::string> large;
  for (Component &c: ds.components()) {
    int carbons = 0;
    try {
      carbons = carbon_count(parse_smiles(c.smiles));
    } catch (const std::exception &e) {
      throw DataError("cannot split component '" + c.id + "': " + e.what());
    }
    if (carbons < small_carbon_limit)
      c.split = Split::kTrain;
    else
      large.push_back(c.id);
  }
  std::sort(large.begin(), large.end());
  Rng rng(seed);
  rng.shuffle(large.begin(), large.end());
  const auto n = static_cast<double>(large.size());
  const auto n_valid = static_cast<std::size_t>(std::llround(n * ratios.valid));
  const auto n_test = static_cast<std::size_t>(std::llround(n * ratios.test));
  const std::size_t n_train = large.size() - std::min(large.size(), n_valid + n_test);
  for (std::size_t i = 0; i < large.size(); ++i) {
    Split s = Split::kTest;
    if (i < n_train)
      s = Split::kTrain;
    else if (i < n_train + n_valid)
      s = Split::kValid;
    ds.set_split(large[i], s);
  }
}

std::string split_csv(const VpDataset &ds) {
  std::string out = "component_id,split\n";
  for (const Component &c: ds.components())
    out += csv_field(c.id) + "," + to_string(c.split) + "\n";
  return out;
}

void apply_split_csv(VpDataset &ds, std::string_view text) {
  const auto lines = lines_of(text);
  bool header = true;
  for (std::string_view line: lines) {
    if (trim(line).empty())
      continue;
    const auto fields = split_record(line);
    if (header) {
      header = false;
      if (fields.size() < 2 || trim(fields[0]) != "component_id"
          || trim(fields[1]) != "split")
        throw DataError("split file needs header 'component_id,split'");
      continue;
    }
    if (fields.size() != 2)
      throw DataError("split file rows need two fields");
    const auto s = parse_split(lower(trim(fields[1])));
    if (!s)
      throw DataError("unknown split '" + fields[1] + "'");
    ds.set_split(trim(fields[0]), *s);
  }
}

}  // namespace grappa
