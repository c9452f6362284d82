// SPDX-License-Identifier: Apache-2.0

#include "augmincer/index_builder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer {

std::string_view to_string(IndexVariant v) {
  switch (v) {
    case IndexVariant::kImportanceWeighted: return "importance_weighted";
    case IndexVariant::kRawUnweighted: return "raw_unweighted";
    case IndexVariant::kBinaryMedian: return "binary_median";
    case IndexVariant::kSubstitutionDisplacement: return "substitution_displacement";
  }
  return "importance_weighted";
}

std::optional<IndexVariant> parse_index_variant(std::string_view s) {
  const auto k = text::to_lower(text::trim(s));
  for (auto v : {IndexVariant::kImportanceWeighted, IndexVariant::kRawUnweighted, IndexVariant::kBinaryMedian,
                 IndexVariant::kSubstitutionDisplacement}) {
    if (k == to_string(v)) return v;
  }
  return std::nullopt;
}

std::string_view to_string(DTransform t) { return t == DTransform::kStd ? "std" : "log"; }

std::optional<DTransform> parse_d_transform(std::string_view s) {
  const auto k = text::to_lower(text::trim(s));
  if (k == "std") return DTransform::kStd;
  if (k == "log") return DTransform::kLog;
  return std::nullopt;
}

std::vector<double> standardize(std::span<const double> values, std::span<const double> weights,
                                std::string_view name) {
  if (values.size() < 2) throw DomainError("standardize " + std::string(name) + ": need at least two values");
  if (!weights.empty() && weights.size() != values.size())
    throw ValidationError("standardize " + std::string(name) + ": weights length differs from values");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (w(i) < 0.0) throw ValidationError("standardize " + std::string(name) + ": negative weight");
    wsum += w(i);
    mean += w(i) * values[i];
  }
  if (!(wsum > 0.0)) throw DomainError("standardize " + std::string(name) + ": weights sum to zero");
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += w(i) * (values[i] - mean) * (values[i] - mean);
  var /= wsum;
  const double sd = std::sqrt(var);
  const double scale = std::max(std::abs(mean), 1.0);
  if (!(sd > 1e-14 * scale)) throw DomainError("standardize: '" + std::string(name) + "' is constant (zero SD)");

  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

namespace {

double weighted_median(std::vector<std::pair<double, double>> value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  // Exactly half the weight at or below a value: midpoint with the next one,
  // so uniform weights give the ordinary median.
  double cum = 0.0;
  for (std::size_t i = 0; i < value_weight.size(); ++i) {
    cum += value_weight[i].second;
    if (cum == 0.5 * total && i + 1 < value_weight.size())
      return 0.5 * (value_weight[i].first + value_weight[i + 1].first);
    if (cum >= 0.5 * total) return value_weight[i].first;
  }
  return value_weight.back().first;
}

}  // namespace

IndexResult compute_index(std::span<const TaskScore> scores, const IndexConfig& config) {
  struct Acc {
    double w = 0.0, wa = 0.0, ws = 0.0, a_sum = 0.0;
    double a_min = 100.0, a_max = 0.0, s_min = 100.0, s_max = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& s : scores) {
    s.validate();
    auto& a = acc[s.occupation_code];
    if (s.importance <= 0.0) continue;
    a.w += s.importance;
    a.wa += s.importance * s.augmentation;
    a.ws += s.importance * s.substitution;
    a.a_sum += s.augmentation;
    a.a_min = std::min(a.a_min, s.augmentation);
    a.a_max = std::max(a.a_max, s.augmentation);
    a.s_min = std::min(a.s_min, s.substitution);
    a.s_max = std::max(a.s_max, s.substitution);
    ++a.n;
  }

  IndexResult result;
  std::vector<double> weighted_ahc;
  for (const auto& [code, a] : acc) {
    if (a.n == 0) {
      result.omitted.push_back(code);
      continue;
    }
    OccupationIndex idx;
    idx.occupation_code = code;
    idx.n_tasks = a.n;
    // Clamped so rounding never pushes a mean outside its contributing scores.
    idx.sub_raw = std::clamp(a.ws / a.w, a.s_min, a.s_max);
    const double weighted = std::clamp(a.wa / a.w, a.a_min, a.a_max);
    switch (config.variant) {
      case IndexVariant::kImportanceWeighted:
      case IndexVariant::kBinaryMedian: idx.ahc_raw = weighted; break;
      case IndexVariant::kRawUnweighted:
        idx.ahc_raw = std::clamp(a.a_sum / static_cast<double>(a.n), a.a_min, a.a_max);
        break;
      case IndexVariant::kSubstitutionDisplacement: idx.ahc_raw = idx.sub_raw; break;
    }
    weighted_ahc.push_back(weighted);
    result.indices.push_back(std::move(idx));
  }

  std::vector<double> pop_weights;
  if (config.standardization_weights) {
    for (const auto& idx : result.indices) {
      auto it = config.standardization_weights->find(idx.occupation_code);
      pop_weights.push_back(it == config.standardization_weights->end() ? 0.0 : it->second);
    }
  }

  if (config.variant == IndexVariant::kBinaryMedian && !result.indices.empty()) {
    std::vector<std::pair<double, double>> vw;
    for (std::size_t i = 0; i < weighted_ahc.size(); ++i)
      vw.emplace_back(weighted_ahc[i], pop_weights.empty() ? 1.0 : pop_weights[i]);
    const double median = weighted_median(vw);
    for (std::size_t i = 0; i < result.indices.size(); ++i)
      result.indices[i].ahc_raw = weighted_ahc[i] >= median ? 1.0 : 0.0;
  }

  if (config.standardize && !result.indices.empty()) {
    std::vector<double> ahc, sub;
    for (const auto& idx : result.indices) {
      ahc.push_back(idx.ahc_raw);
      sub.push_back(idx.sub_raw);
    }
    const auto ahc_z = standardize(ahc, pop_weights, "ahc");
    const auto sub_z = standardize(sub, pop_weights, "sub");
    for (std::size_t i = 0; i < result.indices.size(); ++i) {
      result.indices[i].ahc_std = ahc_z[i];
      result.indices[i].sub_std = sub_z[i];
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

void DProxyWeights::validate() const {
  const auto w = as_array();
  for (double x : w) {
    if (!(x >= 0.0)) throw ValidationError("d_proxy weights must be nonnegative");
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("d_proxy weights must sum to 1 (got " + text::format_double(sum) + ")");
}

DProxyResult compute_d_proxy(std::span<const AdoptionCell> cells, const DProxyWeights& weights,
                             std::span<const double> cell_weights) {
  weights.validate();
  if (cells.size() < 2) throw ValidationError("compute_d_proxy: need at least two cells");

  static constexpr const char* kNames[4] = {"formality_rate", "mean_education", "mean_income", "largefirm_share"};
  auto indicator = [](const AdoptionCell& c, int k) {
    switch (k) {
      case 0: return c.formality_rate;
      case 1: return c.mean_education;
      case 2: return c.mean_income;
      default: return c.largefirm_share;
    }
  };

  DProxyResult result;
  result.cells.assign(cells.begin(), cells.end());
  std::vector<double> d(cells.size(), 0.0);
  const auto w = weights.as_array();
  for (int k = 0; k < 4; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : cells) {
      const double v = indicator(c, k);
      if (!std::isfinite(v)) throw ValidationError(std::string("compute_d_proxy: non-finite ") + kNames[k]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
      result.warnings.push_back(std::string(kNames[k]) + " is constant across cells; it contributes 0 to D");
      continue;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) d[i] += w[static_cast<std::size_t>(k)] * (indicator(cells[i], k) - lo) / (hi - lo);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) result.cells[i].d_raw = std::clamp(d[i], 0.0, 1.0);

  std::vector<double> raw(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) raw[i] = result.cells[i].d_raw;
  const auto z = standardize(raw, cell_weights, "d_raw");
  for (std::size_t i = 0; i < cells.size(); ++i) result.cells[i].d_std = z[i];
  return result;
}

CellMap index_cells(std::span<const AdoptionCell> cells) {
  CellMap m;
  for (const auto& c : cells) {
    if (!m.emplace(CellKey{c.sector_code, c.occgroup_code}, c).second)
      throw ValidationError("duplicate adoption cell (" + c.sector_code + ", " + c.occgroup_code + ")");
  }
  return m;
}

std::string occgroup_of(std::string_view occupation_code, std::size_t digits) {
  return std::string(occupation_code.substr(0, std::min(digits, occupation_code.size())));
}

std::vector<AdoptionCell> aggregate_cells(std::span<const WorkerRecord> workers, std::size_t occgroup_digits,
                                          const std::map<CellKey, double>& largefirm) {
  struct Acc {
    double w = 0.0, formal = 0.0, income = 0.0, educ_w = 0.0, educ = 0.0;
  };
  std::map<CellKey, Acc> acc;
  for (const auto& wk : workers) {
    auto& a = acc[{wk.sector_code, occgroup_of(wk.occupation_code, occgroup_digits)}];
    const double sw = wk.sampling_weight;
    a.w += sw;
    a.formal += sw * (wk.formal ? 1.0 : 0.0);
    a.income += sw * std::exp(wk.log_income);
    if (wk.education_years) {
      a.educ_w += sw;
      a.educ += sw * *wk.education_years;
    }
  }
  std::vector<AdoptionCell> cells;
  for (const auto& [key, a] : acc) {
    AdoptionCell c;
    c.sector_code = key.first;
    c.occgroup_code = key.second;
    c.formality_rate = a.formal / a.w;
    c.mean_income = a.income / a.w;
    c.mean_education = a.educ_w > 0.0 ? a.educ / a.educ_w : 0.0;
    auto it = largefirm.find(key);
    c.largefirm_share = it == largefirm.end() ? 0.0 : it->second;
    cells.push_back(c);
  }
  return cells;
}

nlohmann::json JoinReport::to_json() const {
  return {{"rows", rows},
          {"matched_occupation", matched_occupation},
          {"matched_cell", matched_cell},
          {"unmatched_occupation_rows", rows - matched_occupation},
          {"unmatched_cell_rows", rows - matched_cell},
          {"unmatched_occupations", unmatched_occupations},
          {"nonpositive_d", nonpositive_d}};
}

AttachResult attach_indices(std::span<const WorkerRecord> workers, const std::map<std::string, OccupationIndex>& indices,
                            const CellMap& cells, const AttachOptions& options) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = workers.size();
  std::vector<std::string> ids(n), occ(n), sector(n), group(n);
  std::vector<double> log_income(n), educ(n), exper(n), exper2(n), age(n), female(n), urban(n), formal(n), weight(n),
      ahc(n, kNaN), sub(n, kNaN), ahc_raw(n, kNaN), sub_raw(n, kNaN), d(n, kNaN), d_raw(n, kNaN), m_occ(n, 0.0),
      m_cell(n, 0.0);

  AttachResult result;
  auto& report = result.report;
  report.rows = n;
  std::set<std::string> unmatched;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = workers[i];
    ids[i] = w.worker_id;
    occ[i] = w.occupation_code;
    sector[i] = w.sector_code;
    group[i] = occgroup_of(w.occupation_code, options.occgroup_digits);
    log_income[i] = w.log_income;
    educ[i] = w.education_years.value_or(kNaN);
    exper[i] = w.experience.value_or(kNaN);
    exper2[i] = w.experience ? *w.experience * *w.experience : kNaN;
    age[i] = w.age;
    female[i] = w.female ? 1.0 : 0.0;
    urban[i] = w.urban ? 1.0 : 0.0;
    formal[i] = w.formal ? 1.0 : 0.0;
    weight[i] = w.sampling_weight;

    if (auto it = indices.find(w.occupation_code); it != indices.end()) {
      ahc[i] = it->second.ahc_std;
      sub[i] = it->second.sub_std;
      ahc_raw[i] = it->second.ahc_raw;
      sub_raw[i] = it->second.sub_raw;
      m_occ[i] = 1.0;
      ++report.matched_occupation;
    } else {
      unmatched.insert(w.occupation_code);
    }

    auto cit = cells.find({w.sector_code, group[i]});
    if (cit == cells.end()) cit = cells.find({w.sector_code, std::string()});
    if (cit != cells.end()) {
      d_raw[i] = cit->second.d_raw;
      if (options.d_transform == DTransform::kStd) {
        d[i] = cit->second.d_std;
      } else if (cit->second.d_raw > 0.0) {
        d[i] = std::log(cit->second.d_raw);
      } else {
        ++report.nonpositive_d;
      }
      m_cell[i] = 1.0;
      ++report.matched_cell;
    }
  }
  report.unmatched_occupations.assign(unmatched.begin(), unmatched.end());

  auto& t = result.table;
  t.add_text(col::kWorkerId, std::move(ids));
  t.add_text(col::kOccupation, std::move(occ));
  t.add_text(col::kSector, std::move(sector));
  t.add_text(col::kOccgroup, std::move(group));
  t.add_numeric(col::kLogIncome, std::move(log_income));
  t.add_numeric(col::kEduc, std::move(educ));
  t.add_numeric(col::kExper, std::move(exper));
  t.add_numeric(col::kExper2, std::move(exper2));
  t.add_numeric(col::kAge, std::move(age));
  t.add_numeric(col::kFemale, std::move(female));
  t.add_numeric(col::kUrban, std::move(urban));
  t.add_numeric(col::kFormal, std::move(formal));
  t.add_numeric(col::kWeight, std::move(weight));
  t.add_numeric(col::kAhc, std::move(ahc));
  t.add_numeric(col::kSub, std::move(sub));
  t.add_numeric(col::kAhcRaw, std::move(ahc_raw));
  t.add_numeric(col::kSubRaw, std::move(sub_raw));
  t.add_numeric(col::kD, std::move(d));
  t.add_numeric(col::kDRaw, std::move(d_raw));
  t.add_numeric(col::kMatchedOccupation, std::move(m_occ));
  t.add_numeric(col::kMatchedCell, std::move(m_cell));
  return result;
}

// ---------------------------------------------------------------------------

void write_index_csv(std::ostream& out, std::span<const OccupationIndex> indices) {
  csv::write_row(out, {"occupation_code", "n_tasks", "ahc_raw", "sub_raw", "ahc_std", "sub_std"});
  for (const auto& i : indices) {
    csv::write_row(out, {i.occupation_code, std::to_string(i.n_tasks), text::format_double(i.ahc_raw),
                         text::format_double(i.sub_raw), text::format_double(i.ahc_std),
                         text::format_double(i.sub_std)});
  }
}

std::vector<OccupationIndex> read_index_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  std::vector<std::size_t> idx;
  for (const char* name : {"occupation_code", "n_tasks", "ahc_raw", "sub_raw", "ahc_std", "sub_std"}) {
    const auto i = header.find(name);
    if (!i) throw ValidationError(std::string("index CSV is missing column ") + name);
    idx.push_back(*i);
  }
  std::vector<OccupationIndex> out;
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    const auto line = std::to_string(reader.record_line());
    if (row.size() != header.size()) throw ValidationError("index CSV line " + line + ": wrong field count");
    OccupationIndex o;
    o.occupation_code = std::string(text::trim(row[idx[0]]));
    const auto n = text::parse_int(row[idx[1]]);
    const auto a = text::parse_double(row[idx[2]]);
    const auto s = text::parse_double(row[idx[3]]);
    const auto az = text::parse_double(row[idx[4]]);
    const auto sz = text::parse_double(row[idx[5]]);
    if (!n || *n < 1 || !a || !s || !az || !sz) throw ValidationError("index CSV line " + line + ": bad value");
    o.n_tasks = static_cast<std::size_t>(*n);
    o.ahc_raw = *a;
    o.sub_raw = *s;
    o.ahc_std = *az;
    o.sub_std = *sz;
    out.push_back(std::move(o));
  }
  return out;
}

void write_cells_csv(std::ostream& out, std::span<const AdoptionCell> cells) {
  csv::write_row(out, {"sector_code", "occgroup_code", "formality_rate", "mean_education", "mean_income",
                       "largefirm_share", "d_raw", "d_std"});
  for (const auto& c : cells) {
    csv::write_row(out, {c.sector_code, c.occgroup_code, text::format_double(c.formality_rate),
                         text::format_double(c.mean_education), text::format_double(c.mean_income),
                         text::format_double(c.largefirm_share), text::format_double(c.d_raw),
                         text::format_double(c.d_std)});
  }
}

std::vector<AdoptionCell> read_cells_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  std::vector<std::size_t> idx;
  for (const char* name :
       {"sector_code", "occgroup_code", "formality_rate", "mean_education", "mean_income", "largefirm_share"}) {
    const auto i = header.find(name);
    if (!i) throw ValidationError(std::string("cell CSV is missing column ") + name);
    idx.push_back(*i);
  }
  const auto d_raw = header.find("d_raw");
  const auto d_std = header.find("d_std");
  std::vector<AdoptionCell> out;
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    const auto line = std::to_string(reader.record_line());
    if (row.size() != header.size()) throw ValidationError("cell CSV line " + line + ": wrong field count");
    AdoptionCell c;
    c.sector_code = std::string(text::trim(row[idx[0]]));
    c.occgroup_code = std::string(text::trim(row[idx[1]]));
    double* targets[4] = {&c.formality_rate, &c.mean_education, &c.mean_income, &c.largefirm_share};
    for (int k = 0; k < 4; ++k) {
      const auto v = text::parse_double(row[idx[static_cast<std::size_t>(k + 2)]]);
      if (!v) throw ValidationError("cell CSV line " + line + ": bad indicator value");
      *targets[k] = *v;
    }
    if (c.formality_rate < 0.0 || c.formality_rate > 1.0 || c.largefirm_share < 0.0 || c.largefirm_share > 1.0)
      throw ValidationError("cell CSV line " + line + ": shares must lie in [0,1]");
    if (d_raw) c.d_raw = text::parse_double(row[*d_raw]).value_or(0.0);
    if (d_std) c.d_std = text::parse_double(row[*d_std]).value_or(0.0);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace augmincer
