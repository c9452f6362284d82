// SPDX-License-Identifier: Apache-2.0

#include "augmincer/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/parallel.hpp"
#include "augmincer/rng.hpp"
#include "augmincer/text.hpp"

namespace augmincer::robust {

using econ::ModelSpec;
using econ::parse_terms;

namespace {

ModelSpec base_spec(std::string name, std::string_view terms, const LadderOptions& options) {
  ModelSpec s;
  s.name = std::move(name);
  s.terms = parse_terms(terms);
  s.covariance = options.covariance;
  s.weights_field = options.weights_field;
  return s;
}

constexpr std::string_view kM1 = "educ,exper,exper2";
constexpr std::string_view kM2 = "educ,exper,exper2,ahc,sub";
constexpr std::string_view kM3 = "educ,exper,exper2,ahc,sub,d,ahc:d,sub:d";
constexpr std::string_view kM4 = "educ,exper,exper2,ahc,sub,d,ahc:d,sub:d,female,urban";
constexpr std::string_view kTriple =
    "educ,exper,exper2,ahc,sub,d,ahc:d,sub:d,female,urban,formal,ahc:formal,sub:formal,d:formal,ahc:d:formal,"
    "sub:d:formal";

}  // namespace

ModelSpec ladder_spec(std::string_view name, const LadderOptions& options) {
  if (name == "M1") return base_spec("M1", kM1, options);
  if (name == "M2") return base_spec("M2", kM2, options);
  if (name == "M3") return base_spec("M3", kM3, options);
  if (name == "M4") return base_spec("M4", kM4, options);
  if (name == "M5") {
    auto s = base_spec("M5", kM4, options);
    s.fixed_effects = options.sector_field;
    return s;
  }
  if (name == "M6") {
    auto s = base_spec("M6", kM4, options);
    s.filter = econ::parse_filter("formal==1");
    return s;
  }
  throw ValidationError("unknown specification '" + std::string(name) + "' (expected M1..M6)");
}

std::vector<ModelSpec> ladder_specs(const LadderOptions& options) {
  std::vector<ModelSpec> out;
  for (auto n : {"M1", "M2", "M3", "M4", "M5", "M6"}) out.push_back(ladder_spec(n, options));
  return out;
}

std::vector<FitResult> progressive_specs(const AnalysisTable& table, const LadderOptions& options, std::size_t jobs) {
  const auto specs = ladder_specs(options);
  std::vector<FitResult> fits(specs.size());
  parallel_for(specs.size(), jobs, [&](std::size_t i) { fits[i] = econ::fit(table, specs[i]); });
  return fits;
}

ModelSpec triple_spec(const LadderOptions& options) { return base_spec("Triple", kTriple, options); }

FitResult triple_interaction(const AnalysisTable& table, const LadderOptions& options) {
  return econ::fit(table, triple_spec(options));
}

// ---------------------------------------------------------------------------

PlaceboResult placebo_permutation(const AnalysisTable& table, const ModelSpec& spec, const PlaceboOptions& options) {
  if (options.n_perm < 99) throw ValidationError("placebo: n_perm must be at least 99");
  const auto labels = spec.labels();
  const auto term_it = std::find(labels.begin(), labels.end(), options.term);
  if (term_it == labels.end()) throw ValidationError("placebo: term '" + options.term + "' is not in " + spec.name);
  const auto term_index = static_cast<std::size_t>(term_it - labels.begin());

  // Work on the estimation sample only, so each refit copies as little as possible.
  const auto sample = econ::select_sample(table, spec);
  AnalysisTable base = table.select_rows(sample.rows);
  const auto& occ = base.text(options.occupation_field);
  const auto& scores = base.numeric(options.permuted_field);

  std::map<std::string, double> score_of;
  for (std::size_t i = 0; i < base.rows(); ++i) {
    auto [it, inserted] = score_of.emplace(occ[i], scores[i]);
    if (!inserted && it->second != scores[i])
      throw ValidationError("placebo: " + options.permuted_field + " varies within occupation " + occ[i]);
  }
  std::vector<std::string> codes;
  std::vector<double> values;
  for (const auto& [code, v] : score_of) {
    codes.push_back(code);
    values.push_back(v);
  }
  std::vector<std::size_t> slot(base.rows());
  for (std::size_t i = 0; i < base.rows(); ++i)
    slot[i] = static_cast<std::size_t>(std::lower_bound(codes.begin(), codes.end(), occ[i]) - codes.begin());

  PlaceboResult r;
  r.term = options.term;
  r.seed = options.seed;
  r.n_occupations = codes.size();
  r.beta_original = econ::fit_coefficients(base, spec)[term_index];
  r.permuted.assign(options.n_perm, std::numeric_limits<double>::quiet_NaN());

  parallel_for(options.n_perm, options.jobs, [&](std::size_t p) {
    std::vector<double> v = values;
    if (options.permute) {
      options.permute(p, v);
    } else {
      Rng rng = make_rng(options.seed, p);
      shuffle(v, rng);
    }
    AnalysisTable t = base;
    auto& col = t.numeric_mut(options.permuted_field);
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = v[slot[i]];
    r.permuted[p] = econ::fit_coefficients(t, spec)[term_index];
  });

  std::size_t extreme = 0;
  for (double b : r.permuted)
    if (std::abs(b) >= std::abs(r.beta_original)) ++extreme;
  r.p_value = static_cast<double>(extreme) / static_cast<double>(r.permuted.size());
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> group_keys(const AnalysisTable& table, const std::string& field) {
  if (table.has_text(field)) return table.text(field);
  std::vector<std::string> keys;
  for (double v : table.numeric(field)) keys.push_back(std::isnan(v) ? "" : text::format_double(v));
  return keys;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

JackknifeResult jackknife_loso(const AnalysisTable& table, const ModelSpec& spec, const std::string& sector_field,
                               std::string_view term, std::size_t jobs) {
  const auto sample = econ::select_sample(table, spec);
  const AnalysisTable base = table.select_rows(sample.rows);
  const auto keys = group_keys(base, sector_field);
  std::vector<std::string> sectors(keys.begin(), keys.end());
  std::sort(sectors.begin(), sectors.end());
  sectors.erase(std::unique(sectors.begin(), sectors.end()), sectors.end());
  sectors.erase(std::remove(sectors.begin(), sectors.end(), std::string()), sectors.end());
  if (sectors.size() < 2) throw DomainError("jackknife: need at least two sectors in " + sector_field);

  JackknifeResult r;
  r.term = std::string(term);
  const FitResult full = econ::fit(base, spec);
  r.beta_full = full.coef(term);
  r.se_full = full.se(term);
  r.rows.resize(sectors.size());
  parallel_for(sectors.size(), jobs, [&](std::size_t s) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i] != sectors[s]) keep.push_back(i);
    JackknifeRow& row = r.rows[s];
    row.dropped = sectors[s];
    row.n_obs = keep.size();
    try {
      const FitResult f = econ::fit(base.select_rows(keep), spec);
      row.beta = f.coef(term);
      row.se = f.se(term);
    } catch (const NumericalError& e) {
      row.flag = e.what();
      row.beta = row.se = std::numeric_limits<double>::quiet_NaN();
    }
  });
  r.min_beta = std::numeric_limits<double>::infinity();
  r.max_beta = -std::numeric_limits<double>::infinity();
  for (const auto& row : r.rows) {
    if (!row.flag.empty()) continue;
    r.min_beta = std::min(r.min_beta, row.beta);
    r.max_beta = std::max(r.max_beta, row.beta);
    if (sign_of(row.beta) != sign_of(r.beta_full)) ++r.sign_changes;
    r.max_deviation = std::max(r.max_deviation, std::abs(row.beta - r.beta_full));
  }
  return r;
}

// ---------------------------------------------------------------------------

Split Split::categorical(std::string name, std::string field) {
  Split s;
  s.name = std::move(name);
  s.field = std::move(field);
  return s;
}

Split Split::formality() { return categorical("formality", std::string(col::kFormal)); }
Split Split::gender() { return categorical("gender", std::string(col::kFemale)); }
Split Split::sector() { return categorical("sector", std::string(col::kSector)); }

Split Split::age_cohorts() {
  Split s;
  s.name = "age";
  s.field = std::string(col::kAge);
  s.bins = {{"18-30", {18, 30}}, {"31-45", {31, 45}}, {"46-65", {46, 65}}};
  return s;
}

Split Split::education_levels() {
  Split s;
  s.name = "education";
  s.field = std::string(col::kEduc);
  const double inf = std::numeric_limits<double>::infinity();
  s.bins = {{"primary", {0, 5}}, {"secondary", {6, 11}}, {"technical", {12, 14}}, {"university", {15, inf}}};
  return s;
}

Split parse_split(std::string_view name) {
  const auto n = text::to_lower(text::trim(name));
  if (n == "formality" || n == "formal") return Split::formality();
  if (n == "gender" || n == "female") return Split::gender();
  if (n == "age" || n == "age_cohort") return Split::age_cohorts();
  if (n == "sector") return Split::sector();
  if (n == "education" || n == "educ") return Split::education_levels();
  throw ValidationError("unknown split '" + std::string(name) + "' (formality, gender, age, sector, education)");
}

std::vector<SubgroupRow> heterogeneity(const AnalysisTable& table, const ModelSpec& spec, const Split& split,
                                       std::size_t jobs) {
  const auto sample = econ::select_sample(table, spec);
  const AnalysisTable base = table.select_rows(sample.rows);
  std::vector<std::string> group_names;
  std::vector<std::vector<std::size_t>> members;

  if (split.bins.empty()) {
    if (!base.has_text(split.field) && !base.has_numeric(split.field))
      throw ValidationError("split field '" + split.field + "' is not in the analysis table");
    const auto keys = group_keys(base, split.field);
    std::map<std::string, std::vector<std::size_t>> by_key;
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (!keys[i].empty()) by_key[keys[i]].push_back(i);
    for (auto& [k, rows] : by_key) {
      group_names.push_back(k);
      members.push_back(std::move(rows));
    }
  } else {
    const auto& v = base.numeric(split.field);
    for (const auto& [label, range] : split.bins) {
      group_names.push_back(label);
      auto& rows = members.emplace_back();
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] >= range.first && v[i] <= range.second) rows.push_back(i);
    }
  }

  // A categorical split fixes its field within each group, so terms built on
  // it are dropped from the subgroup model.
  ModelSpec sub_spec = spec;
  if (split.bins.empty())
    std::erase_if(sub_spec.terms, [&](const econ::Term& t) {
      return std::find(t.factors.begin(), t.factors.end(), split.field) != t.factors.end();
    });
  const std::size_t k = sub_spec.labels().size();
  std::vector<SubgroupRow> out(group_names.size());
  parallel_for(group_names.size(), jobs, [&](std::size_t g) {
    SubgroupRow& row = out[g];
    row.split = split.name;
    row.group = group_names[g];
    row.n_obs = members[g].size();
    if (row.n_obs <= k) {
      row.flag = "insufficient n";
      return;
    }
    try {
      row.fit = econ::fit(base.select_rows(members[g]), sub_spec);
      row.fit->spec_name = spec.name + " [" + split.name + "=" + row.group + "]";
    } catch (const NumericalError& e) {
      row.flag = std::string(e.what()).find("does not exceed") != std::string::npos ? "insufficient n" : e.what();
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

void write_placebo_csv(std::ostream& out, const PlaceboResult& r) {
  csv::write_row(out, {"permutation", "beta"});
  csv::write_row(out, {"original", text::format_double(r.beta_original)});
  for (std::size_t p = 0; p < r.permuted.size(); ++p)
    csv::write_row(out, {std::to_string(p), text::format_double(r.permuted[p])});
}

void write_placebo_markdown(std::ostream& out, const PlaceboResult& r) {
  double mean = 0.0;
  for (double b : r.permuted) mean += b;
  mean /= static_cast<double>(r.permuted.size());
  out << "| Statistic | Value |\n|---|---:|\n";
  out << "| Term | " << econ::pretty_term(r.term) << " |\n";
  out << "| Original coefficient | " << text::format_fixed(r.beta_original, 4) << " |\n";
  out << "| Mean permuted coefficient | " << text::format_fixed(mean, 4) << " |\n";
  out << "| Permutations | " << r.permuted.size() << " |\n";
  out << "| Occupations permuted | " << r.n_occupations << " |\n";
  out << "| Permutation p-value | " << text::format_fixed(r.p_value, 3) << " |\n";
  out << "| Seed | " << r.seed << " |\n";
}

void write_jackknife_csv(std::ostream& out, const JackknifeResult& r) {
  csv::write_row(out, {"dropped_sector", "beta", "se", "n_obs", "flag"});
  csv::write_row(out, {"", text::format_double(r.beta_full), text::format_double(r.se_full), "", "full sample"});
  for (const auto& row : r.rows)
    csv::write_row(out, {row.dropped, text::format_double(row.beta), text::format_double(row.se),
                         std::to_string(row.n_obs), row.flag});
}

void write_jackknife_markdown(std::ostream& out, const JackknifeResult& r) {
  out << "| Dropped sector | " << econ::pretty_term(r.term) << " | SE | N |\n|---|---:|---:|---:|\n";
  for (const auto& row : r.rows) {
    out << "| " << row.dropped << " | ";
    if (row.flag.empty()) {
      out << text::format_fixed(row.beta, 4) << " | " << text::format_fixed(row.se, 4);
    } else {
      out << row.flag << " | ";
    }
    out << " | " << row.n_obs << " |\n";
  }
  out << "\nFull sample: " << text::format_fixed(r.beta_full, 4) << " (" << text::format_fixed(r.se_full, 4)
      << "). Range [" << text::format_fixed(r.min_beta, 4) << ", " << text::format_fixed(r.max_beta, 4)
      << "], sign changes " << r.sign_changes << ", max deviation " << text::format_fixed(r.max_deviation, 4) << ".\n";
}

void write_heterogeneity_csv(std::ostream& out, const std::vector<SubgroupRow>& rows, std::string_view term) {
  csv::write_row(out, {"split", "group", "n_obs", "term", "beta", "se", "p_value", "flag"});
  for (const auto& row : rows) {
    std::string b, se, p;
    if (row.fit) {
      if (auto j = row.fit->find(term)) {
        b = text::format_double(row.fit->coefficients[*j]);
        se = text::format_double(row.fit->std_errors[*j]);
        p = text::format_double(row.fit->p_values[*j]);
      }
    }
    csv::write_row(out, {row.split, row.group, std::to_string(row.n_obs), std::string(term), b, se, p, row.flag});
  }
}

namespace {

std::string group_label(const SubgroupRow& row) {
  if (row.split == "formality") return row.group == "1" ? "Formal" : row.group == "0" ? "Informal" : row.group;
  if (row.split == "gender") return row.group == "1" ? "Female" : row.group == "0" ? "Male" : row.group;
  return row.split + " = " + row.group;
}

}  // namespace

void write_heterogeneity_markdown(std::ostream& out, const std::vector<SubgroupRow>& rows, std::string_view term) {
  out << "| Subgroup | " << econ::pretty_term(term) << " | N |\n|---|---:|---:|\n";
  for (const auto& row : rows) {
    out << "| " << group_label(row) << " | ";
    if (row.fit) {
      if (auto j = row.fit->find(term)) {
        out << text::format_fixed(row.fit->coefficients[*j], 3) << econ::significance_stars(row.fit->p_values[*j])
            << " (" << text::format_fixed(row.fit->std_errors[*j], 3) << ")";
      }
    } else {
      out << row.flag;
    }
    out << " | " << row.n_obs << " |\n";
  }
}

}  // namespace augmincer::robust
