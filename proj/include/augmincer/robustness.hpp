// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "augmincer/econometrics.hpp"

namespace augmincer::robust {

inline constexpr std::string_view kBeta2Term = "ahc:d";
inline constexpr std::string_view kTripleTerm = "ahc:d:formal";

struct LadderOptions {
  CovarianceType covariance = CovarianceType::kHC1;
  std::optional<std::string> weights_field;  // sampling-weighted variant when set
  std::string sector_field = std::string(col::kSector);
};

/// M1 Mincer; M2 +ahc,sub; M3 +d,ahc:d,sub:d; M4 +female,urban;
/// M5 M4 with sector fixed effects; M6 M4 on formal==1.
std::vector<econ::ModelSpec> ladder_specs(const LadderOptions& options = {});
econ::ModelSpec ladder_spec(std::string_view name, const LadderOptions& options = {});

std::vector<FitResult> progressive_specs(const AnalysisTable& table, const LadderOptions& options = {},
                                         std::size_t jobs = 1);

/// Pooled M4 plus formal, every pairwise product with formal and the
/// ahc:d:formal and sub:d:formal triples.
econ::ModelSpec triple_spec(const LadderOptions& options = {});
FitResult triple_interaction(const AnalysisTable& table, const LadderOptions& options = {});

struct PlaceboOptions {
  std::size_t n_perm = 199;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string term = std::string(kBeta2Term);
  std::string permuted_field = std::string(col::kAhc);
  std::string occupation_field = std::string(col::kOccupation);
  /// Test hook: when set, replaces the random permutation of occupation
  /// scores (argument: permutation index, in/out: scores in occupation order).
  std::function<void(std::size_t, std::vector<double>&)> permute;
};

struct PlaceboResult {
  std::string term;
  double beta_original = 0.0;
  std::vector<double> permuted;  // by permutation index
  double p_value = 1.0;          // share of |permuted| >= |original|
  std::uint64_t seed = 0;
  std::size_t n_occupations = 0;
};

/// Occupation-level permutation test. Scores of `permuted_field` must be
/// constant within occupation; permutation p draws from make_rng(seed, p).
PlaceboResult placebo_permutation(const AnalysisTable& table, const econ::ModelSpec& spec,
                                  const PlaceboOptions& options);

struct JackknifeRow {
  std::string dropped;
  double beta = 0.0;
  double se = 0.0;
  std::size_t n_obs = 0;
  std::string flag;  // non-empty when the refit failed
};

struct JackknifeResult {
  std::string term;
  double beta_full = 0.0;
  double se_full = 0.0;
  std::vector<JackknifeRow> rows;  // sorted by sector
  double min_beta = 0.0;
  double max_beta = 0.0;
  std::size_t sign_changes = 0;
  double max_deviation = 0.0;
};

/// Leave-one-sector-out refits. Fewer than two sectors throws DomainError.
JackknifeResult jackknife_loso(const AnalysisTable& table, const econ::ModelSpec& spec, const std::string& sector_field,
                               std::string_view term = kBeta2Term, std::size_t jobs = 1);

/// Subgroup definition: either every distinct value of a field, or labeled
/// closed numeric ranges.
struct Split {
  std::string name;
  std::string field;
  std::vector<std::pair<std::string, std::pair<double, double>>> bins;  // empty: categorical

  static Split categorical(std::string name, std::string field);
  static Split formality();
  static Split gender();
  static Split age_cohorts();  // 18-30, 31-45, 46-65
  static Split sector();
  static Split education_levels();  // primary 0-5, secondary 6-11, technical 12-14, university 15+
};

Split parse_split(std::string_view name);

struct SubgroupRow {
  std::string split;
  std::string group;
  std::size_t n_obs = 0;  // estimation-sample rows in the group
  std::optional<FitResult> fit;
  std::string flag;  // "insufficient n" or another estimation failure
};

/// Refits `spec` within each subgroup of its estimation sample. For
/// categorical splits, terms involving the split field are dropped.
std::vector<SubgroupRow> heterogeneity(const AnalysisTable& table, const econ::ModelSpec& spec, const Split& split,
                                       std::size_t jobs = 1);

// Output --------------------------------------------------------------------

void write_placebo_csv(std::ostream& out, const PlaceboResult& r);
void write_placebo_markdown(std::ostream& out, const PlaceboResult& r);
void write_jackknife_csv(std::ostream& out, const JackknifeResult& r);
void write_jackknife_markdown(std::ostream& out, const JackknifeResult& r);
void write_heterogeneity_csv(std::ostream& out, const std::vector<SubgroupRow>& rows, std::string_view term);
/// Table with one row per subgroup: coefficient of `term` with SE and stars, N.
void write_heterogeneity_markdown(std::ostream& out, const std::vector<SubgroupRow>& rows, std::string_view term);

}  // namespace augmincer::robust
