// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "augmincer/domain.hpp"
#include "augmincer/table.hpp"

namespace augmincer {

enum class IndexVariant {
  kImportanceWeighted,        // sum w*a / sum w
  kRawUnweighted,             // plain mean of a over tasks with w > 0
  kBinaryMedian,              // 1 if the weighted index is >= the population median
  kSubstitutionDisplacement,  // importance-weighted mean of the substitution score
};

std::string_view to_string(IndexVariant v);
std::optional<IndexVariant> parse_index_variant(std::string_view s);

struct IndexConfig {
  IndexVariant variant = IndexVariant::kImportanceWeighted;
  bool standardize = true;
  /// Employment per occupation; occupations absent from the map get weight 0.
  /// Uniform weights when unset.
  std::optional<std::map<std::string, double>> standardization_weights;
};

struct IndexResult {
  std::vector<OccupationIndex> indices;  // sorted by occupation_code
  std::vector<std::string> omitted;      // occupations whose importances are all zero
};

/// Builds per-occupation augmentation (AHC) and substitution (SUB) indices.
/// SUB is always the importance-weighted substitution mean; AHC follows the
/// configured variant.
IndexResult compute_index(std::span<const TaskScore> scores, const IndexConfig& config);

/// z = (x - weighted mean) / weighted population SD. Uniform weights when
/// `weights` is empty. Throws DomainError naming `name` if the SD is zero.
std::vector<double> standardize(std::span<const double> values, std::span<const double> weights = {},
                                std::string_view name = "values");

struct DProxyWeights {
  double formality = 0.30;
  double education = 0.25;
  double income = 0.20;
  double largefirm = 0.25;

  /// Nonnegative and summing to 1 within 1e-9, else ValidationError.
  void validate() const;
  std::array<double, 4> as_array() const { return {formality, education, income, largefirm}; }
};

struct DProxyResult {
  std::vector<AdoptionCell> cells;
  std::vector<std::string> warnings;
};

/// Min-max normalizes each indicator across cells, forms d_raw as the
/// weighted sum, and standardizes d_raw across cells (optionally weighted by
/// `cell_weights`). Constant indicators contribute zero with a warning.
DProxyResult compute_d_proxy(std::span<const AdoptionCell> cells, const DProxyWeights& weights,
                             std::span<const double> cell_weights = {});

enum class DTransform { kStd, kLog };
std::string_view to_string(DTransform t);
std::optional<DTransform> parse_d_transform(std::string_view s);

using CellKey = std::pair<std::string, std::string>;  // (sector, occgroup)
using CellMap = std::map<CellKey, AdoptionCell>;
CellMap index_cells(std::span<const AdoptionCell> cells);

/// Leading `digits` characters of an occupation code.
std::string occgroup_of(std::string_view occupation_code, std::size_t digits);

/// Formality rate, mean education and mean income per (sector, occgroup)
/// cell from worker records; large-firm share comes from `largefirm`
/// (missing cells get 0).
std::vector<AdoptionCell> aggregate_cells(std::span<const WorkerRecord> workers, std::size_t occgroup_digits,
                                          const std::map<CellKey, double>& largefirm = {});

struct AttachOptions {
  DTransform d_transform = DTransform::kStd;
  std::size_t occgroup_digits = 2;
};

struct JoinReport {
  std::size_t rows = 0;
  std::size_t matched_occupation = 0;
  std::size_t matched_cell = 0;
  std::vector<std::string> unmatched_occupations;  // distinct codes
  std::size_t nonpositive_d = 0;                   // log transform only

  nlohmann::json to_json() const;
};

struct AttachResult {
  AnalysisTable table;
  JoinReport report;
};

/// Left join of workers onto occupation indices and adoption cells. Every
/// worker yields one row; failed joins leave NaN in the joined columns.
/// Cells are looked up by (sector, occgroup), then by (sector, "").
AttachResult attach_indices(std::span<const WorkerRecord> workers, const std::map<std::string, OccupationIndex>& indices,
                            const CellMap& cells, const AttachOptions& options);

void write_index_csv(std::ostream& out, std::span<const OccupationIndex> indices);
std::vector<OccupationIndex> read_index_csv(std::istream& in);

/// sector_code,occgroup_code,formality_rate,mean_education,mean_income,largefirm_share,d_raw,d_std
void write_cells_csv(std::ostream& out, std::span<const AdoptionCell> cells);
/// d_raw/d_std columns are optional on input.
std::vector<AdoptionCell> read_cells_csv(std::istream& in);

}  // namespace augmincer
