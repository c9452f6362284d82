// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augmincer/domain.hpp"
#include "augmincer/robustness.hpp"
#include "augmincer/table.hpp"
#include "augmincer/validation.hpp"

namespace augmincer::report {

struct DescriptiveRow {
  std::string variable;
  std::size_t n = 0;  // non-missing values
  double mean = 0.0;
  double sd = 0.0;    // population SD
  double min = 0.0;
  double max = 0.0;
};

/// Unweighted moments of each named numeric column, skipping NaN. Absent
/// columns are skipped.
std::vector<DescriptiveRow> describe(const AnalysisTable& table, std::span<const std::string_view> fields);
void write_descriptive_markdown(std::ostream& out, const std::vector<DescriptiveRow>& rows);

inline constexpr std::string_view kDescriptiveFields[] = {"log_income", "educ", "exper", "age", "female", "urban",
                                                          "formal",     "ahc",  "sub",   "d"};

// Sector bar chart: mean raw augmentation score of the workers in each sector.
struct SectorBar {
  std::string sector;
  std::size_t n_workers = 0;
  double mean_ahc = 0.0;
  bool above_median = false;  // strictly above the median of sector means
};

/// Sorted by descending mean, ties by sector code. Rows missing either field
/// are ignored.
std::vector<SectorBar> sector_bars(const AnalysisTable& table, std::string_view sector_field = "sector",
                                   std::string_view score_field = "ahc_raw");
void write_sector_bars_csv(std::ostream& out, const std::vector<SectorBar>& bars);

// Occupation scatter: augmentation score against a comparison score, sized by
// the number of workers observed in the occupation.
struct ScatterPoint {
  std::string occupation;
  double x = 0.0;
  double y = 0.0;
  std::size_t employment = 0;
};

std::vector<ScatterPoint> occupation_scatter(std::span<const OccupationIndex> indices, const AnalysisTable& table,
                                             std::string_view occupation_field = "occupation");
/// Pearson correlation of the points, NaN when undefined.
double scatter_correlation(const std::vector<ScatterPoint>& points);
void write_scatter_csv(std::ostream& out, const std::vector<ScatterPoint>& points, std::string_view x_name,
                       std::string_view y_name);

void write_external_figure_csv(std::ostream& out, const std::vector<validation::ExternalRow>& rows);

/// One row per subgroup fit: coefficient, SE, p-value and a colour class
/// (positive / negative when p < 0.05, otherwise ns).
void write_heterogeneity_figure_csv(std::ostream& out, const std::vector<robust::SubgroupRow>& rows,
                                    std::string_view term);

struct QuantilePoint {
  double tau = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

/// Extracts the `ahc` and `ahc:d` coefficients of quantile fits ordered by tau.
std::vector<QuantilePoint> quantile_curve(const std::vector<double>& taus, const std::vector<FitResult>& fits);
void write_quantile_figure_csv(std::ostream& out, const std::vector<QuantilePoint>& points);
void write_quantile_markdown(std::ostream& out, const std::vector<double>& taus, const std::vector<FitResult>& fits);

// Self-contained SVG renderings of the same data.
struct Bar {
  std::string label;
  double value = 0.0;
  std::string color;  // CSS colour
};

void write_bar_svg(std::ostream& out, std::string_view title, const std::vector<Bar>& bars);
void write_scatter_svg(std::ostream& out, std::string_view title, std::string_view x_label, std::string_view y_label,
                       const std::vector<ScatterPoint>& points);
void write_quantile_svg(std::ostream& out, const std::vector<QuantilePoint>& points);

}  // namespace augmincer::report
