// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace augmincer::validation {

/// Product-moment correlation. Needs >= 3 pairs and nonzero variance in
/// both arguments (DomainError otherwise).
double pearson(std::span<const double> x, std::span<const double> y);

/// Average (mid) ranks, 1-based.
std::vector<double> mid_ranks(std::span<const double> x);

/// Pearson correlation of mid-ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Krippendorff's alpha for two raters, paired and complete, interval metric.
/// Throws DomainError if every pooled value is identical.
double krippendorff_interval(std::span<const double> a, std::span<const double> b);

struct BiasAdjustment {
  double bias = 0.0;                // mean(b) - mean(a)
  std::vector<double> b_adjusted;   // b - bias
};

BiasAdjustment level_bias_adjust(std::span<const double> a, std::span<const double> b);

struct ReliabilityReport {
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double krippendorff_alpha = 0.0;
  double level_bias = 0.0;
  std::size_t n_pairs = 0;
};

/// Correlations on the raw pairs; alpha on (a, b - bias) when
/// `adjust_bias`, else on (a, b).
ReliabilityReport reliability(std::span<const double> a, std::span<const double> b, bool adjust_bias);

struct ExternalRow {
  std::string index_name;
  std::size_t n_matched = 0;
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::string flag;  // "" or "insufficient overlap" / "zero variance"
};

/// Inner-joins `ahc` with each external index on occupation code.
std::vector<ExternalRow> external_validation_report(
    const std::map<std::string, double>& ahc, const std::map<std::string, std::map<std::string, double>>& external);

void write_external_csv(std::ostream& out, const std::vector<ExternalRow>& rows);
void write_external_markdown(std::ostream& out, const std::vector<ExternalRow>& rows);

/// Two-column occupation_code,score file.
std::map<std::string, double> read_score_map_csv(std::istream& in);

}  // namespace augmincer::validation
