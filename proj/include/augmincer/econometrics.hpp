// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "augmincer/domain.hpp"
#include "augmincer/table.hpp"

namespace augmincer::econ {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::string_view kInterceptLabel = "(Intercept)";

/// Product of one to three base columns, written "ahc:d:formal".
struct Term {
  std::vector<std::string> factors;
  std::string label() const;
  bool operator==(const Term&) const = default;
};

/// Parses "a", "a:b" or "a:b:c".
Term parse_term(std::string_view label);
std::vector<Term> parse_terms(std::string_view comma_separated);

enum class FilterOp { kEq, kNe, kLt, kLe, kGt, kGe };

struct Condition {
  std::string field;
  FilterOp op = FilterOp::kEq;
  double value = 0.0;
};

/// Conjunction of numeric comparisons, e.g. "formal==1&age>=31".
struct SampleFilter {
  std::vector<Condition> all_of;

  bool empty() const { return all_of.empty(); }
  std::string description() const;
};

SampleFilter parse_filter(std::string_view expr);

struct ModelSpec {
  std::string name = "model";
  std::string outcome = std::string(col::kLogIncome);
  std::vector<Term> terms;
  bool intercept = true;
  std::optional<std::string> fixed_effects;  // one grouping column, absorbed by demeaning
  std::optional<std::string> weights_field;
  CovarianceType covariance = CovarianceType::kHC1;
  SampleFilter filter;

  /// Duplicate labels or terms with 0 or more than 3 factors throw ValidationError.
  void validate() const;
  std::vector<std::string> labels() const;
  /// Every column the spec reads.
  std::vector<std::string> referenced_fields() const;
};

struct Design {
  Vector y;
  Matrix X;
  std::optional<Vector> w;
  std::vector<std::string> labels;
  std::vector<std::size_t> rows;  // source-table row of each design row
  std::size_t dropped_filter = 0;
  std::size_t dropped_missing = 0;
  std::size_t n_groups = 0;        // absorbed fixed-effect levels
  double total_ss = 0.0;           // weighted centered SS of y before absorption
};

struct Sample {
  std::vector<std::size_t> rows;  // rows passing the filter with every referenced field present
  std::size_t dropped_filter = 0;
  std::size_t dropped_missing = 0;
};

/// Estimation sample of `spec` on `table`; throws ValidationError if a
/// referenced field is absent.
Sample select_sample(const AnalysisTable& table, const ModelSpec& spec);

/// Builds y and X (intercept first, products computed row-wise). Rows failing
/// the filter or missing any referenced field are dropped and counted. Fixed
/// effects are absorbed by within-group (weighted) demeaning and the intercept
/// is dropped. Throws NumericalError on n <= k or a collinear column set.
Design build_design(const AnalysisTable& table, const ModelSpec& spec);

/// Labels of a linearly dependent column subset, empty if X has full column rank.
std::vector<std::string> collinear_set(const Matrix& X, const std::vector<std::string>& labels);

struct OlsOptions {
  CovarianceType covariance = CovarianceType::kHC1;
  std::vector<std::string> labels;  // defaults to x0, x1, ...
  std::string spec_name = "ols";
  std::size_t absorbed_levels = 0;  // fixed-effect levels already removed from X
  std::optional<double> total_ss;   // overrides the centered SS of y used in R^2
  std::optional<std::string> fixed_effects;
};

inline constexpr double kConditionWarning = 1e12;

/// (Weighted) least squares through a column-pivoted QR of sqrt(w) X.
/// Classical covariance is s^2 (X'WX)^-1; HC0 is the sandwich
/// (X'WX)^-1 X'W diag(e^2) W X (X'WX)^-1; HC1 scales HC0 by n/(n-k), where k
/// counts absorbed fixed-effect levels. p-values use the normal approximation.
FitResult ols(const Vector& y, const Matrix& X, const Vector* w, const OlsOptions& options = {});

/// build_design + ols.
FitResult fit(const AnalysisTable& table, const ModelSpec& spec);

/// Coefficients only (no covariance), in spec.labels() order.
std::vector<double> fit_coefficients(const AnalysisTable& table, const ModelSpec& spec);

Vector residuals(const Vector& y, const Matrix& X, const std::vector<double>& beta);

struct TslsResult {
  FitResult fit;
  std::vector<double> first_stage_f;  // one robust F per endogenous column
};

/// Two-stage least squares. Stage one regresses each endogenous column on
/// [X_exog, Z]; its F is the HC1 Wald statistic on the excluded instruments
/// divided by their count. Stage two uses fitted values; the covariance uses
/// structural residuals y - [X_exog, X_endog] b. A warning is attached when
/// any first-stage F is below 10.
TslsResult tsls(const Vector& y, const Matrix& X_exog, const Matrix& X_endog, const Matrix& Z, const Vector* w,
                const OlsOptions& options = {});

inline constexpr double kWeakInstrumentF = 10.0;

/// Table-level 2SLS: `endogenous` terms must appear in spec.terms and
/// `instruments` must not. Coefficients are ordered exogenous terms first
/// (in spec order), then the endogenous terms.
TslsResult fit_tsls(const AnalysisTable& table, const ModelSpec& spec, const std::vector<Term>& endogenous,
                    const std::vector<Term>& instruments);

/// Check loss sum_i rho_tau(y_i - x_i'b), rho_tau(u) = u (tau - 1[u < 0]).
double check_loss(const Vector& y, const Matrix& X, const Vector& beta, double tau);

struct QuantileOptions {
  int max_irls_iterations = 200;
  int max_pivots = 20000;
};

struct QuantileResult {
  Vector beta;
  double objective = 0.0;
  int irls_iterations = 0;
  int pivots = 0;
};

/// Minimizes the check loss. Annealed-smoothing IRLS brings the fit near the
/// optimum; an exact vertex descent (basis exchange with a weighted-median
/// line search along each edge) then finishes at an optimal vertex. Throws
/// NumericalError with the final objective and optimality gap if the pivot
/// budget is exhausted.
QuantileResult quantile_fit(const Vector& y, const Matrix& X, double tau, const QuantileOptions& options = {});

/// build_design + quantile_fit; coefficients only, standard errors reported
/// as unavailable (NaN) with a warning.
FitResult fit_quantile(const AnalysisTable& table, const ModelSpec& spec, double tau);

enum class OaxacaReference { kA, kB, kPooled };
std::string_view to_string(OaxacaReference r);
std::optional<OaxacaReference> parse_oaxaca_reference(std::string_view s);

struct OaxacaResult {
  std::vector<std::string> terms;
  std::vector<double> mean_a, mean_b;
  std::vector<double> beta_a, beta_b, beta_ref;
  std::vector<double> explained;    // (mean_a - mean_b) * beta_ref
  std::vector<double> unexplained;  // mean_a (beta_a - beta_ref) + mean_b (beta_ref - beta_b)
  double mean_y_a = 0.0, mean_y_b = 0.0;
  double gap = 0.0;
  double explained_total = 0.0;
  double unexplained_total = 0.0;
  std::size_t n_a = 0, n_b = 0;
  OaxacaReference reference = OaxacaReference::kA;
};

/// Two-fold decomposition of mean(y_A) - mean(y_B). The spec must carry an
/// intercept and no fixed effects. Explained + unexplained equals the gap.
OaxacaResult oaxaca_blinder(const AnalysisTable& group_a, const AnalysisTable& group_b, const ModelSpec& spec,
                            OaxacaReference reference = OaxacaReference::kA);

/// Standard normal two-sided p-value.
double normal_p_value(double z);

// Output renderings ---------------------------------------------------------

std::string significance_stars(double p);  // *** < 0.01, ** < 0.05, * < 0.10

/// Coefficient rows with SEs in parentheses, one column per fit; rows are
/// the union of terms in first-appearance order.
void write_fits_markdown(std::ostream& out, const std::vector<FitResult>& fits, const std::string& title);
void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits);
void write_oaxaca_csv(std::ostream& out, const OaxacaResult& r);
void write_oaxaca_markdown(std::ostream& out, const OaxacaResult& r);

/// Human label for a term ("ahc:d" -> "H^A x D").
std::string pretty_term(std::string_view label);

}  // namespace augmincer::econ
