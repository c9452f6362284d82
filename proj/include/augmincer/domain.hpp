// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace augmincer {

enum class AugType {
  kInformationSynthesis,
  kCreativeAmplification,
  kCommunicationEnhancement,
  kDecisionSupport,
  kQualityAssurance,
  kNone,
  kPureSubstitution,
};

inline constexpr std::array<AugType, 7> kAllAugTypes = {
    AugType::kInformationSynthesis, AugType::kCreativeAmplification,
    AugType::kCommunicationEnhancement, AugType::kDecisionSupport,
    AugType::kQualityAssurance, AugType::kNone, AugType::kPureSubstitution};

/// snake_case wire name, e.g. "decision_support".
std::string_view to_string(AugType t);

/// Accepts the snake_case wire name and the spaced/hyphenated human form
/// ("decision support"), case-insensitively.
std::optional<AugType> parse_aug_type(std::string_view s);

/// One scored task statement.
struct TaskScore {
  std::string task_id;
  std::string occupation_code;
  double augmentation = 0.0;
  double substitution = 0.0;
  AugType aug_type = AugType::kNone;
  double importance = 1.0;

  /// Throws ValidationError naming the violated bound.
  void validate() const;
};

struct OccupationIndex {
  std::string occupation_code;
  double ahc_raw = 0.0;
  double sub_raw = 0.0;
  double ahc_std = 0.0;
  double sub_std = 0.0;
  std::size_t n_tasks = 0;
};

struct WorkerRecord {
  std::string worker_id;
  double log_income = 0.0;
  std::optional<double> education_years;
  int age = 0;
  std::optional<double> experience;  // missing iff education is missing
  bool female = false;
  bool urban = false;
  bool formal = false;
  std::string occupation_code;
  std::string sector_code;
  double sampling_weight = 1.0;

  void validate() const;
  bool operator==(const WorkerRecord&) const = default;
};

/// Sector x occupation-group cell carrying the adoption proxy.
struct AdoptionCell {
  std::string sector_code;
  std::string occgroup_code;  // empty when the proxy is sector-level only
  double formality_rate = 0.0;
  double mean_education = 0.0;
  double mean_income = 0.0;
  double largefirm_share = 0.0;
  double d_raw = 0.0;
  double d_std = 0.0;
};

enum class CovarianceType { kClassical, kHC0, kHC1 };
std::string_view to_string(CovarianceType c);
std::optional<CovarianceType> parse_covariance(std::string_view s);

/// One estimated regression.
struct FitResult {
  std::string spec_name;
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> p_values;
  double r_squared = 0.0;
  std::size_t n_obs = 0;
  std::size_t df_model = 0;  // columns incl. absorbed fixed-effect levels
  CovarianceType covariance_type = CovarianceType::kHC1;
  bool weighted = false;
  std::optional<std::string> fixed_effects;
  std::vector<double> vcov;  // row-major, terms.size() squared; empty if unavailable
  std::vector<std::string> warnings;

  std::optional<std::size_t> find(std::string_view term) const;
  /// Throws ValidationError if `term` is not in the fit.
  double coef(std::string_view term) const;
  double se(std::string_view term) const;
  double p(std::string_view term) const;
  double z(std::string_view term) const;

  void check_invariants() const;
};

void to_json(nlohmann::json& j, const FitResult& f);
void from_json(const nlohmann::json& j, FitResult& f);

// ---------------------------------------------------------------------------
// Microdata ingestion

/// Maps logical field names onto CSV column names.
struct WorkerSchema {
  std::map<std::string, std::string> columns;

  /// Identity mapping over the logical names.
  static WorkerSchema defaults();
  std::string column(const std::string& logical) const;
};

inline constexpr std::array<std::string_view, 11> kWorkerLogicalFields = {
    "worker_id", "income",         "log_income",      "age",         "education_years", "female",
    "urban",     "formal",         "occupation_code", "sector_code", "sampling_weight"};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t dropped_age = 0;
  std::size_t dropped_income = 0;
  std::size_t missing_education = 0;
  std::vector<ParseIssue> parse_errors;
  // raw-income moments over retained rows (descriptive tables)
  double income_mean = 0.0;
  double income_sd = 0.0;
  double income_min = 0.0;
  double income_max = 0.0;

  nlohmann::json to_json() const;
};

struct IngestResult {
  std::vector<WorkerRecord> workers;
  IngestReport report;
};

/// Reads worker microdata. Rows outside age 18-65 or with nonpositive income
/// are dropped and counted; malformed rows become line-numbered parse errors.
/// A missing mandatory column throws ValidationError.
IngestResult ingest_workers(std::istream& csv, const WorkerSchema& schema);

/// Writes the identity-schema CSV (both income and log_income columns) that
/// ingest_workers reads back field-for-field.
void export_workers(std::ostream& out, std::span<const WorkerRecord> workers);

/// max(age - education - 6, 0); missing education gives missing experience.
std::optional<double> derive_experience(int age, std::optional<double> education_years);

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 65;

}  // namespace augmincer
