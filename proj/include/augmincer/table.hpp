// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace augmincer {

/// Column names of the analysis table shared by the estimation modules.
namespace col {
inline constexpr std::string_view kWorkerId = "worker_id";
inline constexpr std::string_view kOccupation = "occupation";
inline constexpr std::string_view kSector = "sector";
inline constexpr std::string_view kOccgroup = "occgroup";

inline constexpr std::string_view kLogIncome = "log_income";
inline constexpr std::string_view kEduc = "educ";
inline constexpr std::string_view kExper = "exper";
inline constexpr std::string_view kExper2 = "exper2";
inline constexpr std::string_view kAge = "age";
inline constexpr std::string_view kFemale = "female";
inline constexpr std::string_view kUrban = "urban";
inline constexpr std::string_view kFormal = "formal";
inline constexpr std::string_view kWeight = "weight";
inline constexpr std::string_view kAhc = "ahc";  // standardized augmentation index
inline constexpr std::string_view kSub = "sub";  // standardized substitution index
inline constexpr std::string_view kAhcRaw = "ahc_raw";
inline constexpr std::string_view kSubRaw = "sub_raw";
inline constexpr std::string_view kD = "d";  // transformed adoption proxy
inline constexpr std::string_view kDRaw = "d_raw";
inline constexpr std::string_view kMatchedOccupation = "matched_occupation";
inline constexpr std::string_view kMatchedCell = "matched_cell";
}  // namespace col

inline bool is_missing(double v) { return std::isnan(v); }

/// Column store of the worker-level analysis sample. Numeric columns use NaN
/// for missing values.
class AnalysisTable {
 public:
  std::size_t rows() const { return rows_; }

  void add_numeric(std::string_view name, std::vector<double> values);
  void add_text(std::string_view name, std::vector<std::string> values);

  bool has_numeric(std::string_view name) const;
  bool has_text(std::string_view name) const;

  /// Throws ValidationError naming the column if absent.
  const std::vector<double>& numeric(std::string_view name) const;
  std::vector<double>& numeric_mut(std::string_view name);
  const std::vector<std::string>& text(std::string_view name) const;

  std::vector<std::string> numeric_names() const;
  std::vector<std::string> text_names() const;

  AnalysisTable select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  bool sized_ = false;
  std::map<std::string, std::vector<double>, std::less<>> numeric_;
  std::map<std::string, std::vector<std::string>, std::less<>> text_;

  void check_size(std::size_t n, std::string_view name);
};

/// Text columns first (sorted by name), then numeric columns.
void write_table_csv(std::ostream& out, const AnalysisTable& table);

/// Reads a table written by write_table_csv. Columns named in `text_columns`
/// are kept as strings; all others must be numeric or empty (NaN).
AnalysisTable read_table_csv(std::istream& in, std::span<const std::string_view> text_columns);

inline constexpr std::string_view kDefaultTextColumns[] = {col::kWorkerId, col::kOccupation, col::kSector,
                                                           col::kOccgroup};

}  // namespace augmincer
