// SPDX-License-Identifier: Apache-2.0

#include "augmincer/domain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer {

std::string_view to_string(AugType t) {
  switch (t) {
    case AugType::kInformationSynthesis: return "information_synthesis";
    case AugType::kCreativeAmplification: return "creative_amplification";
    case AugType::kCommunicationEnhancement: return "communication_enhancement";
    case AugType::kDecisionSupport: return "decision_support";
    case AugType::kQualityAssurance: return "quality_assurance";
    case AugType::kNone: return "none";
    case AugType::kPureSubstitution: return "pure_substitution";
  }
  return "none";
}

std::optional<AugType> parse_aug_type(std::string_view s) {
  std::string key = text::to_lower(text::trim(s));
  std::replace(key.begin(), key.end(), ' ', '_');
  std::replace(key.begin(), key.end(), '-', '_');
  for (AugType t : kAllAugTypes) {
    if (key == to_string(t)) return t;
  }
  return std::nullopt;
}

void TaskScore::validate() const {
  auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; };
  if (!in_range(augmentation))
    throw ValidationError("task " + task_id + ": augmentation outside [0,100]");
  if (!in_range(substitution))
    throw ValidationError("task " + task_id + ": substitution outside [0,100]");
  if (!std::isfinite(importance) || importance < 0.0)
    throw ValidationError("task " + task_id + ": importance must be >= 0");
}

void WorkerRecord::validate() const {
  if (!std::isfinite(log_income)) throw ValidationError("worker " + worker_id + ": log_income not finite");
  if (age < kMinAge || age > kMaxAge) throw ValidationError("worker " + worker_id + ": age outside [18,65]");
  if (education_years && (!std::isfinite(*education_years) || *education_years < 0.0))
    throw ValidationError("worker " + worker_id + ": negative education");
  if (experience != derive_experience(age, education_years))
    throw ValidationError("worker " + worker_id + ": experience inconsistent with age/education");
  if (!(sampling_weight > 0.0) || !std::isfinite(sampling_weight))
    throw ValidationError("worker " + worker_id + ": sampling_weight must be > 0");
}

std::string_view to_string(CovarianceType c) {
  switch (c) {
    case CovarianceType::kClassical: return "classical";
    case CovarianceType::kHC0: return "HC0";
    case CovarianceType::kHC1: return "HC1";
  }
  return "HC1";
}

std::optional<CovarianceType> parse_covariance(std::string_view s) {
  const std::string k = text::to_lower(text::trim(s));
  if (k == "classical") return CovarianceType::kClassical;
  if (k == "hc0") return CovarianceType::kHC0;
  if (k == "hc1") return CovarianceType::kHC1;
  return std::nullopt;
}

std::optional<std::size_t> FitResult::find(std::string_view term) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i] == term) return i;
  }
  return std::nullopt;
}

namespace {
std::size_t require_term(const FitResult& f, std::string_view term) {
  auto i = f.find(term);
  if (!i) throw ValidationError("term '" + std::string(term) + "' not in fit " + f.spec_name);
  return *i;
}
}  // namespace

double FitResult::coef(std::string_view term) const { return coefficients[require_term(*this, term)]; }
double FitResult::se(std::string_view term) const { return std_errors[require_term(*this, term)]; }
double FitResult::p(std::string_view term) const { return p_values[require_term(*this, term)]; }
double FitResult::z(std::string_view term) const {
  const auto i = require_term(*this, term);
  return coefficients[i] / std_errors[i];
}

void FitResult::check_invariants() const {
  const auto k = terms.size();
  if (coefficients.size() != k || std_errors.size() != k || p_values.size() != k)
    throw ValidationError("FitResult " + spec_name + ": vector lengths differ");
  for (std::size_t i = 0; i < k; ++i) {
    // NaN marks an unavailable statistic (quantile fits).
    if (std_errors[i] < 0.0) throw ValidationError("FitResult " + spec_name + ": negative standard error");
    if (p_values[i] < 0.0 || p_values[i] > 1.0)
      throw ValidationError("FitResult " + spec_name + ": p-value outside [0,1]");
    if (std::isnan(std_errors[i]) != std::isnan(p_values[i]))
      throw ValidationError("FitResult " + spec_name + ": standard error and p-value availability differ");
  }
}

namespace {

nlohmann::json nullable(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
  return out;
}

std::vector<double> from_nullable(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const FitResult& f) {
  j = nlohmann::json{{"spec_name", f.spec_name},
                     {"terms", f.terms},
                     {"coefficients", f.coefficients},
                     {"std_errors", nullable(f.std_errors)},
                     {"p_values", nullable(f.p_values)},
                     {"r_squared", f.r_squared},
                     {"n_obs", f.n_obs},
                     {"df_model", f.df_model},
                     {"covariance_type", std::string(to_string(f.covariance_type))},
                     {"weighted", f.weighted},
                     {"warnings", f.warnings}};
  if (f.fixed_effects) j["fixed_effects"] = *f.fixed_effects;
}

void from_json(const nlohmann::json& j, FitResult& f) {
  j.at("spec_name").get_to(f.spec_name);
  j.at("terms").get_to(f.terms);
  j.at("coefficients").get_to(f.coefficients);
  f.std_errors = from_nullable(j.at("std_errors"));
  f.p_values = from_nullable(j.at("p_values"));
  j.at("r_squared").get_to(f.r_squared);
  j.at("n_obs").get_to(f.n_obs);
  f.df_model = j.value("df_model", f.terms.size());
  f.covariance_type = parse_covariance(j.at("covariance_type").get<std::string>())
                          .value_or(CovarianceType::kHC1);
  j.at("weighted").get_to(f.weighted);
  if (j.contains("fixed_effects")) f.fixed_effects = j.at("fixed_effects").get<std::string>();
  if (j.contains("warnings")) j.at("warnings").get_to(f.warnings);
}

// ---------------------------------------------------------------------------

WorkerSchema WorkerSchema::defaults() {
  WorkerSchema s;
  for (auto f : kWorkerLogicalFields) s.columns.emplace(std::string(f), std::string(f));
  return s;
}

std::string WorkerSchema::column(const std::string& logical) const {
  auto it = columns.find(logical);
  return it == columns.end() ? logical : it->second;
}

nlohmann::json IngestReport::to_json() const {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : parse_errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  return {{"rows_read", rows_read},
          {"rows_kept", rows_kept},
          {"dropped_age", dropped_age},
          {"dropped_income", dropped_income},
          {"missing_education", missing_education},
          {"parse_errors", errors},
          {"income", {{"mean", income_mean}, {"sd", income_sd}, {"min", income_min}, {"max", income_max}}}};
}

std::optional<double> derive_experience(int age, std::optional<double> education_years) {
  if (!education_years) return std::nullopt;
  return std::max(static_cast<double>(age) - *education_years - 6.0, 0.0);
}

namespace {

std::optional<bool> parse_flag(std::string_view s) {
  const auto v = text::trim(s);
  if (v == "1") return true;
  if (v == "0") return false;
  return std::nullopt;
}

struct ColumnMap {
  std::optional<std::size_t> worker_id, income, log_income, age, education, female, urban, formal,
      occupation, sector, weight;
};

ColumnMap resolve_columns(const csv::Header& header, const WorkerSchema& schema) {
  ColumnMap m;
  auto look = [&](const char* logical) { return header.find(schema.column(logical)); };
  m.worker_id = look("worker_id");
  m.income = look("income");
  m.log_income = look("log_income");
  m.age = look("age");
  m.education = look("education_years");
  m.female = look("female");
  m.urban = look("urban");
  m.formal = look("formal");
  m.occupation = look("occupation_code");
  m.sector = look("sector_code");
  m.weight = look("sampling_weight");

  std::vector<std::string> missing;
  if (!m.income && !m.log_income) missing.push_back(schema.column("income"));
  const std::pair<const char*, std::optional<std::size_t>> required[] = {
      {"age", m.age},       {"education_years", m.education}, {"female", m.female},
      {"urban", m.urban},   {"formal", m.formal},             {"occupation_code", m.occupation},
      {"sector_code", m.sector}};
  for (const auto& [name, idx] : required) {
    if (!idx) missing.push_back(schema.column(name));
  }
  if (!missing.empty())
    throw ValidationError("worker CSV is missing mandatory column(s): " + text::join(missing, ", "));
  return m;
}

}  // namespace

IngestResult ingest_workers(std::istream& in, const WorkerSchema& schema) {
  IngestResult result;
  auto& report = result.report;
  csv::Reader reader(in);
  std::vector<std::string> fields;

  try {
    if (!reader.next(fields)) throw ValidationError("worker CSV is empty (no header row)");
  } catch (const csv::FormatError& e) {
    throw ValidationError(std::string("worker CSV header: ") + e.what());
  }
  const csv::Header header(fields);
  const ColumnMap cols = resolve_columns(header, schema);

  double inc_sum = 0.0, inc_sq = 0.0;
  report.income_min = std::numeric_limits<double>::infinity();
  report.income_max = -std::numeric_limits<double>::infinity();

  while (true) {
    bool got = false;
    try {
      got = reader.next(fields);
    } catch (const csv::FormatError& e) {
      ++report.rows_read;
      report.parse_errors.push_back({e.line(), "unterminated quoted field"});
      break;
    }
    if (!got) break;
    const std::size_t line = reader.record_line();
    if (fields.size() == 1 && text::trim(fields[0]).empty()) continue;  // blank line
    ++report.rows_read;

    if (fields.size() != header.size()) {
      report.parse_errors.push_back({line, "expected " + std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size())});
      continue;
    }
    auto field = [&](std::optional<std::size_t> idx) -> std::string_view {
      return idx ? std::string_view(fields[*idx]) : std::string_view{};
    };
    std::vector<std::string> problems;

    WorkerRecord w;
    w.worker_id = cols.worker_id ? std::string(text::trim(field(cols.worker_id))) : "L" + std::to_string(line);

    std::optional<double> income;
    std::optional<double> log_income;
    if (cols.log_income && !text::trim(field(cols.log_income)).empty()) {
      log_income = text::parse_double(field(cols.log_income));
      if (!log_income || !std::isfinite(*log_income)) problems.push_back("log_income is not a number");
      else income = std::exp(*log_income);
    } else if (cols.income) {
      income = text::parse_double(field(cols.income));
      if (!income || !std::isfinite(*income)) problems.push_back("income is not a number");
    } else {
      problems.push_back("income is empty");
    }

    const auto age = text::parse_int(field(cols.age));
    if (!age) problems.push_back("age is not an integer");

    std::optional<double> educ;
    if (!text::trim(field(cols.education)).empty()) {
      educ = text::parse_double(field(cols.education));
      if (!educ || *educ < 0.0 || !std::isfinite(*educ)) {
        problems.push_back("education_years must be a nonnegative number or empty");
        educ.reset();
      }
    }

    const auto female = parse_flag(field(cols.female));
    const auto urban = parse_flag(field(cols.urban));
    const auto formal = parse_flag(field(cols.formal));
    if (!female) problems.push_back("female must be 0 or 1");
    if (!urban) problems.push_back("urban must be 0 or 1");
    if (!formal) problems.push_back("formal must be 0 or 1");

    double weight = 1.0;
    if (cols.weight) {
      const auto wv = text::parse_double(field(cols.weight));
      if (!wv || !(*wv > 0.0) || !std::isfinite(*wv)) problems.push_back("sampling_weight must be > 0");
      else weight = *wv;
    }
    w.occupation_code = std::string(text::trim(field(cols.occupation)));
    w.sector_code = std::string(text::trim(field(cols.sector)));

    if (!problems.empty()) {
      report.parse_errors.push_back({line, text::join(problems, "; ")});
      continue;
    }
    if (*age < kMinAge || *age > kMaxAge) {
      ++report.dropped_age;
      continue;
    }
    if (!(*income > 0.0)) {
      ++report.dropped_income;
      continue;
    }

    w.log_income = log_income ? *log_income : std::log(*income);
    w.age = static_cast<int>(*age);
    w.education_years = educ;
    w.experience = derive_experience(w.age, educ);
    w.female = *female;
    w.urban = *urban;
    w.formal = *formal;
    w.sampling_weight = weight;
    w.validate();

    if (!educ) ++report.missing_education;
    inc_sum += *income;
    inc_sq += *income * *income;
    report.income_min = std::min(report.income_min, *income);
    report.income_max = std::max(report.income_max, *income);
    result.workers.push_back(std::move(w));
  }

  report.rows_kept = result.workers.size();
  if (report.rows_kept > 0) {
    const double n = static_cast<double>(report.rows_kept);
    report.income_mean = inc_sum / n;
    report.income_sd = std::sqrt(std::max(inc_sq / n - report.income_mean * report.income_mean, 0.0));
  } else {
    report.income_min = report.income_max = 0.0;
  }
  return result;
}

void export_workers(std::ostream& out, std::span<const WorkerRecord> workers) {
  csv::write_row(out, {"worker_id", "income", "log_income", "age", "education_years", "female", "urban",
                       "formal", "occupation_code", "sector_code", "sampling_weight"});
  for (const auto& w : workers) {
    csv::write_row(out, {w.worker_id, text::format_double(std::exp(w.log_income)),
                         text::format_double(w.log_income), std::to_string(w.age),
                         w.education_years ? text::format_double(*w.education_years) : "",
                         w.female ? "1" : "0", w.urban ? "1" : "0", w.formal ? "1" : "0",
                         w.occupation_code, w.sector_code, text::format_double(w.sampling_weight)});
  }
}

}  // namespace augmincer
