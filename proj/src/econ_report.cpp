// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <algorithm>
#include <map>
#include <ostream>

#include "augmincer/csv.hpp"
#include "augmincer/text.hpp"
#include "econ_internal.hpp"

namespace augmincer::econ {

std::string significance_stars(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

std::string pretty_term(std::string_view label) {
  static const std::map<std::string, std::string, std::less<>> names = {
      {"(Intercept)", "Constant"}, {"educ", "Education (years)"}, {"exper", "Experience"},
      {"exper2", "Experience^2"},  {"ahc", "H^A"},                {"sub", "H^C"},
      {"d", "D"},                  {"female", "Female"},          {"urban", "Urban"},
      {"formal", "Formal"},        {"age", "Age"},               {"log_income", "Log income"}};
  std::vector<std::string> parts;
  for (const auto& f : text::split(label, ':')) {
    auto it = names.find(f);
    parts.push_back(it == names.end() ? f : it->second);
  }
  return text::join(parts, " x ");
}

void write_fits_markdown(std::ostream& out, const std::vector<FitResult>& fits, const std::string& title) {
  std::vector<std::string> rows;
  for (const auto& f : fits)
    for (const auto& t : f.terms)
      if (std::find(rows.begin(), rows.end(), t) == rows.end()) rows.push_back(t);

  if (!title.empty()) out << "### " << title << "\n\n";
  out << "| |";
  for (const auto& f : fits) out << ' ' << f.spec_name << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < fits.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& t : rows) {
    out << "| " << pretty_term(t) << " |";
    for (const auto& f : fits) {
      const auto j = f.find(t);
      out << ' ';
      if (j) {
        out << text::format_fixed(f.coefficients[*j], 3) << significance_stars(f.p_values[*j]);
        if (!std::isnan(f.std_errors[*j])) out << " (" << text::format_fixed(f.std_errors[*j], 3) << ')';
      }
      out << " |";
    }
    out << '\n';
  }
  out << "| Sector FE |";
  for (const auto& f : fits) out << ' ' << (f.fixed_effects ? "Yes" : "No") << " |";
  out << "\n| R^2 |";
  for (const auto& f : fits) out << ' ' << text::format_fixed(f.r_squared, 3) << " |";
  out << "\n| N |";
  for (const auto& f : fits) out << ' ' << f.n_obs << " |";
  out << "\n\n";
  out << "Standard errors in parentheses";
  if (!fits.empty()) out << " (" << to_string(fits.front().covariance_type) << ")";
  out << ". *** p<0.01, ** p<0.05, * p<0.10.\n";
}

void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits) {
  csv::write_row(out, {"spec", "term", "coefficient", "std_error", "p_value", "n_obs", "r_squared", "covariance",
                       "weighted", "fixed_effects"});
  for (const auto& f : fits) {
    for (std::size_t j = 0; j < f.terms.size(); ++j) {
      csv::write_row(out, {f.spec_name, f.terms[j], text::format_double(f.coefficients[j]),
                           text::format_double(f.std_errors[j]), text::format_double(f.p_values[j]),
                           std::to_string(f.n_obs), text::format_double(f.r_squared),
                           std::string(to_string(f.covariance_type)), f.weighted ? "1" : "0",
                           f.fixed_effects.value_or("")});
    }
  }
}

void write_oaxaca_csv(std::ostream& out, const OaxacaResult& r) {
  csv::write_row(out, {"term", "mean_a", "mean_b", "beta_a", "beta_b", "beta_ref", "explained", "unexplained"});
  for (std::size_t j = 0; j < r.terms.size(); ++j) {
    csv::write_row(out, {r.terms[j], text::format_double(r.mean_a[j]), text::format_double(r.mean_b[j]),
                         text::format_double(r.beta_a[j]), text::format_double(r.beta_b[j]),
                         text::format_double(r.beta_ref[j]), text::format_double(r.explained[j]),
                         text::format_double(r.unexplained[j])});
  }
  csv::write_row(out, {"total", text::format_double(r.mean_y_a), text::format_double(r.mean_y_b), "", "", "",
                       text::format_double(r.explained_total), text::format_double(r.unexplained_total)});
}

void write_oaxaca_markdown(std::ostream& out, const OaxacaResult& r) {
  const auto share = [&](double v) { return r.gap != 0.0 ? text::format_fixed(100.0 * v / r.gap, 1) + "%" : ""; };
  out << "Raw gap (A - B): " << text::format_fixed(r.gap, 4) << " (n_A = " << r.n_a << ", n_B = " << r.n_b
      << ", reference " << to_string(r.reference) << ")\n\n";
  out << "| Term | Explained | Share | Unexplained |\n|---|---:|---:|---:|\n";
  for (std::size_t j = 0; j < r.terms.size(); ++j) {
    out << "| " << pretty_term(r.terms[j]) << " | " << text::format_fixed(r.explained[j], 4) << " | "
        << share(r.explained[j]) << " | " << text::format_fixed(r.unexplained[j], 4) << " |\n";
  }
  out << "| Total | " << text::format_fixed(r.explained_total, 4) << " | " << share(r.explained_total) << " | "
      << text::format_fixed(r.unexplained_total, 4) << " |\n";
}

}  // namespace augmincer::econ
