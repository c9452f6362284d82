// SPDX-License-Identifier: Apache-2.0

#include "augmincer/table.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer {

void AnalysisTable::check_size(std::size_t n, std::string_view name) {
  if (sized_ && n != rows_)
    throw ValidationError("column '" + std::string(name) + "' has " + std::to_string(n) + " rows, table has " +
                          std::to_string(rows_));
  rows_ = n;
  sized_ = true;
}

void AnalysisTable::add_numeric(std::string_view name, std::vector<double> values) {
  check_size(values.size(), name);
  numeric_.insert_or_assign(std::string(name), std::move(values));
}

void AnalysisTable::add_text(std::string_view name, std::vector<std::string> values) {
  check_size(values.size(), name);
  text_.insert_or_assign(std::string(name), std::move(values));
}

bool AnalysisTable::has_numeric(std::string_view name) const { return numeric_.find(name) != numeric_.end(); }
bool AnalysisTable::has_text(std::string_view name) const { return text_.find(name) != text_.end(); }

const std::vector<double>& AnalysisTable::numeric(std::string_view name) const {
  auto it = numeric_.find(name);
  if (it == numeric_.end()) throw ValidationError("analysis table has no numeric column '" + std::string(name) + "'");
  return it->second;
}

std::vector<double>& AnalysisTable::numeric_mut(std::string_view name) {
  auto it = numeric_.find(name);
  if (it == numeric_.end()) throw ValidationError("analysis table has no numeric column '" + std::string(name) + "'");
  return it->second;
}

const std::vector<std::string>& AnalysisTable::text(std::string_view name) const {
  auto it = text_.find(name);
  if (it == text_.end()) throw ValidationError("analysis table has no text column '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> AnalysisTable::numeric_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : numeric_) out.push_back(k);
  return out;
}

std::vector<std::string> AnalysisTable::text_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : text_) out.push_back(k);
  return out;
}

AnalysisTable AnalysisTable::select_rows(std::span<const std::size_t> rows) const {
  AnalysisTable out;
  for (const auto& [name, values] : text_) {
    std::vector<std::string> v;
    v.reserve(rows.size());
    for (auto r : rows) v.push_back(values[r]);
    out.add_text(name, std::move(v));
  }
  for (const auto& [name, values] : numeric_) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (auto r : rows) v.push_back(values[r]);
    out.add_numeric(name, std::move(v));
  }
  out.rows_ = rows.size();
  out.sized_ = true;
  return out;
}

void write_table_csv(std::ostream& out, const AnalysisTable& table) {
  const auto tnames = table.text_names();
  const auto nnames = table.numeric_names();
  std::vector<std::string> header = tnames;
  header.insert(header.end(), nnames.begin(), nnames.end());
  csv::write_row(out, header);

  std::vector<const std::vector<std::string>*> tcols;
  std::vector<const std::vector<double>*> ncols;
  for (const auto& n : tnames) tcols.push_back(&table.text(n));
  for (const auto& n : nnames) ncols.push_back(&table.numeric(n));

  std::vector<std::string> row(header.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::size_t c = 0;
    for (const auto* v : tcols) row[c++] = (*v)[r];
    for (const auto* v : ncols) row[c++] = text::format_double((*v)[r]);
    csv::write_row(out, row);
  }
}

AnalysisTable read_table_csv(std::istream& in, std::span<const std::string_view> text_columns) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  const auto& names = header.names();
  std::vector<bool> is_text(names.size());
  for (std::size_t i = 0; i < names.size(); ++i)
    is_text[i] = std::find(text_columns.begin(), text_columns.end(), names[i]) != text_columns.end();

  std::vector<std::vector<std::string>> tvals(names.size());
  std::vector<std::vector<double>> nvals(names.size());
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    if (row.size() != names.size())
      throw ValidationError("table CSV line " + std::to_string(reader.record_line()) + ": wrong field count");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (is_text[i]) {
        tvals[i].push_back(row[i]);
      } else if (text::trim(row[i]).empty()) {
        nvals[i].push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        const auto v = text::parse_double(row[i]);
        if (!v)
          throw ValidationError("table CSV line " + std::to_string(reader.record_line()) + ": column '" + names[i] +
                                "' is not numeric");
        nvals[i].push_back(*v);
      }
    }
  }
  AnalysisTable t;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (is_text[i]) t.add_text(names[i], std::move(tvals[i]));
    else t.add_numeric(names[i], std::move(nvals[i]));
  }
  return t;
}

}  // namespace augmincer
