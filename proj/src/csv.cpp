// SPDX-License-Identifier: Apache-2.0

#include "augmincer/csv.hpp"

#include <istream>
#include <ostream>

#include "augmincer/text.hpp"

namespace augmincer::csv {

FormatError::FormatError(std::size_t line, std::string message)
    : line_(line), message_("line " + std::to_string(line) + ": " + std::move(message)) {}

Reader::Reader(std::istream& in) : in_(in) {}

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (in_.peek() == std::char_traits<char>::eof()) return false;

  record_line_ = line_;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  char c;
  while (in_.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\n') {
      ++line_;
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\r' && in_.peek() == '\n') {
      // swallowed; the '\n' ends the record
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw FormatError(record_line_, "unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

Header::Header(const std::vector<std::string>& names) : names_(names) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    names_[i] = std::string(text::trim(names_[i]));
    // strip a UTF-8 byte-order mark on the first column
    if (i == 0 && names_[i].rfind("\xEF\xBB\xBF", 0) == 0) names_[i].erase(0, 3);
    index_.emplace(names_[i], i);
  }
}

std::optional<std::size_t> Header::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape_field(fields[i]);
  }
  out << '\n';
}

}  // namespace augmincer::csv
