// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace augmincer::csv {

/// Streaming RFC 4180 reader. Quoted fields may contain commas, doubled
/// quotes and newlines. CRLF line endings are accepted.
class Reader {
 public:
  explicit Reader(std::istream& in);

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Throws csv::FormatError on an unterminated quoted field.
  bool next(std::vector<std::string>& fields);

  /// Physical line on which the most recently returned record started (1-based).
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

class FormatError : public std::exception {
 public:
  FormatError(std::size_t line, std::string message);
  const char* what() const noexcept override { return message_.c_str(); }
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// Header-indexed view used by every CSV consumer in the project.
class Header {
 public:
  Header() = default;
  explicit Header(const std::vector<std::string>& names);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string escape_field(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace augmincer::csv
