// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace augmincer::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Strict numeric parsing: the whole (trimmed) field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest decimal representation that round-trips to the same double.
/// Used for every machine-readable output so files are byte-reproducible.
std::string format_double(double v);

/// Fixed-precision rendering for human-facing tables.
std::string format_fixed(double v, int decimals);

}  // namespace augmincer::text
