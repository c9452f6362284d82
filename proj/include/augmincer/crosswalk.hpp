// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace augmincer::crosswalk {

struct Edge {
  std::string from_code;
  std::string to_code;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

inline constexpr double kNormalizationTolerance = 1e-9;

/// Merges duplicate (from,to) pairs by summing and rescales every from_code's
/// outgoing weights to sum to one. Output is sorted by (from_code, to_code).
std::vector<Edge> normalize(const std::vector<Edge>& edges);

/// Reads from_code,to_code[,weight]. Rows without a weight share their
/// source's mass uniformly (1/out-degree). Codes are trimmed; the result is
/// normalized.
std::vector<Edge> read_csv(std::istream& in);
void write_csv(std::ostream& out, const std::vector<Edge>& edges);

struct ChainResult {
  std::vector<Edge> edges;
  /// from_codes of the first map none of whose targets continue in the second.
  std::vector<std::string> unmapped;
};

/// Composes a->b and b->c maps: w(a,c) = sum_b w(a,b) w(b,c), then
/// renormalizes per a. Independent of input edge order.
ChainResult chain(const std::vector<Edge>& ab, const std::vector<Edge>& bc);

struct CoverageReport {
  double covered_weight = 0.0;
  double total_weight = 0.0;
  double ratio = 0.0;
  std::vector<std::string> unmapped_codes;

  nlohmann::json to_json() const;
};

/// Share of employment sitting in target codes reached by at least one edge.
/// Throws DomainError if total employment is zero, ValidationError on a
/// negative weight.
CoverageReport coverage(const std::vector<Edge>& edges, const std::map<std::string, double>& employment);

}  // namespace augmincer::crosswalk
