// SPDX-License-Identifier: Apache-2.0

#include "augmincer/crosswalk.hpp"

#include <istream>
#include <ostream>
#include <set>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer::crosswalk {
namespace {

using Adjacency = std::map<std::string, std::map<std::string, double>>;

Adjacency to_adjacency(const std::vector<Edge>& edges) {
  Adjacency adj;
  for (const auto& e : edges) {
    if (!(e.weight > 0.0)) throw ValidationError("crosswalk edge " + e.from_code + "->" + e.to_code + " has weight <= 0");
    adj[e.from_code][e.to_code] += e.weight;
  }
  return adj;
}

std::vector<Edge> from_adjacency(const Adjacency& adj) {
  std::vector<Edge> out;
  for (const auto& [from, targets] : adj) {
    double total = 0.0;
    for (const auto& [to, w] : targets) total += w;
    for (const auto& [to, w] : targets) out.push_back({from, to, w / total});
  }
  return out;
}

}  // namespace

std::vector<Edge> normalize(const std::vector<Edge>& edges) { return from_adjacency(to_adjacency(edges)); }

std::vector<Edge> read_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) return {};
  const csv::Header header(row);
  const auto from = header.find("from_code");
  const auto to = header.find("to_code");
  const auto weight = header.find("weight");
  if (!from || !to) throw ValidationError("crosswalk CSV needs from_code and to_code columns");

  std::vector<Edge> weighted;
  std::map<std::string, std::vector<std::string>> unweighted;
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    if (row.size() != header.size())
      throw ValidationError("crosswalk CSV line " + std::to_string(reader.record_line()) + ": wrong field count");
    Edge e{std::string(text::trim(row[*from])), std::string(text::trim(row[*to])), 1.0};
    if (e.from_code.empty() || e.to_code.empty())
      throw ValidationError("crosswalk CSV line " + std::to_string(reader.record_line()) + ": empty code");
    const std::string_view wfield = weight ? text::trim(row[*weight]) : std::string_view{};
    if (wfield.empty()) {
      unweighted[e.from_code].push_back(e.to_code);
      continue;
    }
    const auto w = text::parse_double(wfield);
    if (!w || !(*w > 0.0) || *w > 1.0)
      throw ValidationError("crosswalk CSV line " + std::to_string(reader.record_line()) + ": weight must be in (0,1]");
    e.weight = *w;
    weighted.push_back(std::move(e));
  }
  for (const auto& [from_code, targets] : unweighted) {
    const double share = 1.0 / static_cast<double>(targets.size());
    for (const auto& t : targets) weighted.push_back({from_code, t, share});
  }
  return normalize(weighted);
}

void write_csv(std::ostream& out, const std::vector<Edge>& edges) {
  csv::write_row(out, {"from_code", "to_code", "weight"});
  for (const auto& e : edges) csv::write_row(out, {e.from_code, e.to_code, text::format_double(e.weight)});
}

ChainResult chain(const std::vector<Edge>& ab, const std::vector<Edge>& bc) {
  const Adjacency first = to_adjacency(ab);
  const Adjacency second = to_adjacency(bc);

  ChainResult result;
  Adjacency composed;
  for (const auto& [a, mids] : first) {
    bool reached = false;
    for (const auto& [b, w_ab] : mids) {
      auto it = second.find(b);
      if (it == second.end()) continue;
      reached = true;
      for (const auto& [c, w_bc] : it->second) composed[a][c] += w_ab * w_bc;
    }
    if (!reached) result.unmapped.push_back(a);
  }
  result.edges = from_adjacency(composed);
  return result;
}

nlohmann::json CoverageReport::to_json() const {
  return {{"covered_weight", covered_weight},
          {"total_weight", total_weight},
          {"ratio", ratio},
          {"unmapped_codes", unmapped_codes}};
}

CoverageReport coverage(const std::vector<Edge>& edges, const std::map<std::string, double>& employment) {
  std::set<std::string> reachable;
  for (const auto& e : edges) {
    if (e.weight > 0.0) reachable.insert(e.to_code);
  }
  CoverageReport r;
  for (const auto& [code, w] : employment) {
    if (!(w >= 0.0)) throw ValidationError("employment weight for " + code + " is negative");
    r.total_weight += w;
    if (reachable.count(code)) r.covered_weight += w;
    else r.unmapped_codes.push_back(code);
  }
  if (!(r.total_weight > 0.0)) throw DomainError("coverage: total employment weight is zero");
  r.ratio = r.covered_weight / r.total_weight;
  return r;
}

}  // namespace augmincer::crosswalk
