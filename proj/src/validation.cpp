// SPDX-License-Identifier: Apache-2.0

#include "augmincer/validation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "augmincer/csv.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer::validation {
namespace {

void check_pairs(std::span<const double> x, std::span<const double> y, std::size_t min_n, const char* what) {
  if (x.size() != y.size()) throw ValidationError(std::string(what) + ": sequences differ in length");
  if (x.size() < min_n)
    throw DomainError(std::string(what) + ": need at least " + std::to_string(min_n) + " pairs");
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y, 3, "pearson");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pairs(x, y, 3, "spearman");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

double krippendorff_interval(std::span<const double> a, std::span<const double> b) {
  check_pairs(a, b, 2, "krippendorff_interval");
  // Two values per unit: D_o = (1/n) sum (a-b)^2. Over the N = 2n pooled
  // values, sum_{i != j} (v_i - v_j)^2 = 2N * SS, so D_e = 2 SS / (N - 1).
  const double n = static_cast<double>(a.size());
  const double big_n = 2.0 * n;
  double pooled_mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) pooled_mean += a[i] + b[i];
  pooled_mean /= big_n;
  double ss = 0.0, within = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ss += (a[i] - pooled_mean) * (a[i] - pooled_mean) + (b[i] - pooled_mean) * (b[i] - pooled_mean);
    within += (a[i] - b[i]) * (a[i] - b[i]);
  }
  const double d_e = 2.0 * ss / (big_n - 1.0);
  if (!(d_e > 0.0)) throw DomainError("krippendorff_interval: all pooled values identical, alpha undefined");
  const double d_o = within / n;
  return 1.0 - d_o / d_e;
}

BiasAdjustment level_bias_adjust(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("level_bias_adjust: sequences differ in length");
  BiasAdjustment out;
  if (a.empty()) return out;
  out.bias = mean(b) - mean(a);
  out.b_adjusted.reserve(b.size());
  for (double v : b) out.b_adjusted.push_back(v - out.bias);
  return out;
}

ReliabilityReport reliability(std::span<const double> a, std::span<const double> b, bool adjust_bias) {
  ReliabilityReport r;
  r.n_pairs = a.size();
  r.pearson_r = pearson(a, b);
  r.spearman_rho = spearman(a, b);
  const auto adj = level_bias_adjust(a, b);
  r.level_bias = adj.bias;
  r.krippendorff_alpha = adjust_bias ? krippendorff_interval(a, adj.b_adjusted) : krippendorff_interval(a, b);
  return r;
}

std::vector<ExternalRow> external_validation_report(
    const std::map<std::string, double>& ahc, const std::map<std::string, std::map<std::string, double>>& external) {
  std::vector<ExternalRow> rows;
  for (const auto& [name, scores] : external) {
    ExternalRow row;
    row.index_name = name;
    std::vector<double> x, y;
    for (const auto& [code, v] : scores) {
      auto it = ahc.find(code);
      if (it == ahc.end()) continue;
      x.push_back(it->second);
      y.push_back(v);
    }
    row.n_matched = x.size();
    if (x.size() < 3) {
      row.flag = "insufficient overlap";
    } else {
      try {
        row.pearson = pearson(x, y);
        row.spearman = spearman(x, y);
      } catch (const DomainError&) {
        row.flag = "zero variance";
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_external_csv(std::ostream& out, const std::vector<ExternalRow>& rows) {
  csv::write_row(out, {"index_name", "n_matched", "pearson", "spearman", "flag"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.index_name, std::to_string(r.n_matched), r.pearson ? text::format_double(*r.pearson) : "",
                         r.spearman ? text::format_double(*r.spearman) : "", r.flag});
  }
}

void write_external_markdown(std::ostream& out, const std::vector<ExternalRow>& rows) {
  out << "| Index | N matched | Pearson r | Spearman rho | Note |\n";
  out << "|---|---:|---:|---:|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.index_name << " | " << r.n_matched << " | "
        << (r.pearson ? text::format_fixed(*r.pearson, 3) : "") << " | "
        << (r.spearman ? text::format_fixed(*r.spearman, 3) : "") << " | " << r.flag << " |\n";
  }
}

std::map<std::string, double> read_score_map_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  std::map<std::string, double> out;
  if (!reader.next(row)) return out;
  if (row.size() < 2) throw ValidationError("external index CSV needs two columns: occupation_code,score");
  while (reader.next(row)) {
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    if (row.size() < 2) throw ValidationError("external index CSV line " + std::to_string(reader.record_line()) + ": too few fields");
    const auto v = text::parse_double(row[1]);
    if (!v) throw ValidationError("external index CSV line " + std::to_string(reader.record_line()) + ": score is not numeric");
    out[std::string(text::trim(row[0]))] = *v;
  }
  return out;
}

}  // namespace augmincer::validation
