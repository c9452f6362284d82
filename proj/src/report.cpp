// SPDX-License-Identifier: Apache-2.0

#include "augmincer/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "augmincer/csv.hpp"
#include "augmincer/econometrics.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"

namespace augmincer::report {

namespace {

using text::format_double;
using text::format_fixed;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<std::size_t> term_index(const FitResult& f, std::string_view term) {
  for (std::size_t i = 0; i < f.terms.size(); ++i)
    if (f.terms[i] == term) return i;
  return std::nullopt;
}

double coefficient(const FitResult& f, std::string_view term) {
  auto i = term_index(f, term);
  return i ? f.coefficients[*i] : kNaN;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

/// Linear map from [lo, hi] onto [a, b]; degenerate ranges map to the middle.
struct Scale {
  double lo, hi, a, b;
  double operator()(double v) const { return hi > lo ? a + (v - lo) / (hi - lo) * (b - a) : 0.5 * (a + b); }
};

void svg_open(std::ostream& out, int w, int h, std::string_view title) {
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" )"
                     R"(font-family="sans-serif" font-size="11">)",
                     w, h)
      << '\n';
  out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", w, h) << '\n';
  out << fmt::format(R"(<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>)", w / 2,
                     xml_escape(title))
      << '\n';
}

}  // namespace

std::vector<DescriptiveRow> describe(const AnalysisTable& table, std::span<const std::string_view> fields) {
  std::vector<DescriptiveRow> rows;
  for (auto f : fields) {
    if (!table.has_numeric(f)) continue;
    DescriptiveRow r;
    r.variable = std::string(f);
    double sum = 0.0;
    r.min = std::numeric_limits<double>::infinity();
    r.max = -r.min;
    for (double v : table.numeric(f)) {
      if (is_missing(v)) continue;
      ++r.n;
      sum += v;
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
    if (r.n == 0) {
      r.mean = r.sd = r.min = r.max = kNaN;
    } else {
      r.mean = sum / static_cast<double>(r.n);
      double ss = 0.0;
      for (double v : table.numeric(f))
        if (!is_missing(v)) ss += (v - r.mean) * (v - r.mean);
      r.sd = std::sqrt(ss / static_cast<double>(r.n));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_descriptive_markdown(std::ostream& out, const std::vector<DescriptiveRow>& rows) {
  out << "| Variable | N | Mean | SD | Min | Max |\n|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows)
    out << fmt::format("| {} | {} | {} | {} | {} | {} |\n", econ::pretty_term(r.variable), r.n, format_fixed(r.mean, 3),
                       format_fixed(r.sd, 3), format_fixed(r.min, 3), format_fixed(r.max, 3));
}

std::vector<SectorBar> sector_bars(const AnalysisTable& table, std::string_view sector_field,
                                   std::string_view score_field) {
  const auto& sector = table.text(sector_field);
  const auto& score = table.numeric(score_field);
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (sector[i].empty() || is_missing(score[i])) continue;
    auto& [sum, n] = acc[sector[i]];
    sum += score[i];
    ++n;
  }
  std::vector<SectorBar> bars;
  for (const auto& [s, a] : acc) bars.push_back({s, a.second, a.first / static_cast<double>(a.second), false});
  if (bars.empty()) return bars;
  std::vector<double> means;
  for (const auto& b : bars) means.push_back(b.mean_ahc);
  std::sort(means.begin(), means.end());
  const std::size_t m = means.size();
  const double median = m % 2 ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
  for (auto& b : bars) b.above_median = b.mean_ahc > median;
  std::stable_sort(bars.begin(), bars.end(), [](const SectorBar& a, const SectorBar& b) {
    return a.mean_ahc > b.mean_ahc;
  });
  return bars;
}

void write_sector_bars_csv(std::ostream& out, const std::vector<SectorBar>& bars) {
  csv::write_row(out, {"sector", "n_workers", "mean_ahc", "above_median"});
  for (const auto& b : bars)
    csv::write_row(out, {b.sector, std::to_string(b.n_workers), format_double(b.mean_ahc), b.above_median ? "1" : "0"});
}

std::vector<ScatterPoint> occupation_scatter(std::span<const OccupationIndex> indices, const AnalysisTable& table,
                                             std::string_view occupation_field) {
  std::map<std::string, std::size_t, std::less<>> counts;
  if (table.has_text(occupation_field))
    for (const auto& o : table.text(occupation_field)) ++counts[o];
  std::vector<ScatterPoint> points;
  for (const auto& idx : indices) {
    const auto it = counts.find(idx.occupation_code);
    points.push_back({idx.occupation_code, idx.ahc_raw, idx.sub_raw, it == counts.end() ? 0 : it->second});
  }
  std::sort(points.begin(), points.end(),
            [](const ScatterPoint& a, const ScatterPoint& b) { return a.occupation < b.occupation; });
  return points;
}

double scatter_correlation(const std::vector<ScatterPoint>& points) {
  const double n = static_cast<double>(points.size());
  if (points.size() < 3) return kNaN;
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& p : points) {
    sxy += (p.x - mx) * (p.y - my);
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterPoint>& points, std::string_view x_name,
                       std::string_view y_name) {
  csv::write_row(out, {"occupation_code", std::string(x_name), std::string(y_name), "employment"});
  for (const auto& p : points)
    csv::write_row(out, {p.occupation, format_double(p.x), format_double(p.y), std::to_string(p.employment)});
}

void write_external_figure_csv(std::ostream& out, const std::vector<validation::ExternalRow>& rows) {
  csv::write_row(out, {"index_name", "n_matched", "pearson", "validity"});
  for (const auto& r : rows) {
    std::string validity = "undefined";
    if (r.pearson) validity = *r.pearson >= 0.0 ? "convergent" : "discriminant";
    csv::write_row(out, {r.index_name, std::to_string(r.n_matched), r.pearson ? format_double(*r.pearson) : "",
                         validity});
  }
}

void write_heterogeneity_figure_csv(std::ostream& out, const std::vector<robust::SubgroupRow>& rows,
                                    std::string_view term) {
  csv::write_row(out, {"split", "group", "coefficient", "std_error", "p_value", "n_obs", "class"});
  for (const auto& r : rows) {
    std::string b, se, p, cls = "unavailable";
    if (r.fit) {
      if (auto i = term_index(*r.fit, term)) {
        const double pv = r.fit->p_values[*i], coef = r.fit->coefficients[*i];
        b = format_double(coef);
        se = format_double(r.fit->std_errors[*i]);
        p = format_double(pv);
        cls = pv < 0.05 ? (coef > 0.0 ? "positive" : "negative") : "ns";
      }
    }
    csv::write_row(out, {r.split, r.group, b, se, p, std::to_string(r.n_obs), cls});
  }
}

std::vector<QuantilePoint> quantile_curve(const std::vector<double>& taus, const std::vector<FitResult>& fits) {
  if (taus.size() != fits.size()) throw ValidationError("quantile_curve: taus and fits differ in length");
  std::vector<QuantilePoint> pts;
  for (std::size_t i = 0; i < taus.size(); ++i)
    pts.push_back({taus[i], coefficient(fits[i], "ahc"), coefficient(fits[i], "ahc:d")});
  std::sort(pts.begin(), pts.end(), [](const QuantilePoint& a, const QuantilePoint& b) { return a.tau < b.tau; });
  return pts;
}

void write_quantile_figure_csv(std::ostream& out, const std::vector<QuantilePoint>& points) {
  csv::write_row(out, {"tau", "beta1_ahc", "beta2_ahc_d"});
  for (const auto& p : points) csv::write_row(out, {format_double(p.tau), format_double(p.beta1), format_double(p.beta2)});
}

void write_quantile_markdown(std::ostream& out, const std::vector<double>& taus, const std::vector<FitResult>& fits) {
  if (taus.size() != fits.size()) throw ValidationError("quantile table: taus and fits differ in length");
  std::vector<std::string> terms;
  for (const auto& f : fits)
    for (const auto& t : f.terms)
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
  out << "| |";
  for (double t : taus) out << fmt::format(" tau = {} |", format_fixed(t, 2));
  out << "\n|---|";
  for (std::size_t i = 0; i < taus.size(); ++i) out << "---:|";
  out << '\n';
  for (const auto& t : terms) {
    out << "| " << econ::pretty_term(t) << " |";
    for (const auto& f : fits) out << ' ' << format_fixed(coefficient(f, t), 4) << " |";
    out << '\n';
  }
  out << "| N |";
  for (const auto& f : fits) out << ' ' << f.n_obs << " |";
  out << "\n\nCoefficients only; standard errors are not reported for quantile fits.\n";
}

void write_bar_svg(std::ostream& out, std::string_view title, const std::vector<Bar>& bars) {
  constexpr int kW = 640, kLeft = 150, kRight = 20, kTop = 32, kRow = 18;
  const int h = kTop + kRow * static_cast<int>(bars.size()) + 30;
  double lo = 0.0, hi = 0.0;
  for (const auto& b : bars) {
    lo = std::min(lo, b.value);
    hi = std::max(hi, b.value);
  }
  const Scale x{lo, hi, static_cast<double>(kLeft), static_cast<double>(kW - kRight)};
  svg_open(out, kW, h, title);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = kTop + kRow * static_cast<double>(i);
    const double x0 = x(std::min(0.0, bars[i].value)), x1 = x(std::max(0.0, bars[i].value));
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{}</text>)", kLeft - 6, num(y + 12),
                       xml_escape(bars[i].label))
        << '\n';
    out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>)", num(x0), num(y + 2),
                       num(std::max(x1 - x0, 0.5)), kRow - 4, bars[i].color.empty() ? "#4477aa" : bars[i].color)
        << '\n';
  }
  const double zx = x(0.0);
  out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>)", num(zx), kTop,
                     kTop + kRow * static_cast<int>(bars.size()))
      << '\n';
  out << fmt::format(R"(<text x="{}" y="{}">{}</text>)", kLeft, h - 8, format_fixed(lo, 3)) << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{}</text>)", kW - kRight, h - 8, format_fixed(hi, 3))
      << "\n</svg>\n";
}

void write_scatter_svg(std::ostream& out, std::string_view title, std::string_view x_label, std::string_view y_label,
                       const std::vector<ScatterPoint>& points) {
  constexpr int kW = 520, kH = 420, kPad = 50;
  double xlo = 0.0, xhi = 100.0, ylo = 0.0, yhi = 100.0;
  std::size_t emax = 1;
  if (!points.empty()) {
    xlo = ylo = std::numeric_limits<double>::infinity();
    xhi = yhi = -xlo;
    for (const auto& p : points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
      emax = std::max(emax, p.employment);
    }
  }
  const Scale sx{xlo, xhi, static_cast<double>(kPad), static_cast<double>(kW - 20)};
  const Scale sy{ylo, yhi, static_cast<double>(kH - kPad), 30.0};
  svg_open(out, kW, kH, title);
  out << fmt::format(R"(<rect x="{}" y="30" width="{}" height="{}" fill="none" stroke="black"/>)", kPad,
                     kW - 20 - kPad, kH - kPad - 30)
      << '\n';
  for (const auto& p : points) {
    const double r = 2.0 + 6.0 * std::sqrt(static_cast<double>(p.employment) / static_cast<double>(emax));
    out << fmt::format(R"(<circle cx="{}" cy="{}" r="{}" fill="#4477aa" fill-opacity="0.5"/>)", num(sx(p.x)),
                       num(sy(p.y)), num(r))
        << '\n';
  }
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (kW + kPad) / 2, kH - 12,
                     xml_escape(x_label))
      << '\n';
  out << fmt::format(R"svg(<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>)svg",
                     kH / 2, xml_escape(y_label))
      << "\n</svg>\n";
}

void write_quantile_svg(std::ostream& out, const std::vector<QuantilePoint>& points) {
  constexpr int kW = 720, kH = 320, kPanel = 320, kPad = 40;
  svg_open(out, kW, kH, "Augmentation coefficients across the wage distribution");
  auto panel = [&](int x0, std::string_view label, auto get) {
    double lo = 0.0, hi = 0.0;
    for (const auto& p : points) {
      const double v = get(p);
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const Scale sx{0.0, 1.0, static_cast<double>(x0 + kPad), static_cast<double>(x0 + kPanel)};
    const Scale sy{lo, hi, static_cast<double>(kH - kPad), 40.0};
    out << fmt::format(R"(<rect x="{}" y="40" width="{}" height="{}" fill="none" stroke="black"/>)", x0 + kPad,
                       kPanel - kPad, kH - kPad - 40)
        << '\n';
    out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#999" stroke-dasharray="4 3"/>)",
                       x0 + kPad, num(sy(0.0)), x0 + kPanel)
        << '\n';
    std::string pts;
    for (const auto& p : points) {
      const double v = get(p);
      if (std::isnan(v)) continue;
      pts += fmt::format("{},{} ", num(sx(p.tau)), num(sy(v)));
    }
    out << fmt::format(R"(<polyline points="{}" fill="none" stroke="#4477aa" stroke-width="2"/>)", text::trim(pts))
        << '\n';
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", x0 + (kPad + kPanel) / 2, kH - 12,
                       xml_escape(label))
        << '\n';
  };
  panel(0, "H^A level (tau on x)", [](const QuantilePoint& p) { return p.beta1; });
  panel(kW / 2, "H^A x D (tau on x)", [](const QuantilePoint& p) { return p.beta2; });
  out << "</svg>\n";
}

}  // namespace augmincer::report
