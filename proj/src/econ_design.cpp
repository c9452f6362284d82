// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"
#include "econ_internal.hpp"

namespace augmincer::econ {

std::string Term::label() const { return text::join(factors, ":"); }

Term parse_term(std::string_view label) {
  Term t;
  for (const auto& part : text::split(label, ':')) {
    const auto f = text::trim(part);
    if (f.empty()) throw ValidationError("empty factor in term '" + std::string(label) + "'");
    t.factors.emplace_back(f);
  }
  if (t.factors.empty() || t.factors.size() > 3)
    throw ValidationError("term '" + std::string(label) + "' must have 1 to 3 factors");
  return t;
}

std::vector<Term> parse_terms(std::string_view comma_separated) {
  std::vector<Term> out;
  for (const auto& part : text::split(comma_separated, ',')) {
    if (text::trim(part).empty()) continue;
    out.push_back(parse_term(part));
  }
  return out;
}

namespace {

struct OpName {
  std::string_view token;
  FilterOp op;
};

// Two-character operators first so "<=" is not read as "<".
constexpr OpName kOps[] = {{"==", FilterOp::kEq}, {"!=", FilterOp::kNe}, {"<=", FilterOp::kLe},
                           {">=", FilterOp::kGe}, {"<", FilterOp::kLt},  {">", FilterOp::kGt}};

std::string_view op_token(FilterOp op) {
  for (const auto& o : kOps)
    if (o.op == op) return o.token;
  return "?";
}

bool holds(const Condition& c, double v) {
  if (std::isnan(v)) return false;
  switch (c.op) {
    case FilterOp::kEq: return v == c.value;
    case FilterOp::kNe: return v != c.value;
    case FilterOp::kLt: return v < c.value;
    case FilterOp::kLe: return v <= c.value;
    case FilterOp::kGt: return v > c.value;
    case FilterOp::kGe: return v >= c.value;
  }
  return false;
}

}  // namespace

std::string SampleFilter::description() const {
  std::vector<std::string> parts;
  for (const auto& c : all_of) parts.push_back(c.field + std::string(op_token(c.op)) + text::format_double(c.value));
  return text::join(parts, "&");
}

SampleFilter parse_filter(std::string_view expr) {
  SampleFilter f;
  for (const auto& raw : text::split(expr, '&')) {
    const auto part = text::trim(raw);
    if (part.empty()) continue;
    bool parsed = false;
    for (const auto& o : kOps) {
      const auto pos = part.find(o.token);
      if (pos == std::string_view::npos) continue;
      Condition c;
      c.field = std::string(text::trim(part.substr(0, pos)));
      c.op = o.op;
      const auto v = text::parse_double(part.substr(pos + o.token.size()));
      const bool bad_field = c.field.empty() || std::any_of(c.field.begin(), c.field.end(), [](char ch) {
        return !(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
      });
      if (bad_field || !v) throw ValidationError("malformed filter condition '" + std::string(part) + "'");
      c.value = *v;
      f.all_of.push_back(std::move(c));
      parsed = true;
      break;
    }
    if (!parsed) throw ValidationError("filter condition '" + std::string(part) + "' has no comparison operator");
  }
  return f;
}

void ModelSpec::validate() const {
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (t.factors.empty() || t.factors.size() > 3)
      throw ValidationError(name + ": term '" + t.label() + "' must have 1 to 3 factors");
    if (!seen.insert(t.label()).second) throw ValidationError(name + ": duplicate term '" + t.label() + "'");
  }
  if (terms.empty() && !intercept) throw ValidationError(name + ": model has no columns");
  if (outcome.empty()) throw ValidationError(name + ": outcome is empty");
}

std::vector<std::string> ModelSpec::labels() const {
  std::vector<std::string> out;
  if (intercept && !fixed_effects) out.emplace_back(kInterceptLabel);
  for (const auto& t : terms) out.push_back(t.label());
  return out;
}

std::vector<std::string> ModelSpec::referenced_fields() const {
  std::vector<std::string> out{outcome};
  auto add = [&](const std::string& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& t : terms)
    for (const auto& f : t.factors) add(f);
  if (weights_field) add(*weights_field);
  for (const auto& c : filter.all_of) add(c.field);
  if (fixed_effects) add(*fixed_effects);
  return out;
}

std::vector<std::string> collinear_set(const Matrix& X, const std::vector<std::string>& labels) {
  const Eigen::Index p = X.cols();
  const Vector norms = X.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(norms(j) > 0.0)) return {labels[j]};
  const Matrix Xs = X * norms.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(Xs.rows(), p);
  qr.setThreshold(std::max(1e-13, 20.0 * std::numeric_limits<double>::epsilon() *
                                      std::sqrt(static_cast<double>(Xs.rows()))));
  qr.compute(Xs);
  const Eigen::Index r = qr.rank();
  if (r == p) return {};
  const auto& perm = qr.colsPermutation().indices();
  const Eigen::Index dependent = perm(r);
  Matrix basis(Xs.rows(), r);
  for (Eigen::Index i = 0; i < r; ++i) basis.col(i) = Xs.col(perm(i));
  std::vector<Eigen::Index> members{dependent};
  if (r > 0) {
    const Vector c = basis.colPivHouseholderQr().solve(Xs.col(dependent));
    for (Eigen::Index i = 0; i < r; ++i)
      if (std::abs(c(i)) > 1e-6) members.push_back(perm(i));
  }
  std::sort(members.begin(), members.end());
  std::vector<std::string> out;
  for (auto j : members) out.push_back(labels[j]);
  return out;
}

namespace {

std::vector<std::string> fe_keys_of(const AnalysisTable& table, const ModelSpec& spec) {
  std::vector<std::string> keys;
  if (!spec.fixed_effects) return keys;
  if (table.has_text(*spec.fixed_effects)) return table.text(*spec.fixed_effects);
  for (double v : table.numeric(*spec.fixed_effects)) keys.push_back(std::isnan(v) ? "" : text::format_double(v));
  return keys;
}

}  // namespace

Sample select_sample(const AnalysisTable& table, const ModelSpec& spec) {
  spec.validate();
  for (const auto& f : spec.referenced_fields()) {
    const bool is_fe = spec.fixed_effects && f == *spec.fixed_effects;
    if (table.has_numeric(f) || (is_fe && table.has_text(f))) continue;
    throw ValidationError(spec.name + ": field '" + f + "' is not in the analysis table");
  }
  std::vector<const std::vector<double>*> needed{&table.numeric(spec.outcome)};
  for (const auto& t : spec.terms)
    for (const auto& f : t.factors) needed.push_back(&table.numeric(f));
  if (spec.weights_field) needed.push_back(&table.numeric(*spec.weights_field));
  std::vector<const std::vector<double>*> filter_cols;
  for (const auto& c : spec.filter.all_of) filter_cols.push_back(&table.numeric(c.field));
  const auto fe_keys = fe_keys_of(table, spec);

  Sample s;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    bool pass = true;
    for (std::size_t c = 0; c < filter_cols.size() && pass; ++c) pass = holds(spec.filter.all_of[c], (*filter_cols[c])[i]);
    if (!pass) {
      ++s.dropped_filter;
      continue;
    }
    bool complete = true;
    for (const auto* colp : needed) complete = complete && !std::isnan((*colp)[i]);
    if (!fe_keys.empty()) complete = complete && !fe_keys[i].empty();
    if (!complete) {
      ++s.dropped_missing;
      continue;
    }
    s.rows.push_back(i);
  }
  return s;
}

Design build_design(const AnalysisTable& table, const ModelSpec& spec) {
  Sample sample = select_sample(table, spec);
  const auto& yv = table.numeric(spec.outcome);
  std::vector<std::vector<const std::vector<double>*>> factor_cols;
  for (const auto& t : spec.terms) {
    auto& fc = factor_cols.emplace_back();
    for (const auto& f : t.factors) fc.push_back(&table.numeric(f));
  }
  const std::vector<double>* wcol = spec.weights_field ? &table.numeric(*spec.weights_field) : nullptr;
  const auto fe_keys = fe_keys_of(table, spec);
  const auto& kept = sample.rows;
  for (auto i : kept) {
    if (wcol && !((*wcol)[i] > 0.0))
      throw ValidationError(fmt::format("{}: weight at row {} is not positive", spec.name, i));
  }
  Design d;
  d.dropped_filter = sample.dropped_filter;
  d.dropped_missing = sample.dropped_missing;

  const bool with_intercept = spec.intercept && !spec.fixed_effects;
  const auto n = static_cast<Eigen::Index>(kept.size());
  const auto p = static_cast<Eigen::Index>(spec.terms.size() + (with_intercept ? 1 : 0));
  d.labels = spec.labels();
  d.rows = kept;
  d.y.resize(n);
  d.X.resize(n, p);
  if (wcol) d.w = Vector(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = kept[static_cast<std::size_t>(r)];
    d.y(r) = yv[i];
    Eigen::Index c = 0;
    if (with_intercept) d.X(r, c++) = 1.0;
    for (const auto& fc : factor_cols) {
      double v = 1.0;
      for (const auto* colp : fc) v *= (*colp)[i];
      d.X(r, c++) = v;
    }
    if (wcol) (*d.w)(r) = (*wcol)[i];
  }

  const Vector wv = d.w ? *d.w : Vector::Ones(n);
  if (n > 0) {
    const double ybar = wv.dot(d.y) / wv.sum();
    d.total_ss = wv.dot((d.y.array() - ybar).square().matrix());
  }

  if (spec.fixed_effects) {
    std::map<std::string, Eigen::Index> level_of;
    std::vector<Eigen::Index> group(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& key = fe_keys[kept[static_cast<std::size_t>(r)]];
      auto [it, inserted] = level_of.try_emplace(key, static_cast<Eigen::Index>(level_of.size()));
      group[static_cast<std::size_t>(r)] = it->second;
    }
    const auto g = static_cast<Eigen::Index>(level_of.size());
    d.n_groups = static_cast<std::size_t>(g);
    Vector wsum = Vector::Zero(g);
    Matrix sums = Matrix::Zero(g, p + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto gi = group[static_cast<std::size_t>(r)];
      wsum(gi) += wv(r);
      sums(gi, 0) += wv(r) * d.y(r);
      for (Eigen::Index c = 0; c < p; ++c) sums(gi, c + 1) += wv(r) * d.X(r, c);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto gi = group[static_cast<std::size_t>(r)];
      d.y(r) -= sums(gi, 0) / wsum(gi);
      for (Eigen::Index c = 0; c < p; ++c) d.X(r, c) -= sums(gi, c + 1) / wsum(gi);
    }
  }

  const std::size_t k = static_cast<std::size_t>(p) + d.n_groups;
  if (static_cast<std::size_t>(n) <= k)
    throw NumericalError(fmt::format("{}: n = {} after filtering does not exceed k = {}", spec.name, n, k));
  const Matrix Xt = d.w ? Matrix(d.w->array().sqrt().matrix().asDiagonal() * d.X) : d.X;
  const auto set = collinear_set(Xt, d.labels);
  if (!set.empty())
    throw NumericalError(spec.name + ": rank-deficient design: collinear columns {" + text::join(set, ", ") + "}");
  return d;
}

FitResult fit(const AnalysisTable& table, const ModelSpec& spec) {
  const Design d = build_design(table, spec);
  OlsOptions o;
  o.covariance = spec.covariance;
  o.labels = d.labels;
  o.spec_name = spec.name;
  o.absorbed_levels = d.n_groups;
  o.total_ss = d.total_ss;
  o.fixed_effects = spec.fixed_effects;
  FitResult r = ols(d.y, d.X, d.w ? &*d.w : nullptr, o);
  if (d.dropped_missing > 0)
    r.warnings.push_back(fmt::format("{} rows dropped for missing fields", d.dropped_missing));
  return r;
}

std::vector<double> fit_coefficients(const AnalysisTable& table, const ModelSpec& spec) {
  const Design d = build_design(table, spec);
  const Vector sw = d.w ? Vector(d.w->array().sqrt().matrix()) : Vector::Ones(d.y.size());
  const auto core = detail::solve_ls(sw.asDiagonal() * d.X, sw.cwiseProduct(d.y), d.labels);
  return {core.beta.data(), core.beta.data() + core.beta.size()};
}

TslsResult fit_tsls(const AnalysisTable& table, const ModelSpec& spec, const std::vector<Term>& endogenous,
                    const std::vector<Term>& instruments) {
  if (endogenous.empty()) throw ValidationError("2sls: no endogenous term");
  if (instruments.empty()) throw ValidationError("2sls: no instrument");
  for (const auto& e : endogenous)
    if (std::find(spec.terms.begin(), spec.terms.end(), e) == spec.terms.end())
      throw ValidationError(fmt::format("2sls: endogenous term {} is not in the model", e.label()));
  for (const auto& z : instruments)
    if (std::find(spec.terms.begin(), spec.terms.end(), z) != spec.terms.end())
      throw ValidationError(fmt::format("2sls: instrument {} is also a regressor", z.label()));

  // One design over regressors and instruments keeps the estimation sample
  // common to both stages.
  ModelSpec joint = spec;
  joint.terms.insert(joint.terms.end(), instruments.begin(), instruments.end());
  const Design d = build_design(table, joint);
  const std::size_t k = spec.labels().size();

  std::vector<Eigen::Index> exog, endog, inst;
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < k; ++j) {
    const bool is_endog = std::any_of(endogenous.begin(), endogenous.end(),
                                      [&](const Term& t) { return t.label() == d.labels[j]; });
    if (!is_endog) {
      exog.push_back(static_cast<Eigen::Index>(j));
      labels.push_back(d.labels[j]);
    }
  }
  for (const auto& e : endogenous) {
    const auto it = std::find(d.labels.begin(), d.labels.begin() + static_cast<std::ptrdiff_t>(k), e.label());
    endog.push_back(it - d.labels.begin());
    labels.push_back(e.label());
  }
  for (std::size_t j = k; j < d.labels.size(); ++j) inst.push_back(static_cast<Eigen::Index>(j));

  auto columns = [&](const std::vector<Eigen::Index>& idx) {
    Matrix m(d.X.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = d.X.col(idx[j]);
    return m;
  };
  OlsOptions o;
  o.covariance = spec.covariance;
  o.labels = labels;
  o.spec_name = spec.name;
  o.absorbed_levels = d.n_groups;
  o.total_ss = d.total_ss;
  o.fixed_effects = spec.fixed_effects;
  TslsResult r = tsls(d.y, columns(exog), columns(endog), columns(inst), d.w ? &*d.w : nullptr, o);
  if (d.dropped_missing > 0)
    r.fit.warnings.push_back(fmt::format("{} rows dropped for missing fields", d.dropped_missing));
  return r;
}

}  // namespace augmincer::econ
