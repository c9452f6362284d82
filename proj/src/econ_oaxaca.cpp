// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"
#include "econ_internal.hpp"

namespace augmincer::econ {

std::string_view to_string(OaxacaReference r) {
  switch (r) {
    case OaxacaReference::kA: return "A";
    case OaxacaReference::kB: return "B";
    case OaxacaReference::kPooled: return "pooled";
  }
  return "?";
}

std::optional<OaxacaReference> parse_oaxaca_reference(std::string_view s) {
  const auto v = text::to_lower(text::trim(s));
  if (v == "a") return OaxacaReference::kA;
  if (v == "b") return OaxacaReference::kB;
  if (v == "pooled") return OaxacaReference::kPooled;
  return std::nullopt;
}

namespace {

struct GroupFit {
  Vector beta;
  Vector xbar;
  double ybar = 0.0;
  std::size_t n = 0;
};

Vector weights_or_ones(const Design& d) { return d.w ? *d.w : Vector::Ones(d.y.size()); }

GroupFit fit_group(const Design& d, const std::string& name) {
  GroupFit g;
  const Vector w = weights_or_ones(d);
  const double wsum = w.sum();
  g.xbar = (d.X.transpose() * w) / wsum;
  g.ybar = w.dot(d.y) / wsum;
  g.n = static_cast<std::size_t>(d.y.size());
  OlsOptions o;
  o.labels = d.labels;
  o.spec_name = name;
  const FitResult f = ols(d.y, d.X, d.w ? &*d.w : nullptr, o);
  g.beta = Eigen::Map<const Vector>(f.coefficients.data(), static_cast<Eigen::Index>(f.coefficients.size()));
  return g;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

OaxacaResult oaxaca_blinder(const AnalysisTable& group_a, const AnalysisTable& group_b, const ModelSpec& spec,
                            OaxacaReference reference) {
  if (spec.fixed_effects) throw ValidationError(spec.name + ": the decomposition needs group means, not absorbed fixed effects");
  if (!spec.intercept) throw ValidationError(spec.name + ": the decomposition requires an intercept");
  const Design da = build_design(group_a, spec);
  const Design db = build_design(group_b, spec);
  const GroupFit a = fit_group(da, spec.name + " (A)");
  const GroupFit b = fit_group(db, spec.name + " (B)");

  Vector beta_ref;
  switch (reference) {
    case OaxacaReference::kA: beta_ref = a.beta; break;
    case OaxacaReference::kB: beta_ref = b.beta; break;
    case OaxacaReference::kPooled: {
      const auto n = da.y.size() + db.y.size();
      Matrix X(n, da.X.cols());
      X << da.X, db.X;
      Vector y(n);
      y << da.y, db.y;
      Vector w(n);
      w << weights_or_ones(da), weights_or_ones(db);
      OlsOptions o;
      o.labels = da.labels;
      o.spec_name = spec.name + " (pooled)";
      const bool weighted = da.w.has_value();
      const FitResult f = ols(y, X, weighted ? &w : nullptr, o);
      beta_ref = Eigen::Map<const Vector>(f.coefficients.data(), static_cast<Eigen::Index>(f.coefficients.size()));
      break;
    }
  }

  OaxacaResult r;
  r.reference = reference;
  r.terms = da.labels;
  r.n_a = a.n;
  r.n_b = b.n;
  r.mean_a = to_std(a.xbar);
  r.mean_b = to_std(b.xbar);
  r.beta_a = to_std(a.beta);
  r.beta_b = to_std(b.beta);
  r.beta_ref = to_std(beta_ref);
  r.mean_y_a = a.ybar;
  r.mean_y_b = b.ybar;
  r.gap = a.ybar - b.ybar;
  for (Eigen::Index j = 0; j < a.beta.size(); ++j) {
    const double ex = (a.xbar(j) - b.xbar(j)) * beta_ref(j);
    const double un = a.xbar(j) * (a.beta(j) - beta_ref(j)) + b.xbar(j) * (beta_ref(j) - b.beta(j));
    r.explained.push_back(ex);
    r.unexplained.push_back(un);
    r.explained_total += ex;
    r.unexplained_total += un;
  }
  return r;
}

}  // namespace augmincer::econ
