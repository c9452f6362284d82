// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"
#include "econ_internal.hpp"

namespace augmincer::econ {
namespace detail {

std::vector<std::string> default_labels(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

Vector sqrt_weights(const Vector* w, Eigen::Index n) {
  if (!w) return Vector::Ones(n);
  if (w->size() != n) throw ValidationError("weights length differs from the number of rows");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite((*w)(i)) || !((*w)(i) > 0.0))
      throw ValidationError(fmt::format("weight at row {} is not positive", i));
  }
  return w->array().sqrt().matrix();
}

namespace {

double rank_threshold(Eigen::Index n) {
  return std::max(1e-13, 20.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(n)));
}

}  // namespace

LsCore solve_ls(const Matrix& Xt, const Vector& yt, const std::vector<std::string>& labels) {
  const Eigen::Index p = Xt.cols();
  Vector norms = Xt.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(norms(j) > 0.0)) throw NumericalError("rank-deficient design: column " + labels[j] + " is identically zero");
  }
  const Matrix Xs = Xt * norms.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Matrix> qr(Xs.rows(), p);
  qr.setThreshold(rank_threshold(Xs.rows()));
  qr.compute(Xs);
  if (qr.rank() < p) {
    const auto set = collinear_set(Xt, labels);
    throw NumericalError("rank-deficient design: collinear columns {" + text::join(set, ", ") + "}");
  }
  LsCore core;
  core.beta = qr.solve(yt).cwiseQuotient(norms);
  const Matrix R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  const Matrix inv_scaled = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();
  core.bread = norms.cwiseInverse().asDiagonal() * inv_scaled * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(R);
  const auto& sv = svd.singularValues();
  core.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  return core;
}

Matrix covariance(const Matrix& Xt, const Vector& et, const Matrix& bread, CovarianceType type, std::size_t df) {
  const auto n = static_cast<double>(Xt.rows());
  const double resid_df = n - static_cast<double>(df);
  if (type == CovarianceType::kClassical) return (et.squaredNorm() / resid_df) * bread;
  const Matrix scores = Xt.array().colwise() * et.array();
  const Matrix meat = scores.transpose() * scores;
  Matrix v = bread * meat * bread;
  if (type == CovarianceType::kHC1) v *= n / resid_df;
  return v;
}

void fill_inference(FitResult& out, const Vector& beta, const Matrix& vcov) {
  const auto k = static_cast<std::size_t>(beta.size());
  out.coefficients.assign(beta.data(), beta.data() + k);
  out.std_errors.resize(k);
  out.p_values.resize(k);
  out.vcov.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) out.vcov[i * k + j] = vcov(i, j);
    const double se = std::sqrt(std::max(vcov(i, i), 0.0));
    out.std_errors[i] = se;
    if (se > 0.0) {
      out.p_values[i] = normal_p_value(beta(i) / se);
    } else {
      out.p_values[i] = beta(i) == 0.0 ? 1.0 : 0.0;
    }
  }
}

}  // namespace detail

double normal_p_value(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Vector residuals(const Vector& y, const Matrix& X, const std::vector<double>& beta) {
  if (static_cast<Eigen::Index>(beta.size()) != X.cols()) throw ValidationError("coefficient count differs from X");
  const Eigen::Map<const Vector> b(beta.data(), X.cols());
  return y - X * b;
}

FitResult ols(const Vector& y, const Matrix& X, const Vector* w, const OlsOptions& options) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw ValidationError("ols: y and X differ in row count");
  if (p == 0) throw ValidationError("ols: design has no columns");
  const auto labels = options.labels.empty() ? detail::default_labels(static_cast<std::size_t>(p)) : options.labels;
  if (labels.size() != static_cast<std::size_t>(p)) throw ValidationError("ols: label count differs from X columns");
  const std::size_t df = static_cast<std::size_t>(p) + options.absorbed_levels;
  if (static_cast<std::size_t>(n) <= df)
    throw NumericalError(fmt::format("{}: n = {} does not exceed the {} estimated parameters", options.spec_name, n, df));

  const Vector sw = detail::sqrt_weights(w, n);
  const Matrix Xt = sw.asDiagonal() * X;
  const Vector yt = sw.cwiseProduct(y);
  const auto core = detail::solve_ls(Xt, yt, labels);
  const Vector et = yt - Xt * core.beta;

  FitResult out;
  out.spec_name = options.spec_name;
  out.terms = labels;
  out.n_obs = static_cast<std::size_t>(n);
  out.df_model = df;
  out.covariance_type = options.covariance;
  out.weighted = w != nullptr;
  out.fixed_effects = options.fixed_effects;
  detail::fill_inference(out, core.beta, detail::covariance(Xt, et, core.bread, options.covariance, df));

  double tss = 0.0;
  if (options.total_ss) {
    tss = *options.total_ss;
  } else {
    const Vector wv = sw.cwiseAbs2();
    const double ybar = wv.dot(y) / wv.sum();
    tss = wv.dot((y.array() - ybar).square().matrix());
  }
  const double ssr = et.squaredNorm();
  if (tss > 0.0) {
    out.r_squared = 1.0 - ssr / tss;
  } else {
    out.r_squared = 0.0;
    out.warnings.push_back("outcome has zero variance; R^2 set to 0");
  }
  if (core.condition > kConditionWarning)
    out.warnings.push_back(fmt::format("near-singular design: condition number {:.3g}", core.condition));
  return out;
}

TslsResult tsls(const Vector& y, const Matrix& X_exog, const Matrix& X_endog, const Matrix& Z, const Vector* w,
                const OlsOptions& options) {
  const Eigen::Index n = y.size();
  if (X_exog.rows() != n || X_endog.rows() != n || Z.rows() != n) throw ValidationError("tsls: row counts differ");
  const Eigen::Index p1 = X_exog.cols(), m = X_endog.cols(), q = Z.cols();
  if (m < 1) throw ValidationError("tsls: no endogenous column");
  if (q < 1) throw ValidationError("tsls: at least one excluded instrument is required");
  if (q < m) throw ValidationError(fmt::format("tsls: order condition fails ({} instruments for {} endogenous)", q, m));
  const Eigen::Index k = p1 + m;
  const auto labels = options.labels.empty() ? detail::default_labels(static_cast<std::size_t>(k)) : options.labels;
  if (labels.size() != static_cast<std::size_t>(k)) throw ValidationError("tsls: label count differs from columns");
  const std::size_t df = static_cast<std::size_t>(k) + options.absorbed_levels;
  if (static_cast<std::size_t>(n) <= static_cast<std::size_t>(p1 + q) + options.absorbed_levels)
    throw NumericalError("tsls: too few observations for the first stage");

  Matrix W1(n, p1 + q);
  W1 << X_exog, Z;
  std::vector<std::string> stage1_labels(labels.begin(), labels.begin() + p1);
  for (Eigen::Index j = 0; j < q; ++j) stage1_labels.push_back("instrument" + std::to_string(j));

  TslsResult result;
  Matrix Xhat(n, k);
  Xhat.leftCols(p1) = X_exog;
  OlsOptions s1;
  s1.covariance = CovarianceType::kHC1;
  s1.labels = stage1_labels;
  s1.absorbed_levels = options.absorbed_levels;
  for (Eigen::Index j = 0; j < m; ++j) {
    s1.spec_name = "first stage " + labels[p1 + j];
    const Vector xj = X_endog.col(j);
    const FitResult f1 = ols(xj, W1, w, s1);
    const Eigen::Map<const Vector> pi(f1.coefficients.data(), p1 + q);
    Xhat.col(p1 + j) = W1 * pi;
    const Vector bz = pi.tail(q);
    Matrix vzz(q, q);
    const auto kk = static_cast<std::size_t>(p1 + q);
    for (Eigen::Index a = 0; a < q; ++a)
      for (Eigen::Index b = 0; b < q; ++b) vzz(a, b) = f1.vcov[(p1 + a) * kk + (p1 + b)];
    Eigen::ColPivHouseholderQR<Matrix> vqr(vzz);
    double f = std::numeric_limits<double>::infinity();
    if (vqr.rank() == q) f = bz.dot(vqr.solve(bz)) / static_cast<double>(q);
    result.first_stage_f.push_back(f);
  }

  const Vector sw = detail::sqrt_weights(w, n);
  const Matrix Xt = sw.asDiagonal() * Xhat;
  const Vector yt = sw.cwiseProduct(y);
  const auto core = detail::solve_ls(Xt, yt, labels);
  Matrix Xs(n, k);
  Xs << X_exog, X_endog;
  const Vector et = sw.cwiseProduct(y - Xs * core.beta);

  FitResult& out = result.fit;
  out.spec_name = options.spec_name;
  out.terms = labels;
  out.n_obs = static_cast<std::size_t>(n);
  out.df_model = df;
  out.covariance_type = options.covariance;
  out.weighted = w != nullptr;
  out.fixed_effects = options.fixed_effects;
  detail::fill_inference(out, core.beta, detail::covariance(Xt, et, core.bread, options.covariance, df));
  double tss = 0.0;
  if (options.total_ss) {
    tss = *options.total_ss;
  } else {
    const Vector wv = sw.cwiseAbs2();
    const double ybar = wv.dot(y) / wv.sum();
    tss = wv.dot((y.array() - ybar).square().matrix());
  }
  out.r_squared = tss > 0.0 ? 1.0 - et.squaredNorm() / tss : 0.0;
  for (std::size_t j = 0; j < result.first_stage_f.size(); ++j) {
    if (result.first_stage_f[j] < kWeakInstrumentF)
      out.warnings.push_back(fmt::format("weak instrument: first-stage F for {} is {:.3g}", labels[p1 + j],
                                         result.first_stage_f[j]));
  }
  if (core.condition > kConditionWarning)
    out.warnings.push_back(fmt::format("near-singular second stage: condition number {:.3g}", core.condition));
  return result;
}

}  // namespace augmincer::econ
