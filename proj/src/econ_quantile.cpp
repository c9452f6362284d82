// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "augmincer/errors.hpp"
#include "augmincer/text.hpp"
#include "econ_internal.hpp"

namespace augmincer::econ {
namespace {

double rho(double u, double tau) { return u * (tau - (u < 0.0 ? 1.0 : 0.0)); }

// Least squares with row weights, used by the IRLS stage.
Vector weighted_ls(const Matrix& X, const Vector& y, const Vector& w) {
  const Vector sw = w.array().sqrt().matrix();
  return (sw.asDiagonal() * X).colPivHouseholderQr().solve(sw.cwiseProduct(y));
}

Vector irls(const Matrix& X, const Vector& y, double tau, int max_iter, int& iterations) {
  const Eigen::Index n = X.rows();
  Vector beta = X.colPivHouseholderQr().solve(y);
  Vector best = beta;
  double best_obj = check_loss(y, X, beta, tau);
  const Vector r0 = y - X * beta;
  const double scale = std::max(r0.cwiseAbs().sum() / static_cast<double>(n), 1e-12);
  double eps = 0.1 * scale;
  const double eps_min = 1e-10 * scale;
  Vector w(n);
  iterations = 0;
  for (int it = 0; it < max_iter; ++it) {
    ++iterations;
    const Vector r = y - X * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = r(i) > 0.0 ? tau : 1.0 - tau;
      w(i) = c / std::max(std::abs(r(i)), eps);
    }
    const Vector next = weighted_ls(X, y, w);
    const double step = (next - beta).norm() / (1.0 + beta.norm());
    beta = next;
    const double obj = check_loss(y, X, beta, tau);
    if (obj < best_obj) {
      best_obj = obj;
      best = beta;
    }
    if (step < 1e-9) {
      if (eps <= eps_min) break;
      eps = std::max(eps * 0.1, eps_min);
    }
  }
  return best;
}

// Rows in ascending |r| order forming a nonsingular p x p basis.
std::vector<Eigen::Index> initial_basis(const Matrix& X, const Vector& r) {
  const Eigen::Index n = X.rows(), p = X.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(r(a)) < std::abs(r(b)); });
  std::vector<Eigen::Index> basis;
  Matrix q(p, 0);
  for (auto i : order) {
    Vector v = X.row(i).transpose();
    const double norm0 = v.norm();
    if (!(norm0 > 0.0)) continue;
    for (Eigen::Index c = 0; c < q.cols(); ++c) v -= q.col(c).dot(v) * q.col(c);
    for (Eigen::Index c = 0; c < q.cols(); ++c) v -= q.col(c).dot(v) * q.col(c);
    if (v.norm() <= 1e-8 * norm0) continue;
    q.conservativeResize(p, q.cols() + 1);
    q.col(q.cols() - 1) = v / v.norm();
    basis.push_back(i);
    if (static_cast<Eigen::Index>(basis.size()) == p) break;
  }
  if (static_cast<Eigen::Index>(basis.size()) < p) throw NumericalError("quantile_fit: design is rank deficient");
  return basis;
}

struct Edge {
  Eigen::Index position = -1;
  double sign = 0.0;
  double slope = 0.0;
};

class VertexSolver {
 public:
  VertexSolver(const Matrix& X, const Vector& y, double tau)
      : X_(X), y_(y), tau_(tau), n_(X.rows()), p_(X.cols()) {
    const double ymax = y.cwiseAbs().maxCoeff();
    zero_tol_ = 1e-11 * std::max(1.0, ymax);
  }

  void set_basis(std::vector<Eigen::Index> basis) {
    basis_ = std::move(basis);
    Matrix Xh(p_, p_);
    Vector yh(p_);
    for (Eigen::Index j = 0; j < p_; ++j) {
      Xh.row(j) = X_.row(basis_[static_cast<std::size_t>(j)]);
      yh(j) = y_(basis_[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(Xh);
    if (!lu.isInvertible()) throw NumericalError("quantile_fit: singular basis");
    beta_ = lu.solve(yh);
    binv_ = lu.inverse();
    r_ = y_ - X_ * beta_;
    in_basis_.assign(static_cast<std::size_t>(n_), false);
    for (auto i : basis_) {
      in_basis_[static_cast<std::size_t>(i)] = true;
      r_(i) = 0.0;
    }
  }

  // Directional derivatives along the 2p edges; returns the steepest one.
  Edge steepest_edge(const Matrix& Zall) const {
    Edge best;
    for (Eigen::Index j = 0; j < p_; ++j) {
      for (double s : {1.0, -1.0}) {
        double g = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
          double z = s * Zall(i, j);
          if (in_basis_[static_cast<std::size_t>(i)]) {
            if (i != basis_[static_cast<std::size_t>(j)]) continue;
            z = s;
          }
          g += slope_term(r_(i), z);
        }
        if (g < best.slope) {
          best.slope = g;
          best.position = j;
          best.sign = s;
        }
      }
    }
    return best;
  }

  // Exact minimization along an edge: the slope starts at e.slope and rises by
  // |z_i| at each breakpoint r_i / z_i; stop at the first one making it >= 0.
  Eigen::Index line_search(const Matrix& Zall, const Edge& e) const {
    std::vector<std::pair<double, Eigen::Index>> breaks;
    const double z_tol = 1e-12;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (in_basis_[static_cast<std::size_t>(i)]) continue;
      const double z = e.sign * Zall(i, e.position);
      if (std::abs(z) <= z_tol) continue;
      const double t = r_(i) / z;
      if (t > 0.0 || (std::abs(r_(i)) <= zero_tol_ && t >= 0.0)) breaks.emplace_back(std::max(t, 0.0), i);
    }
    std::sort(breaks.begin(), breaks.end());
    double slope = e.slope;
    for (const auto& [t, i] : breaks) {
      // Zero-residual rows already entered the initial slope with their
      // post-kink value.
      if (std::abs(r_(i)) > zero_tol_) slope += std::abs(e.sign * Zall(i, e.position));
      if (slope >= 0.0) return i;
    }
    return -1;
  }

  double slope_term(double r, double z) const {
    if (std::abs(r) <= zero_tol_) return std::max(-tau_ * z, (1.0 - tau_) * z);
    return r > 0.0 ? -tau_ * z : (1.0 - tau_) * z;
  }

  Matrix edge_matrix() const { return X_ * binv_; }

  // Zero-residual rows outside the basis (degenerate vertex).
  std::vector<Eigen::Index> extra_zeros() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < n_; ++i)
      if (!in_basis_[static_cast<std::size_t>(i)] && std::abs(r_(i)) <= zero_tol_) out.push_back(i);
    return out;
  }

  const Vector& beta() const { return beta_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  Eigen::Index p() const { return p_; }

 private:
  const Matrix& X_;
  const Vector& y_;
  double tau_;
  Eigen::Index n_, p_;
  double zero_tol_ = 0.0;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> in_basis_;
  Vector beta_, r_;
  Matrix binv_;
};

}  // namespace

double check_loss(const Vector& y, const Matrix& X, const Vector& beta, double tau) {
  const Vector r = y - X * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += rho(r(i), tau);
  return s;
}

QuantileResult quantile_fit(const Vector& y, const Matrix& X, double tau, const QuantileOptions& options) {
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("quantile_fit: tau must lie in (0, 1)");
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n) throw ValidationError("quantile_fit: y and X differ in row count");
  if (p == 0 || n < p) throw NumericalError("quantile_fit: fewer rows than columns");
  const auto set = collinear_set(X, detail::default_labels(static_cast<std::size_t>(p)));
  if (!set.empty()) throw NumericalError("quantile_fit: rank-deficient design: collinear columns {" + text::join(set, ", ") + "}");

  QuantileResult out;
  const Vector start = irls(X, y, tau, options.max_irls_iterations, out.irls_iterations);
  VertexSolver solver(X, y, tau);
  solver.set_basis(initial_basis(X, y - X * start));

  Edge last;
  while (true) {
    const Matrix Z = solver.edge_matrix();
    Edge e = solver.steepest_edge(Z);
    const double slope_tol = 1e-12 * std::max(1.0, static_cast<double>(n));
    if (e.position >= 0 && e.slope < -slope_tol) {
      if (out.pivots >= options.max_pivots) {
        last = e;
        break;
      }
      const Eigen::Index entering = solver.line_search(Z, e);
      if (entering < 0) throw NumericalError("quantile_fit: check loss unbounded along an edge");
      auto basis = solver.basis();
      basis[static_cast<std::size_t>(e.position)] = entering;
      solver.set_basis(std::move(basis));
      ++out.pivots;
      continue;
    }
    // Degenerate vertex: another basis at the same point may expose a descent edge.
    bool moved = false;
    for (auto extra : solver.extra_zeros()) {
      for (Eigen::Index j = 0; j < p && !moved; ++j) {
        if (std::abs(Z(extra, j)) <= 1e-9) continue;
        auto basis = solver.basis();
        basis[static_cast<std::size_t>(j)] = extra;
        VertexSolver trial(X, y, tau);
        trial.set_basis(basis);
        const Edge te = trial.steepest_edge(trial.edge_matrix());
        if (te.position >= 0 && te.slope < -slope_tol) {
          solver.set_basis(std::move(basis));
          moved = true;
        }
      }
      if (moved) break;
    }
    if (!moved) break;
    if (++out.pivots > options.max_pivots) {
      last = solver.steepest_edge(solver.edge_matrix());
      last.position = std::max<Eigen::Index>(last.position, 0);
      break;
    }
  }

  out.beta = solver.beta();
  out.objective = check_loss(y, X, out.beta, tau);
  if (last.position >= 0) {
    throw NumericalError(fmt::format(
        "quantile_fit: no optimal vertex after {} pivots; objective {:.12g}, optimality gap estimate (steepest "
        "edge slope) {:.3g}",
        out.pivots, out.objective, -last.slope));
  }
  return out;
}

FitResult fit_quantile(const AnalysisTable& table, const ModelSpec& spec, double tau) {
  if (spec.fixed_effects)
    throw ValidationError(spec.name + ": fixed effects cannot be absorbed by demeaning in a quantile fit");
  const Design d = build_design(table, spec);
  Vector y = d.y;
  Matrix X = d.X;
  // rho is positively homogeneous, so a weighted check loss is the plain loss
  // on rows scaled by their weight.
  if (d.w) {
    y = d.w->cwiseProduct(y);
    X = d.w->asDiagonal() * X;
  }
  const auto q = quantile_fit(y, X, tau);
  FitResult r;
  r.spec_name = spec.name + " q" + text::format_double(tau);
  r.terms = d.labels;
  r.coefficients.assign(q.beta.data(), q.beta.data() + q.beta.size());
  r.std_errors.assign(r.terms.size(), std::numeric_limits<double>::quiet_NaN());
  r.p_values = r.std_errors;
  r.n_obs = static_cast<std::size_t>(d.y.size());
  r.df_model = r.terms.size();
  r.covariance_type = spec.covariance;
  r.weighted = d.w.has_value();
  // Pseudo R^2 relative to the intercept-only quantile fit.
  const Matrix ones = d.w ? Matrix(*d.w) : Matrix(Matrix::Ones(y.size(), 1));
  const auto null_fit = quantile_fit(y, ones, tau);
  r.r_squared = null_fit.objective > 0.0 ? 1.0 - q.objective / null_fit.objective : 0.0;
  r.warnings.push_back("standard errors unavailable for quantile fits");
  return r;
}

}  // namespace augmincer::econ
