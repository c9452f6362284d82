// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference computations for tests. Plain nested vectors and
// textbook formulas only; nothing here touches the library's solvers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat transpose(const Mat& a) {
  if (a.empty()) return {};
  Mat t(a[0].size(), Vec(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), Vec(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

/// Gauss-Jordan elimination with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (a[p][c] == 0.0) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

struct Ols {
  Vec beta;
  Vec se_classical;
  Vec se_hc0;
  Vec se_hc1;
  Vec resid;
  double r2 = 0.0;
};

/// Normal equations (X'WX)^-1 X'Wy with explicit inverse; the sandwich
/// meat is accumulated observation by observation.
inline Ols ols(const Mat& X, const Vec& y, const Vec& w = {}) {
  const std::size_t n = X.size();
  const std::size_t k = X[0].size();
  auto wt = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
  Mat xtx(k, Vec(k, 0.0));
  Vec xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += wt(i) * X[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += wt(i) * X[i][a] * X[i][b];
    }
  const Mat bread = inverse(xtx);
  Ols r;
  r.beta = matvec(bread, xty);
  r.resid.resize(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < k; ++a) fitted += X[i][a] * r.beta[a];
    r.resid[i] = y[i] - fitted;
    ssr += wt(i) * r.resid[i] * r.resid[i];
  }
  double wsum = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += wt(i);
    ybar += wt(i) * y[i];
  }
  ybar /= wsum;
  double tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) tss += wt(i) * (y[i] - ybar) * (y[i] - ybar);
  r.r2 = 1.0 - ssr / tss;

  Mat meat(k, Vec(k, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double s = wt(i) * wt(i) * r.resid[i] * r.resid[i];
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) meat[a][b] += s * X[i][a] * X[i][b];
  }
  const Mat hc0 = matmul(matmul(bread, meat), bread);
  const double s2 = ssr / static_cast<double>(n - k);
  const double scale = static_cast<double>(n) / static_cast<double>(n - k);
  for (std::size_t a = 0; a < k; ++a) {
    r.se_classical.push_back(std::sqrt(s2 * bread[a][a]));
    r.se_hc0.push_back(std::sqrt(hc0[a][a]));
    r.se_hc1.push_back(std::sqrt(scale * hc0[a][a]));
  }
  return r;
}

/// 2SLS via the projection formula b = (X'P X)^-1 X'P y, P = Z (Z'Z)^-1 Z',
/// with X = [exog, endog] and Z = [exog, instruments].
inline Vec tsls(const Mat& X, const Mat& Z, const Vec& y) {
  const Mat zt = transpose(Z);
  const Mat ztz_inv = inverse(matmul(zt, Z));
  const Mat xt = transpose(X);
  const Mat xtz = matmul(xt, Z);
  const Mat a = matmul(matmul(xtz, ztz_inv), transpose(xtz));
  Mat ycol(y.size(), Vec(1));
  for (std::size_t i = 0; i < y.size(); ++i) ycol[i][0] = y[i];
  const Mat zty = matmul(zt, ycol);
  const Mat rhs = matmul(matmul(xtz, ztz_inv), zty);
  Vec r;
  for (const auto& row : rhs) r.push_back(row[0]);
  return matvec(inverse(a), r);
}

/// Just-identified IV: (Z'X)^-1 Z'y.
inline Vec iv_just_identified(const Mat& X, const Mat& Z, const Vec& y) {
  const Mat zt = transpose(Z);
  return matvec(inverse(matmul(zt, X)), matvec(zt, y));
}

/// Krippendorff's alpha for two complete raters, interval metric, by
/// enumerating ordered value pairs: within units for D_o and across the
/// pooled values for D_e.
inline double krippendorff_pairs(const Vec& a, const Vec& b) {
  Vec pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double n_pooled = static_cast<double>(pooled.size());
  double within = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) {
    const double unit[2] = {a[u], b[u]};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (i != j) within += (unit[i] - unit[j]) * (unit[i] - unit[j]) / (2.0 - 1.0);
  }
  const double d_o = within / n_pooled;
  double across = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = 0; j < pooled.size(); ++j)
      if (i != j) across += (pooled[i] - pooled[j]) * (pooled[i] - pooled[j]);
  const double d_e = across / (n_pooled * (n_pooled - 1.0));
  return 1.0 - d_o / d_e;
}

inline double pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

/// Rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline Vec ranks_by_counting(const Vec& x) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double smaller = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++smaller;
      if (v == x[i]) ++equal;
    }
    r[i] = 1.0 + smaller + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double check_loss(const Mat& X, const Vec& y, const Vec& beta, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double u = y[i];
    for (std::size_t j = 0; j < beta.size(); ++j) u -= X[i][j] * beta[j];
    total += u * (tau - (u < 0.0 ? 1.0 : 0.0));
  }
  return total;
}

/// Minimum of f over a full lattice of `per_dim` points per coordinate in
/// [center - half_width, center + half_width].
inline double lattice_min(const Vec& center, const Vec& half_width, std::size_t per_dim,
                          const std::function<double(const Vec&)>& f) {
  const std::size_t k = center.size();
  std::vector<std::size_t> idx(k, 0);
  Vec point(k);
  double best = INFINITY;
  while (true) {
    for (std::size_t d = 0; d < k; ++d)
      point[d] = center[d] - half_width[d] +
                 2.0 * half_width[d] * static_cast<double>(idx[d]) / static_cast<double>(per_dim - 1);
    best = std::min(best, f(point));
    std::size_t d = 0;
    while (d < k && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == k) break;
  }
  return best;
}

}  // namespace oracle
