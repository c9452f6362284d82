// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "augmincer/econometrics.hpp"

namespace augmincer::econ::detail {

/// Least-squares solution of an already sqrt(w)-scaled system.
struct LsCore {
  Vector beta;
  Matrix bread;  // (X'X)^-1 of the scaled design
  double condition = 1.0;
};

/// Column-pivoted QR on the unit-column-scaled design. Throws NumericalError
/// naming a collinear set if the design is rank deficient.
LsCore solve_ls(const Matrix& Xt, const Vector& yt, const std::vector<std::string>& labels);

/// Covariance of b from the scaled design, the scaled residuals and the bread.
Matrix covariance(const Matrix& Xt, const Vector& et, const Matrix& bread, CovarianceType type, std::size_t df);

/// Fills coefficients, SEs, normal p-values and vcov.
void fill_inference(FitResult& out, const Vector& beta, const Matrix& vcov);

std::vector<std::string> default_labels(std::size_t k);
Vector sqrt_weights(const Vector* w, Eigen::Index n);

}  // namespace augmincer::econ::detail
