#pragma once

#include <Eigen/Dense>
#include <utility>

#include "elkde/errors.hpp"
#include "elkde/rng.hpp"

namespace elkde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// n x N collection of state-space samples; column j is particle x_j.
class Ensemble {
 public:
  explicit Ensemble(Matrix states);

  int dim() const { return static_cast<int>(states_.rows()); }
  int size() const { return static_cast<int>(states_.cols()); }
  const Matrix& states() const { return states_; }

 private:
  Matrix states_;
};

/// Symmetric positive definite matrix with a cached Cholesky factor.
///
/// Construction symmetrizes the input, requires it to be symmetric to within
/// 1e-12 relative tolerance, and factorizes it; a failed factorization throws
/// FactorizationError.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix values);

  static SpdMatrix identity(int dim);
  /// value * I (value > 0).
  static SpdMatrix isotropic(int dim, double value);

  int dim() const { return static_cast<int>(values_.rows()); }
  const Matrix& mat() const { return values_; }
  /// Lower-triangular L with mat() = L L^T.
  const Matrix& chol() const { return chol_; }
  /// sum_i log L_ii = 0.5 * log det.
  double half_log_det() const { return half_log_det_; }

  /// factor * mat() without re-factorizing (factor > 0).
  SpdMatrix scaled(double factor) const;

  /// Solve mat() * X = rhs through the cached factor.
  Matrix solve(const Matrix& rhs) const;
  Vector solve(const Vector& rhs) const;

 private:
  SpdMatrix() = default;

  Matrix values_;
  Matrix chol_;
  double half_log_det_ = 0.0;
};

/// Nonnegative weights summing to one (within 1e-12).
class WeightVector {
 public:
  explicit WeightVector(Vector w);

  int size() const { return static_cast<int>(w_.size()); }
  const Vector& vec() const { return w_; }

 private:
  Vector w_;
};

/// Unbiased sample covariance (1/(N-1)) X (I - 11'/N) X'. Requires N >= 2.
/// The result is exactly symmetric and positive semidefinite.
Matrix sample_covariance(const Ensemble& ensemble);

/// Importance-weighted covariance (1/(1 - w'w)) X (diag(w) - ww') X'.
/// Throws DegenerateWeightsError when 1 - w'w <= tolerance.
Matrix weighted_covariance(const Ensemble& ensemble, const WeightVector& weights,
                           double tolerance = 1e-12);

/// log N(x; mean, cov) through the cached Cholesky factor (no explicit
/// inverse); stays finite for Mahalanobis distances far beyond underflow.
double log_gaussian(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& mean, const SpdMatrix& cov);

/// Shift-stable log sum exp of a non-empty vector.
double logsumexp(const Eigen::Ref<const Vector>& v);

/// Eigenvalue floor: symmetrize A, clamp eigenvalues at eps from below.
/// When every eigenvalue is already >= eps the symmetrized input is returned
/// unchanged. eps must be positive.
SpdMatrix spd_floor(const Matrix& a, double eps);

/// mean + L z with z standard normal from the stream.
Vector sample_gaussian(const Eigen::Ref<const Vector>& mean, const SpdMatrix& cov,
                       RngStream& rng);

}  // namespace elkde
