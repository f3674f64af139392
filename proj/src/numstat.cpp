#include "elkde/numstat.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace elkde {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

// Symmetric eigendecomposition; the closed-form path covers the 2x2/3x3
// matrices that dominate this toolkit.
Eigen::SelfAdjointEigenSolver<Matrix> sym_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  if (a.rows() <= 3) {
    es.computeDirect(a);
  } else {
    es.compute(a);
  }
  if (es.info() != Eigen::Success) {
    throw FactorizationError("symmetric eigendecomposition failed");
  }
  return es;
}

}  // namespace

Ensemble::Ensemble(Matrix states) : states_(std::move(states)) {
  if (states_.rows() < 1 || states_.cols() < 1) {
    throw std::invalid_argument("Ensemble: need at least one particle and one dimension");
  }
  check_finite(states_, "Ensemble");
}

SpdMatrix::SpdMatrix(Matrix values) {
  if (values.rows() != values.cols() || values.rows() < 1) {
    throw std::invalid_argument("SpdMatrix: matrix must be square");
  }
  check_finite(values, "SpdMatrix");
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
  }
  values_ = 0.5 * (values + values.transpose());
  Eigen::LLT<Matrix> llt(values_);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("SpdMatrix: matrix is not positive definite");
  }
  chol_ = llt.matrixL();
  half_log_det_ = chol_.diagonal().array().log().sum();
  if (!std::isfinite(half_log_det_)) {
    throw FactorizationError("SpdMatrix: degenerate Cholesky factor");
  }
}

SpdMatrix SpdMatrix::identity(int dim) { return isotropic(dim, 1.0); }

SpdMatrix SpdMatrix::isotropic(int dim, double value) {
  if (dim < 1 || !(value > 0.0)) {
    throw std::invalid_argument("SpdMatrix::isotropic: need dim >= 1 and value > 0");
  }
  SpdMatrix out;
  out.values_ = value * Matrix::Identity(dim, dim);
  out.chol_ = std::sqrt(value) * Matrix::Identity(dim, dim);
  out.half_log_det_ = 0.5 * dim * std::log(value);
  return out;
}

SpdMatrix SpdMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("SpdMatrix::scaled: factor must be positive");
  }
  SpdMatrix out;
  out.values_ = factor * values_;
  out.chol_ = std::sqrt(factor) * chol_;
  out.half_log_det_ = half_log_det_ + 0.5 * dim() * std::log(factor);
  return out;
}

Matrix SpdMatrix::solve(const Matrix& rhs) const {
  Matrix y = chol_.triangularView<Eigen::Lower>().solve(rhs);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector SpdMatrix::solve(const Vector& rhs) const {
  Vector y = chol_.triangularView<Eigen::Lower>().solve(rhs);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  if (w_.size() < 1) {
    throw std::invalid_argument("WeightVector: empty");
  }
  if (!w_.allFinite() || w_.minCoeff() < 0.0) {
    throw std::invalid_argument("WeightVector: weights must be finite and nonnegative");
  }
  if (std::abs(w_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("WeightVector: weights must sum to one");
  }
}

Matrix sample_covariance(const Ensemble& ensemble) {
  const int n = ensemble.dim();
  const int count = ensemble.size();
  if (count < 2) {
    throw InsufficientSamplesError("sample_covariance: need at least two samples");
  }
  const Matrix centered = ensemble.states().colwise() - ensemble.states().rowwise().mean();
  Matrix cov = Matrix::Zero(n, n);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / (count - 1));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov;
}

Matrix weighted_covariance(const Ensemble& ensemble, const WeightVector& weights,
                           double tolerance) {
  const int n = ensemble.dim();
  if (weights.size() != ensemble.size()) {
    throw std::invalid_argument("weighted_covariance: weight count mismatch");
  }
  const Vector& w = weights.vec();
  const double wtw = w.squaredNorm();
  if (1.0 - wtw <= tolerance) {
    throw DegenerateWeightsError("weighted_covariance: weights are numerically degenerate");
  }
  const Vector mean = ensemble.states() * w;
  Matrix scaled = (ensemble.states().colwise() - mean).array().rowwise() *
                  w.array().sqrt().transpose();
  Matrix cov = Matrix::Zero(n, n);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0 / (1.0 - wtw));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov;
}

double log_gaussian(const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& mean, const SpdMatrix& cov) {
  if (x.size() != mean.size() || x.size() != cov.dim()) {
    throw std::invalid_argument("log_gaussian: dimension mismatch");
  }
  const Vector y = cov.chol().triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * y.squaredNorm() - 0.5 * cov.dim() * kLog2Pi - cov.half_log_det();
}

double logsumexp(const Eigen::Ref<const Vector>& v) {
  if (v.size() < 1) {
    throw std::invalid_argument("logsumexp: empty input");
  }
  const double vmax = v.maxCoeff();
  if (!std::isfinite(vmax)) {
    return vmax;  // all -inf stays -inf; +inf/NaN propagate
  }
  return vmax + std::log((v.array() - vmax).exp().sum());
}

SpdMatrix spd_floor(const Matrix& a, double eps) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("spd_floor: matrix must be square");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("spd_floor: eps must be positive");
  }
  check_finite(a, "spd_floor");
  const Matrix sym = 0.5 * (a + a.transpose());
  const auto es = sym_eigen(sym);
  if (es.eigenvalues().minCoeff() >= eps) {
    return SpdMatrix(sym);
  }
  const Vector clamped = es.eigenvalues().cwiseMax(eps);
  Matrix out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose());
  return SpdMatrix(out);
}

Vector sample_gaussian(const Eigen::Ref<const Vector>& mean, const SpdMatrix& cov,
                       RngStream& rng) {
  if (mean.size() != cov.dim()) {
    throw std::invalid_argument("sample_gaussian: dimension mismatch");
  }
  Vector z(cov.dim());
  for (int i = 0; i < cov.dim(); ++i) {
    z[i] = rng.normal();
  }
  return mean + cov.chol().triangularView<Eigen::Lower>() * z;
}

}  // namespace elkde
