#include "elkde/kde.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace elkde {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

int default_neighbor_index(int sample_count) {
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(sample_count)) + 0.5));
}

// Squared Mahalanobis norm of (x - m) through a lower Cholesky factor.
// Stack-based forward substitution for the small dimensions this toolkit
// works in; falls back to Eigen above that.
double mahalanobis_sq(const Eigen::Ref<const Vector>& x, const Matrix& means, int j,
                      const Matrix& chol) {
  const int n = static_cast<int>(x.size());
  if (n <= 8) {
    double y[8];
    double q = 0.0;
    for (int r = 0; r < n; ++r) {
      double s = x[r] - means(r, j);
      for (int c = 0; c < r; ++c) {
        s -= chol(r, c) * y[c];
      }
      y[r] = s / chol(r, r);
      q += y[r] * y[r];
    }
    return q;
  }
  Vector d = x - means.col(j);
  chol.triangularView<Eigen::Lower>().solveInPlace(d);
  return d.squaredNorm();
}

// Shared covariance for the canonical estimate, with the rank-deficiency
// fallback floor 1e-12 trace / n.
SpdMatrix make_component_covariance(const Matrix& cov) {
  try {
    return SpdMatrix(cov);
  } catch (const FactorizationError&) {
    const double eps = 1e-12 * cov.trace() / static_cast<double>(cov.rows());
    return spd_floor(cov, eps);
  }
}

// Log-density of the canonical estimate at every particle, batched per
// evaluation point; all components share one factor.
Vector ckde_logpdf_at_particles(const Matrix& states, const SpdMatrix& component_cov) {
  const int n = static_cast<int>(states.rows());
  const int count = static_cast<int>(states.cols());
  const double log_norm = 0.5 * n * kLog2Pi + component_cov.half_log_det();
  Vector out(count);
  Matrix diffs(n, count);
  Vector a(count);
  for (int i = 0; i < count; ++i) {
    diffs = states.colwise() - states.col(i);
    component_cov.chol().triangularView<Eigen::Lower>().solveInPlace(diffs);
    a = -0.5 * diffs.colwise().squaredNorm().transpose().array() - log_norm;
    out[i] = logsumexp(a) - std::log(static_cast<double>(count));
  }
  return out;
}

}  // namespace

GaussianMixture::GaussianMixture(Vector weights, Matrix means,
                                 std::vector<SpdMatrix> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covariances_(std::move(covariances)) {
  const int count = static_cast<int>(weights_.size());
  if (count < 1) {
    throw std::invalid_argument("GaussianMixture: need at least one component");
  }
  if (means_.cols() != count || static_cast<int>(covariances_.size()) != count) {
    throw std::invalid_argument("GaussianMixture: component count mismatch");
  }
  if (!weights_.allFinite() || weights_.minCoeff() < 0.0 ||
      std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("GaussianMixture: weights must be a simplex vector");
  }
  const int n = dim();
  log_weights_.resize(count);
  log_norms_.resize(count);
  for (int j = 0; j < count; ++j) {
    if (covariances_[j].dim() != n) {
      throw std::invalid_argument("GaussianMixture: covariance dimension mismatch");
    }
    log_weights_[j] = std::log(weights_[j]);
    log_norms_[j] = 0.5 * n * kLog2Pi + covariances_[j].half_log_det();
  }
}

double GaussianMixture::logpdf(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("GaussianMixture::logpdf: dimension mismatch");
  }
  // Online logsumexp over components.
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  for (int j = 0; j < size(); ++j) {
    if (weights_[j] == 0.0) {
      continue;
    }
    const double q = mahalanobis_sq(x, means_, j, covariances_[j].chol());
    const double a = log_weights_[j] - 0.5 * q - log_norms_[j];
    if (a <= run_max) {
      if (a > run_max - 46.0) {  // below that exp() cannot affect the sum
        run_sum += std::exp(a - run_max);
      }
    } else {
      run_sum = run_sum * std::exp(run_max - a) + 1.0;
      run_max = a;
    }
  }
  return run_max + std::log(run_sum);
}

Ensemble GaussianMixture::sample(int count, RngStream& rng) const {
  if (count < 1) {
    throw std::invalid_argument("GaussianMixture::sample: count must be positive");
  }
  Vector cumulative(size());
  double acc = 0.0;
  for (int j = 0; j < size(); ++j) {
    acc += weights_[j];
    cumulative[j] = acc;
  }
  Matrix out(dim(), count);
  for (int k = 0; k < count; ++k) {
    const double u = rng.uniform01();
    const double* begin = cumulative.data();
    const double* end = begin + size();
    int j = static_cast<int>(std::upper_bound(begin, end, u) - begin);
    if (j >= size()) {
      j = size() - 1;  // cumulative rounding guard
    }
    out.col(k) = sample_gaussian(means_.col(j), covariances_[j], rng);
  }
  return Ensemble(std::move(out));
}

std::pair<Vector, Matrix> GaussianMixture::moments() const {
  const Vector mean = means_ * weights_;
  Matrix cov = Matrix::Zero(dim(), dim());
  for (int j = 0; j < size(); ++j) {
    const Vector d = means_.col(j) - mean;
    cov += weights_[j] * (covariances_[j].mat() + d * d.transpose());
  }
  cov = 0.5 * (cov + cov.transpose());
  return {mean, cov};
}

double silverman_bandwidth(int dim, int sample_count) {
  if (dim < 1 || sample_count < 1) {
    throw std::invalid_argument("silverman_bandwidth: need dim >= 1 and N >= 1");
  }
  const double n = static_cast<double>(dim);
  return std::pow(4.0 / (sample_count * (n + 2.0)), 2.0 / (n + 4.0));
}

GaussianMixture build_ckde(const Ensemble& ensemble, const BandwidthSpec& bw) {
  if (!(bw.s_beta > 0.0)) {
    throw std::invalid_argument("build_ckde: s_beta must be positive");
  }
  if (ensemble.size() < 2) {
    throw InsufficientSamplesError("build_ckde: need at least two particles");
  }
  const Matrix cov = sample_covariance(ensemble);
  if (cov.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateEnsembleError("build_ckde: all particles identical");
  }
  const double beta2 =
      bw.s_beta * silverman_bandwidth(ensemble.dim(), ensemble.size());
  const SpdMatrix component = make_component_covariance(beta2 * cov);
  const int count = ensemble.size();
  return GaussianMixture(Vector::Constant(count, 1.0 / count), ensemble.states(),
                         std::vector<SpdMatrix>(count, component));
}

GaussianMixture build_akde(const Ensemble& ensemble, const BandwidthSpec& bw,
                           const AkdeOptions& options) {
  GaussianMixture pilot = build_ckde(ensemble, bw);
  const double alpha = options.alpha_exp.value_or(1.0 / ensemble.dim());
  if (alpha < 0.0) {
    throw std::invalid_argument("build_akde: alpha_exp must be nonnegative");
  }
  const Vector log_pilot = ckde_logpdf_at_particles(ensemble.states(), pilot.covariances()[0]);
  if (!log_pilot.allFinite()) {
    throw DegenerateEnsembleError("build_akde: pilot density vanished at a particle");
  }
  const double log_g = log_pilot.mean();
  const int count = ensemble.size();
  std::vector<SpdMatrix> covariances;
  covariances.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double lambda = std::exp(-alpha * (log_pilot[i] - log_g));
    covariances.push_back(pilot.covariances()[0].scaled(lambda * lambda));
  }
  return GaussianMixture(Vector::Constant(count, 1.0 / count), ensemble.states(),
                         std::move(covariances));
}

double local_radius(const Ensemble& ensemble, int i, const ElkdeOptions& options) {
  const int count = ensemble.size();
  if (count < 2) {
    throw InsufficientSamplesError("local_radius: need at least two particles");
  }
  if (i < 0 || i >= count) {
    throw std::invalid_argument("local_radius: particle index out of range");
  }
  if (!(options.s_r > 0.0)) {
    throw std::invalid_argument("local_radius: s_r must be positive");
  }
  const int k = options.neighbor_index.value_or(default_neighbor_index(count));
  if (k < 1 || k > count) {
    throw std::invalid_argument("local_radius: neighbor_index out of range");
  }
  const Matrix& states = ensemble.states();
  std::vector<double> sq_dists(count);
  for (int j = 0; j < count; ++j) {
    sq_dists[j] = (states.col(j) - states.col(i)).squaredNorm();
  }
  std::nth_element(sq_dists.begin(), sq_dists.begin() + (k - 1), sq_dists.end());
  const double radius = options.s_r * std::sqrt(sq_dists[k - 1]);
  const double floor = 1e-8 * (1.0 + states.colwise().norm().mean());
  return std::max(radius, floor);
}

WeightVector local_weights(const Ensemble& ensemble, int i, const SpdMatrix& s_i,
                           double alpha_nudge) {
  const int count = ensemble.size();
  if (i < 0 || i >= count) {
    throw std::invalid_argument("local_weights: particle index out of range");
  }
  if (s_i.dim() != ensemble.dim()) {
    throw std::invalid_argument("local_weights: dimension mismatch");
  }
  if (alpha_nudge < 0.0 || alpha_nudge >= 1.0) {
    throw std::invalid_argument("local_weights: alpha_nudge must be in [0, 1)");
  }
  Matrix diffs = ensemble.states().colwise() - ensemble.states().col(i);
  s_i.chol().triangularView<Eigen::Lower>().solveInPlace(diffs);
  const double log_norm = 0.5 * ensemble.dim() * kLog2Pi + s_i.half_log_det();
  Vector a = (-0.5 * diffs.colwise().squaredNorm().transpose().array() - log_norm).matrix();
  Vector w = (a.array() - logsumexp(a)).exp();
  w /= w.sum();
  w = (1.0 - alpha_nudge) * w + Vector::Constant(count, alpha_nudge / count);
  return WeightVector(std::move(w));
}

SpdMatrix extend_local_covariance(const Matrix& conditional_cov, const SpdMatrix& s_i,
                                  const SpdProjection& projection) {
  const int n = s_i.dim();
  if (conditional_cov.rows() != n || conditional_cov.cols() != n) {
    throw std::invalid_argument("extend_local_covariance: dimension mismatch");
  }
  Matrix assembled;
  double eps1 = 0.0;
  if (const auto* naive = std::get_if<NaiveProjection>(&projection)) {
    eps1 = naive->eps1;
    const Matrix gap = s_i.mat() - conditional_cov;
    assembled = conditional_cov * gap.fullPivLu().solve(s_i.mat());
  } else {
    const auto& constituent = std::get<ConstituentProjection>(projection);
    eps1 = constituent.eps1;
    const SpdMatrix gap = spd_floor(s_i.mat() - conditional_cov, constituent.eps2);
    assembled = conditional_cov * gap.solve(s_i.mat());
  }
  if (!assembled.allFinite()) {
    throw FactorizationError("extend_local_covariance: singular S_i - C");
  }
  assembled = 0.5 * (assembled + assembled.transpose());
  return spd_floor(assembled, eps1);
}

SpdMatrix local_covariance(const Ensemble& ensemble, int i, const ElkdeOptions& options) {
  if (ensemble.size() < 3) {
    throw InsufficientSamplesError("local_covariance: need at least three particles");
  }
  const double radius = local_radius(ensemble, i, options);
  const SpdMatrix s_i = SpdMatrix::isotropic(ensemble.dim(), radius * radius);
  const WeightVector weights = local_weights(ensemble, i, s_i, options.alpha_nudge);
  const Matrix conditional = weighted_covariance(ensemble, weights);
  return extend_local_covariance(conditional, s_i, options.projection);
}

GaussianMixture build_elkde(const Ensemble& ensemble, const BandwidthSpec& bw,
                            const ElkdeOptions& options) {
  if (!(bw.s_beta > 0.0)) {
    throw std::invalid_argument("build_elkde: s_beta must be positive");
  }
  if (ensemble.size() < 3) {
    throw InsufficientSamplesError("build_elkde: need at least three particles");
  }
  const double beta2 =
      bw.s_beta * silverman_bandwidth(ensemble.dim(), ensemble.size());
  const int count = ensemble.size();
  std::vector<SpdMatrix> covariances;
  covariances.reserve(count);
  for (int i = 0; i < count; ++i) {
    covariances.push_back(local_covariance(ensemble, i, options).scaled(beta2));
  }
  return GaussianMixture(Vector::Constant(count, 1.0 / count), ensemble.states(),
                         std::move(covariances));
}

}  // namespace elkde
