#include "elkde/engmf.hpp"

#include <cmath>
#include <stdexcept>

namespace elkde {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<Vector> default_check_points(int state_dim) {
  RngStream rng(0x6a4c0b1d9e2f7735ULL, {static_cast<std::uint64_t>(state_dim)});
  std::vector<Vector> points;
  for (int k = 0; k < 5; ++k) {
    Vector x(state_dim);
    for (int i = 0; i < state_dim; ++i) {
      x[i] = rng.normal();
    }
    points.push_back(std::move(x));
  }
  return points;
}

}  // namespace

ObservationModel::ObservationModel(MapFn h, JacobianFn jacobian, SpdMatrix noise_cov,
                                   int state_dim, bool check_jacobian)
    : h_(std::move(h)),
      jacobian_(std::move(jacobian)),
      noise_(std::move(noise_cov)),
      state_dim_(state_dim) {
  if (state_dim_ < 1) {
    throw std::invalid_argument("ObservationModel: state_dim must be positive");
  }
  if (!h_ || !jacobian_) {
    throw std::invalid_argument("ObservationModel: h and jacobian are required");
  }
  if (check_jacobian) {
    validate_jacobian(default_check_points(state_dim_));
  }
}

void ObservationModel::validate_jacobian(const std::vector<Vector>& points,
                                         double tol) const {
  for (const Vector& x : points) {
    const Matrix jac = jacobian_(x);
    if (jac.rows() != obs_dim() || jac.cols() != state_dim_) {
      throw std::invalid_argument("ObservationModel: jacobian has wrong shape");
    }
    Matrix fd(obs_dim(), state_dim_);
    for (int c = 0; c < state_dim_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(x[c]));
      Vector hi = x, lo = x;
      hi[c] += step;
      lo[c] -= step;
      fd.col(c) = (h_(hi) - h_(lo)) / (2.0 * step);
    }
    const double scale = 1.0 + jac.cwiseAbs().maxCoeff();
    if ((fd - jac).cwiseAbs().maxCoeff() > tol * scale) {
      throw std::invalid_argument(
          "ObservationModel: jacobian disagrees with finite differences");
    }
  }
}

GaussianMixture engmf_update(const GaussianMixture& prior, const ObservationModel& obs,
                             const Vector& y, const EngmfUpdateOptions& options) {
  const int n = prior.dim();
  const int count = prior.size();
  const int m = obs.obs_dim();
  if (obs.state_dim() != n || y.size() != m) {
    throw std::invalid_argument("engmf_update: dimension mismatch");
  }

  Matrix posterior_means(n, count);
  std::vector<SpdMatrix> posterior_covs;
  posterior_covs.reserve(count);
  Vector log_v(count);
  const Matrix identity = Matrix::Identity(n, n);

  for (int j = 0; j < count; ++j) {
    const Vector x = prior.means().col(j);
    const Matrix& sigma = prior.covariances()[j].mat();
    const Matrix jac = obs.jacobian_at(x);
    const Matrix cross = sigma * jac.transpose();  // n x m
    Matrix innovation_cov = jac * cross + obs.noise().mat();
    innovation_cov = 0.5 * (innovation_cov + innovation_cov.transpose());

    Eigen::LLT<Matrix> llt(innovation_cov);
    if (llt.info() != Eigen::Success) {
      throw FactorizationError("engmf_update: innovation covariance not positive definite");
    }

    const Matrix gain = llt.solve(cross.transpose()).transpose();  // n x m
    const Vector residual = obs.observe(x) - y;
    posterior_means.col(j) = x - gain * residual;

    Matrix post_cov;
    if (options.joseph_form) {
      const Matrix t = identity - gain * jac;
      post_cov = t * sigma * t.transpose() +
                 gain * obs.noise().mat() * gain.transpose();
    } else {
      post_cov = (identity - gain * jac) * sigma;
    }
    posterior_covs.push_back(spd_floor(post_cov, options.covariance_floor));

    const Vector white = llt.matrixL().solve(residual);
    const double half_log_det = llt.matrixLLT().diagonal().array().log().sum();
    log_v[j] = std::log(prior.weights()[j]) - 0.5 * white.squaredNorm() -
               0.5 * m * kLog2Pi - half_log_det;
  }

  Vector v = (log_v.array() - logsumexp(log_v)).exp();
  v /= v.sum();
  return GaussianMixture(std::move(v), std::move(posterior_means),
                         std::move(posterior_covs));
}

FilterStepResult filter_step(const Ensemble& prior, const FilterMethod& method,
                             const ObservationModel& obs, const Vector& y,
                             RngStream& rng) {
  const GaussianMixture prior_gmm = std::visit(
      [&prior](const auto& m) -> GaussianMixture {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EngmfMethod>) {
          return build_ckde(prior, m.bw);
        } else if constexpr (std::is_same_v<T, AengmfMethod>) {
          return build_akde(prior, m.bw, m.akde);
        } else if constexpr (std::is_same_v<T, ElengmfMethod>) {
          return build_elkde(prior, m.bw, m.elkde);
        } else {
          throw std::invalid_argument(
              "filter_step: SIR is not a mixture method; use sir_step");
        }
      },
      method);
  GaussianMixture posterior = engmf_update(prior_gmm, obs, y);
  Ensemble resampled = posterior.sample(prior.size(), rng);
  return {std::move(resampled), std::move(posterior)};
}

Ensemble sir_step(const Ensemble& prior, const ObservationModel& obs, const Vector& y,
                  double rejuvenation_scale, RngStream& rng) {
  const int count = prior.size();
  const int n = prior.dim();
  if (count < 2) {
    throw InsufficientSamplesError("sir_step: need at least two particles");
  }
  if (rejuvenation_scale < 0.0) {
    throw std::invalid_argument("sir_step: rejuvenation scale must be nonnegative");
  }

  Vector log_w(count);
  for (int j = 0; j < count; ++j) {
    log_w[j] = log_gaussian(y, obs.observe(prior.states().col(j)), obs.noise());
  }
  const double lse = logsumexp(log_w);
  if (!std::isfinite(lse)) {
    throw DivergenceError("sir_step: all particle likelihoods vanished");
  }
  Vector w = (log_w.array() - lse).exp();
  w /= w.sum();

  // Systematic resampling: one uniform, stratified positions (k + u)/N.
  const double u = rng.uniform01();
  std::vector<int> picks(count);
  double cumulative = w[0];
  int j = 0;
  for (int k = 0; k < count; ++k) {
    const double target = (k + u) / count;
    while (cumulative < target && j + 1 < count) {
      ++j;
      cumulative += w[j];
    }
    picks[k] = j;
  }

  Matrix out(n, count);
  if (rejuvenation_scale > 0.0) {
    const double beta2 = silverman_bandwidth(n, count);
    const Matrix jitter_cov = rejuvenation_scale * rejuvenation_scale * beta2 *
                              sample_covariance(prior);
    SpdMatrix jitter = [&] {
      try {
        return SpdMatrix(jitter_cov);
      } catch (const FactorizationError&) {
        const double eps = 1e-12 * (1.0 + jitter_cov.trace() / n);
        return spd_floor(jitter_cov, eps);
      }
    }();
    for (int k = 0; k < count; ++k) {
      out.col(k) = sample_gaussian(prior.states().col(picks[k]), jitter, rng);
    }
  } else {
    for (int k = 0; k < count; ++k) {
      out.col(k) = prior.states().col(picks[k]);
    }
  }
  return Ensemble(std::move(out));
}

}  // namespace elkde
