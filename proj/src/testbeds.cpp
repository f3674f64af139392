#include "elkde/testbeds.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "elkde/fresnel.hpp"

namespace elkde {

namespace {

constexpr double kPi = 3.14159265358979323846;

long substep_count(double duration, double substep) {
  if (duration < 0.0 || !(substep > 0.0)) {
    throw std::invalid_argument("propagate: need duration >= 0 and substep > 0");
  }
  const long steps = std::lround(duration / substep);
  if (std::abs(steps * substep - duration) > 1e-9 * std::max(1.0, duration)) {
    throw std::invalid_argument("propagate: substep must divide the duration");
  }
  return steps;
}

inline void lorenz_rhs_inplace(const Matrix& x, Matrix& out) {
  out.row(0) = 10.0 * (x.row(1) - x.row(0));
  out.row(1) =
      (x.row(0).array() * (28.0 - x.row(2).array()) - x.row(1).array()).matrix();
  out.row(2) = x.row(0).cwiseProduct(x.row(1)) - (8.0 / 3.0) * x.row(2);
}

}  // namespace

Vector Lorenz63Config::default_center() {
  Vector c(3);
  c << 6.0 * std::sqrt(2.0), 6.0 * std::sqrt(2.0), 27.0;
  return c;
}

Vector lorenz63_rhs(const Eigen::Ref<const Vector>& x) {
  if (x.size() != 3) {
    throw std::invalid_argument("lorenz63_rhs: state must be 3-dimensional");
  }
  Vector out(3);
  out[0] = 10.0 * (x[1] - x[0]);
  out[1] = x[0] * (28.0 - x[2]) - x[1];
  out[2] = x[0] * x[1] - (8.0 / 3.0) * x[2];
  return out;
}

Matrix propagate_ensemble(const Eigen::Ref<const Matrix>& states, double duration,
                          double substep) {
  if (states.rows() != 3) {
    throw std::invalid_argument("propagate_ensemble: states must be 3 x N");
  }
  const long steps = substep_count(duration, substep);
  Matrix x = states;
  const long cols = states.cols();
  Matrix k1(3, cols), k2(3, cols), k3(3, cols), k4(3, cols), stage(3, cols);
  const double h = substep;
  for (long s = 0; s < steps; ++s) {
    lorenz_rhs_inplace(x, k1);
    stage = x + (0.5 * h) * k1;
    lorenz_rhs_inplace(stage, k2);
    stage = x + (0.5 * h) * k2;
    lorenz_rhs_inplace(stage, k3);
    stage = x + h * k3;
    lorenz_rhs_inplace(stage, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw DivergenceError("propagate: trajectory left the finite range at substep " +
                            std::to_string(s));
    }
  }
  return x;
}

Vector propagate(const Eigen::Ref<const Vector>& x0, double duration, double substep) {
  return propagate_ensemble(x0, duration, substep).col(0);
}

ObservationModel range_observation(const Vector& center, double r_obs) {
  if (!(r_obs > 0.0)) {
    throw std::invalid_argument("range_observation: r_obs must be positive");
  }
  const Vector c = center;
  const double floor = 1e-8 * (1.0 + c.norm());
  auto h = [c](const Vector& x) {
    Vector out(1);
    out[0] = (x - c).norm();
    return out;
  };
  auto jac = [c, floor](const Vector& x) {
    Vector d = x - c;
    double norm = d.norm();
    if (norm < floor) {
      // Observation center is a gradient singularity; nudge off it.
      std::cerr << "elkde: range_observation jacobian evaluated at the center; "
                   "perturbing by the radius floor\n";
      d[0] += floor;
      norm = d.norm();
    }
    return Matrix(d.transpose() / norm);
  };
  return ObservationModel(std::move(h), std::move(jac),
                          SpdMatrix::isotropic(1, r_obs),
                          static_cast<int>(center.size()));
}

Vector spiral_mean(double z) {
  if (z < -1e-12 || z > kSpiralZMax + 1e-12) {
    throw std::invalid_argument("spiral_mean: z outside [0, 4 pi]");
  }
  Vector out(2);
  const double amp = 1.5 * std::sqrt(std::max(z, 0.0));
  out[0] = amp * std::cos(z);
  out[1] = amp * std::sin(z);
  return out;
}

Vector spiral_sample(const SpiralDistribution& dist, RngStream& rng) {
  const double z = kSpiralZMax * rng.uniform01();
  const double sigma = std::sqrt(dist.sigma2);
  Vector out = spiral_mean(z);
  out[0] += sigma * rng.normal();
  out[1] += sigma * rng.normal();
  return out;
}

Ensemble spiral_sample_ensemble(const SpiralDistribution& dist, int count,
                                RngStream& rng) {
  if (count < 1) {
    throw std::invalid_argument("spiral_sample_ensemble: count must be positive");
  }
  Matrix states(2, count);
  for (int k = 0; k < count; ++k) {
    states.col(k) = spiral_sample(dist, rng);
  }
  return Ensemble(std::move(states));
}

SpiralDensity::SpiralDensity(const SpiralDistribution& dist) : sigma2_(dist.sigma2) {
  if (!(dist.sigma2 > 0.0) || dist.quadrature_points < 2) {
    throw std::invalid_argument("SpiralDensity: need sigma2 > 0 and quadrature_points >= 2");
  }
  const int q = dist.quadrature_points;
  mean_x_.resize(q);
  mean_y_.resize(q);
  for (int k = 0; k < q; ++k) {
    const double z = (k + 0.5) * kSpiralZMax / q;  // midpoint rule
    const double amp = 1.5 * std::sqrt(z);
    mean_x_[k] = amp * std::cos(z);
    mean_y_[k] = amp * std::sin(z);
  }
  log_norm_ = std::log(static_cast<double>(q)) + std::log(2.0 * kPi * sigma2_);
}

double SpiralDensity::logpdf(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != 2) {
    throw std::invalid_argument("SpiralDensity: point must be 2-dimensional");
  }
  const double px = x[0], py = x[1];
  const double inv2s = 0.5 / sigma2_;
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  const std::size_t q = mean_x_.size();
  for (std::size_t k = 0; k < q; ++k) {
    const double dx = px - mean_x_[k];
    const double dy = py - mean_y_[k];
    const double a = -(dx * dx + dy * dy) * inv2s;
    if (a <= run_max) {
      if (a > run_max - 46.0) {
        run_sum += std::exp(a - run_max);
      }
    } else {
      run_sum = run_sum * std::exp(run_max - a) + 1.0;
      run_max = a;
    }
  }
  return run_max + std::log(run_sum) - log_norm_;
}

double SpiralDensity::pdf(const Eigen::Ref<const Vector>& x) const {
  return std::exp(logpdf(x));
}

double spiral_logpdf(const SpiralDistribution& dist, const Eigen::Ref<const Vector>& x) {
  return SpiralDensity(dist).logpdf(x);
}

double spiral_pdf(const SpiralDistribution& dist, const Eigen::Ref<const Vector>& x) {
  return SpiralDensity(dist).pdf(x);
}

std::pair<Vector, Matrix> spiral_moments(const SpiralDistribution& dist) {
  const double root2 = std::sqrt(2.0);
  const FresnelResult f = fresnel(2.0 * root2);
  const double s = f.s, c = f.c;

  Vector mean(2);
  const double scale = 3.0 / (8.0 * std::sqrt(2.0 * kPi));
  mean[0] = -scale * s;
  mean[1] = scale * (c - 2.0 * root2);

  Matrix cov(2, 2);
  cov(0, 0) = 9.0 * kPi / 4.0 - 9.0 * s * s / (128.0 * kPi) + dist.sigma2;
  cov(1, 0) = -9.0 * ((2.0 * root2 - c) * s + 8.0 * kPi) / (128.0 * kPi);
  cov(0, 1) = cov(1, 0);
  cov(1, 1) = 9.0 * (4.0 * root2 * c - c * c - 8.0 + 32.0 * kPi * kPi) / (128.0 * kPi) +
              dist.sigma2;
  return {mean, cov};
}

GaussianMixture gm2_mixture(const GM2Distribution& dist) {
  if (std::abs(dist.rho) >= 1.0 || dist.upsilon < 0.0) {
    throw std::invalid_argument("gm2_mixture: need |rho| < 1 and upsilon >= 0");
  }
  Matrix local(2, 2);
  local << 1.0, dist.rho, dist.rho, 1.0;
  Matrix means(2, 2);
  means << 0.0, 0.0, dist.upsilon, -dist.upsilon;
  Vector weights(2);
  weights << 0.5, 0.5;
  return GaussianMixture(weights, means, {SpdMatrix(local), SpdMatrix(local)});
}

double gm2_pdf(const GM2Distribution& dist, const Eigen::Ref<const Vector>& x) {
  return std::exp(gm2_mixture(dist).logpdf(x));
}

Vector gm2_sample(const GM2Distribution& dist, RngStream& rng) {
  return gm2_mixture(dist).sample(1, rng).states().col(0);
}

Ensemble gm2_sample_ensemble(const GM2Distribution& dist, int count, RngStream& rng) {
  return gm2_mixture(dist).sample(count, rng);
}

Matrix gm2_global_cov(const GM2Distribution& dist) {
  Matrix out(2, 2);
  out << 1.0, dist.rho, dist.rho, 1.0 + dist.upsilon * dist.upsilon;
  return out;
}

Vector gm2_dominant_eigenvector(const GM2Distribution& dist) {
  Vector v(2);
  if (dist.rho == 0.0) {
    v << 0.0, 1.0;
    return v;
  }
  const double u2 = dist.upsilon * dist.upsilon;
  v << (-u2 + std::sqrt(u2 * u2 + 4.0 * dist.rho * dist.rho)) / (2.0 * dist.rho), 1.0;
  return v / v.norm();
}

}  // namespace elkde
