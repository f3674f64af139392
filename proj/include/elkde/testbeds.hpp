#pragma once

#include <utility>
#include <vector>

#include "elkde/engmf.hpp"
#include "elkde/numstat.hpp"

namespace elkde {

/// Lorenz '63 assimilation setup: inference interval, integrator substep,
/// range-observation center and noise variance.
struct Lorenz63Config {
  double dt_assim = 0.5;
  double substep = 0.005;
  double r_obs = 1.0;
  Vector center = default_center();

  static Vector default_center();  // (6 sqrt2, 6 sqrt2, 27), a wing equilibrium
};

/// Right-hand side of the Lorenz '63 equations (sigma 10, rho 28, beta 8/3).
Vector lorenz63_rhs(const Eigen::Ref<const Vector>& x);

/// Classical fixed-step RK4 over an integer number of substeps.
/// Throws DivergenceError when the state stops being finite.
Vector propagate(const Eigen::Ref<const Vector>& x0, double duration, double substep);

/// RK4 applied column-wise to a whole ensemble at once.
Matrix propagate_ensemble(const Eigen::Ref<const Matrix>& states, double duration,
                          double substep);

/// Scalar range observation h(x) = |x - center| with analytic Jacobian.
ObservationModel range_observation(const Vector& center, double r_obs = 1.0);

/// Continuous Gaussian mixture whose means trace a Fermat spiral over
/// z in [0, 4 pi], each mode isotropic with variance sigma2.
struct SpiralDistribution {
  double sigma2 = 1.0 / 256.0;
  int quadrature_points = 10000;
};

constexpr double kSpiralZMax = 4.0 * 3.14159265358979323846;

/// Spiral mean path (3/2) sqrt(z) (cos z, sin z).
Vector spiral_mean(double z);

/// Exact draw: z uniform on [0, 4 pi], then the mode's Gaussian.
Vector spiral_sample(const SpiralDistribution& dist, RngStream& rng);
Ensemble spiral_sample_ensemble(const SpiralDistribution& dist, int count,
                                RngStream& rng);

/// Midpoint-rule density of the spiral distribution with a precomputed
/// quadrature table; use this when evaluating on many points.
class SpiralDensity {
 public:
  explicit SpiralDensity(const SpiralDistribution& dist);

  double logpdf(const Eigen::Ref<const Vector>& x) const;
  double pdf(const Eigen::Ref<const Vector>& x) const;

 private:
  std::vector<double> mean_x_, mean_y_;
  double sigma2_;
  double log_norm_;  // log(Q) + log(2 pi sigma2)
};

double spiral_logpdf(const SpiralDistribution& dist, const Eigen::Ref<const Vector>& x);
double spiral_pdf(const SpiralDistribution& dist, const Eigen::Ref<const Vector>& x);

/// Closed-form mean and covariance (Fresnel integrals at 2 sqrt 2).
std::pair<Vector, Matrix> spiral_moments(const SpiralDistribution& dist = {});

/// Equal-weight two-mode bivariate Gaussian mixture with identical local
/// covariance [[1, rho], [rho, 1]] and means (0, +-upsilon).
struct GM2Distribution {
  double rho = 0.0;
  double upsilon = 0.0;
};

GaussianMixture gm2_mixture(const GM2Distribution& dist);
double gm2_pdf(const GM2Distribution& dist, const Eigen::Ref<const Vector>& x);
Vector gm2_sample(const GM2Distribution& dist, RngStream& rng);
Ensemble gm2_sample_ensemble(const GM2Distribution& dist, int count, RngStream& rng);
/// [[1, rho], [rho, 1 + upsilon^2]].
Matrix gm2_global_cov(const GM2Distribution& dist);
/// Unit dominant eigenvector of the global covariance; (0, 1) when rho = 0.
Vector gm2_dominant_eigenvector(const GM2Distribution& dist);

}  // namespace elkde
