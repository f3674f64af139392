#pragma once

#include <functional>
#include <utility>
#include <variant>

#include "elkde/kde.hpp"
#include "elkde/numstat.hpp"

namespace elkde {

/// Nonlinear observation y = h(x) + eta, eta ~ N(0, R), with a user-supplied
/// analytic Jacobian. By default the Jacobian is validated against central
/// finite differences of h at a handful of standard-normal test points.
class ObservationModel {
 public:
  using MapFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  ObservationModel(MapFn h, JacobianFn jacobian, SpdMatrix noise_cov, int state_dim,
                   bool check_jacobian = true);

  Vector observe(const Vector& x) const { return h_(x); }
  Matrix jacobian_at(const Vector& x) const { return jacobian_(x); }
  const SpdMatrix& noise() const { return noise_; }
  int state_dim() const { return state_dim_; }
  int obs_dim() const { return noise_.dim(); }

  /// Central-difference check of the Jacobian; throws std::invalid_argument
  /// when the relative error exceeds tol at any test point.
  void validate_jacobian(const std::vector<Vector>& points, double tol = 1e-5) const;

 private:
  MapFn h_;
  JacobianFn jacobian_;
  SpdMatrix noise_;
  int state_dim_;
};

struct EngmfUpdateOptions {
  bool joseph_form = false;       // robust covariance update, off by default
  double covariance_floor = 1e-12;
};

/// Component-wise Kalman-style update of a Gaussian-mixture prior under a
/// linearized observation; returns the posterior mixture with weights
/// proportional to component likelihoods (normalized in the log domain).
GaussianMixture engmf_update(const GaussianMixture& prior, const ObservationModel& obs,
                             const Vector& y, const EngmfUpdateOptions& options = {});

struct EngmfMethod {
  BandwidthSpec bw{};
};
struct AengmfMethod {
  BandwidthSpec bw{};
  AkdeOptions akde{};
};
struct ElengmfMethod {
  BandwidthSpec bw{};
  ElkdeOptions elkde{};
};
struct SirMethod {
  double rejuvenation_scale = 1.0;
};

using FilterMethod = std::variant<EngmfMethod, AengmfMethod, ElengmfMethod, SirMethod>;

struct FilterStepResult {
  Ensemble posterior_ensemble;
  GaussianMixture posterior;
};

/// One assimilation step of a mixture-based filter: density estimation with
/// the method's KDE, mixture update, posterior resampling. SIR is not a
/// mixture method; use sir_step.
FilterStepResult filter_step(const Ensemble& prior, const FilterMethod& method,
                             const ObservationModel& obs, const Vector& y,
                             RngStream& rng);

/// Bootstrap particle-filter step: likelihood weighting, systematic
/// resampling, Gaussian rejuvenation with covariance
/// tau^2 beta_N^2 sample_covariance(prior).
Ensemble sir_step(const Ensemble& prior, const ObservationModel& obs, const Vector& y,
                  double rejuvenation_scale, RngStream& rng);

}  // namespace elkde
