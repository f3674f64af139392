#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "elkde/numstat.hpp"

namespace elkde {

/// Constant scaling applied on top of the Silverman bandwidth factor.
struct BandwidthSpec {
  double s_beta = 1.0;
};

/// Adaptive-KDE sensitivity exponent; by default 1/n at build time.
struct AkdeOptions {
  std::optional<double> alpha_exp{};
};

/// Projection that clamps the eigenvalues of the assembled local covariance.
struct NaiveProjection {
  double eps1 = 1e-4;
};

/// Projection that additionally clamps the eigenvalues of S_i - C before the
/// inversion, bounding the constituent term as well.
struct ConstituentProjection {
  double eps1 = 1e-4;
  double eps2 = 1e-2;
};

using SpdProjection = std::variant<NaiveProjection, ConstituentProjection>;

/// Tunables of the ensemble-localized estimator.
struct ElkdeOptions {
  double s_r = 1.0;            // localization radius scaling
  double alpha_nudge = 1e-4;   // weight-uniformity blend, in [0, 1)
  SpdProjection projection = ConstituentProjection{};
  std::optional<int> neighbor_index{};  // default: round-half-up(sqrt(N))
};

/// Gaussian mixture with per-component cached Cholesky factors.
class GaussianMixture {
 public:
  GaussianMixture(Vector weights, Matrix means, std::vector<SpdMatrix> covariances);

  int dim() const { return static_cast<int>(means_.rows()); }
  int size() const { return static_cast<int>(means_.cols()); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const std::vector<SpdMatrix>& covariances() const { return covariances_; }

  /// logsumexp over components of log w_j + log N(x; m_j, S_j).
  double logpdf(const Eigen::Ref<const Vector>& x) const;

  /// Draw count particles: categorical component index, then a Gaussian draw
  /// from that component. Deterministic under a fixed stream.
  Ensemble sample(int count, RngStream& rng) const;

  /// Mixture mean and covariance (law of total covariance).
  std::pair<Vector, Matrix> moments() const;

 private:
  Vector weights_;
  Vector log_weights_;
  Matrix means_;
  std::vector<SpdMatrix> covariances_;
  Vector log_norms_;  // 0.5 n log(2 pi) + half log det, per component
};

/// Silverman factor (4 / (N (n + 2)))^(2 / (n + 4)).
double silverman_bandwidth(int dim, int sample_count);

/// Canonical KDE: one shared bandwidth-scaled sample covariance.
GaussianMixture build_ckde(const Ensemble& ensemble, const BandwidthSpec& bw = {});

/// Adaptive KDE: per-particle scalar rescaling of the canonical covariance by
/// pilot-density ratios against their geometric mean.
GaussianMixture build_akde(const Ensemble& ensemble, const BandwidthSpec& bw = {},
                           const AkdeOptions& options = {});

/// Localization radius: s_r times the neighbor_index-th smallest distance from
/// particle i to the ensemble (1-based, self included), floored at
/// 1e-8 (1 + mean particle norm).
double local_radius(const Ensemble& ensemble, int i, const ElkdeOptions& options = {});

/// Importance of every particle for the local information around particle i,
/// softmax of log N(x_j; x_i, S_i) blended toward uniformity by alpha_nudge.
WeightVector local_weights(const Ensemble& ensemble, int i, const SpdMatrix& s_i,
                           double alpha_nudge);

/// The map C -> projection(C (S_i - C)^-1 S_i) that extends a conditional
/// covariance estimate around a particle into a global one.
SpdMatrix extend_local_covariance(const Matrix& conditional_cov, const SpdMatrix& s_i,
                                  const SpdProjection& projection);

/// Unscaled ensemble-localized covariance around particle i. Requires N >= 3.
SpdMatrix local_covariance(const Ensemble& ensemble, int i,
                           const ElkdeOptions& options = {});

/// Ensemble-localized KDE: per-particle covariances s_beta beta^2 Sigma_i.
GaussianMixture build_elkde(const Ensemble& ensemble, const BandwidthSpec& bw = {},
                            const ElkdeOptions& options = {});

}  // namespace elkde
