#pragma once

#include <vector>

#include "elkde/kde.hpp"
#include "elkde/numstat.hpp"

namespace elkde {

/// Regular evaluation grid of cell midpoints; cells are enumerated row-major
/// (first dimension slowest).
struct EvalGrid {
  Vector lower;
  Vector upper;
  Eigen::VectorXi points;  // cells per dimension

  static EvalGrid regular(Vector lower, Vector upper, Eigen::VectorXi points);

  int dim() const { return static_cast<int>(lower.size()); }
  long total_cells() const;
  double cell_volume() const;
  Vector cell_center(long flat_index) const;
};

/// One Monte Carlo run's per-step posterior mean, posterior global covariance
/// and truth, with spinup steps already removed.
struct RunRecord {
  Matrix posterior_means;                    // n x steps
  Matrix truths;                             // n x steps
  std::vector<Matrix> posterior_covariances; // steps entries, n x n
  int spinup_discarded = 0;

  int steps() const { return static_cast<int>(truths.cols()); }
  int dim() const { return static_cast<int>(truths.rows()); }
};

/// Discrete integral of the squared density error over the grid cells.
double ise_on_grid(const std::vector<double>& true_density,
                   const GaussianMixture& estimate, const EvalGrid& grid);

/// Spatio-temporal root mean squared error pooled over all records.
double rmse(const std::vector<RunRecord>& runs);

struct SneesResult {
  double value = 0.0;
  double discard_fraction = 0.0;
};

/// Scaled normalized estimation error squared with outlier discard: terms
/// e' S^-1 e above discard_threshold (or with failed factorizations) are
/// removed from both the sum and the count.
SneesResult snees(const std::vector<RunRecord>& runs, double discard_threshold = 100.0);

}  // namespace elkde
