#include "elkde/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace elkde {

EvalGrid EvalGrid::regular(Vector lower, Vector upper, Eigen::VectorXi points) {
  EvalGrid grid{std::move(lower), std::move(upper), std::move(points)};
  const int d = grid.dim();
  if (d < 1 || grid.upper.size() != d || grid.points.size() != d) {
    throw std::invalid_argument("EvalGrid: dimension mismatch");
  }
  for (int k = 0; k < d; ++k) {
    if (!(grid.lower[k] < grid.upper[k]) || !std::isfinite(grid.lower[k]) ||
        !std::isfinite(grid.upper[k])) {
      throw std::invalid_argument("EvalGrid: bounds must be finite with lower < upper");
    }
    if (grid.points[k] < 2) {
      throw std::invalid_argument("EvalGrid: need at least two cells per dimension");
    }
  }
  return grid;
}

long EvalGrid::total_cells() const {
  long total = 1;
  for (int k = 0; k < dim(); ++k) {
    total *= points[k];
  }
  return total;
}

double EvalGrid::cell_volume() const {
  double vol = 1.0;
  for (int k = 0; k < dim(); ++k) {
    vol *= (upper[k] - lower[k]) / points[k];
  }
  return vol;
}

Vector EvalGrid::cell_center(long flat_index) const {
  if (flat_index < 0 || flat_index >= total_cells()) {
    throw std::invalid_argument("EvalGrid: cell index out of range");
  }
  Vector center(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const long i = flat_index % points[k];
    flat_index /= points[k];
    center[k] = lower[k] + (i + 0.5) * (upper[k] - lower[k]) / points[k];
  }
  return center;
}

double ise_on_grid(const std::vector<double>& true_density,
                   const GaussianMixture& estimate, const EvalGrid& grid) {
  const long total = grid.total_cells();
  if (static_cast<long>(true_density.size()) != total) {
    throw std::invalid_argument("ise_on_grid: density values do not match the grid");
  }
  if (estimate.dim() != grid.dim()) {
    throw std::invalid_argument("ise_on_grid: dimension mismatch");
  }
  double acc = 0.0;
  for (long idx = 0; idx < total; ++idx) {
    const double p = true_density[idx];
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("ise_on_grid: density values must be finite and nonnegative");
    }
    const double q = std::exp(estimate.logpdf(grid.cell_center(idx)));
    acc += (p - q) * (p - q);
  }
  return acc * grid.cell_volume();
}

double rmse(const std::vector<RunRecord>& runs) {
  double acc = 0.0;
  long count = 0;
  for (const RunRecord& run : runs) {
    if (run.posterior_means.rows() != run.truths.rows() ||
        run.posterior_means.cols() != run.truths.cols()) {
      throw std::invalid_argument("rmse: record arrays have mismatched shapes");
    }
    acc += (run.posterior_means - run.truths).squaredNorm();
    count += static_cast<long>(run.truths.size());
  }
  if (count == 0) {
    throw InsufficientSamplesError("rmse: no recorded steps");
  }
  return std::sqrt(acc / static_cast<double>(count));
}

SneesResult snees(const std::vector<RunRecord>& runs, double discard_threshold) {
  double acc = 0.0;
  long kept = 0;
  long discarded = 0;
  int dim = 0;
  for (const RunRecord& run : runs) {
    dim = run.dim();
    if (static_cast<int>(run.posterior_covariances.size()) != run.steps()) {
      throw std::invalid_argument("snees: covariance count does not match steps");
    }
    for (int t = 0; t < run.steps(); ++t) {
      const Vector err = run.posterior_means.col(t) - run.truths.col(t);
      const Matrix& cov = run.posterior_covariances[t];
      const Matrix sym = 0.5 * (cov + cov.transpose());
      Eigen::LLT<Matrix> llt(sym);
      if (llt.info() != Eigen::Success) {
        ++discarded;
        continue;
      }
      const double term = err.dot(llt.solve(err));
      if (!std::isfinite(term) || term > discard_threshold) {
        ++discarded;
        continue;
      }
      acc += term;
      ++kept;
    }
  }
  if (kept == 0) {
    throw Error("snees: every term was discarded (threshold " +
                std::to_string(discard_threshold) + ", " +
                std::to_string(discarded) + " terms)");
  }
  SneesResult out;
  out.value = acc / (static_cast<double>(dim) * static_cast<double>(kept));
  out.discard_fraction =
      static_cast<double>(discarded) / static_cast<double>(kept + discarded);
  return out;
}

}  // namespace elkde
