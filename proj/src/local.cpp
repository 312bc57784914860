#include "hazfit/local.hpp"

#include <cmath>

#include "hazfit/errors.hpp"

namespace hazfit {

double kernel_value(Kernel k, double u, double h) {
  const double v = u / h;
  if (v < -1.0 || v > 1.0) return 0.0;
  switch (k) {
    case Kernel::uniform_window:
      return 1.0;
    case Kernel::epanechnikov:
      return 1.0 - v * v;
    case Kernel::gaussian_truncated:
      return std::exp(-4.5 * v * v);  // sigma = h/3, clipped at three sigma
  }
  return 0.0;
}

std::vector<double> default_grid(double T, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = T * static_cast<double>(i + 1) / static_cast<double>(points + 1);
  return g;
}

LocalCurve fit_local(const SurvivalDataset& ds, const HazardFamily& fam,
                     const std::vector<double>& grid, double h, Kernel kernel,
                     const SolverOptions& opts, Exec exec) {
  if (!(h > 0.0)) throw ValidationError("bandwidth must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("grid must be strictly increasing");
  if (!grid.empty() && (grid.front() < 0.0 || grid.back() > ds.horizon()))
    throw ValidationError("grid must lie within [0, horizon]");

  LocalCurve curve;
  curve.grid = grid;
  curve.estimates.assign(grid.size(), std::nullopt);
  curve.bandwidth = h;
  curve.kernel = kernel;

  parallel_for(grid.size(), exec, [&](std::size_t g) {
    const double s = grid[g];
    const double lo = s - h, hi = s + h;
    TimeWeight w = [&]() {
      if (kernel == Kernel::uniform_window) {
        StepFn step;
        step.knots = {std::max(lo, 0.0), hi};
        step.values = {0.0, 1.0, 0.0};
        if (lo <= 0.0) {
          step.knots = {hi};
          step.values = {1.0, 0.0};
        }
        return TimeWeight(std::move(step), "uniform window");
      }
      return TimeWeight([kernel, s, h](double u) { return kernel_value(kernel, s - u, h); },
                        {std::max(lo, 0.0), hi}, std::max(lo, 0.0), hi, "kernel window");
    }();
    try {
      const FitResult fr = fit_ml(ds, fam, w, std::nullopt, opts);
      curve.estimates[g] = fr.theta_hat;
    } catch (const Error&) {
      // window without exposure or events: no estimate at this grid point
    }
  });
  return curve;
}

}  // namespace hazfit
