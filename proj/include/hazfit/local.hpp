#pragma once

#include <optional>
#include <vector>

#include "hazfit/defaults.hpp"
#include "hazfit/fit.hpp"
#include "hazfit/parallel.hpp"

namespace hazfit {

enum class Kernel { uniform_window, epanechnikov, gaussian_truncated };

struct LocalCurve {
  std::vector<double> grid;
  std::vector<std::optional<Vec>> estimates;  // absent where the window holds no usable data
  double bandwidth = 0.0;
  Kernel kernel = Kernel::uniform_window;
};

double kernel_value(Kernel k, double u, double h);  // support [-h, h]

std::vector<double> default_grid(double T, std::size_t points = defaults::kLocalGridPoints);

// At each grid point s, maximizes the likelihood weighted by K(s - u); the
// window is truncated to [s-h, s+h] with one-sided mass at the boundaries.
LocalCurve fit_local(const SurvivalDataset& ds, const HazardFamily& fam,
                     const std::vector<double>& grid, double h,
                     Kernel kernel = Kernel::uniform_window, const SolverOptions& opts = {},
                     Exec exec = Exec::parallel);

}  // namespace hazfit
