#pragma once

#include <vector>

#include "hazfit/fit.hpp"
#include "hazfit/parallel.hpp"

namespace hazfit {

// Eigenvalue floor used when sphering nearly singular covariance estimates.
inline constexpr double kSpheringEigenFloor = defaults::kSpheringEigenFloor;

struct InfluenceReport {
  std::vector<Vec> per_record;  // I_i = J^-1 L_i
  std::vector<Vec> sphered;     // Sigma^{-1/2} I_i
  std::vector<Vec> L_vectors;
  Mat sigma_hat;                // J^-1 K J^-1, equals the empirical covariance of I_i
};

InfluenceReport influence_empirical(const SurvivalDataset& ds, const HazardFamily& fam,
                                    const FitResult& fr, const TimeWeight& w = TimeWeight());

// Closed-form influence of the (weighted) ML functional at a single (x, delta):
// J^-1 [ W(x) psi(x, theta0) I{delta=1} - ∫_0^x W psi alpha ds ].
Vec influence_theoretical(const HazardFamily& fam, const Vec& theta0, const Mat& j,
                          double x, int delta, const TimeWeight& w = TimeWeight());

struct JackknifeResult {
  std::vector<Vec> jackknife;     // n (theta_hat - theta_hat_(i))
  std::vector<Vec> influence;     // I_i from the full fit
  std::vector<bool> refit_failed;
  double max_rel_deviation;       // infinity norm, scaled by the largest |I_i|
};

// Leave-one-out cross-check of the empirical influence values; first-order
// agreement only, reported as a diagnostic.
JackknifeResult jackknife_check(const SurvivalDataset& ds, const HazardFamily& fam,
                                const TimeWeight& w = TimeWeight(),
                                const SolverOptions& opts = {}, Exec exec = Exec::parallel);

}  // namespace hazfit
