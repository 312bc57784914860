#pragma once

#include <cstddef>

namespace hazfit::defaults {

// One place for every tunable default; the README documents this table.

inline constexpr double kSolverTol = 1e-9;        // ||score||_inf at convergence
inline constexpr int kSolverMaxIter = 100;
inline constexpr double kQuadTol = 1e-10;         // relative quadrature tolerance
inline constexpr double kWeightFloor = 1e-8;      // floor under inverse-weight denominators
inline constexpr double kSpheringEigenFloor = 1e-12;
inline constexpr double kCoxSeparationBound = 50.0;  // ||beta|| divergence declaration
inline constexpr int kBootstrapB = 1000;
inline constexpr std::size_t kLocalGridPoints = 50;
inline constexpr double kInfluenceFlagThreshold = 3.0;  // sphered-norm screen
inline constexpr double kConfidenceLevel = 0.90;

}  // namespace hazfit::defaults
