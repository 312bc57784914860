#pragma once

#include <functional>
#include <vector>

#include "hazfit/linalg.hpp"

namespace hazfit {

// Evaluates `dim` integrand components at s into out[0..dim).
using VectorIntegrand = std::function<void(double s, double* out)>;

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Adaptive Gauss-Legendre: panels are bisected until the two-half estimate
// agrees with the whole-panel estimate within the tolerance budget.
// Breakpoints pre-split the domain (weight steps, family cut points).
// Throws NumericError (carrying the achieved error) when refinement runs out.
Vec integrate_adaptive(const VectorIntegrand& f, int dim, double a, double b, double rel_tol,
                       const std::vector<double>& breakpoints = {});

double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol, const std::vector<double>& breakpoints = {});

}  // namespace hazfit
