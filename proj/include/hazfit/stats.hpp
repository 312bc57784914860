#pragma once

#include <vector>

namespace hazfit {

double normal_quantile(double p);

// Upper-quantile of the chi-square distribution with df degrees of freedom,
// i.e. the x with P(X <= x) = p.
double chisq_quantile(double p, int df);

double gamma_p(double a, double x);  // regularized lower incomplete gamma

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // denominator n-1

// Linear-interpolation sample quantile (R type 7).
double quantile(std::vector<double> v, double p);

double median(std::vector<double> v);

}  // namespace hazfit
