#include "hazfit/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "hazfit/errors.hpp"

namespace hazfit {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

namespace {

constexpr int kPanelOrder = 15;
constexpr int kMaxDepth = 60;

struct GlRule {
  std::vector<double> nodes, weights;
  GlRule() { gauss_legendre(kPanelOrder, nodes, weights); }
};

const GlRule& rule() {
  static const GlRule r;
  return r;
}

void panel(const VectorIntegrand& f, int dim, double a, double b, double* out,
           std::vector<double>& scratch) {
  const GlRule& r = rule();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::fill(out, out + dim, 0.0);
  for (int k = 0; k < kPanelOrder; ++k) {
    f(mid + half * r.nodes[k], scratch.data());
    const double w = r.weights[k] * half;
    for (int j = 0; j < dim; ++j) out[j] += w * scratch[j];
  }
}

// Leaves accumulate their residual error estimates; integrable endpoint
// singularities never satisfy a proportional per-leaf budget, so the
// convergence verdict is made on the summed error at the end. Panels whose
// error sits at the floating-point noise floor stop refining: halving them
// further cannot improve the estimate.
void refine(const VectorIntegrand& f, int dim, double a, double b, const double* whole,
            double tol_abs, double noise_floor, int depth, Vec& acc, double& err_total,
            std::vector<double>& scratch) {
  const double mid = 0.5 * (a + b);
  std::vector<double> left(dim), right(dim);
  panel(f, dim, a, mid, left.data(), scratch);
  panel(f, dim, mid, b, right.data(), scratch);
  double err = 0.0;
  for (int j = 0; j < dim; ++j)
    err = std::max(err, std::fabs(whole[j] - left[j] - right[j]));
  if (err <= std::max(tol_abs, noise_floor) || depth >= kMaxDepth) {
    err_total += err;
    for (int j = 0; j < dim; ++j) acc[j] += left[j] + right[j];
    return;
  }
  refine(f, dim, a, mid, left.data(), 0.5 * tol_abs, noise_floor, depth + 1, acc, err_total,
         scratch);
  refine(f, dim, mid, b, right.data(), 0.5 * tol_abs, noise_floor, depth + 1, acc, err_total,
         scratch);
}

}  // namespace

Vec integrate_adaptive(const VectorIntegrand& f, int dim, double a, double b, double rel_tol,
                       const std::vector<double>& breakpoints) {
  Vec acc(dim, 0.0);
  if (b <= a) return acc;

  std::vector<double> cuts{a};
  for (double c : breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> scratch(dim);

  // first pass for the tolerance scale
  Vec first(dim, 0.0);
  std::vector<std::vector<double>> panel_vals;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    std::vector<double> p(dim);
    panel(f, dim, cuts[k], cuts[k + 1], p.data(), scratch);
    for (int j = 0; j < dim; ++j) first[j] += std::fabs(p[j]);
    panel_vals.push_back(std::move(p));
  }
  double scale = 0.0;
  for (int j = 0; j < dim; ++j) scale = std::max(scale, first[j]);
  const double tol_abs = rel_tol * std::max(scale, 1e-300);

  double err_total = 0.0;
  const double total = b - a;
  const double noise_floor = 1e-15 * std::max(scale, 1e-300);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double share = (cuts[k + 1] - cuts[k]) / total;
    refine(f, dim, cuts[k], cuts[k + 1], panel_vals[k].data(),
           std::max(tol_abs * share, tol_abs * 1e-3), noise_floor, 0, acc, err_total, scratch);
  }
  if (err_total > tol_abs * std::max(1.0, std::log2(4.0 + total)))
    throw NumericError("quadrature did not converge within the refinement limit", err_total);
  return acc;
}

double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol, const std::vector<double>& breakpoints) {
  const auto wrap = [&f](double s, double* out) { out[0] = f(s); };
  return integrate_adaptive(wrap, 1, a, b, rel_tol, breakpoints)[0];
}

}  // namespace hazfit
