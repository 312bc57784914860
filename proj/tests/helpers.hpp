#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hazfit/dataset.hpp"
#include "hazfit/fit.hpp"
#include "hazfit/rng.hpp"

namespace hazfit::testing {

inline SurvivalDataset make_dataset(const std::vector<double>& x, const std::vector<int>& delta,
                                    std::optional<double> horizon = std::nullopt) {
  std::vector<SurvivalRecord> recs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    recs[i].x = x[i];
    recs[i].delta = delta[i];
  }
  return SurvivalDataset(std::move(recs), horizon);
}

inline SurvivalDataset make_cox_dataset(const std::vector<double>& x,
                                        const std::vector<int>& delta,
                                        const std::vector<std::vector<double>>& z,
                                        std::optional<double> horizon = std::nullopt) {
  std::vector<SurvivalRecord> recs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    recs[i].x = x[i];
    recs[i].delta = delta[i];
    recs[i].z = z[i];
  }
  return SurvivalDataset(std::move(recs), horizon);
}

// mixed-censoring sample from a Weibull-ish truth, for property tests
inline SurvivalDataset random_dataset(std::uint64_t seed, std::size_t n, double censor_rate = 0.4,
                                      double shape = 1.2) {
  Rng rng(seed);
  std::vector<SurvivalRecord> recs(n);
  for (auto& r : recs) {
    const double life = std::pow(rng.exponential(1.0), 1.0 / shape);
    const double cens = censor_rate > 0.0 ? rng.exponential(censor_rate) : 1e30;
    r.x = std::min(life, cens);
    r.delta = life <= cens ? 1 : 0;
  }
  return SurvivalDataset(std::move(recs));
}

inline std::string write_temp_csv(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

// central difference of a scalar function of theta
inline double fd_partial(const std::function<double(const Vec&)>& f, Vec theta, std::size_t j,
                         double h) {
  Vec up = theta, dn = theta;
  up[j] += h;
  dn[j] -= h;
  return (f(up) - f(dn)) / (2.0 * h);
}

inline bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-12});
}

}  // namespace hazfit::testing
