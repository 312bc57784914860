#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hazfit/errors.hpp"

namespace hazfit {

using Vec = std::vector<double>;

// Dense row-major matrix; everything here is sized by the parameter
// dimension (a handful at most), so simplicity beats blocking.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Mat& operator*=(double c) {
    for (double& v : d_) v *= c;
    return *this;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(Mat a, double c) { return a *= c; }
inline Mat operator*(double c, Mat a) { return a *= c; }

Mat mat_mul(const Mat& a, const Mat& b);
Vec mat_vec(const Mat& a, const Vec& x);
Mat transpose(const Mat& a);
Mat outer(const Vec& a, const Vec& b);

double dot(const Vec& a, const Vec& b);
double norm_inf(const Vec& v);
double norm2(const Vec& v);
double frobenius(const Mat& a);

Vec vec_add(Vec a, const Vec& b);
Vec vec_sub(Vec a, const Vec& b);
Vec vec_scale(Vec a, double c);

// Gaussian elimination with partial pivoting; throws SingularMatrixError.
Vec solve(Mat a, Vec b);
Mat inverse(const Mat& a);

// Jacobi eigendecomposition of a symmetric matrix: a = V diag(lambda) V^t,
// eigenvalues ascending.
void sym_eigen(const Mat& a, Mat& vectors, Vec& values);

// Inverse square root of a symmetric PSD matrix with an eigenvalue floor.
Mat sym_inverse_sqrt(const Mat& a, double eigen_floor);

double min_eigenvalue(const Mat& sym);

inline bool is_negative_definite(const Mat& h) {
  Mat neg = h;
  neg *= -1.0;
  return min_eigenvalue(neg) > 0.0;
}

// Enforce symmetry in place (averages the off-diagonal pairs).
void symmetrize(Mat& a);

}  // namespace hazfit
