#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracmeas {

// Values of a vector measure live in R^n with the euclidean norm.
using Vec = std::vector<double>;

Vec zeros(int n);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double s, const Vec& a);
void axpy(double s, const Vec& x, Vec& y);  // y += s*x
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

// Dense row-major matrix. Everything in this project is small (n <= 64ish),
// so a flat vector with explicit loops is all we need.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  static Mat identity(int n);

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  bool square() const { return rows == cols; }
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat scale(double s, const Mat& x);
Mat transpose(const Mat& x);
Vec matvec(const Mat& m, const Vec& x);
double max_abs(const Mat& x);

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fracmeas
