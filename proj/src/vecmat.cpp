#include "fracmeas/vecmat.hpp"

#include <cmath>

namespace fracmeas {

Vec zeros(int n) { return Vec(static_cast<size_t>(n), 0.0); }

static void check_same_size(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
}

Vec add(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  Vec r(a);
  for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  Vec r(a);
  for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Vec scale(double s, const Vec& a) {
  Vec r(a);
  for (double& v : r) v *= s;
  return r;
}

void axpy(double s, const Vec& x, Vec& y) {
  check_same_size(x, y);
  for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

double dot(const Vec& a, const Vec& b) {
  check_same_size(a, b);
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

static void check_same_shape(const Mat& x, const Mat& y) {
  if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("matrix shape mismatch");
}

Mat operator+(const Mat& x, const Mat& y) {
  check_same_shape(x, y);
  Mat r(x);
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

Mat operator-(const Mat& x, const Mat& y) {
  check_same_shape(x, y);
  Mat r(x);
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  return r;
}

Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matrix product shape mismatch");
  Mat r(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double v = x(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
    }
  return r;
}

Mat scale(double s, const Mat& x) {
  Mat r(x);
  for (double& v : r.a) v *= s;
  return r;
}

Mat transpose(const Mat& x) {
  Mat r(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
  return r;
}

Vec matvec(const Mat& m, const Vec& x) {
  if (static_cast<size_t>(m.cols) != x.size()) throw std::invalid_argument("matrix apply shape mismatch");
  Vec r(static_cast<size_t>(m.rows), 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

double max_abs(const Mat& x) {
  double m = 0;
  for (double v : x.a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace fracmeas
