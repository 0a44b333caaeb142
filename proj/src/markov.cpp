#include "fracmeas/markov.hpp"

#include <algorithm>
#include <cmath>

namespace fracmeas {

namespace {

// Largest eigenvalue of a symmetric 2x2 [[p,q],[q,r]].
double sym2_lambda_max(double p, double q, double r) {
  double h = 0.5 * (p + r);
  double radius = std::hypot(0.5 * (p - r), q);
  return h + radius;
}

// Largest eigenvalue of a symmetric 3x3 via the trigonometric closed form.
double sym3_lambda_max(const Mat& A) {
  double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
  if (p1 == 0.0) return std::max({A(0, 0), A(1, 1), A(2, 2)});
  double q = (A(0, 0) + A(1, 1) + A(2, 2)) / 3.0;
  double p2 = 0;
  for (int i = 0; i < 3; ++i) p2 += (A(i, i) - q) * (A(i, i) - q);
  p2 += 2.0 * p1;
  double p = std::sqrt(p2 / 6.0);
  Mat B(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = (A(i, j) - (i == j ? q : 0.0)) / p;
  double detB = B(0, 0) * (B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1)) -
                B(0, 1) * (B(1, 0) * B(2, 2) - B(1, 2) * B(2, 0)) +
                B(0, 2) * (B(1, 0) * B(2, 1) - B(1, 1) * B(2, 0));
  double r = std::clamp(detB / 2.0, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi);
}

double power_iteration_lambda_max(const Mat& B) {
  int n = B.rows;
  Vec x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 1e-3 * (i + 1);  // deterministic start
  double nx = norm2(x);
  for (double& v : x) v /= nx;
  double lambda = 0;
  for (int it = 0; it < 10000; ++it) {
    Vec y = matvec(B, x);
    double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    for (double& v : y) v /= ny;
    double next = dot(y, matvec(B, y));
    if (std::abs(next - lambda) <= 1e-14 * std::max(1.0, std::abs(next))) return next;
    lambda = next;
    x = std::move(y);
  }
  return lambda;
}

}  // namespace

double operator_norm(const Mat& R) {
  if (!R.square()) throw std::invalid_argument("operator norm needs a square matrix");
  int n = R.rows;
  if (max_abs(R) == 0.0) return 0.0;
  if (n == 1) return std::abs(R(0, 0));
  Mat B = transpose(R) * R;
  double lmax;
  if (n == 2)
    lmax = sym2_lambda_max(B(0, 0), B(0, 1), B(1, 1));
  else if (n == 3)
    lmax = sym3_lambda_max(B);
  else
    lmax = power_iteration_lambda_max(B);
  return std::sqrt(std::max(0.0, lmax));
}

MarkovOperator MarkovOperator::h(std::vector<MarkovTerm> terms) {
  MarkovOperator op;
  op.terms = std::move(terms);
  op.model = Model::H;
  op.n = op.terms.empty() ? 1 : op.terms.front().R.rows;
  op.check_valid();
  return op;
}

MarkovOperator MarkovOperator::h1(std::vector<MarkovTerm> terms, const Vec& v) {
  MarkovOperator op;
  op.terms = std::move(terms);
  op.model = Model::H1;
  op.n = static_cast<int>(v.size());
  op.v = v;
  op.check_valid();
  return op;
}

MarkovOperator MarkovOperator::h2(std::vector<MarkovTerm> terms, const VectorMeasure& mu0) {
  MarkovOperator op;
  op.terms = std::move(terms);
  op.model = Model::H2;
  op.n = mu0.n;
  op.mu0 = mu0;
  op.check_valid();
  return op;
}

void MarkovOperator::check_valid() const {
  if (terms.empty()) throw std::invalid_argument("operator needs at least one term");
  for (const MarkovTerm& t : terms)
    if (!t.R.square() || t.R.rows != n)
      throw std::invalid_argument("all operator matrices must be n x n");
  if (model == Model::H1) {
    Mat s(n, n);
    for (const MarkovTerm& t : terms) s = s + t.R;
    Mat diff = s - Mat::identity(n);
    if (max_abs(diff) > 1e-12)
      throw std::invalid_argument("H1 requires the matrices to sum to the identity");
    if (v.size() != static_cast<size_t>(n)) throw std::invalid_argument("H1 total mass dimension");
  }
  if (model == Model::H2) {
    if (!mu0) throw std::invalid_argument("H2 requires an offset measure");
    if (mu0->n != n) throw std::invalid_argument("offset measure dimension mismatch");
  }
}

ContractionBounds bounds(const MarkovOperator& op) {
  ContractionBounds b;
  for (const MarkovTerm& t : op.terms) {
    double a = operator_norm(t.R);
    b.e += a;
    b.c += a * t.map.ratio();
  }
  b.d = b.e + b.c;
  b.contracts_variation = b.e < 1.0;
  b.contracts_mk = b.d < 1.0;
  b.contracts_mk_star = b.c < 1.0;
  return b;
}

VectorMeasure apply(const MarkovOperator& op, const VectorMeasure& mu) {
  if (mu.n != op.n) throw std::invalid_argument("measure dimension mismatch");
  VectorMeasure acc = VectorMeasure::zero(op.n, mu.N);
  bool first = true;
  for (const MarkovTerm& t : op.terms) {
    VectorMeasure part = apply_matrix(t.R, pushforward(t.map, mu));
    acc = first ? std::move(part) : linear_combine(1.0, acc, 1.0, part);
    first = false;
  }
  if (op.model == Model::H2) acc = linear_combine(1.0, acc, 1.0, *op.mu0);
  return acc;
}

LipFunction pullback(const MarkovOperator& op, const LipFunction& f) {
  if (f.n != op.n) throw std::invalid_argument("integrand dimension mismatch");
  LipFunction g;
  g.n = op.n;
  double norm_sum = 0, lip_sum = 0;
  std::vector<std::pair<LipMap, Mat>> parts;
  parts.reserve(op.terms.size());
  for (const MarkovTerm& t : op.terms) {
    double a = operator_norm(t.R);
    norm_sum += a;
    lip_sum += a * t.map.ratio();
    parts.emplace_back(t.map, transpose(t.R));
  }
  g.sup_budget = norm_sum * f.sup_budget;
  g.lip_budget = lip_sum * f.lip_budget;
  auto inner = f.f;
  int n = op.n;
  g.f = [parts, inner, n](double t) {
    Vec r = zeros(n);
    for (const auto& [map, Rt] : parts) axpy(1.0, matvec(Rt, inner(map(t))), r);
    return r;
  };
  return g;
}

double change_of_variable_check(const MarkovOperator& op, const LipFunction& f,
                                const VectorMeasure& mu) {
  MarkovOperator bare = op;
  bare.model = Model::H;
  bare.mu0.reset();
  double lhs = integrate(f, apply(bare, mu));
  double rhs = integrate(pullback(bare, f), mu);
  return std::abs(lhs - rhs);
}

TruncationResult truncate(const CountableFamily& fam, double eps, int max_terms) {
  if (!(eps > 0)) throw std::invalid_argument("truncation threshold must be positive");
  TruncationResult res;
  int M = 1;
  while (M <= max_terms && !(fam.tail(M) < eps)) ++M;
  if (M > max_terms) throw NumericalError("tail does not fall below threshold within term limit");
  res.M = M;
  res.tail = fam.tail(M);
  res.terms.reserve(static_cast<size_t>(M));
  for (int i = 1; i <= M; ++i) res.terms.push_back(fam.term(i));
  return res;
}

CountableFamily exp_series_family(const Mat& P) {
  if (!P.square()) throw std::invalid_argument("exp_series needs a square matrix");
  CountableFamily fam;
  fam.n = P.rows;
  fam.ratio_bound = 0.0;
  double p_norm = operator_norm(P);
  fam.term = [P](int i) {
    Mat R = Mat::identity(P.rows);
    for (int k = 1; k <= i; ++k) R = scale(1.0 / k, R * P);
    return MarkovTerm{LipMap::constant(1.0 / (i + 1.0)), scale(-1.0, R)};
  };
  fam.tail = [p_norm](int M) {
    // sum_{i > M} ||P||^i / i!, summed directly so it stays nonnegative
    double term = 1.0;
    for (int k = 1; k <= M; ++k) term *= p_norm / k;
    double s = 0;
    for (int i = M + 1; i < M + 400; ++i) {
      term *= p_norm / i;
      s += term;
      if (term < 1e-300) break;
    }
    return s;
  };
  return fam;
}

CountableFamily geometric_family(double ratio, const Mat& seed) {
  if (!(ratio > 0 && ratio < 1)) throw std::invalid_argument("geometric ratio must be in (0,1)");
  CountableFamily fam;
  fam.n = seed.rows;
  fam.ratio_bound = 1.0 / 3.0;
  double b1 = operator_norm(seed);
  fam.term = [ratio, seed](int i) {
    Mat R = seed;
    for (int k = 1; k < i; ++k) R = scale(ratio, R);
    return MarkovTerm{LipMap(1.0 / 3.0, 2.0 / (3.0 * i)), R};
  };
  fam.tail = [ratio, b1](int M) { return b1 * std::pow(ratio, M) / (1.0 - ratio); };
  return fam;
}

}  // namespace fracmeas
