#include "fracmeas/l2_embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fracmeas {

Quadrature Quadrature::gauss_legendre(int Q) {
  if (Q < 1 || Q > 512) throw std::invalid_argument("rule size out of range");
  Quadrature quad;
  quad.x.resize(Q);
  quad.w.resize(Q);
  // Nodes of the Legendre polynomial on [-1,1] by Newton iteration on the
  // three-term recurrence, then mapped to [0,1].
  for (int k = 0; k < Q; ++k) {
    double xi = std::cos(M_PI * (k + 0.75) / (Q + 0.5));
    double p_prime = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int j = 2; j <= Q; ++j) {
        double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      p_prime = Q * (xi * p1 - p0) / (xi * xi - 1.0);
      double step = p1 / p_prime;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    quad.x[k] = 0.5 * (1.0 + xi);
    quad.w[k] = 1.0 / ((1.0 - xi * xi) * p_prime * p_prime);
  }
  // The cosine seeds enumerate the roots from the right; store them increasing.
  std::reverse(quad.x.begin(), quad.x.end());
  std::reverse(quad.w.begin(), quad.w.end());
  return quad;
}

Vec l2_coords(const Quadrature& quad, const std::function<double(double)>& f) {
  Vec c(quad.x.size());
  for (size_t q = 0; q < quad.x.size(); ++q) c[q] = std::sqrt(quad.w[q]) * f(quad.x[q]);
  return c;
}

Mat discretize_kernel(const std::function<double(double, double)>& F, const Quadrature& quad) {
  int Q = quad.size();
  Mat R(Q, Q);
  for (int p = 0; p < Q; ++p)
    for (int q = 0; q < Q; ++q)
      R(p, q) = std::sqrt(quad.w[p]) * F(quad.x[p], quad.x[q]) * std::sqrt(quad.w[q]);
  return R;
}

VectorMeasure primitive_measure(const Quadrature& quad, int N) {
  int Q = quad.size();
  VectorMeasure m;
  m.n = Q;
  m.N = N;
  m.cells.assign(static_cast<size_t>(N), Vec());
  for (int j = 0; j < N; ++j) {
    double lo = static_cast<double>(j) / N;
    double width = 1.0 / N;
    Vec cell(static_cast<size_t>(Q));
    for (int q = 0; q < Q; ++q) {
      double inc = std::clamp(quad.x[q] - lo, 0.0, width);  // lebesgue(cell ∩ [0, x_q])
      cell[q] = std::sqrt(quad.w[q]) * inc;
    }
    m.cells[j] = std::move(cell);
  }
  return m;
}

double primitive_variation() { return 2.0 / 3.0; }

L2Example run_l2_example(int Q, int N, double tol) {
  L2Example ex;
  ex.quad = Quadrature::gauss_legendre(Q);
  // Both kernel terms enter the invariance computation with the coefficient
  // 1/4; the closed-form coefficients below come from that scaling.
  Mat R1 = discretize_kernel([](double x, double y) { return x * y / 4.0; }, ex.quad);
  Mat R2 = discretize_kernel([](double x, double y) { return x * x * y * y / 4.0; }, ex.quad);
  ex.r1_norm = operator_norm(R1);
  ex.r2_norm = operator_norm(R2);
  ex.contraction_sum = ex.r1_norm + ex.r2_norm;

  VectorMeasure mu0 = primitive_measure(ex.quad, N);
  for (Vec& c : mu0.cells)
    for (double& v : c) v *= 0.5;
  ex.mu0_norm = 0.5 * primitive_variation();
  ex.ball_check = ex.mu0_norm + ex.contraction_sum <= 1.0;

  MarkovOperator op = MarkovOperator::h2(
      {{LipMap(1.0 / 3.0, 0.0), R1}, {LipMap(1.0 / 3.0, 2.0 / 3.0), R2}}, mu0);
  SolveOptions opt;
  opt.tol = tol;
  SolveResult sol = solve_h2(op, opt);
  ex.report = sol.report;

  Vec vstar = total_mass(sol.measure);
  ex.phi.resize(static_cast<size_t>(Q));
  for (int q = 0; q < Q; ++q) ex.phi[q] = vstar[q] / std::sqrt(ex.quad.w[q]);
  for (int q = 0; q < Q; ++q) {
    ex.alpha_iter += 0.25 * ex.quad.w[q] * ex.quad.x[q] * ex.phi[q];
    ex.beta_iter += 0.25 * ex.quad.w[q] * ex.quad.x[q] * ex.quad.x[q] * ex.phi[q];
  }

  // Moment system for the coefficients of phi(x) = x/2 + alpha x + beta x^2:
  //   alpha = (m2/2 + alpha m2 + beta m3) / 4
  //   beta  = (m3/2 + alpha m3 + beta m4) / 4
  double m2 = 0, m3 = 0, m4 = 0;
  for (int q = 0; q < Q; ++q) {
    double x = ex.quad.x[q], w = ex.quad.w[q];
    m2 += w * x * x;
    m3 += w * x * x * x;
    m4 += w * x * x * x * x;
  }
  Mat A(2, 2);
  A(0, 0) = 1.0 - m2 / 4.0;
  A(0, 1) = -m3 / 4.0;
  A(1, 0) = -m3 / 4.0;
  A(1, 1) = 1.0 - m4 / 4.0;
  Vec rhs{m2 / 8.0, m3 / 8.0};
  Vec ab = matvec(invert(A), rhs);
  ex.alpha_system = ab[0];
  ex.beta_system = ab[1];

  ex.phi_closed_form.resize(static_cast<size_t>(Q));
  for (int q = 0; q < Q; ++q) {
    double x = ex.quad.x[q];
    ex.phi_closed_form[q] = (0.5 + ex.alpha_system) * x + ex.beta_system * x * x;
    ex.phi_max_err = std::max(ex.phi_max_err, std::abs(ex.phi[q] - ex.phi_closed_form[q]));
  }
  return ex;
}

namespace {

struct ExprParser {
  const std::string& s;
  size_t pos = 0;

  explicit ExprParser(const std::string& str) : s(str) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  using Fn = std::function<double(double, double)>;

  Fn parse_expr() {
    Fn left = parse_term();
    while (true) {
      if (eat('+')) {
        Fn right = parse_term();
        left = [left, right](double x, double y) { return left(x, y) + right(x, y); };
      } else if (eat('-')) {
        Fn right = parse_term();
        left = [left, right](double x, double y) { return left(x, y) - right(x, y); };
      } else {
        return left;
      }
    }
  }

  Fn parse_term() {
    Fn left = parse_factor();
    while (true) {
      if (eat('*')) {
        Fn right = parse_factor();
        left = [left, right](double x, double y) { return left(x, y) * right(x, y); };
      } else if (eat('/')) {
        Fn right = parse_factor();
        left = [left, right](double x, double y) { return left(x, y) / right(x, y); };
      } else {
        return left;
      }
    }
  }

  Fn parse_factor() {
    Fn base = parse_base();
    if (eat('^')) {
      Fn exp = parse_factor();  // right associative
      return [base, exp](double x, double y) { return std::pow(base(x, y), exp(x, y)); };
    }
    return base;
  }

  Fn parse_base() {
    skip();
    if (pos >= s.size()) throw std::invalid_argument("kernel expression ended unexpectedly");
    char c = s[pos];
    if (c == '(') {
      ++pos;
      Fn inner = parse_expr();
      if (!eat(')')) throw std::invalid_argument("missing ')' in kernel expression");
      return inner;
    }
    if (c == '-') {
      ++pos;
      Fn inner = parse_factor();
      return [inner](double x, double y) { return -inner(x, y); };
    }
    if (c == 'x') {
      ++pos;
      return [](double x, double) { return x; };
    }
    if (c == 'y') {
      ++pos;
      return [](double, double y) { return y; };
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = pos;
      while (end < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' || s[end] == 'e' ||
              s[end] == 'E' || ((s[end] == '+' || s[end] == '-') && (s[end - 1] == 'e' || s[end - 1] == 'E'))))
        ++end;
      double v = std::stod(s.substr(pos, end - pos));
      pos = end;
      return [v](double, double) { return v; };
    }
    throw std::invalid_argument(std::string("unexpected character '") + c + "' in kernel expression");
  }
};

}  // namespace

std::function<double(double, double)> parse_kernel_expr(const std::string& expr) {
  ExprParser p(expr);
  auto fn = p.parse_expr();
  p.skip();
  if (p.pos != expr.size()) throw std::invalid_argument("trailing input in kernel expression");
  return fn;
}

}  // namespace fracmeas
