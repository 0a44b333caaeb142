#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracmeas/l2_embed.hpp"
#include "fracmeas/markov.hpp"
#include "fracmeas/mk_norm.hpp"

using namespace fracmeas;

namespace {

// Rank-1 kernel c*u(x)*v(y) maps f to c*u*<v,f>, so its L2 operator norm is
// c*||u||*||v||. For c*x*y both factors have squared norm 1/3, giving c/3.
double rank1_xy_norm(double c) { return c / 3.0; }

double poly_integral(int k) { return 1.0 / (k + 1); }

}  // namespace

TEST_CASE("gauss legendre rules integrate their full degree") {
  for (int Q : {1, 2, 5, 8, 16, 64}) {
    Quadrature quad = Quadrature::gauss_legendre(Q);
    REQUIRE(quad.size() == Q);
    double wsum = 0;
    for (double w : quad.w) {
      CHECK(w > 0);
      wsum += w;
    }
    CHECK(std::abs(wsum - 1.0) <= 1e-12);
    for (int q = 1; q < Q; ++q) CHECK(quad.x[q] > quad.x[q - 1]);
    CHECK(quad.x.front() > 0.0);
    CHECK(quad.x.back() < 1.0);

    // Exact through degree 2Q-1.
    for (int k = 0; k <= 2 * Q - 1 && k <= 12; ++k) {
      double sum = 0;
      for (int q = 0; q < Q; ++q) sum += quad.w[q] * std::pow(quad.x[q], k);
      CHECK(std::abs(sum - poly_integral(k)) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(Quadrature::gauss_legendre(0), std::invalid_argument);
  CHECK_THROWS_AS(Quadrature::gauss_legendre(513), std::invalid_argument);
}

TEST_CASE("coordinate scaling is an isometry on polynomials") {
  Quadrature quad = Quadrature::gauss_legendre(16);
  Vec cx = l2_coords(quad, [](double x) { return x; });
  CHECK(std::abs(dot(cx, cx) - 1.0 / 3) <= 1e-13);
  Vec c1 = l2_coords(quad, [](double) { return 1.0; });
  CHECK(std::abs(dot(c1, c1) - 1.0) <= 1e-13);
  Vec cq = l2_coords(quad, [](double x) { return x * x; });
  CHECK(std::abs(dot(cx, cq) - 1.0 / 4) <= 1e-13);
}

TEST_CASE("kernel discretization reproduces closed-form norms") {
  Quadrature quad = Quadrature::gauss_legendre(64);

  Mat zero = discretize_kernel([](double, double) { return 0.0; }, quad);
  CHECK(max_abs(zero) == 0.0);

  Mat half = discretize_kernel([](double x, double y) { return x * y / 2.0; }, quad);
  CHECK(std::abs(operator_norm(half) - rank1_xy_norm(0.5)) <= 1e-6);

  Mat quarter = discretize_kernel([](double x, double y) { return x * y / 4.0; }, quad);
  CHECK(std::abs(operator_norm(quarter) - rank1_xy_norm(0.25)) <= 1e-6);

  // Symmetric kernels discretize to symmetric matrices, up to the
  // multiplication order of the two weight factors.
  CHECK(max_abs(half - transpose(half)) <= 1e-15);
}

TEST_CASE("discretized norms never exceed the kernel sup") {
  Quadrature quad = Quadrature::gauss_legendre(48);
  struct Case {
    std::function<double(double, double)> F;
    double sup;
  };
  Case cases[] = {
      {[](double x, double y) { return x * y / 4.0; }, 0.25},
      {[](double x, double y) { return x * x * y * y / 4.0; }, 0.25},
      {[](double x, double y) { return (x + y) / 4.0; }, 0.5},
  };
  for (const Case& c : cases)
    CHECK(operator_norm(discretize_kernel(c.F, quad)) <= c.sup + 1e-10);
}

TEST_CASE("primitive measure evaluates to the scaled primitive") {
  Quadrature quad = Quadrature::gauss_legendre(24);
  VectorMeasure m = primitive_measure(quad, 243);
  REQUIRE(m.n == 24);

  Vec full = eval(m, BorelSet::full());
  for (int q = 0; q < quad.size(); ++q)
    CHECK(std::abs(full[q] - std::sqrt(quad.w[q]) * quad.x[q]) <= 1e-12);

  Vec half = eval(m, BorelSet::closed(0.0, 0.5));
  for (int q = 0; q < quad.size(); ++q) {
    double expect = std::sqrt(quad.w[q]) * std::min(quad.x[q], 0.5);
    CHECK(std::abs(half[q] - expect) <= 1e-10);
  }

  CHECK(norm2(eval(m, BorelSet::point(0.5))) == 0.0);
}

TEST_CASE("primitive variation closes at two thirds") {
  CHECK(primitive_variation() == 2.0 / 3.0);

  Quadrature quad = Quadrature::gauss_legendre(32);
  VectorMeasure m = primitive_measure(quad, 243);
  CHECK(std::abs(total_variation(m) - 2.0 / 3.0) <= 1e-2);

  auto fn = [&m](const BorelSet& B) { return eval(m, B); };
  double prev = 0;
  for (int depth = 0; depth <= 10; ++depth) {
    double v = variation_by_refinement(fn, depth);
    CHECK(v + 1e-12 >= prev);
    prev = v;
  }
  CHECK(prev <= 2.0 / 3.0 + 1e-10);
  CHECK(prev >= 2.0 / 3.0 - 1e-2);
}

TEST_CASE("bundled kernel example solves to the quadratic fixed point") {
  L2Example ex = run_l2_example(32, 81, 1e-5);

  CHECK(std::abs(ex.mu0_norm - 1.0 / 3) <= 1e-10);
  CHECK(ex.r1_norm <= 0.25 + 1e-10);
  CHECK(ex.r2_norm <= 0.25 + 1e-10);
  CHECK(ex.ball_check);
  CHECK(ex.contraction_sum <= 0.5);
  CHECK(ex.report.residual_variation <= 10 * ex.report.tol);

  // The moment system uses exact quadrature moments, so its solution hits
  // the rational targets at machine precision; the iterated values carry the
  // solver tolerance and the coarser grid.
  const double alpha = 319.0 / 6658, beta = 120.0 / 3329;
  CHECK(std::abs(ex.alpha_system - alpha) <= 1e-12);
  CHECK(std::abs(ex.beta_system - beta) <= 1e-12);
  CHECK(std::abs(ex.alpha_iter - alpha) <= 1e-5);
  CHECK(std::abs(ex.beta_iter - beta) <= 1e-5);
  CHECK(ex.phi_max_err <= 1e-4);
}

TEST_CASE("kernel expressions parse with the expected precedence") {
  auto f = parse_kernel_expr("x*y/2");
  CHECK(std::abs(f(0.3, 0.5) - 0.075) <= 1e-15);

  auto g = parse_kernel_expr("x^2*y^2/4");
  CHECK(std::abs(g(0.5, 2.0) - 0.25) <= 1e-15);

  auto h = parse_kernel_expr("x+y*x");
  CHECK(std::abs(h(0.5, 3.0) - 2.0) <= 1e-15);

  auto p = parse_kernel_expr("(x+y)*(x-y)");
  CHECK(std::abs(p(0.7, 0.2) - (0.49 - 0.04)) <= 1e-15);

  auto c = parse_kernel_expr("1/3");
  CHECK(std::abs(c(0.0, 0.0) - 1.0 / 3) <= 1e-15);

  auto neg = parse_kernel_expr("-x + 2");
  CHECK(std::abs(neg(0.25, 0.0) - 1.75) <= 1e-15);

  CHECK_THROWS_AS(parse_kernel_expr("x +"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("(x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("x * z"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_expr("x y"), std::invalid_argument);
}
