#pragma once

#include <string>

#include "fracmeas/solver.hpp"

namespace fracmeas {

// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;

  static Quadrature gauss_legendre(int Q);
  int size() const { return static_cast<int>(x.size()); }
};

// Coordinates of an L2 function in the embedding: (sqrt(w_q) f(x_q))_q.
// The scaling makes the euclidean norm of the coordinates agree with the
// L2 norm for integrands the rule integrates exactly.
Vec l2_coords(const Quadrature& quad, const std::function<double(double)>& f);

// Nystrom discretization of the kernel operator f -> integral F(.,y) f(y) dy:
// Rhat[p][q] = sqrt(w_p) F(x_p, x_q) sqrt(w_q), so that the euclidean
// operator norm of Rhat approximates the L2 operator norm.
Mat discretize_kernel(const std::function<double(double, double)>& F, const Quadrature& quad);

// The measure B -> class of t -> lebesgue(B intersect [0,t]), embedded: cell
// masses are the exact increments of the primitive, coordinates scaled by
// sqrt(w_q). Dimension of the measure is the rule size.
VectorMeasure primitive_measure(const Quadrature& quad, int N);

// Exact total variation of the primitive measure: the variation density of
// B -> h_B is sqrt(1-t) dt, and substituting u = sqrt(1-t) turns the total
// into the elementary integral of 2u^2 over [0,1], i.e. 2/3.
double primitive_variation();

struct L2Example {
  Quadrature quad;
  double r1_norm = 0;
  double r2_norm = 0;
  double mu0_norm = 0;
  double contraction_sum = 0;
  bool ball_check = false;  // mu0_norm + a * contraction_sum <= a with a = 1
  double alpha_system = 0, beta_system = 0;  // from the quadrature-moment system
  double alpha_iter = 0, beta_iter = 0;      // from the solved fixed point
  std::vector<double> phi;                   // fixed point representative at nodes
  std::vector<double> phi_closed_form;       // (1/2 + alpha) x + beta x^2 at nodes
  double phi_max_err = 0;
  SolveReport report;
};

// Two-kernel Cantor-map system on L2: F1 = xy/4, F2 = x^2 y^2 / 4, offset
// half the primitive measure. Solves the fixed point and extracts the
// representative of mu*([0,1]) together with its first two moments.
L2Example run_l2_example(int Q = 64, int N = 243, double tol = 1e-6);

// Tiny expression grammar for kernels in scenario files: x, y, numbers,
// + - * / ^ and parentheses.
std::function<double(double, double)> parse_kernel_expr(const std::string& expr);

}  // namespace fracmeas
