#pragma once

#include <functional>
#include <optional>

#include "fracmeas/measure.hpp"

namespace fracmeas {

// Euclidean operator norm of a matrix: closed forms for n <= 3 (largest
// eigenvalue of R^T R), power iteration beyond that.
double operator_norm(const Mat& R);

enum class Model {
  H,   // mu -> sum_i R_i(mu . omega_i^{-1})
  H1,  // fixed point of H on measures of prescribed total mass, sum R_i = Id
  H2,  // mu -> H(mu) + mu0
};

struct MarkovTerm {
  LipMap map;
  Mat R;
};

// Contraction constants of the iterated system:
//   e = sum ||R_i||   (variation norm)
//   c = sum ||R_i|| r_i   (modified Monge-Kantorovich metric)
//   d = e + c             (Monge-Kantorovich metric)
struct ContractionBounds {
  double e = 0;
  double c = 0;
  double d = 0;
  bool contracts_variation = false;  // e < 1
  bool contracts_mk = false;         // d < 1
  bool contracts_mk_star = false;    // c < 1
};

struct MarkovOperator {
  std::vector<MarkovTerm> terms;
  Model model = Model::H;
  int n = 1;
  std::optional<VectorMeasure> mu0;  // required for H2
  Vec v;                             // prescribed total mass for H1

  static MarkovOperator h(std::vector<MarkovTerm> terms);
  static MarkovOperator h1(std::vector<MarkovTerm> terms, const Vec& v);
  static MarkovOperator h2(std::vector<MarkovTerm> terms, const VectorMeasure& mu0);

  void check_valid() const;
};

ContractionBounds bounds(const MarkovOperator& op);

// One application of the operator. H and H1 apply the bare sum; H2 adds mu0.
VectorMeasure apply(const MarkovOperator& op, const VectorMeasure& mu);

// Adjoint action on integrands: g(t) = sum_i R_i^T f(omega_i(t)), with
// budgets sup(g) <= sum ||R_i|| sup(f) and lip(g) <= sum ||R_i|| r_i lip(f).
LipFunction pullback(const MarkovOperator& op, const LipFunction& f);

// | integral of f d(H mu) - integral of (pullback f) d mu |, which vanishes
// up to quadrature error (exactly for purely atomic mu).
double change_of_variable_check(const MarkovOperator& op, const LipFunction& f,
                                const VectorMeasure& mu);

// Countably infinite family, handled by truncation: term(i) for i >= 1,
// tail(M) = sum_{i > M} b_i for a summable bound sequence b_i >= ||R_i||.
struct CountableFamily {
  int n = 1;
  std::function<MarkovTerm(int)> term;
  std::function<double(int)> tail;
  double ratio_bound = 1.0;  // uniform bound on the maps' Lipschitz ratios
};

struct TruncationResult {
  std::vector<MarkovTerm> terms;
  int M = 0;
  double tail = 0;  // guarantees ||H(mu) - H_M(mu)|| <= tail * ||mu||
};

// Smallest M with tail(M) < eps.
TruncationResult truncate(const CountableFamily& fam, double eps, int max_terms = 1000000);

// Named presets. exp_series: constant maps at t_i = 1/(i+1) with
// R_i = -P^i/i!, so Id - sum R_i is the truncated exponential of P.
CountableFamily exp_series_family(const Mat& P);
// geometric: R_i = ratio^{i-1} * seed, maps t -> t/3 + 2/(3i).
CountableFamily geometric_family(double ratio, const Mat& seed);

}  // namespace fracmeas
