#pragma once

#include "fracmeas/markov.hpp"

namespace fracmeas {

// Thrown when a solve is declined because no applicable contraction bound
// holds and no iteration count was forced. Distinct from NumericalError so
// callers can report refusals separately from numerical breakdowns.
struct SolverRefusal : NumericalError {
  explicit SolverRefusal(const std::string& what) : NumericalError(what) {}
};

// Gauss-Jordan inverse with partial pivoting. Throws NumericalError when the
// matrix is singular or the condition estimate exceeds 1e12.
Mat invert(const Mat& A);
double condition_estimate(const Mat& A, const Mat& A_inv);
// Scaling-and-squaring with a truncated series; relative error well below
// 1e-10 for operator norms up to about 10.
Mat matrix_exp(const Mat& P);

enum class Metric { Variation, MK, MKStar };

struct TraceRow {
  int iteration = 0;
  double distance_to_prev = 0;  // variation norm
  int atom_count = 0;
  double pruning_budget = 0;  // accumulated dropped variation
};

struct SolveReport {
  int iterations = 0;
  double factor = 0;       // contraction factor used for the a priori count
  Metric metric = Metric::Variation;
  double d0 = 0;           // upper bound on the distance of the first two iterates
  double tol = 0;
  double residual_variation = 0;      // variation norm of the fixed point defect
  double residual_mk_star = 0;        // only filled for H1 solves
  double prune_drop_budget = 0;       // total variation dropped by pruning
  double prune_mk_bound = 0;          // transport bound of atom coalescing
  bool forced = false;
  bool sum_R_identity = false;
  bool norm_sum_le_one = false;
  double e = 0, c = 0, d = 0;
  std::vector<TraceRow> trace;
};

struct SolveOptions {
  double tol = 1e-8;
  std::optional<int> force_iterations;
  std::optional<VectorMeasure> seed;
  double prune_eps_factor = 1e-14;  // epsilon = factor * current variation
  int atom_budget = 100000;
};

struct SolveResult {
  VectorMeasure measure;
  SolveReport report;
};

// Banach iteration for the normalized model (sum R_i = Id) on measures of
// prescribed total mass v, contracting in the modified Monge-Kantorovich
// metric with factor c. Refuses when c >= 1 unless an iteration count is
// forced. Seed defaults to a Dirac mass v at 0.
SolveResult solve_h1(const MarkovOperator& op, const SolveOptions& opt = {});

// Banach iteration for mu -> H(mu) + mu0. Contracts in variation when e < 1;
// falls back to the Monge-Kantorovich metric when only d < 1. Seed defaults
// to mu0.
SolveResult solve_h2(const MarkovOperator& op, const SolveOptions& opt = {});

// System of constant maps t_i with operators R_i: the fixed point of H2 is
// mu* = sum_i dirac(t_i) R_i (Id - R)^{-1} mu0(T) + mu0 in closed form,
// needing only Id - R invertible.
struct ConstantSystem {
  std::vector<double> points;
  std::vector<Mat> ops;
  VectorMeasure mu0;
};

struct ConstantSolveResult {
  VectorMeasure measure;
  Vec mu_total;  // (Id - R)^{-1} mu0(T)
  double e = 0;
  bool warned_no_contraction = false;  // e >= 1: closed form still valid
};

ConstantSolveResult solve_constant(const ConstantSystem& sys);

}  // namespace fracmeas
