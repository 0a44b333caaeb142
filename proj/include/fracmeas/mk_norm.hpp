#pragma once

#include <functional>

#include "fracmeas/measure.hpp"

namespace fracmeas {

enum class NormMode {
  BL,  // sup ||f||_inf + Lip(f) <= 1
  L,   // Lip(f) <= 1, gauged to f = 0 at the leftmost support point
};

struct MKComputation {
  double value = 0;
  double c0 = 0;  // sup-norm share of the winning split (BL mode)
  double c1 = 0;  // Lipschitz share
};

// Monge-Kantorovich norm sup { integral f d mu : ||f||_inf + Lip(f) <= 1 },
// computed on the finite support (atoms plus midpoints of nonzero cells;
// midpoints stand in for their cells with O(1/N) error folded into tol).
// The dual is searched by a 1-D split c0 + c1 = 1 (the split value is concave
// in the split) and projected gradient ascent inside; every candidate is
// projected and then scaled exactly into the feasible set, so the result is
// always a feasible lower bound.
double mk_norm(const VectorMeasure& mu, double tol);
MKComputation mk_norm_detail(const VectorMeasure& mu, double tol);

// Modified norm over Lipschitz-1 test functions, defined on measures with
// zero total mass (checked to 1e-10 relative). On an ordered support the
// optimum has a closed form: partial summation bounds the objective by
// sum_j gap_j ||S_j|| over the partial sums S_j, and the bound is attained
// by a feasible witness, so this value is exact for the finite support.
double mk_star_norm(const VectorMeasure& mu, double tol);

// Brute-force grid reference for small instances (support <= 4, n <= 2):
// exhaustive feasibility-filtered search on per-point value grids (planar
// grids project outside points onto the radius bound), locally refined.
double bl_oracle(const std::vector<double>& support, const std::vector<Vec>& masses,
                 NormMode mode);

// Variation lower bound via dyadic refinement: sum of ||fn(cell)|| over the
// 2^depth dyadic cells. Nondecreasing in depth for any finitely additive fn.
double variation_by_refinement(const std::function<Vec(const BorelSet&)>& fn, int depth);

}  // namespace fracmeas
