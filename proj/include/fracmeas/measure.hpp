#pragma once

#include <functional>
#include <map>
#include <optional>

#include "fracmeas/borel.hpp"
#include "fracmeas/vecmat.hpp"

namespace fracmeas {

// Affine self-map of [0,1]: t -> a*t + b. The image [min,max] of [0,1] must
// stay inside [0,1]; the Lipschitz ratio is |a|. Constant maps (a == 0) are
// allowed and collapse measures onto the single point b.
struct LipMap {
  double a = 1.0;
  double b = 0.0;

  LipMap() = default;
  LipMap(double a_, double b_);
  static LipMap constant(double c) { return LipMap(0.0, c); }

  double operator()(double t) const;
  double ratio() const;
  bool is_constant() const { return a == 0.0; }
};

// Finite representation of a member of cabv([0,1] -> R^n): finitely many
// atoms plus a piecewise constant density at resolution N. Cell j carries the
// measure of [j/N, (j+1)/N); an empty cell vector means zero density. The
// master resolution defaults to a power of three so the maps t/3 and (t+2)/3
// send cells onto cells without splitting mass across cell boundaries.
struct VectorMeasure {
  int n = 1;
  int N = 2187;  // 3^7
  std::map<double, Vec> atoms;
  std::vector<Vec> cells;

  static VectorMeasure zero(int n, int N = 2187);
  // Lebesgue measure times a fixed vector value.
  static VectorMeasure lebesgue(const Vec& value, int N = 2187);
  static VectorMeasure dirac(double t, const Vec& value, int n_dim, int N = 2187);

  void check_valid() const;
  bool has_density() const { return !cells.empty(); }
  double cell_lo(int j) const { return static_cast<double>(j) / N; }
  double cell_mid(int j) const { return (j + 0.5) / N; }
};

Vec eval(const VectorMeasure& mu, const BorelSet& B);
Vec total_mass(const VectorMeasure& mu);  // eval on [0,1], summed in fixed order
double total_variation(const VectorMeasure& mu);
double total_variation(const VectorMeasure& mu, const BorelSet& B);
// alpha*mu + beta*nu; densities are re-binned to the lcm of the resolutions.
VectorMeasure linear_combine(double alpha, const VectorMeasure& mu, double beta,
                             const VectorMeasure& nu);
VectorMeasure apply_matrix(const Mat& R, const VectorMeasure& mu);
// Image measure h(mu)(B) = mu(h^{-1}(B)).
VectorMeasure pushforward(const LipMap& h, const VectorMeasure& mu);

// A function [0,1] -> R^n given by a callable plus declared budgets that
// over-approximate its sup norm and Lipschitz constant. The budgets are what
// the norm machinery consumes; the callable is the ground truth for values.
struct LipFunction {
  int n = 1;
  double sup_budget = 0.0;
  double lip_budget = 0.0;
  std::function<Vec(double)> f;

  Vec operator()(double t) const { return f(t); }
};

// A function known only on finitely many support points, with budgets.
struct GridFunction {
  int n = 1;
  std::vector<double> support;  // strictly increasing
  std::vector<Vec> values;
  double sup_budget = 0.0;
  double lip_budget = 0.0;

  static GridFunction sample(const LipFunction& f, const std::vector<double>& support);
  void check_valid() const;
  // Measured constants over the support; must never exceed the budgets.
  double measured_sup() const;
  double measured_lip() const;
  const Vec& at(double t) const;  // exact-position lookup, throws if absent
};

// Integral of f against mu: atoms contribute <f(p), mu({p})>, density cells
// contribute <f(midpoint), cell mass>. Exact for affine integrands and for
// simple functions aligned with cell boundaries.
double integrate(const LipFunction& f, const VectorMeasure& mu);
double integrate(const GridFunction& f, const VectorMeasure& mu);

struct PruneResult {
  VectorMeasure measure;
  double dropped_variation = 0.0;  // variation removed by the epsilon cut
  double coalesce_mk_bound = 0.0;  // sum of moved mass times displacement
  int coalesced = 0;
};

// Drop atoms below eps in norm; if more than budget atoms remain, coalesce
// atoms cell by cell at their variation-weighted mean location.
PruneResult prune(const VectorMeasure& mu, double eps, int budget);

}  // namespace fracmeas
