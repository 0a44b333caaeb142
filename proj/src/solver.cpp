#include "fracmeas/solver.hpp"

#include <cmath>

#include "fracmeas/mk_norm.hpp"

namespace fracmeas {

Mat invert(const Mat& A) {
  if (!A.square()) throw std::invalid_argument("only square matrices can be inverted");
  int n = A.rows;
  Mat work = A;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(work(i, col)) > std::abs(work(pivot, col))) pivot = i;
    double p = work(pivot, col);
    if (std::abs(p) < 1e-300) throw NumericalError("matrix is singular");
    if (pivot != col)
      for (int j = 0; j < n; ++j) {
        std::swap(work(pivot, j), work(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    double scale_ = 1.0 / work(col, col);
    for (int j = 0; j < n; ++j) {
      work(col, j) *= scale_;
      inv(col, j) *= scale_;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      double m = work(i, col);
      if (m == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        work(i, j) -= m * work(col, j);
        inv(i, j) -= m * inv(col, j);
      }
    }
  }
  double cond = condition_estimate(A, inv);
  if (!(cond <= 1e12)) throw NumericalError("matrix is ill-conditioned (estimate " + std::to_string(cond) + ")");
  return inv;
}

double condition_estimate(const Mat& A, const Mat& A_inv) {
  return operator_norm(A) * operator_norm(A_inv);
}

Mat matrix_exp(const Mat& P) {
  if (!P.square()) throw std::invalid_argument("matrix exponential needs a square matrix");
  int n = P.rows;
  double rowsum = 0;
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += std::abs(P(i, j));
    rowsum = std::max(rowsum, s);
  }
  int squarings = 0;
  double s = rowsum;
  while (s > 0.5) {
    s /= 2;
    ++squarings;
  }
  Mat X = scale(std::pow(0.5, squarings), P);
  Mat result = Mat::identity(n);
  Mat term = Mat::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = scale(1.0 / k, term * X);
    result = result + term;
    if (max_abs(term) < 1e-20) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

namespace {

int a_priori_steps(double tol, double kappa, double d0, int cap = 1000000) {
  if (d0 <= 0 || kappa <= 0) return 1;
  if (d0 <= tol * (1 - kappa)) return 1;
  double k = std::ceil(std::log(tol * (1 - kappa) / d0) / std::log(kappa));
  if (!(k < cap)) throw NumericalError("a priori iteration count is infeasible");
  return std::max(1, static_cast<int>(k));
}

struct IterationOutcome {
  VectorMeasure mu;
  double d0 = 0;
  int iterations = 0;
  double drop_budget = 0;
  double mk_bound = 0;
  std::vector<TraceRow> trace;
};

IterationOutcome iterate(const MarkovOperator& op, const VectorMeasure& seed, double tol,
                         double kappa, const SolveOptions& opt) {
  IterationOutcome out;
  VectorMeasure mu = seed;
  VectorMeasure next = apply(op, mu);
  {
    PruneResult pr = prune(next, opt.prune_eps_factor * total_variation(next), opt.atom_budget);
    out.drop_budget += pr.dropped_variation;
    out.mk_bound += pr.coalesce_mk_bound;
    next = std::move(pr.measure);
  }
  out.d0 = total_variation(linear_combine(1.0, next, -1.0, mu));
  int steps = opt.force_iterations ? *opt.force_iterations : a_priori_steps(tol, kappa, out.d0);
  out.trace.push_back({1, out.d0, static_cast<int>(next.atoms.size()), out.drop_budget});
  mu = std::move(next);
  for (int k = 2; k <= steps; ++k) {
    VectorMeasure stepm = apply(op, mu);
    PruneResult pr = prune(stepm, opt.prune_eps_factor * total_variation(stepm), opt.atom_budget);
    out.drop_budget += pr.dropped_variation;
    out.mk_bound += pr.coalesce_mk_bound;
    double dist = total_variation(linear_combine(1.0, pr.measure, -1.0, mu));
    out.trace.push_back({k, dist, static_cast<int>(pr.measure.atoms.size()), out.drop_budget});
    mu = std::move(pr.measure);
  }
  out.iterations = steps;
  out.mu = std::move(mu);
  return out;
}

}  // namespace

SolveResult solve_h1(const MarkovOperator& op, const SolveOptions& opt) {
  if (op.model != Model::H1) throw std::invalid_argument("solve_h1 needs an H1 operator");
  op.check_valid();
  ContractionBounds b = bounds(op);
  if (!b.contracts_mk_star && !opt.force_iterations)
    throw SolverRefusal("no contraction: c = " + std::to_string(b.c) +
                        " >= 1; force an iteration count to override");
  VectorMeasure seed = opt.seed ? *opt.seed : VectorMeasure::dirac(0.0, op.v, op.n);
  if (norm2(sub(total_mass(seed), op.v)) > 1e-12)
    throw std::invalid_argument("seed total mass must equal the prescribed vector");

  IterationOutcome out = iterate(op, seed, opt.tol, b.c, opt);

  SolveResult res;
  res.measure = std::move(out.mu);
  SolveReport& rep = res.report;
  rep.iterations = out.iterations;
  rep.factor = b.c;
  rep.metric = Metric::MKStar;
  rep.d0 = out.d0;
  rep.tol = opt.tol;
  rep.e = b.e;
  rep.c = b.c;
  rep.d = b.d;
  rep.sum_R_identity = true;  // validated at construction
  rep.norm_sum_le_one = b.e <= 1.0 + 1e-12;
  rep.forced = opt.force_iterations.has_value();
  rep.prune_drop_budget = out.drop_budget;
  rep.prune_mk_bound = out.mk_bound;
  rep.trace = std::move(out.trace);
  VectorMeasure defect = linear_combine(1.0, apply(op, res.measure), -1.0, res.measure);
  rep.residual_variation = total_variation(defect);
  rep.residual_mk_star = mk_star_norm(defect, opt.tol);
  return res;
}

SolveResult solve_h2(const MarkovOperator& op, const SolveOptions& opt) {
  if (op.model != Model::H2) throw std::invalid_argument("solve_h2 needs an H2 operator");
  op.check_valid();
  ContractionBounds b = bounds(op);
  Metric metric;
  double kappa;
  if (b.contracts_variation) {
    metric = Metric::Variation;
    kappa = b.e;
  } else if (b.contracts_mk) {
    metric = Metric::MK;
    kappa = b.d;
  } else if (opt.force_iterations) {
    metric = Metric::Variation;
    kappa = b.e;
  } else {
    throw SolverRefusal("no contraction: e = " + std::to_string(b.e) + ", d = " +
                        std::to_string(b.d) + "; force an iteration count to override");
  }
  VectorMeasure seed = opt.seed ? *opt.seed : *op.mu0;

  IterationOutcome out = iterate(op, seed, opt.tol, kappa, opt);

  SolveResult res;
  res.measure = std::move(out.mu);
  SolveReport& rep = res.report;
  rep.iterations = out.iterations;
  rep.factor = kappa;
  rep.metric = metric;
  rep.d0 = out.d0;
  rep.tol = opt.tol;
  rep.e = b.e;
  rep.c = b.c;
  rep.d = b.d;
  rep.norm_sum_le_one = b.e <= 1.0 + 1e-12;
  rep.forced = opt.force_iterations.has_value();
  rep.prune_drop_budget = out.drop_budget;
  rep.prune_mk_bound = out.mk_bound;
  rep.trace = std::move(out.trace);
  VectorMeasure defect = linear_combine(1.0, apply(op, res.measure), -1.0, res.measure);
  rep.residual_variation = total_variation(defect);
  return res;
}

ConstantSolveResult solve_constant(const ConstantSystem& sys) {
  if (sys.points.size() != sys.ops.size() || sys.points.empty())
    throw std::invalid_argument("constant system needs matching points and operators");
  int n = sys.mu0.n;
  for (const Mat& R : sys.ops)
    if (!R.square() || R.rows != n) throw std::invalid_argument("operator dimension mismatch");
  for (size_t i = 0; i < sys.points.size(); ++i) {
    if (!(sys.points[i] >= 0.0 && sys.points[i] <= 1.0))
      throw std::invalid_argument("constant map point outside [0,1]");
    for (size_t j = i + 1; j < sys.points.size(); ++j)
      if (sys.points[i] == sys.points[j]) throw std::invalid_argument("constant map points must be distinct");
  }
  Mat R(n, n);
  ConstantSolveResult res;
  for (const Mat& Ri : sys.ops) {
    R = R + Ri;
    res.e += operator_norm(Ri);
  }
  res.warned_no_contraction = res.e >= 1.0;
  Mat inv = invert(Mat::identity(n) - R);
  Vec v0 = total_mass(sys.mu0);
  res.mu_total = matvec(inv, v0);
  res.measure = sys.mu0;
  for (size_t i = 0; i < sys.points.size(); ++i) {
    Vec w = matvec(sys.ops[i], res.mu_total);
    VectorMeasure d = VectorMeasure::dirac(sys.points[i], w, n, sys.mu0.N);
    res.measure = linear_combine(1.0, res.measure, 1.0, d);
  }
  return res;
}

}  // namespace fracmeas
