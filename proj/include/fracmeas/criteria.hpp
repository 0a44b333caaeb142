#pragma once

#include <string>
#include <vector>

namespace fracmeas {

// One row of the reproduction suite: a single checked claim.
struct CriterionRow {
  std::string criterion;  // group, e.g. "operator-norms"
  std::string claim;
  std::string target;     // exact target, kept as text ("5/16", "1+sqrt(2)")
  double computed = 0;
  double abs_err = 0;
  double tol = 0;
  bool pass = false;
};

struct CriteriaOptions {
  std::string filter;  // run only groups whose name contains this substring
  double min_tol = 0;  // raise every tolerance to at least this value
  double perturb = 0;  // self-test: offset one fixed-point matrix entry
};

struct CriteriaReport {
  std::vector<CriterionRow> rows;
  bool all_pass = true;
};

// Runs the built-in reproduction suite. Deterministic: all randomized checks
// use fixed seeds.
CriteriaReport run_criteria(const CriteriaOptions& opt = {});

}  // namespace fracmeas
