// Acceptance gate: runs every group of the built-in reproduction suite and
// prints one pass/fail line per criterion. Exit 0 only when all pass.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "fracmeas/criteria.hpp"

int main() {
  using fracmeas::CriteriaOptions;
  using fracmeas::CriteriaReport;
  using fracmeas::CriterionRow;

  const std::vector<std::pair<int, std::string>> criteria = {
      {1, "operator-norms"},       {2, "fixed-point-atoms"},
      {3, "constant-maps"},        {4, "kernel-quadratic"},
      {5, "primitive-variation"},  {6, "exp-series"},
      {7, "classical-ifs"},        {8, "change-of-variable"},
      {9, "norm-inequalities"},    {10, "small-instance-oracle"},
      {11, "contraction-empirical"}, {12, "truncation-tail"},
  };

  bool all_pass = true;
  for (const auto& [index, group] : criteria) {
    bool pass = false;
    std::string detail;
    std::vector<CriterionRow> failing;
    try {
      CriteriaOptions opt;
      opt.filter = group;
      CriteriaReport report = fracmeas::run_criteria(opt);
      pass = report.all_pass && !report.rows.empty();
      if (report.rows.empty()) detail = "no rows produced";
      for (const CriterionRow& row : report.rows)
        if (!row.pass) failing.push_back(row);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    std::printf("criterion %2d  %-24s  %s\n", index, group.c_str(), pass ? "pass" : "FAIL");
    if (!detail.empty()) std::printf("              %s\n", detail.c_str());
    for (const CriterionRow& row : failing)
      std::printf("              %s: target %s, computed %.9g, |delta| %.3g (tol %.3g)\n",
                  row.claim.c_str(), row.target.c_str(), row.computed, row.abs_err, row.tol);
    all_pass = all_pass && pass;
  }

  std::printf("%s\n", all_pass ? "ACCEPTANCE: all 12 criteria pass" : "ACCEPTANCE: FAILED");
  return all_pass ? 0 : 1;
}
