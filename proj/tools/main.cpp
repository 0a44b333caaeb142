#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracmeas/criteria.hpp"
#include "fracmeas/io.hpp"
#include "fracmeas/scenario.hpp"
#include "fracmeas/solver.hpp"

namespace {

int cmd_run(const std::string& config, const std::string& out_dir) {
  return fracmeas::run_config_file(config, out_dir);
}

int cmd_verify(const fracmeas::CriteriaOptions& opt) {
  fracmeas::CriteriaReport report = fracmeas::run_criteria(opt);
  std::string last_group;
  for (const fracmeas::CriterionRow& row : report.rows) {
    if (row.criterion != last_group) {
      std::printf("%s\n", row.criterion.c_str());
      last_group = row.criterion;
    }
    std::printf("  %-52s  target %-28s  computed %- .9g  |delta| %.3g  %s\n", row.claim.c_str(),
                row.target.c_str(), row.computed, row.abs_err, row.pass ? "pass" : "FAIL");
  }
  if (report.rows.empty()) {
    std::fprintf(stderr, "no criteria match the filter\n");
    return 1;
  }
  std::printf("%s\n", report.all_pass ? "all criteria pass" : "CRITERIA FAILED");
  return report.all_pass ? 0 : 1;
}

int cmd_mknorm(const std::string& measure_path, bool star_only, double tol) {
  fracmeas::VectorMeasure mu =
      fracmeas::measure_from_json(nlohmann::ordered_json::parse(fracmeas::read_file(measure_path)));
  nlohmann::ordered_json norms = fracmeas::norms_json(mu, tol);
  if (star_only && norms.at("mk_star").is_null())
    throw std::invalid_argument("mk_star needs zero total mass");
  std::printf("%s\n", norms.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixed points of Markov-type operators on vector measures"};
  app.require_subcommand(1);

  std::string config, out_dir = "out";
  CLI::App* run = app.add_subcommand("run", "run the scenarios of a config file");
  run->add_option("--config", config, "config JSON file")->required();
  run->add_option("--out", out_dir, "output directory");

  fracmeas::CriteriaOptions copt;
  CLI::App* verify = app.add_subcommand("verify", "check the built-in acceptance criteria");
  verify->add_option("--filter", copt.filter, "run only criteria whose group contains this text");
  verify->add_option("--min-tol", copt.min_tol, "raise all tolerances to at least this value");
  verify->add_option("--perturb", copt.perturb,
                     "self-test: offset one fixed-point matrix entry by this much");

  std::string measure_path;
  bool star_only = false;
  double tol = 1e-3;
  CLI::App* mknorm = app.add_subcommand("mknorm", "dual norms of a measure file");
  mknorm->add_option("--measure", measure_path, "measure JSON file")->required();
  mknorm->add_flag("--star", star_only, "fail unless the modified norm applies");
  mknorm->add_option("--tol", tol, "norm tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, out_dir);
    if (verify->parsed()) return cmd_verify(copt);
    return cmd_mknorm(measure_path, star_only, tol);
  } catch (const fracmeas::SolverRefusal& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return 3;
  } catch (const fracmeas::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
