#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int status = -1;
  std::string output;  // stdout and stderr combined
};

std::string cli_path() {
  if (const char* env = std::getenv("FRACMEAS_CLI")) return env;
  return "./build/fracmeas";
}

std::string scenario_dir() {
  if (const char* env = std::getenv("FRACMEAS_SCENARIO_DIR")) return env;
  return "./scenarios";
}

CmdResult run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult res;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
  int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("fracmeas_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_text(const std::string& name, const std::string& content) {
  fs::path p = scratch() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

const char* kDipoleMeasure =
    R"({"n": 1, "atoms": [{"t": 0, "v": [1]}, {"t": 1, "v": [-1]}]})";

std::string dipole_config(const std::string& name, const std::string& mk_golden,
                          const std::string& tol) {
  return std::string("{\"name\": \"") + name + R"(", "kind": "norms",
    "measure": )" + kDipoleMeasure + R"(,
    "expect_norms": {"mk": )" + mk_golden + R"(, "variation": 2, "tol": )" + tol + "}}";
}

}  // namespace

TEST_CASE("help lists the three subcommands") {
  CmdResult r = run_cli("--help");
  CHECK(r.status == 0);
  CHECK(r.output.find("run") != std::string::npos);
  CHECK(r.output.find("verify") != std::string::npos);
  CHECK(r.output.find("mknorm") != std::string::npos);
}

TEST_CASE("a missing required option is a usage error") {
  CmdResult r = run_cli("run");
  CHECK(r.status != 0);
}

TEST_CASE("a norms config writes the full artifact set") {
  fs::path cfg = write_text("dipole.json", dipole_config("cli-dipole", "\"2/3\"", "1e-2"));
  fs::path out = scratch() / "out_a";
  CmdResult r = run_cli("run --config " + cfg.string() + " --out " + out.string());
  CHECK(r.status == 0);

  fs::path dir = out / "cli-dipole";
  for (const char* f : {"report.json", "measure.json", "measure.csv", "trace.csv"})
    CHECK(fs::exists(dir / f));

  std::ifstream in(dir / "report.json");
  json report = json::parse(in);
  CHECK(report.at("pass") == true);
  CHECK(report.at("kind") == "norms");
  CHECK(report.at("norms").at("certified_small_instance") == true);
  CHECK(std::abs(report.at("norms").at("variation").get<double>() - 2.0) <= 1e-12);
}

TEST_CASE("identical inputs produce byte-identical reports") {
  fs::path cfg = write_text("repeat.json", dipole_config("cli-repeat", "\"2/3\"", "1e-2"));
  fs::path out1 = scratch() / "rep1", out2 = scratch() / "rep2";
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out1.string()).status == 0);
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out2.string()).status == 0);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::string a = slurp(out1 / "cli-repeat" / "report.json");
  std::string b = slurp(out2 / "cli-repeat" / "report.json");
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("malformed JSON exits 2") {
  fs::path cfg = write_text("broken.json", "{ this is not json");
  CmdResult r = run_cli("run --config " + cfg.string() + " --out " + (scratch() / "x").string());
  CHECK(r.status == 2);
}

TEST_CASE("a failed golden check exits 1") {
  fs::path cfg = write_text("wrong.json", dipole_config("cli-wrong", "0.9", "1e-6"));
  fs::path out = scratch() / "out_wrong";
  CmdResult r = run_cli("run --config " + cfg.string() + " --out " + out.string());
  CHECK(r.status == 1);

  std::ifstream in(out / "cli-wrong" / "report.json");
  json report = json::parse(in);
  CHECK(report.at("pass") == false);
}

TEST_CASE("a non-contracting iteration is refused with exit 3") {
  fs::path cfg = write_text("refused.json", R"({
    "name": "cli-refused", "kind": "h1",
    "operator": {"model": "H1",
      "terms": [
        {"map": {"a": "1/3", "b": 0}, "R": [[2]]},
        {"map": {"a": "1/3", "b": "2/3"}, "R": [[-1]]}
      ],
      "v": [1]}})");
  fs::path out = scratch() / "out_refused";
  CmdResult r = run_cli("run --config " + cfg.string() + " --out " + out.string());
  CHECK(r.status == 3);

  std::ifstream in(out / "cli-refused" / "report.json");
  json report = json::parse(in);
  CHECK(report.at("refused") == true);
}

TEST_CASE("mknorm prints the dual norms of a dipole") {
  fs::path mf = write_text("dipole_measure.json", kDipoleMeasure);
  CmdResult r = run_cli("mknorm --measure " + mf.string() + " --tol 1e-3");
  CHECK(r.status == 0);
  json norms = json::parse(r.output);
  CHECK(std::abs(norms.at("mk").get<double>() - 2.0 / 3) <= 1e-2);
  CHECK(std::abs(norms.at("mk_star").get<double>() - 1.0) <= 1e-2);
  CHECK(norms.at("variation").get<double>() == 2.0);
  CHECK(norms.at("certified_small_instance") == true);
}

TEST_CASE("mknorm --star refuses a measure with mass") {
  fs::path mf = write_text("massive.json", R"({"n": 1, "atoms": [{"t": 0.5, "v": [1]}]})");
  CmdResult r = run_cli("mknorm --measure " + mf.string() + " --star");
  CHECK(r.status == 2);
}

TEST_CASE("a filtered verify group passes") {
  CmdResult r = run_cli("verify --filter operator-norms");
  CHECK(r.status == 0);
  CHECK(r.output.find("all criteria pass") != std::string::npos);
}

TEST_CASE("a filter matching nothing exits 1") {
  CmdResult r = run_cli("verify --filter no-such-group");
  CHECK(r.status == 1);
  CHECK(r.output.find("no criteria match") != std::string::npos);
}

TEST_CASE("a perturbed fixed point is caught by verify") {
  CmdResult r = run_cli("verify --filter fixed-point-atoms --perturb 1e-3");
  CHECK(r.status == 1);
  CHECK(r.output.find("FAIL") != std::string::npos);
}

TEST_CASE("bundled scenarios reproduce their golden tables") {
  fs::path out = scratch() / "bundled";
  for (const char* name : {"atoms-pair", "constant-pair", "hutchinson", "exp-series",
                           "norms-demo", "kernel-quadratic"}) {
    fs::path cfg = fs::path(scenario_dir()) / (std::string(name) + ".json");
    REQUIRE(fs::exists(cfg));
    CmdResult r = run_cli("run --config " + cfg.string() + " --out " + out.string());
    CHECK(r.status == 0);

    std::ifstream in(out / name / "report.json");
    json report = json::parse(in);
    CHECK(report.at("pass") == true);
    for (const json& row : report.at("golden")) CHECK(row.at("pass") == true);
  }
}
