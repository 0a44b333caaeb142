#include "fracmeas/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <thread>

#include "fracmeas/l2_embed.hpp"
#include "fracmeas/mk_norm.hpp"

namespace fracmeas {

namespace {

const std::set<std::string> kKinds = {"h1", "h2", "constant", "countable", "l2_kernel", "norms"};

void require_name(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("scenario name must not be empty");
  for (char ch : name) {
    bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
              ch == '-' || ch == '_' || ch == '.';
    if (!ok)
      throw std::invalid_argument("scenario name may only use letters, digits, '-', '_', '.'");
  }
  if (name == "." || name == "..") throw std::invalid_argument("scenario name is reserved");
}

SolveOptions parse_solve(const json& j) {
  SolveOptions opt;
  if (!j.contains("solve")) return opt;
  const json& s = j.at("solve");
  if (s.contains("tol")) {
    opt.tol = parse_real(s.at("tol"));
    if (!(opt.tol > 0)) throw std::invalid_argument("solve.tol must be positive");
  }
  if (s.contains("force_iterations")) {
    opt.force_iterations = s.at("force_iterations").get<int>();
    if (*opt.force_iterations < 1)
      throw std::invalid_argument("solve.force_iterations must be at least 1");
  }
  if (s.contains("seed")) opt.seed = measure_from_json(s.at("seed"));
  if (s.contains("atom_budget")) {
    opt.atom_budget = s.at("atom_budget").get<int>();
    if (opt.atom_budget < 1) throw std::invalid_argument("solve.atom_budget must be positive");
  }
  if (s.contains("prune_eps_factor")) {
    opt.prune_eps_factor = parse_real(s.at("prune_eps_factor"));
    if (opt.prune_eps_factor < 0)
      throw std::invalid_argument("solve.prune_eps_factor must not be negative");
  }
  return opt;
}

std::vector<LipMap> parse_maps(const json& arr) {
  std::vector<LipMap> maps;
  for (const json& m : arr) maps.emplace_back(parse_real(m.at("a")), parse_real(m.at("b")));
  return maps;
}

json bounds_to_json(const ContractionBounds& b) {
  json out;
  out["e"] = b.e;
  out["c"] = b.c;
  out["d"] = b.d;
  out["contracts_variation"] = b.contracts_variation;
  out["contracts_mk"] = b.contracts_mk;
  out["contracts_mk_star"] = b.contracts_mk_star;
  return out;
}

json vec_out(const Vec& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

// Internals of a dispatched run, before golden evaluation.
struct RunPieces {
  json blocks = json::object();             // kind-specific report entries
  std::optional<VectorMeasure> measure;     // what probes evaluate against
  std::vector<TraceRow> trace;
  std::optional<MKComputation> mk;          // norms kind
  std::optional<double> mk_star;            // norms kind, empty when invalid
  double variation = 0;                     // norms kind
  bool certified = false;                   // norms kind
};

RunPieces run_h1(const Scenario& s) {
  RunPieces out;
  SolveResult r = solve_h1(*s.op, s.solve);
  out.blocks["bounds"] = bounds_to_json({r.report.e, r.report.c, r.report.d, r.report.e < 1,
                                         r.report.d < 1, r.report.c < 1});
  out.blocks["solve"] = solve_report_to_json(r.report);
  out.trace = r.report.trace;
  out.measure = std::move(r.measure);
  return out;
}

RunPieces run_h2(const Scenario& s) {
  RunPieces out;
  SolveResult r = solve_h2(*s.op, s.solve);
  out.blocks["bounds"] = bounds_to_json(bounds(*s.op));
  out.blocks["solve"] = solve_report_to_json(r.report);
  out.trace = r.report.trace;
  out.measure = std::move(r.measure);
  return out;
}

// Shared by "constant" and the constant-map presets of "countable".
RunPieces run_constant_system(const ConstantSystem& sys, const Scenario& s) {
  RunPieces out;
  ConstantSolveResult r = solve_constant(sys);
  json cf;
  cf["mu_total"] = vec_out(r.mu_total);
  cf["e"] = r.e;
  cf["warned_no_contraction"] = r.warned_no_contraction;
  out.blocks["closed_form"] = std::move(cf);

  if (s.cross_check) {
    std::vector<MarkovTerm> terms;
    for (size_t i = 0; i < sys.points.size(); ++i)
      terms.push_back({LipMap::constant(sys.points[i]), sys.ops[i]});
    SolveResult it = solve_h2(MarkovOperator::h2(std::move(terms), sys.mu0), s.solve);
    double worst = 0;
    std::vector<BorelSet> sets = s.probe_sets;
    if (sets.empty()) sets.push_back(BorelSet::full());
    for (const BorelSet& B : sets)
      worst = std::max(worst, norm2(sub(eval(it.measure, B), eval(r.measure, B))));
    json cc;
    cc["iterations"] = it.report.iterations;
    cc["max_probe_delta"] = worst;
    out.blocks["cross_check"] = std::move(cc);
    out.trace = it.report.trace;
  }
  out.measure = std::move(r.measure);
  return out;
}

RunPieces run_countable(const Scenario& s) {
  CountableFamily fam = s.preset == "exp_series" ? exp_series_family(s.preset_matrix)
                                                 : geometric_family(s.preset_ratio, s.preset_matrix);
  TruncationResult tr = truncate(fam, s.truncate_eps);
  RunPieces out;

  if (s.preset == "exp_series") {
    ConstantSystem sys;
    for (const MarkovTerm& t : tr.terms) {
      sys.points.push_back(t.map.b);
      sys.ops.push_back(t.R);
    }
    sys.mu0 = *s.offset;
    out = run_constant_system(sys, s);
  } else {
    MarkovOperator op = MarkovOperator::h2(tr.terms, *s.offset);
    SolveResult r = solve_h2(op, s.solve);
    out.blocks["bounds"] = bounds_to_json(bounds(op));
    out.blocks["solve"] = solve_report_to_json(r.report);
    out.trace = r.report.trace;
    out.measure = std::move(r.measure);
  }
  json trunc;
  trunc["M"] = tr.M;
  trunc["tail"] = tr.tail;
  out.blocks["truncation"] = std::move(trunc);
  return out;
}

RunPieces run_l2(const Scenario& s) {
  Quadrature quad = Quadrature::gauss_legendre(s.Q);
  std::vector<MarkovTerm> terms;
  json kernel_norms = json::array();
  double e = 0;
  for (size_t i = 0; i < s.kernels.size(); ++i) {
    Mat R = discretize_kernel(parse_kernel_expr(s.kernels[i]), quad);
    double nrm = operator_norm(R);
    kernel_norms.push_back(nrm);
    e += nrm;
    terms.push_back({s.maps[i], std::move(R)});
  }
  VectorMeasure mu0 = primitive_measure(quad, s.N);
  mu0 = linear_combine(s.mu0_scale, mu0, 0.0, VectorMeasure::zero(mu0.n, s.N));
  MarkovOperator op = MarkovOperator::h2(std::move(terms), mu0);

  RunPieces out;
  SolveResult r = solve_h2(op, s.solve);
  double mu0_norm = s.mu0_scale * primitive_variation();
  json l2;
  l2["Q"] = s.Q;
  l2["N"] = s.N;
  l2["kernel_norms"] = std::move(kernel_norms);
  l2["contraction_sum"] = e;
  l2["mu0_norm"] = mu0_norm;
  l2["ball_check"] = mu0_norm + e <= 1.0;
  out.blocks["l2"] = std::move(l2);
  out.blocks["solve"] = solve_report_to_json(r.report);
  out.trace = r.report.trace;
  out.measure = std::move(r.measure);
  return out;
}

RunPieces norms_pieces(const VectorMeasure& mu, double tol) {
  RunPieces out;
  out.mk = mk_norm_detail(mu, tol);
  out.variation = total_variation(mu);
  if (norm2(total_mass(mu)) <= 1e-10 * std::max(1.0, out.variation))
    out.mk_star = mk_star_norm(mu, tol);

  // Small instances are cross-checked against the exhaustive grid reference.
  std::vector<double> support;
  std::vector<Vec> masses;
  for (const auto& [t, v] : mu.atoms) {
    support.push_back(t);
    masses.push_back(v);
  }
  if (!mu.has_density() && mu.n <= 2 && support.size() <= 4 && !support.empty()) {
    bool ok = std::abs(out.mk->value - bl_oracle(support, masses, NormMode::BL)) <= 1e-2;
    if (out.mk_star)
      ok = ok && std::abs(*out.mk_star - bl_oracle(support, masses, NormMode::L)) <= 1e-2;
    out.certified = ok;
  }
  json norms;
  norms["mk"] = out.mk->value;
  norms["mk_star"] = out.mk_star ? json(*out.mk_star) : json(nullptr);
  norms["variation"] = out.variation;
  norms["tol"] = tol;
  norms["certified_small_instance"] = out.certified;
  out.blocks["norms"] = std::move(norms);
  out.measure = mu;
  return out;
}

RunPieces run_norms(const Scenario& s) { return norms_pieces(*s.norm_measure, s.solve.tol); }

}  // namespace

json norms_json(const VectorMeasure& mu, double tol) {
  return norms_pieces(mu, tol).blocks.at("norms");
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  if (j.contains("spec") && j.at("spec").get<int>() != 1)
    throw std::invalid_argument("unsupported spec version");
  Scenario s;
  s.name = j.at("name").get<std::string>();
  require_name(s.name);
  s.kind = j.at("kind").get<std::string>();
  if (!kKinds.count(s.kind)) throw std::invalid_argument("unknown scenario kind: " + s.kind);

  s.N = j.value("N", s.kind == "l2_kernel" ? 243 : 2187);
  if (s.N < 1) throw std::invalid_argument("N must be positive");
  s.solve = parse_solve(j);

  int n = 0;  // value dimension probes must match, 0 while unknown
  if (s.kind == "h1" || s.kind == "h2") {
    s.op = operator_from_json(j.at("operator"));
    Model want = s.kind == "h1" ? Model::H1 : Model::H2;
    if (s.op->model != want)
      throw std::invalid_argument("operator model does not match the scenario kind");
    n = s.op->n;
  } else if (s.kind == "constant") {
    const json& sys = j.at("system");
    ConstantSystem cs;
    for (const json& p : sys.at("points")) cs.points.push_back(parse_real(p));
    for (const json& m : sys.at("R")) cs.ops.push_back(mat_from_json(m));
    if (cs.points.size() != cs.ops.size() || cs.points.empty())
      throw std::invalid_argument("system needs matching nonempty points and R lists");
    cs.mu0 = measure_from_json(sys.at("mu0"));
    s.system = std::move(cs);
    s.cross_check = j.value("cross_check", false);
    n = s.system->mu0.n;
  } else if (s.kind == "countable") {
    const json& fam = j.at("family");
    s.preset = fam.at("preset").get<std::string>();
    if (s.preset == "exp_series") {
      s.preset_matrix = mat_from_json(fam.at("P"));
    } else if (s.preset == "geometric") {
      s.preset_ratio = parse_real(fam.at("ratio"));
      if (!(s.preset_ratio > 0 && s.preset_ratio < 1))
        throw std::invalid_argument("geometric ratio must lie in (0,1)");
      s.preset_matrix = mat_from_json(fam.at("seed"));
    } else {
      throw std::invalid_argument("unknown family preset: " + s.preset);
    }
    if (!s.preset_matrix.square()) throw std::invalid_argument("family matrix must be square");
    s.truncate_eps = j.contains("eps") ? parse_real(j.at("eps")) : 1e-12;
    if (!(s.truncate_eps > 0)) throw std::invalid_argument("eps must be positive");
    s.offset = measure_from_json(j.at("mu0"));
    if (s.offset->n != s.preset_matrix.rows)
      throw std::invalid_argument("mu0 dimension does not match the family matrix");
    n = s.offset->n;
  } else if (s.kind == "l2_kernel") {
    for (const json& k : j.at("kernels")) {
      std::string expr = k.at("expr").get<std::string>();
      parse_kernel_expr(expr);  // reject bad grammar at parse time
      s.kernels.push_back(std::move(expr));
    }
    if (s.kernels.empty()) throw std::invalid_argument("l2_kernel needs at least one kernel");
    s.Q = j.value("Q", 64);
    if (s.Q < 1 || s.Q > 512) throw std::invalid_argument("Q out of range");
    if (j.contains("maps")) {
      s.maps = parse_maps(j.at("maps"));
    } else {
      if (s.kernels.size() != 2)
        throw std::invalid_argument("default maps cover exactly two kernels; give maps explicitly");
      s.maps = {LipMap(1.0 / 3.0, 0.0), LipMap(1.0 / 3.0, 2.0 / 3.0)};
    }
    if (s.maps.size() != s.kernels.size())
      throw std::invalid_argument("maps and kernels must have equal length");
    s.mu0_scale = j.contains("mu0_scale") ? parse_real(j.at("mu0_scale")) : 0.5;
    if (j.contains("golden")) {
      const json& g = j.at("golden");
      s.golden_alpha = parse_real(g.at("alpha"));
      s.golden_beta = parse_real(g.at("beta"));
      if (g.contains("tol")) s.golden_tol = parse_real(g.at("tol"));
      if (g.contains("phi_tol")) s.golden_phi_tol = parse_real(g.at("phi_tol"));
      // The quadratic closed form is tied to the bundled kernel pair; refuse
      // golden blocks on anything else.
      Quadrature quad = Quadrature::gauss_legendre(s.Q);
      Mat want1 = discretize_kernel([](double x, double y) { return x * y / 4.0; }, quad);
      Mat want2 =
          discretize_kernel([](double x, double y) { return x * x * y * y / 4.0; }, quad);
      bool match = s.kernels.size() == 2 && s.mu0_scale == 0.5 &&
                   s.maps[0].a == 1.0 / 3.0 && s.maps[0].b == 0.0 &&
                   s.maps[1].a == 1.0 / 3.0 && s.maps[1].b == 2.0 / 3.0;
      if (match) {
        Mat got1 = discretize_kernel(parse_kernel_expr(s.kernels[0]), quad);
        Mat got2 = discretize_kernel(parse_kernel_expr(s.kernels[1]), quad);
        match = max_abs(got1 - want1) <= 1e-14 && max_abs(got2 - want2) <= 1e-14;
      }
      if (!match)
        throw std::invalid_argument("golden block only applies to the bundled kernel pair");
    }
    n = s.Q;
  } else if (s.kind == "norms") {
    s.norm_measure = measure_from_json(j.at("measure"));
    if (j.contains("tol")) {
      s.solve.tol = parse_real(j.at("tol"));
      if (!(s.solve.tol > 0)) throw std::invalid_argument("tol must be positive");
    } else {
      s.solve.tol = 1e-3;
    }
    n = s.norm_measure->n;
  }

  if (j.contains("probes")) {
    for (const json& p : j.at("probes")) {
      s.probes.push_back(p);
      s.probe_sets.push_back(borel_from_json(p));
    }
  }
  if (j.contains("expect")) {
    for (const json& g : j.at("expect")) {
      GoldenCheck check;
      check.probe = g.at("probe");
      check.set = borel_from_json(check.probe);
      check.expected_raw = g.at("value");
      if (!check.expected_raw.is_array())
        throw std::invalid_argument("expect value must be a vector");
      for (const json& x : check.expected_raw) check.expected.push_back(parse_real(x));
      if (n > 0 && static_cast<int>(check.expected.size()) != n)
        throw std::invalid_argument("expect value dimension mismatch");
      check.tol = g.contains("tol") ? parse_real(g.at("tol")) : 1e-6;
      if (!(check.tol > 0)) throw std::invalid_argument("expect tol must be positive");
      s.expect.push_back(std::move(check));
    }
  }
  if (j.contains("expect_norms")) {
    const json& g = j.at("expect_norms");
    if (s.kind != "norms")
      throw std::invalid_argument("expect_norms only applies to norms scenarios");
    double tol = g.contains("tol") ? parse_real(g.at("tol")) : 1e-2;
    for (const char* key : {"mk", "mk_star", "variation"}) {
      if (!g.contains(key)) continue;
      GoldenCheck check;
      check.probe = key;
      check.expected_raw = json::array({g.at(key)});
      check.expected = {parse_real(g.at(key))};
      check.tol = tol;
      s.expect.push_back(std::move(check));
    }
  }
  return s;
}

std::vector<Scenario> parse_config(const json& config) {
  if (!config.is_object()) throw std::invalid_argument("config must be a JSON object");
  std::vector<Scenario> out;
  if (config.contains("scenarios")) {
    if (config.value("spec", 0) != 1) throw std::invalid_argument("config needs \"spec\": 1");
    for (const json& s : config.at("scenarios")) out.push_back(parse_scenario(s));
  } else {
    out.push_back(parse_scenario(config));
  }
  std::set<std::string> names;
  for (const Scenario& s : out)
    if (!names.insert(s.name).second)
      throw std::invalid_argument("duplicate scenario name: " + s.name);
  return out;
}

ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir) {
  namespace fs = std::filesystem;
  ScenarioResult result;
  result.name = s.name;
  fs::path dir = fs::path(out_dir) / s.name;

  auto started = std::chrono::steady_clock::now();
  RunPieces pieces;
  try {
    if (s.kind == "h1")
      pieces = run_h1(s);
    else if (s.kind == "h2")
      pieces = run_h2(s);
    else if (s.kind == "constant")
      pieces = run_constant_system(*s.system, s);
    else if (s.kind == "countable")
      pieces = run_countable(s);
    else if (s.kind == "l2_kernel")
      pieces = run_l2(s);
    else
      pieces = run_norms(s);
  } catch (const NumericalError& e) {
    result.refused = true;
    result.pass = false;
    result.message = e.what();
    json report;
    report["spec"] = 1;
    report["name"] = s.name;
    report["kind"] = s.kind;
    report["refused"] = true;
    report["message"] = result.message;
    write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
    return result;
  }

  json report;
  report["spec"] = 1;
  report["name"] = s.name;
  report["kind"] = s.kind;
  for (auto& [key, value] : pieces.blocks.items()) report[key] = value;

  json probes = json::array();
  if (pieces.measure) {
    for (size_t i = 0; i < s.probe_sets.size(); ++i) {
      json row;
      row["set"] = s.probes[i];
      row["value"] = vec_out(eval(*pieces.measure, s.probe_sets[i]));
      probes.push_back(std::move(row));
    }
  }
  report["probes"] = std::move(probes);

  json golden = json::array();
  for (const GoldenCheck& check : s.expect) {
    json row;
    row["probe"] = check.probe;
    row["expected"] = check.expected_raw;
    Vec got;
    if (s.kind == "norms" && check.probe.is_string()) {
      const std::string key = check.probe.get<std::string>();
      if (key == "mk")
        got = {pieces.mk->value};
      else if (key == "variation")
        got = {pieces.variation};
      else
        got = {pieces.mk_star ? *pieces.mk_star : std::nan("")};
    } else {
      got = eval(*pieces.measure, check.set);
    }
    double err = 0;
    for (size_t i = 0; i < got.size(); ++i)
      err = std::max(err, std::abs(got[i] - check.expected[i]));
    if (got.size() != check.expected.size() || std::isnan(err)) err = std::nan("");
    bool pass = err <= check.tol;  // false for nan
    row["computed"] = vec_out(got);
    row["abs_err"] = std::isnan(err) ? json(nullptr) : json(err);
    row["tol"] = check.tol;
    row["pass"] = pass;
    golden.push_back(std::move(row));
    result.pass = result.pass && pass;
  }

  if (s.kind == "l2_kernel" && s.golden_alpha) {
    L2Example ex = run_l2_example(s.Q, s.N, s.solve.tol);
    auto push = [&](const char* label, double computed, double expected, double tol) {
      json row;
      row["probe"] = label;
      row["expected"] = json::array({expected});
      row["computed"] = json::array({computed});
      double err = std::abs(computed - expected);
      row["abs_err"] = err;
      row["tol"] = tol;
      row["pass"] = err <= tol;
      golden.push_back(std::move(row));
      result.pass = result.pass && err <= tol;
    };
    push("alpha", ex.alpha_iter, *s.golden_alpha, s.golden_tol);
    push("beta", ex.beta_iter, *s.golden_beta, s.golden_tol);
    push("phi_max_err", ex.phi_max_err, 0.0, s.golden_phi_tol);
  }
  report["golden"] = std::move(golden);
  report["pass"] = result.pass;

  write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  if (pieces.measure) {
    write_file_atomic((dir / "measure.json").string(),
                      measure_to_json(*pieces.measure).dump(2) + "\n");
    write_file_atomic((dir / "measure.csv").string(), measure_to_csv(*pieces.measure));
  }
  write_file_atomic((dir / "trace.csv").string(), trace_to_csv(pieces.trace));

  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
  std::fprintf(stderr, "scenario %s: %.1f ms\n", s.name.c_str(), ms.count());
  return result;
}

int run_config_file(const std::string& config_path, const std::string& out_dir) {
  json config = json::parse(read_file(config_path));
  std::vector<Scenario> scenarios = parse_config(config);

  int threads = 1;
  if (const char* env = std::getenv("FM_THREADS")) {
    threads = std::atoi(env);
    if (threads < 1) throw std::invalid_argument("FM_THREADS must be a positive integer");
  } else {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min<int>(threads, static_cast<int>(scenarios.size()));

  std::vector<ScenarioResult> results(scenarios.size());
  if (threads <= 1) {
    for (size_t i = 0; i < scenarios.size(); ++i) results[i] = run_scenario(scenarios[i], out_dir);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < scenarios.size(); i = next.fetch_add(1))
        results[i] = run_scenario(scenarios[i], out_dir);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  bool refused = false, failed = false;
  for (const ScenarioResult& r : results) {
    if (r.refused) {
      refused = true;
      std::fprintf(stderr, "scenario %s refused: %s\n", r.name.c_str(), r.message.c_str());
    } else if (!r.pass) {
      failed = true;
      std::fprintf(stderr, "scenario %s: golden checks failed\n", r.name.c_str());
    }
  }
  if (refused) return 3;
  return failed ? 1 : 0;
}

}  // namespace fracmeas
