#include "fracmeas/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracmeas {

double parse_real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw std::invalid_argument("expected a number or a numeric string");
  const std::string s = j.get<std::string>();
  size_t slash = s.find('/');
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  if (slash != std::string::npos) {
    double p = std::strtod(begin, &end);
    if (end != begin + slash) throw std::invalid_argument("bad rational numerator: " + s);
    double q = std::strtod(begin + slash + 1, &end);
    if (*end != '\0' || errno == ERANGE) throw std::invalid_argument("bad rational: " + s);
    if (q == 0.0) throw std::invalid_argument("rational with zero denominator: " + s);
    return p / q;
  }
  double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument("bad numeric string: " + s);
  return x;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

Vec vec_from_json(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw std::invalid_argument("expected a vector of dimension " + std::to_string(n));
  Vec v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = parse_real(j[i]);
  return v;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

json measure_to_json(const VectorMeasure& mu) {
  json out;
  out["n"] = mu.n;
  json atoms = json::array();
  for (const auto& [t, v] : mu.atoms) {
    json a;
    a["t"] = t;
    a["v"] = vec_to_json(v);
    atoms.push_back(std::move(a));
  }
  out["atoms"] = std::move(atoms);
  if (mu.has_density()) {
    json density;
    density["N"] = mu.N;
    json cells = json::array();
    for (const Vec& c : mu.cells) cells.push_back(vec_to_json(c.empty() ? zeros(mu.n) : c));
    density["cells"] = std::move(cells);
    out["density"] = std::move(density);
  }
  return out;
}

VectorMeasure measure_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("measure must be a JSON object");
  VectorMeasure mu;
  mu.n = j.at("n").get<int>();
  if (mu.n < 1) throw std::invalid_argument("measure dimension must be positive");
  if (j.contains("density")) {
    const json& d = j.at("density");
    mu.N = d.at("N").get<int>();
    if (mu.N < 1) throw std::invalid_argument("density resolution must be positive");
    const json& cells = d.at("cells");
    if (!cells.is_array() || static_cast<int>(cells.size()) != mu.N)
      throw std::invalid_argument("density needs exactly N cell vectors");
    mu.cells.resize(cells.size());
    for (size_t k = 0; k < cells.size(); ++k) mu.cells[k] = vec_from_json(cells[k], mu.n);
  }
  if (j.contains("atoms")) {
    for (const json& a : j.at("atoms")) {
      double t = parse_real(a.at("t"));
      Vec v = vec_from_json(a.at("v"), mu.n);
      auto [it, fresh] = mu.atoms.try_emplace(t, std::move(v));
      if (!fresh) it->second = add(it->second, v);
    }
  }
  mu.check_valid();
  return mu;
}

std::string measure_to_csv(const VectorMeasure& mu) {
  std::ostringstream out;
  out << "kind,location";
  for (int i = 1; i <= mu.n; ++i) out << ",v_" << i;
  out << "\n";
  for (const auto& [t, v] : mu.atoms) {
    out << "atom," << format_double(t);
    for (double x : v) out << "," << format_double(x);
    out << "\n";
  }
  for (size_t k = 0; k < mu.cells.size(); ++k) {
    const Vec& c = mu.cells[k];
    if (c.empty()) continue;
    bool nonzero = false;
    for (double x : c) nonzero |= (x != 0.0);
    if (!nonzero) continue;
    out << "cell," << k;
    for (double x : c) out << "," << format_double(x);
    out << "\n";
  }
  return out.str();
}

json mat_to_json(const Mat& R) {
  json out = json::array();
  for (int i = 0; i < R.rows; ++i) {
    json row = json::array();
    for (int j2 = 0; j2 < R.cols; ++j2) row.push_back(R(i, j2));
    out.push_back(std::move(row));
  }
  return out;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a nonempty array");
  int rows = static_cast<int>(j.size());
  if (!j[0].is_array() || j[0].empty())
    throw std::invalid_argument("matrix rows must be nonempty arrays");
  int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
      throw std::invalid_argument("matrix rows must all have the same length");
    for (int k = 0; k < cols; ++k) m(i, k) = parse_real(j[i][k]);
  }
  return m;
}

json borel_to_json(const BorelSet& B) {
  json out;
  json intervals = json::array();
  for (const Interval& iv : B.intervals()) {
    json o;
    o["lo"] = iv.lo;
    o["hi"] = iv.hi;
    o["lo_closed"] = iv.lo_closed;
    o["hi_closed"] = iv.hi_closed;
    intervals.push_back(std::move(o));
  }
  out["intervals"] = std::move(intervals);
  json points = json::array();
  for (double p : B.points()) points.push_back(p);
  out["points"] = std::move(points);
  return out;
}

BorelSet borel_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "full") return BorelSet::full();
  if (j.is_number() || j.is_string()) return BorelSet::point(parse_real(j));
  if (j.is_array()) {
    if (j.size() != 2) throw std::invalid_argument("interval shorthand needs [lo, hi]");
    return BorelSet::closed(parse_real(j[0]), parse_real(j[1]));
  }
  if (!j.is_object()) throw std::invalid_argument("unrecognized Borel set description");
  BorelSet B;
  if (j.contains("intervals")) {
    for (const json& o : j.at("intervals"))
      B.add_interval(parse_real(o.at("lo")), parse_real(o.at("hi")),
                     o.value("lo_closed", true), o.value("hi_closed", true));
  }
  if (j.contains("points"))
    for (const json& p : j.at("points")) B.add_point(parse_real(p));
  return B;
}

json operator_to_json(const MarkovOperator& op) {
  json out;
  json terms = json::array();
  for (const MarkovTerm& t : op.terms) {
    json o;
    o["map"] = json{{"a", t.map.a}, {"b", t.map.b}};
    o["R"] = mat_to_json(t.R);
    terms.push_back(std::move(o));
  }
  out["terms"] = std::move(terms);
  out["model"] = op.model == Model::H ? "H" : op.model == Model::H1 ? "H1" : "H2";
  if (op.model == Model::H1) out["v"] = vec_to_json(op.v);
  if (op.model == Model::H2) out["mu0"] = measure_to_json(*op.mu0);
  return out;
}

MarkovOperator operator_from_json(const json& j) {
  std::vector<MarkovTerm> terms;
  for (const json& o : j.at("terms")) {
    const json& m = o.at("map");
    terms.push_back({LipMap(parse_real(m.at("a")), parse_real(m.at("b"))),
                     mat_from_json(o.at("R"))});
  }
  const std::string model = j.at("model").get<std::string>();
  if (model == "H") return MarkovOperator::h(std::move(terms));
  if (model == "H1") {
    const json& v = j.at("v");
    Vec mass(v.size());
    for (size_t i = 0; i < v.size(); ++i) mass[i] = parse_real(v[i]);
    return MarkovOperator::h1(std::move(terms), mass);
  }
  if (model == "H2") return MarkovOperator::h2(std::move(terms), measure_from_json(j.at("mu0")));
  throw std::invalid_argument("model must be H, H1, or H2");
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Variation: return "variation";
    case Metric::MK: return "mk";
    case Metric::MKStar: return "mk_star";
  }
  return "variation";
}

json solve_report_to_json(const SolveReport& rep) {
  json out;
  out["iterations"] = rep.iterations;
  out["factor"] = rep.factor;
  out["metric"] = metric_name(rep.metric);
  out["d0"] = rep.d0;
  out["tol"] = rep.tol;
  out["residual_variation"] = rep.residual_variation;
  out["residual_mk_star"] = rep.residual_mk_star;
  out["prune_drop_budget"] = rep.prune_drop_budget;
  out["prune_mk_bound"] = rep.prune_mk_bound;
  out["forced"] = rep.forced;
  out["sum_R_identity"] = rep.sum_R_identity;
  out["norm_sum_le_one"] = rep.norm_sum_le_one;
  out["e"] = rep.e;
  out["c"] = rep.c;
  out["d"] = rep.d;
  return out;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iteration,variation_distance_to_prev,atom_count,pruning_budget\n";
  for (const TraceRow& r : trace)
    out << r.iteration << "," << format_double(r.distance_to_prev) << "," << r.atom_count << ","
        << format_double(r.pruning_budget) << "\n";
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  fs::create_directories(dir);
  fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace fracmeas
