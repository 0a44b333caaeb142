#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracmeas/criteria.hpp"
#include "fracmeas/io.hpp"
#include "fracmeas/l2_embed.hpp"
#include "fracmeas/mk_norm.hpp"
#include "fracmeas/scenario.hpp"
#include "fracmeas/solver.hpp"

namespace py = pybind11;
using namespace fracmeas;

namespace {

Mat mat_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("matrix must be nonempty");
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows; ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols)
      throw std::invalid_argument("matrix rows must have equal length");
    for (int j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> mat_rows(const Mat& m) {
  std::vector<std::vector<double>> rows(static_cast<size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) rows[i].push_back(m(i, j));
  return rows;
}

MarkovOperator build_operator(const std::string& model,
                              const std::vector<std::tuple<double, double,
                                                           std::vector<std::vector<double>>>>& terms,
                              const std::optional<VectorMeasure>& mu0,
                              const std::optional<Vec>& v) {
  std::vector<MarkovTerm> ts;
  for (const auto& [a, b, rows] : terms) ts.push_back({LipMap(a, b), mat_from_rows(rows)});
  if (model == "H") return MarkovOperator::h(std::move(ts));
  if (model == "H1") {
    if (!v) throw std::invalid_argument("H1 needs the prescribed total mass v");
    return MarkovOperator::h1(std::move(ts), *v);
  }
  if (model == "H2") {
    if (!mu0) throw std::invalid_argument("H2 needs the offset measure mu0");
    return MarkovOperator::h2(std::move(ts), *mu0);
  }
  throw std::invalid_argument("model must be H, H1 or H2");
}

SolveOptions make_options(double tol, std::optional<int> force_iterations, int atom_budget) {
  SolveOptions opt;
  opt.tol = tol;
  opt.force_iterations = force_iterations;
  opt.atom_budget = atom_budget;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_fracmeas, m) {
  m.doc() = "fixed points of Markov-type operators on vector measures";

  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<SolverRefusal>(m, "SolverRefusal");

  py::class_<LipMap>(m, "LipMap")
      .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
      .def_readonly("a", &LipMap::a)
      .def_readonly("b", &LipMap::b)
      .def("__call__", &LipMap::operator())
      .def("ratio", &LipMap::ratio);

  py::class_<BorelSet>(m, "BorelSet")
      .def(py::init<>())
      .def_static("full", &BorelSet::full)
      .def_static("point", &BorelSet::point)
      .def_static("closed", &BorelSet::closed)
      .def_static("interval", &BorelSet::interval, py::arg("lo"), py::arg("hi"),
                  py::arg("lo_closed") = true, py::arg("hi_closed") = true)
      .def("add_interval", &BorelSet::add_interval, py::return_value_policy::reference_internal,
           py::arg("lo"), py::arg("hi"), py::arg("lo_closed") = true, py::arg("hi_closed") = true)
      .def("add_point", &BorelSet::add_point, py::return_value_policy::reference_internal)
      .def("contains", &BorelSet::contains)
      .def("lebesgue", &BorelSet::lebesgue);

  py::class_<VectorMeasure>(m, "VectorMeasure")
      .def_static("zero", &VectorMeasure::zero, py::arg("n"), py::arg("N") = 2187)
      .def_static("lebesgue", &VectorMeasure::lebesgue, py::arg("value"), py::arg("N") = 2187)
      .def_static("dirac", &VectorMeasure::dirac, py::arg("t"), py::arg("value"), py::arg("n"),
                  py::arg("N") = 2187)
      .def_readonly("n", &VectorMeasure::n)
      .def_readonly("N", &VectorMeasure::N)
      .def("set_atom",
           [](VectorMeasure& mu, double t, const Vec& v) {
             if (static_cast<int>(v.size()) != mu.n)
               throw std::invalid_argument("atom value dimension mismatch");
             mu.atoms[t] = v;
           })
      .def("atom_positions",
           [](const VectorMeasure& mu) {
             std::vector<double> out;
             for (const auto& [t, v] : mu.atoms) out.push_back(t);
             return out;
           })
      .def("eval", [](const VectorMeasure& mu, const BorelSet& B) { return eval(mu, B); })
      .def("total_mass", [](const VectorMeasure& mu) { return total_mass(mu); })
      .def("total_variation",
           [](const VectorMeasure& mu) { return total_variation(mu); })
      .def("to_json", [](const VectorMeasure& mu) { return measure_to_json(mu).dump(2); })
      .def_static("from_json", [](const std::string& text) {
        return measure_from_json(nlohmann::ordered_json::parse(text));
      });

  py::class_<MarkovOperator>(m, "MarkovOperator")
      .def_static("build", &build_operator, py::arg("model"), py::arg("terms"),
                  py::arg("mu0") = std::nullopt, py::arg("v") = std::nullopt)
      .def_property_readonly("n", [](const MarkovOperator& op) { return op.n; })
      .def("bounds",
           [](const MarkovOperator& op) {
             ContractionBounds b = bounds(op);
             py::dict d;
             d["e"] = b.e;
             d["c"] = b.c;
             d["d"] = b.d;
             d["contracts_variation"] = b.contracts_variation;
             d["contracts_mk"] = b.contracts_mk;
             d["contracts_mk_star"] = b.contracts_mk_star;
             return d;
           })
      .def("apply", [](const MarkovOperator& op, const VectorMeasure& mu) { return apply(op, mu); });

  m.def(
      "solve",
      [](const MarkovOperator& op, double tol, std::optional<int> force_iterations,
         int atom_budget) {
        SolveOptions opt = make_options(tol, force_iterations, atom_budget);
        SolveResult r = op.model == Model::H1 ? solve_h1(op, opt) : solve_h2(op, opt);
        return py::make_tuple(r.measure, solve_report_to_json(r.report).dump());
      },
      py::arg("op"), py::arg("tol") = 1e-8, py::arg("force_iterations") = std::nullopt,
      py::arg("atom_budget") = 100000,
      "iterate to the fixed point; returns (measure, report JSON text)");

  m.def(
      "mk_norm", [](const VectorMeasure& mu, double tol) { return mk_norm(mu, tol); },
      py::arg("mu"), py::arg("tol") = 1e-3);
  m.def(
      "mk_star_norm", [](const VectorMeasure& mu, double tol) { return mk_star_norm(mu, tol); },
      py::arg("mu"), py::arg("tol") = 1e-3);
  m.def(
      "norms", [](const VectorMeasure& mu, double tol) { return norms_json(mu, tol).dump(); },
      py::arg("mu"), py::arg("tol") = 1e-3, "the norms report block as JSON text");

  m.def("operator_norm", [](const std::vector<std::vector<double>>& rows) {
    return operator_norm(mat_from_rows(rows));
  });
  m.def("matrix_exp", [](const std::vector<std::vector<double>>& rows) {
    return mat_rows(matrix_exp(mat_from_rows(rows)));
  });

  m.def(
      "run_config", &run_config_file, py::arg("config_path"), py::arg("out_dir"),
      "run a scenario config file; returns the process exit code");

  m.def(
      "verify",
      [](const std::string& filter, double min_tol) {
        CriteriaReport rep = run_criteria({filter, min_tol, 0.0});
        py::list rows;
        for (const CriterionRow& r : rep.rows) {
          py::dict d;
          d["criterion"] = r.criterion;
          d["claim"] = r.claim;
          d["target"] = r.target;
          d["computed"] = r.computed;
          d["abs_err"] = r.abs_err;
          d["tol"] = r.tol;
          d["pass"] = r.pass;
          rows.append(std::move(d));
        }
        return py::make_tuple(rep.all_pass, rows);
      },
      py::arg("filter") = "", py::arg("min_tol") = 0.0,
      "run the built-in acceptance criteria; returns (all_pass, rows)");
}
