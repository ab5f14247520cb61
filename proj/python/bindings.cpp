#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <optional>

#include "levreg/erm.hpp"
#include "levreg/errors.hpp"
#include "levreg/generate.hpp"
#include "levreg/homotopy.hpp"
#include "levreg/oracle.hpp"
#include "levreg/report.hpp"

namespace py = pybind11;
using namespace levreg;

namespace {

HomotopyOptions homotopy_options(double epsilon, std::optional<double> lambda_min, const std::string& mode,
                                 std::uint64_t seed) {
  HomotopyOptions h;
  h.epsilon = epsilon;
  h.lambda_min = lambda_min;
  h.mode = parse_mode(mode);
  h.seed = seed;
  return h;
}

}  // namespace

PYBIND11_MODULE(_levreg, m) {
  m.doc() = "Leverage-score sampling least squares and ERM solvers";

  py::register_exception<Error>(m, "LevregError");

  py::class_<SparseMatrix>(m, "SparseMatrix")
      .def_static("from_dense", &SparseMatrix::from_dense, py::arg("a"), py::arg("drop_below") = 0.0)
      .def_static(
          "from_triplets",
          [](Index rows, Index cols, const std::vector<Index>& r, const std::vector<Index>& c,
             const std::vector<double>& v) {
            if (r.size() != c.size() || r.size() != v.size())
              throw DimensionMismatch("triplet arrays differ in length");
            std::vector<std::tuple<Index, Index, double>> t;
            for (std::size_t k = 0; k < r.size(); ++k) t.emplace_back(r[k], c[k], v[k]);
            return SparseMatrix::from_triplets(rows, cols, std::move(t));
          },
          py::arg("rows"), py::arg("cols"), py::arg("row"), py::arg("col"), py::arg("val"))
      .def_property_readonly("shape", [](const SparseMatrix& a) { return py::make_tuple(a.rows(), a.cols()); })
      .def("to_dense", &SparseMatrix::to_dense)
      .def("apply", [](const SparseMatrix& a, const Vector& x) { return a.apply(x); })
      .def("apply_t", [](const SparseMatrix& a, const Vector& y) { return a.apply_t(y); });

  m.def(
      "generate",
      [](const std::string& kind, Index n, Index d, double kappa, std::uint64_t seed, double density) {
        GenerateOptions o;
        o.density = density;
        Instance inst = generate(parse_instance_kind(kind), n, d, kappa, seed, o);
        return py::make_tuple(std::move(inst.a), std::move(inst.b));
      },
      py::arg("kind") = "gaussian", py::arg("n"), py::arg("d"), py::arg("kappa") = 1.0, py::arg("seed") = 0,
      py::arg("density") = 1.0);

  m.def(
      "solve",
      [](const SparseMatrix& a, const Vector& b, std::optional<Vector> x0, double epsilon,
         std::optional<double> lambda_min, const std::string& mode, std::uint64_t seed) {
        const Vector start = x0 ? *x0 : Vector(Vector::Zero(a.cols()));
        SolveResult r = homotopy_solve(a, b, start, homotopy_options(epsilon, lambda_min, mode, seed));
        return py::make_tuple(std::move(r.x), to_json(r.report).dump());
      },
      py::arg("a"), py::arg("b"), py::arg("x0") = py::none(), py::arg("epsilon") = 1e-8,
      py::arg("lambda_min") = py::none(), py::arg("mode") = "fast", py::arg("seed") = 0,
      "Homotopy least squares. Returns (x, report_json).");

  m.def(
      "leverage",
      [](const SparseMatrix& a, std::optional<double> lambda_min, const std::string& mode, std::uint64_t seed) {
        LeverageBootstrap r = homotopy_leverage(a, homotopy_options(1e-8, lambda_min, mode, seed));
        return py::make_tuple(std::move(r.u), to_json(r.report).dump());
      },
      py::arg("a"), py::arg("lambda_min") = py::none(), py::arg("mode") = "fast", py::arg("seed") = 0,
      "Leverage overestimates from the eta phases. Returns (u, report_json).");

  m.def(
      "erm",
      [](const SparseMatrix& a, const std::string& psi, std::optional<Vector> b, std::optional<Vector> x0,
         double epsilon, std::optional<double> lambda_min, const std::string& mode, std::uint64_t seed) {
        const ErmProblem p = make_erm_problem(a, psi, b ? *b : Vector());
        ErmOptions o;
        o.lambda_min = lambda_min;
        o.mode = parse_mode(mode);
        o.seed = seed;
        const Vector start = x0 ? *x0 : Vector(Vector::Zero(a.cols()));
        ErmResult r = erm_full_solve(p, start, epsilon, o);
        return py::make_tuple(std::move(r.x), to_json(r.report).dump());
      },
      py::arg("a"), py::arg("psi") = "logistic-aug", py::arg("b") = py::none(), py::arg("x0") = py::none(),
      py::arg("epsilon") = 1e-6, py::arg("lambda_min") = py::none(), py::arg("mode") = "fast", py::arg("seed") = 0,
      "Minimize sum_i psi_i(a_i^T x). Returns (x, report_json).");

  m.def(
      "erm_value_grad",
      [](const SparseMatrix& a, const std::string& psi, std::optional<Vector> b, const Vector& x) {
        return erm_value_grad(make_erm_problem(a, psi, b ? *b : Vector()), x);
      },
      py::arg("a"), py::arg("psi"), py::arg("b") = py::none(), py::arg("x"));

  m.def("oracle_solve", py::overload_cast<const SparseMatrix&, const Vector&>(&oracle_solve));
  m.def("oracle_leverage", py::overload_cast<const SparseMatrix&>(&oracle_leverage));
  m.def("oracle_spectral", [](const SparseMatrix& a) {
    const SpectralBounds s = oracle_spectral(a);
    return py::dict(py::arg("lambda_min") = s.lambda_min, py::arg("lambda_max") = s.lambda_max,
                    py::arg("kappa") = s.kappa);
  });
}
