#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "heatk/error.hpp"
#include "heatk/pipeline.hpp"

namespace py = pybind11;
using namespace heatk;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Cell fields cross the boundary as (ny, nx) arrays; row j is the j-th row
// of cells from the bottom edge.
ScalarField to_field(const Array& a, FieldRole role = FieldRole::coefficient) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array of shape (ny, nx)");
  const Grid grid(Domain::unit_square(), static_cast<int>(a.shape(1)),
                  static_cast<int>(a.shape(0)));
  return ScalarField(grid, std::vector<double>(a.data(), a.data() + a.size()), role);
}

Array to_array(const ScalarField& f) {
  Array out({f.grid().ny(), f.grid().nx()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

DesignSystem system_of(const Eigen::MatrixXd& A, const Eigen::VectorXd& F) {
  if (A.rows() != F.size()) throw InvalidArgument("A and F have different row counts");
  DesignSystem s;
  s.A = A;
  s.F = F;
  return s;
}

py::dict diagnostics_dict(const SolveDiagnostics& d) {
  py::dict o;
  o["residual_norm"] = d.residual_norm;
  o["penalty_value"] = d.penalty_value;
  o["iterations"] = d.iterations;
  o["converged"] = d.converged;
  o["degenerate"] = d.degenerate;
  o["gradient_norm"] = d.gradient_norm;
  o["sigma_max"] = d.conditioning.sigma_max;
  o["sigma_min"] = d.conditioning.sigma_min;
  o["condition_number"] = d.conditioning.condition_number;
  o["truncation_threshold"] = d.conditioning.threshold;
  o["rank"] = d.rank;
  o["message"] = d.message;
  return o;
}

py::dict result_dict(const InverseResult& r) {
  py::dict o;
  o["K"] = r.K;
  o["diagnostics"] = diagnostics_dict(r.diagnostics);
  o["objective_history"] = r.objective_history;
  return o;
}

std::vector<std::uint8_t> mask_of(const py::array_t<std::uint8_t, py::array::forcecast>& m) {
  return std::vector<std::uint8_t>(m.data(), m.data() + m.size());
}

PenalizerSpec penalizer_of(const std::string& kind, const DesignSystem& sys, double k_low,
                           double k_high, const std::optional<py::array_t<std::uint8_t>>& mask) {
  if (kind == "w2") {
    if (!mask) throw InvalidArgument("the w2 penalizer needs a mask");
    return W2Penalty{mask_of(*mask), k_low};
  }
  if (kind == "w1") {
    const MaterialPair pair(k_low, k_high);
    return W1Penalty{pair, W1Options{}, default_w1_init(sys, pair)};
  }
  throw InvalidArgument("penalizer must be 'w1' or 'w2'");
}

py::list points_list(const std::vector<LCurvePoint>& pts) {
  py::list out;
  for (const LCurvePoint& p : pts) {
    py::dict d;
    d["alpha"] = p.alpha;
    d["rho"] = p.rho;
    d["eta"] = p.eta;
    d["valid"] = p.valid;
    d["failed"] = p.failed;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_heatk, m) {
  m.doc() = "Two-material conductivity reconstruction from interior temperatures";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<NoCornerError>(m, "NoCornerError", PyExc_RuntimeError);
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<PhantomSpec>(m, "PhantomSpec")
      .def_readonly("name", &PhantomSpec::name)
      .def_property_readonly("k_low", [](const PhantomSpec& s) { return s.pair.low(); })
      .def_property_readonly("k_high", [](const PhantomSpec& s) { return s.pair.high(); })
      .def_readonly("T1", &PhantomSpec::T1)
      .def_readonly("T2", &PhantomSpec::T2)
      .def_readonly("c", &PhantomSpec::c)
      .def_readonly("gamma_fraction", &PhantomSpec::gamma_fraction)
      .def("conductivity_at", [](const PhantomSpec& s, double x, double y) {
        return s.conductivity_at({x, y});
      })
      .def("to_json", [](const PhantomSpec& s) { return to_json(s); });

  m.def("make_case", [](const std::string& id) { return make_case(parse_case(id)); },
        py::arg("case_id"));
  m.def("phantom_from_json", &phantom_from_json, py::arg("text"));
  m.def("rasterize",
        [](const PhantomSpec& s, int nx, int ny) {
          return to_array(rasterize(s, Grid(Domain::unit_square(), nx, ny)));
        },
        py::arg("spec"), py::arg("nx") = 100, py::arg("ny") = 100);

  m.def("forward_samples",
        [](const PhantomSpec& s, int nx, int ny, int mesh_n) {
          const SampledSolution r = forward_samples(s, Grid(Domain::unit_square(), nx, ny), mesh_n);
          py::dict d;
          d["u"] = to_array(r.u);
          d["ux"] = to_array(r.ux);
          d["uy"] = to_array(r.uy);
          return d;
        },
        py::arg("spec"), py::arg("nx") = 100, py::arg("ny") = 100, py::arg("mesh_n") = 200,
        "Forward solve on the FEM mesh, sampled at the cell centers of an nx x ny grid.");

  m.def("test_function",
        [](int mm, int n, double x, double y) {
          const ValueGrad g = TestFunction{mm, n, 0}.eval(x, y);
          return py::make_tuple(g.v, g.dx, g.dy);
        },
        py::arg("m"), py::arg("n"), py::arg("x"), py::arg("y"));
  m.def("enumerate_family",
        [](int M) {
          std::vector<std::tuple<int, int, int>> out;
          for (const TestFunction& t : enumerate_family(M)) out.emplace_back(t.m, t.n, t.r);
          return out;
        },
        py::arg("M"));

  m.def("assemble",
        [](const Array& u, const Array& ux, const Array& uy, double c, int M) {
          const ScalarField uf = to_field(u, FieldRole::temperature);
          const DesignSystem s = assemble(uf, to_field(ux), to_field(uy),
                                          ScalarField::constant(uf.grid(), c),
                                          enumerate_family(M));
          return py::make_tuple(s.A, s.F);
        },
        py::arg("u"), py::arg("ux"), py::arg("uy"), py::arg("c") = 1.0, py::arg("M") = 5);

  m.def("condition_number",
        [](const Eigen::MatrixXd& A) {
          const Conditioning c = condition_number(A);
          py::dict d;
          d["sigma_max"] = c.sigma_max;
          d["sigma_min"] = c.sigma_min;
          d["condition_number"] = c.condition_number;
          d["truncation_threshold"] = c.threshold;
          return d;
        },
        py::arg("A"));

  m.def("min_norm_least_squares",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& F, double tol) {
          return result_dict(min_norm_least_squares(system_of(A, F), tol));
        },
        py::arg("A"), py::arg("F"), py::arg("relative_tol") = -1.0);

  m.def("solve_w2",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& F,
           const py::array_t<std::uint8_t, py::array::forcecast>& mask, double reference,
           double alpha) {
          const auto b = mask_of(mask);
          MaskedTikhonovSolver solver(system_of(A, F), b, reference);
          return result_dict(solver.solve(alpha));
        },
        py::arg("A"), py::arg("F"), py::arg("mask"), py::arg("reference"), py::arg("alpha"));

  m.def("solve_w1",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& F, double k_low, double k_high,
           double alpha, std::optional<Eigen::VectorXd> init, int max_iters, double grad_tol) {
          const DesignSystem sys = system_of(A, F);
          const MaterialPair pair(k_low, k_high);
          W1Options opt;
          opt.max_iters = max_iters;
          opt.grad_tol = grad_tol;
          const Eigen::VectorXd x0 = init ? *init : default_w1_init(sys, pair);
          return result_dict(solve_w1(sys, pair, alpha, x0, opt));
        },
        py::arg("A"), py::arg("F"), py::arg("k_low"), py::arg("k_high"), py::arg("alpha"),
        py::arg("init") = py::none(), py::arg("max_iters") = 5000, py::arg("grad_tol") = 1e-8);

  m.def("w1_value_grad",
        [](const Eigen::VectorXd& K, double k_low, double k_high) {
          const PenaltyEval e = w1_value_grad(K, MaterialPair(k_low, k_high));
          return py::make_tuple(e.value, e.gradient);
        },
        py::arg("K"), py::arg("k_low"), py::arg("k_high"));
  m.def("w2_value_grad",
        [](const Eigen::VectorXd& K, const py::array_t<std::uint8_t, py::array::forcecast>& mask,
           double reference) {
          const auto b = mask_of(mask);
          const PenaltyEval e = w2_value_grad(K, b, reference);
          return py::make_tuple(e.value, e.gradient);
        },
        py::arg("K"), py::arg("mask"), py::arg("reference"));

  m.def("build_mask",
        [](const Array& u, const Array& ux, const Array& uy, double fraction,
           const std::string& normalizer) {
          const GradientMask g = build_mask(to_field(ux), to_field(uy),
                                            to_field(u, FieldRole::temperature), fraction,
                                            parse_gamma_normalizer(normalizer));
          py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(u.shape(0)),
                                         static_cast<py::ssize_t>(u.shape(1))});
          std::copy(g.b.begin(), g.b.end(), out.mutable_data());
          return py::make_tuple(out, g.gamma);
        },
        py::arg("u"), py::arg("ux"), py::arg("uy"), py::arg("fraction"),
        py::arg("normalizer") = "temperature");

  m.def("default_alphas", &default_alphas, py::arg("sigma_max"), py::arg("count") = 40,
        py::arg("lo") = 1e-10, py::arg("hi") = 1e2);
  m.def("lcurve_sweep",
        [](const Eigen::MatrixXd& A, const Eigen::VectorXd& F, const std::string& penalizer,
           const std::vector<double>& alphas, double k_low, double k_high,
           std::optional<py::array_t<std::uint8_t>> mask, unsigned threads) {
          const DesignSystem sys = system_of(A, F);
          const PenalizerSpec pen = penalizer_of(penalizer, sys, k_low, k_high, mask);
          return points_list(sweep(sys, pen, alphas, threads));
        },
        py::arg("A"), py::arg("F"), py::arg("penalizer"), py::arg("alphas"), py::arg("k_low"),
        py::arg("k_high") = 0.0, py::arg("mask") = py::none(), py::arg("threads") = 0);
  m.def("select_corner",
        [](const std::vector<double>& alpha, const std::vector<double>& rho,
           const std::vector<double>& eta) {
          if (alpha.size() != rho.size() || alpha.size() != eta.size()) {
            throw InvalidArgument("alpha, rho and eta differ in length");
          }
          std::vector<LCurvePoint> pts(alpha.size());
          for (std::size_t i = 0; i < pts.size(); ++i) {
            LCurvePoint& p = pts[i];
            p.alpha = alpha[i];
            p.rho = rho[i];
            p.eta = eta[i];
            p.valid = rho[i] > 0.0 && eta[i] > 0.0;
            if (p.valid) {
              p.log_rho = std::log(rho[i]);
              p.log_eta = std::log(eta[i]);
            }
          }
          const Corner c = select_corner(pts);
          return py::make_tuple(c.alpha, c.index, c.curvature);
        },
        py::arg("alpha"), py::arg("rho"), py::arg("eta"));

  m.def("classify",
        [](const Eigen::VectorXd& K, double k_low, double k_high) {
          return classify(std::span<const double>(K.data(), K.size()), MaterialPair(k_low, k_high));
        },
        py::arg("K"), py::arg("k_low"), py::arg("k_high"));
  m.def("relative_l2",
        [](const std::vector<double>& rec, const std::vector<double>& truth) {
          return relative_l2(rec, truth);
        },
        py::arg("rec"), py::arg("truth"));
  m.def("misclassification_rate",
        [](const std::vector<double>& rec, const std::vector<double>& truth,
           const std::vector<std::uint8_t>& exclude) {
          return misclassification_rate(rec, truth, exclude);
        },
        py::arg("rec"), py::arg("truth"), py::arg("exclude") = std::vector<std::uint8_t>{});

  m.def("run_pipeline",
        [](const std::string& config_json) {
          const PipelineConfig cfg = pipeline_config_from_json(config_json);
          std::optional<PipelineResult> res;
          {
            py::gil_scoped_release release;
            res.emplace(run_pipeline(cfg));
          }
          const PipelineResult& r = *res;
          py::dict d;
          d["k_true"] = to_array(r.k_true);
          d["K"] = to_array(r.K);
          d["classes"] = to_array(r.classes);
          d["alpha"] = r.reconstruction.alpha;
          d["diagnostics"] = diagnostics_dict(r.reconstruction.result.diagnostics);
          d["relative_l2"] = r.metrics.relative_l2;
          d["misclassification"] = r.metrics.misclassification;
          d["misclassification_identifiable"] = r.metrics.misclassification_identifiable;
          return d;
        },
        py::arg("config_json"),
        "Run one experiment from a JSON config (the same format the CLI writes).");
}
