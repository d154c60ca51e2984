#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homog2d/cell.hpp"
#include "homog2d/expansion.hpp"
#include "homog2d/newton.hpp"
#include "homog2d/study.hpp"

namespace py = pybind11;
using namespace homog2d;

namespace {

PeriodicCoefficientField make_field(const std::string& name, double p1, double p2) {
  if (name == "constant") return fields::constant_scalar(p1);
  return fields::by_name(name, p1, p2);
}

py::dict tensor_dict(const HomogenizedTensor& ah) {
  py::dict out;
  py::list entries;
  for (int i = 0; i < 2; ++i) {
    py::list row;
    for (int j = 0; j < 2; ++j) row.append(ah(i, j, 0, 0));
    entries.append(row);
  }
  out["a"] = entries;
  out["coercivity_lower_bound"] = ah.coercivity_lower_bound;
  out["n"] = ah.n;
  return out;
}

py::dict cell_solve(const std::string& name, double p1, double p2, int m) {
  const PeriodicCoefficientField field = make_field(name, p1, p2);
  const CorrectorSet cs = solve_cell_problems(field, m);
  const HomogenizedTensor ah = homogenized_tensor(field, cs);
  py::dict out = tensor_dict(ah);
  out["corrector_sup"] = cs.sup();
  out["corrector_residual"] = cs.residual_inf;
  return out;
}

py::dict flux_identities(const std::string& name, double p1, double p2, int m) {
  const PeriodicCoefficientField field = make_field(name, p1, p2);
  const CorrectorSet cs = solve_cell_problems(field, m);
  const HomogenizedTensor ah = homogenized_tensor(field, cs);
  const FluxCorrectorSet fx = flux_correctors(field, cs, ah);
  double mb = 0, mc = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      mb = std::max(mb, std::abs(fx.b_mean(i, j, 0, 0)));
      mc = std::max(mc, std::abs(fx.c_mean(i, j, 0, 0)));
    }
  py::dict out;
  out["identity_residual"] = fx.identity_residual;
  out["b_mean_max"] = mb;
  out["c_mean_max"] = mc;
  return out;
}

py::dict solve_homogenized(const std::string& name, double p1, double p2, int m,
                           int resolution, double amplitude) {
  const PeriodicCoefficientField field = make_field(name, p1, p2);
  const CorrectorSet cs = solve_cell_problems(field, m);
  const HomogenizedTensor ah = homogenized_tensor(field, cs);
  const DomainSpec square = DomainSpec::unit_square();
  const Mesh mesh = build_rectangle_mesh(square, resolution, resolution);
  const auto model = models::cubic_manufactured(ah.matrix2(), amplitude);
  ProblemSpec spec = ProblemSpec::homogenized_problem(square, ah, model);
  ProblemWorkspace ws(spec, mesh);
  auto [sol, rep] = newton_solve(ws, ws.make_field(), NewtonMode::FullNewton, 1e-10, 25);
  py::dict out = tensor_dict(ah);
  out["converged"] = rep.converged;
  out["newton_iters"] = rep.iterations;
  out["sup_norm"] = sup_norm(sol);
  out["sigma_min"] = rep.converged ? check_nondegeneracy(ws, sol) : 0.0;
  return out;
}

py::dict study(const std::string& config_path, const std::string& out_dir) {
  StudyConfig cfg = parse_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const StudyReport report = run_study(cfg);
  const auto files = emit_outputs(report, cfg.output_dir);
  py::dict out;
  out["all_converged"] = report.all_converged();
  out["sigma_min"] = report.sigma_min;
  out["sup_slope"] = report.sup_rate.slope;
  out["sup_residual"] = report.sup_rate.residual;
  out["discrepancy_slope"] = report.discrepancy_rate.slope;
  py::list recs;
  for (const auto& r : report.records) {
    py::dict d;
    d["epsilon"] = r.epsilon;
    d["converged"] = r.converged;
    d["sup_err"] = r.sup_err;
    d["discrepancy"] = r.discrepancy;
    d["newton_iters"] = r.newton_iters;
    recs.append(d);
  }
  out["records"] = recs;
  py::list fs;
  for (const auto& f : files) fs.append(f);
  out["files"] = fs;
  return out;
}

py::tuple fit_rate_py(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size()) throw std::invalid_argument("length mismatch");
  std::vector<std::pair<double, double>> pairs;
  for (size_t i = 0; i < eps.size(); ++i) pairs.push_back({eps[i], err[i]});
  const RateFit fit = fit_rate(pairs);
  if (!fit.valid) throw std::runtime_error("rate fit needs >= 3 positive entries");
  return py::make_tuple(fit.slope, fit.intercept, fit.residual);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "2D periodic homogenization toolkit: cell problems, effective "
            "tensors, corrector expansions and epsilon sweeps";

  m.def("cell_solve", &cell_solve, py::arg("field"), py::arg("p1") = 1.0,
        py::arg("p2") = 4.0, py::arg("resolution") = 64,
        "Solve the periodic cell problems and return the effective tensor");
  m.def("flux_identities", &flux_identities, py::arg("field"), py::arg("p1") = 1.0,
        py::arg("p2") = 4.0, py::arg("resolution") = 32,
        "Flux-corrector diagnostics: divergence identity residual and means");
  m.def("solve_homogenized", &solve_homogenized, py::arg("field"), py::arg("p1") = 1.0,
        py::arg("p2") = 4.0, py::arg("cell_resolution") = 32,
        py::arg("resolution") = 64, py::arg("amplitude") = 1.0,
        "Cell stage plus one homogenized Newton solve with diagnostics");
  m.def("run_study", &study, py::arg("config_path"), py::arg("out_dir") = "",
        "Run a config-driven epsilon sweep; returns the report summary");
  m.def("fit_rate", &fit_rate_py, py::arg("eps"), py::arg("err"),
        "Least-squares log-log rate fit; returns (slope, intercept, residual)");
  m.def(
      "boundary_distance",
      [](double x, double y) {
        return boundary_distance(DomainSpec::unit_square(), {x, y});
      },
      py::arg("x"), py::arg("y"), "Distance to the unit-square boundary");
  m.def(
      "cutoff",
      [](double eps, double x, double y) {
        return cutoff(DomainSpec::unit_square(), eps, {x, y});
      },
      py::arg("eps"), py::arg("x"), py::arg("y"),
      "Boundary cut-off value on the unit square");
}
