// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "homog2d/cell.hpp"
#include "homog2d/expansion.hpp"
#include "homog2d/newton.hpp"
#include "homog2d/rng.hpp"
#include "homog2d/study.hpp"

using namespace homog2d;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", id,
              label.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class F>
void run_criterion(int id, const std::string& label, F&& body) {
  const auto t0 = clock_type::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& ex) {
    detail = std::string("exception: ") + ex.what();
  }
  const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
  report(id, label, pass, detail, secs);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string configs = argc > 1 ? argv[1] : "configs";
  const std::string work = "acceptance_out";
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);

  // 1. Constant-coefficient identity.
  run_criterion(1, "constant coefficients: tensor identity, zero correctors",
                [&](std::string& detail) {
                  const auto field = fields::constant_scalar(2.5);
                  const CorrectorSet cs = solve_cell_problems(field, 64);
                  const HomogenizedTensor ah = homogenized_tensor(field, cs);
                  double tensor_err = 0;
                  std::vector<double> expected = {2.5, 0, 0, 2.5};
                  for (int k = 0; k < 4; ++k)
                    tensor_err = std::max(tensor_err, std::abs(ah.a[k] - expected[k]));
                  const double vsup = cs.sup();
                  detail = "tensor err " + fmt(tensor_err) + ", corrector sup " + fmt(vsup);
                  return tensor_err <= 1e-12 && vsup <= 1e-10;
                });

  // 2. Laminate oracle.
  run_criterion(2, "laminate tensor: harmonic/arithmetic means", [&](std::string& detail) {
    const auto field = fields::laminate(1.0, 4.0);
    const CorrectorSet cs = solve_cell_problems(field, 128);
    const HomogenizedTensor ah = homogenized_tensor(field, cs);
    const double e11 = std::abs(ah(0, 0, 0, 0) - 1.6) / 1.6;
    const double e22 = std::abs(ah(1, 1, 0, 0) - 2.5) / 2.5;
    const double off = std::max(std::abs(ah(0, 1, 0, 0)), std::abs(ah(1, 0, 0, 0)));
    detail = "a11 " + fmt(ah(0, 0, 0, 0)) + " (err " + fmt(e11) + "), a22 " +
             fmt(ah(1, 1, 0, 0)) + " (err " + fmt(e22) + "), off " + fmt(off);
    return e11 <= 0.01 && e22 <= 0.01 && off <= 1e-8;
  });

  // 3. Checkerboard oracle.
  run_criterion(3, "checkerboard tensor: geometric mean, isotropy",
                [&](std::string& detail) {
                  const auto field = fields::checkerboard(1.0, 4.0);
                  const CorrectorSet cs = solve_cell_problems(field, 256);
                  const HomogenizedTensor ah = homogenized_tensor(field, cs);
                  const double rel = std::abs(ah(0, 0, 0, 0) - 2.0) / 2.0;
                  const double iso = std::abs(ah(0, 0, 0, 0) - ah(1, 1, 0, 0));
                  detail = "a11 " + fmt(ah(0, 0, 0, 0)) + " (rel err " + fmt(rel) +
                           "), anisotropy " + fmt(iso);
                  return rel <= 0.02 && iso <= 1e-3 * ah(0, 0, 0, 0);
                });

  // 4. Coercivity certificates for every built-in field.
  run_criterion(4, "coercivity certificates positive for all built-in fields",
                [&](std::string& detail) {
                  double worst = 1e300;
                  for (const auto& name : fields::builtin_names()) {
                    const auto field = name == "trigonometric"
                                           ? fields::trigonometric(2.0, 1.0)
                                           : fields::by_name(name, 1.0, 4.0);
                    const CorrectorSet cs = solve_cell_problems(field, 16);
                    const HomogenizedTensor ah = homogenized_tensor(field, cs);
                    worst = std::min(worst, ah.coercivity_lower_bound);
                  }
                  detail = "min certificate " + fmt(worst);
                  return worst > 0;
                });

  // 5. Flux-corrector identities (checkerboard, m = 128).
  run_criterion(5, "flux correctors: antisymmetry, divergence identity, means",
                [&](std::string& detail) {
                  const auto field = fields::checkerboard(1.0, 4.0);
                  const CorrectorSet cs = solve_cell_problems(field, 128);
                  const HomogenizedTensor ah = homogenized_tensor(field, cs);
                  const FluxCorrectorSet fx = flux_correctors(field, cs, ah);
                  double antisym = 0;
                  Pcg32 rng(5u);
                  for (int k = 0; k < 200; ++k) {
                    const int e = static_cast<int>(rng.uniform01() * fx.cell->mesh.num_elements());
                    const int q = static_cast<int>(rng.uniform01() * fx.qpe);
                    for (int i = 0; i < 2; ++i)
                      for (int j = 0; j < 2; ++j)
                        for (int kk = 0; kk < 2; ++kk)
                          antisym = std::max(antisym,
                                             std::abs(fx.phi(i, j, kk, 0, 0, e, q) +
                                                      fx.phi(kk, j, i, 0, 0, e, q)));
                  }
                  double mb = 0, mc = 0;
                  for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                      mb = std::max(mb, std::abs(fx.b_mean(i, j, 0, 0)));
                      mc = std::max(mc, std::abs(fx.c_mean(i, j, 0, 0)));
                    }
                  detail = "antisym " + fmt(antisym) + ", weak residual " +
                           fmt(fx.identity_residual) + ", mean b " + fmt(mb) +
                           ", mean c " + fmt(mc);
                  return antisym == 0.0 && fx.identity_residual <= 1e-8 && mb <= 1e-10 &&
                         mc <= 1e-10;
                });

  // 6. Jacobian consistency for every built-in nonlinearity, 20 random states.
  run_criterion(6, "linearization matches finite differences (20 states each)",
                [&](std::string& detail) {
                  const DomainSpec square = DomainSpec::unit_square();
                  DomainSpec robin = square;
                  robin.robin_edges = {0};
                  const Mesh mesh = build_rectangle_mesh(square, 8, 8);
                  const Mesh mesh_robin = build_rectangle_mesh(robin, 8, 8);
                  double worst = 0;
                  auto names = models::builtin_names();
                  names.push_back("cubic_manufactured+robin");
                  for (const auto& name : names) {
                    NonlinearityModel model =
                        name == "cubic_manufactured+robin"
                            ? models::with_robin_one_minus_u(models::cubic_manufactured(
                                  Eigen::Matrix2d::Identity(), 1.0))
                            : models::by_name(name, Eigen::Matrix2d::Identity(), 1.0);
                    const Mesh& m = model.has_robin() ? mesh_robin : mesh;
                    Pcg32 rng(7u);
                    for (int trial = 0; trial < 20; ++trial) {
                      SolutionField u(m, model.n);
                      for (int i = 0; i < u.dofs(); ++i) u.values[i] = rng.uniform(-1, 1);
                      SolutionField v(m, model.n);
                      for (int i = 0; i < v.dofs(); ++i) v.values[i] = rng.uniform(-1, 1);
                      const double t = 1e-6;
                      SolutionField up = u, um = u;
                      up.values += t * v.values;
                      um.values -= t * v.values;
                      const Eigen::VectorXd fd = (assemble_semilinear(up, model, m) -
                                                  assemble_semilinear(um, model, m)) /
                                                 (2 * t);
                      const SparseOperator J = assemble_linearization(u, model, m);
                      worst = std::max(worst, (J.mat * v.values - fd).norm() /
                                                  std::max(1.0, v.values.norm()));
                    }
                  }
                  detail = "max relative mismatch " + fmt(worst);
                  return worst <= 1e-5;
                });

  // 7. Manufactured homogenized solve: order >= 1.8 over h in {1/16,1/32,1/64}.
  run_criterion(7, "manufactured cubic solve converges at second order",
                [&](std::string& detail) {
                  const DomainSpec square = DomainSpec::unit_square();
                  HomogenizedTensor ident;
                  ident.n = 1;
                  ident.a = {1, 0, 0, 1};
                  ident.coercivity_lower_bound = 1;
                  const auto model =
                      models::cubic_manufactured(Eigen::Matrix2d::Identity(), 1.0);
                  std::vector<std::pair<double, double>> pairs;
                  for (int nn : {16, 32, 64}) {
                    const Mesh mesh = build_rectangle_mesh(square, nn, nn);
                    ProblemSpec spec =
                        ProblemSpec::homogenized_problem(square, ident, model);
                    ProblemWorkspace ws(spec, mesh);
                    auto [sol, rep] = newton_solve(ws, ws.make_field(),
                                                   NewtonMode::FullNewton, 1e-10, 25);
                    if (!rep.converged) {
                      detail = "solve did not converge";
                      return false;
                    }
                    double err = 0;
                    for (int i = 0; i < mesh.num_nodes(); ++i) {
                      const Vec2& x = mesh.nodes[i];
                      err = std::max(err, std::abs(sol.at(0, i) -
                                                   std::sin(M_PI * x.x()) *
                                                       std::sin(M_PI * x.y())));
                    }
                    pairs.push_back({1.0 / nn, err});
                  }
                  const RateFit fit = fit_rate(pairs);
                  detail = "fitted order " + fmt(fit.slope);
                  return fit.valid && fit.slope >= 1.8;
                });

  // 8/9/11/14 share the checkerboard reference study.
  StudyReport run8;
  bool run8_ok = false;
  StudyConfig run8_cfg;
  run_criterion(8, "rate verification: sup error slope of the reference study",
                [&](std::string& detail) {
                  run8_cfg = parse_config(configs + "/checkerboard_cubic.cfg");
                  run8_cfg.output_dir = work + "/checkerboard_cubic";
                  run8 = run_study(run8_cfg);
                  emit_outputs(run8, run8_cfg.output_dir);
                  run8_ok = true;
                  detail = "slope " + fmt(run8.sup_rate.slope) + ", residual " +
                           fmt(run8.sup_rate.residual);
                  return run8.all_converged() && run8.sup_rate.valid &&
                         run8.sup_rate.slope >= 0.45 && run8.sup_rate.residual <= 0.15;
                });

  run_criterion(9, "discrepancy decay of the smoothed expansion",
                [&](std::string& detail) {
                  if (!run8_ok) {
                    detail = "reference study unavailable";
                    return false;
                  }
                  // Seed variant of the study is direct; the smoothed variant
                  // is recorded alongside.
                  bool decreasing = true;
                  double prev = 1e300;
                  for (const auto& r : run8.records) {
                    if (!r.converged) continue;
                    if (!(r.discrepancy_alt < prev)) decreasing = false;
                    prev = r.discrepancy_alt;
                  }
                  detail = "slope " + fmt(run8.discrepancy_alt_rate.slope) +
                           std::string(decreasing ? ", strictly decreasing"
                                                  : ", NOT decreasing");
                  return decreasing && run8.discrepancy_alt_rate.valid &&
                         run8.discrepancy_alt_rate.slope >= 0.2;
                });

  // 10. Local uniqueness probe at eps = 1/32.
  run_criterion(10, "local uniqueness probe: seeded restarts agree",
                [&](std::string& detail) {
                  StudyConfig cfg = parse_config(configs + "/checkerboard_cubic.cfg");
                  cfg.output_dir = work + "/probe";
                  const DomainSpec domain = cfg.domain();
                  CellRunResult cell = run_cell_stage(cfg);
                  const auto model = cfg.nonlinearity(cell.ahat);
                  const auto field = cfg.coefficient_field();
                  const Mesh coarse =
                      build_rectangle_mesh(domain, cfg.homogenized_resolution,
                                           cfg.homogenized_resolution);
                  ProblemSpec hspec =
                      ProblemSpec::homogenized_problem(domain, cell.ahat, model);
                  ProblemWorkspace hws(hspec, coarse);
                  auto [u0, hrep] = newton_solve(hws, hws.make_field(),
                                                 NewtonMode::FullNewton, 1e-10, 25);
                  const double eps = 1.0 / 32;
                  const int nx = static_cast<int>(std::lround(cfg.kappa / eps));
                  const Mesh fine = build_rectangle_mesh(domain, nx, nx);
                  ProblemSpec ospec =
                      ProblemSpec::oscillatory_problem(domain, field, eps, model);
                  ProblemWorkspace ows(ospec, fine);
                  ExpansionRecipe recipe = cfg.recipe(eps);
                  const SolutionField ubar =
                      build_expansion(recipe, u0, cell.correctors, domain, fine);
                  auto [uref, rep] = newton_solve(ows, ubar, NewtonMode::FullNewton,
                                                  1e-10, 25);
                  if (!rep.converged) {
                    detail = "reference solve did not converge";
                    return false;
                  }
                  const ProbeReport probe =
                      local_uniqueness_probe(ows, uref, 0.05, 8, cfg.seed, 1e-10, 25);
                  detail = "max deviation " + fmt(probe.max_deviation);
                  return probe.all_converged && probe.all_agree;
                });

  run_criterion(11, "a-priori ratio surrogate stays bounded across the sweep",
                [&](std::string& detail) {
                  if (!run8_ok) {
                    detail = "reference study unavailable";
                    return false;
                  }
                  double lo = 1e300, hi = 0;
                  for (const auto& r : run8.records) {
                    if (!r.converged) continue;
                    lo = std::min(lo, r.apriori_ratio);
                    hi = std::max(hi, r.apriori_ratio);
                  }
                  detail = "max/min " + fmt(hi / lo);
                  return hi > 0 && hi / lo <= 10.0;
                });

  // 12. Mixed Dirichlet/Robin study.
  run_criterion(12, "mixed Robin study: end-to-end with the stated rate",
                [&](std::string& detail) {
                  StudyConfig cfg = parse_config(configs + "/laminate_robin.cfg");
                  cfg.output_dir = work + "/laminate_robin";
                  const StudyReport report = run_study(cfg);
                  emit_outputs(report, cfg.output_dir);
                  detail = "slope " + fmt(report.sup_rate.slope) + ", residual " +
                           fmt(report.sup_rate.residual);
                  return report.all_converged() && report.sup_rate.valid &&
                         report.sup_rate.slope >= 0.45;
                });

  // 13. Mollifier suite.
  run_criterion(13, "mollifier: convergence and stable scaling constants",
                [&](std::string& detail) {
                  const DomainSpec square = DomainSpec::unit_square();
                  auto step = [](const Vec2& x) { return x.x() < 0.5 ? 0.0 : 1.0; };
                  const auto lat = SampleLattice::from_sampler(square, 1.0 / 256, step);
                  double prev = 1e300;
                  bool decreasing = true;
                  for (double d : {0.2, 0.1, 0.05}) {
                    const MollifiedField f(lat, d);
                    double l2 = 0;
                    const int n = 64;
                    for (int iy = 0; iy < n; ++iy)
                      for (int ix = 0; ix < n; ++ix) {
                        const Vec2 x{(ix + 0.5) / n, (iy + 0.5) / n};
                        const double dd = f.eval(x) - step(x);
                        l2 += dd * dd / (n * n);
                      }
                    if (!(std::sqrt(l2) < prev)) decreasing = false;
                    prev = std::sqrt(l2);
                  }
                  // Spike families of width ~ delta saturate the sup and
                  // gradient bounds; their measured constants must be stable.
                  std::vector<double> c_sup, c_grad;
                  for (double d : {0.2, 0.1, 0.05}) {
                    Pcg32 rng(99u);
                    struct Spike {
                      Vec2 c;
                      double a;
                    };
                    std::vector<Spike> spikes;
                    for (int k = 0; k < 10; ++k)
                      spikes.push_back(
                          {{rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)},
                           rng.uniform(0.5, 1.5) * (rng.uniform01() < 0.5 ? -1 : 1)});
                    const double w = d / 2;
                    auto u = [&](const Vec2& x) {
                      double s = 0;
                      for (const auto& sp : spikes) {
                        const double r2 = (x - sp.c).squaredNorm() / (w * w);
                        if (r2 < 1) s += sp.a * std::exp(-1.0 / (1.0 - r2));
                      }
                      return s;
                    };
                    const double pitch = d / 24;
                    const auto slat = SampleLattice::from_sampler(square, pitch, u);
                    double l2u = 0;
                    for (int i = 0; i < slat.nx * slat.ny; ++i)
                      l2u += slat.values[i] * slat.values[i] * pitch * pitch;
                    const MollifiedField f(slat, d);
                    double sup = 0, g2 = 0;
                    const int n = 72;
                    for (int iy = 0; iy < n; ++iy)
                      for (int ix = 0; ix < n; ++ix) {
                        const Vec2 x{(ix + 0.5) / n, (iy + 0.5) / n};
                        sup = std::max(sup, std::abs(f.eval(x)));
                        g2 += f.eval_grad(x).squaredNorm() / (n * n);
                      }
                    c_sup.push_back(sup * sup * d * d / l2u);
                    c_grad.push_back(g2 * d * d / l2u);
                  }
                  auto spread = [](const std::vector<double>& v) {
                    double lo = v[0], hi = v[0];
                    for (double x : v) {
                      lo = std::min(lo, x);
                      hi = std::max(hi, x);
                    }
                    return hi / lo;
                  };
                  detail = "sup-bound drift " + fmt(spread(c_sup)) + ", grad-bound drift " +
                           fmt(spread(c_grad)) +
                           std::string(decreasing ? ", L2 decreasing" : ", L2 NOT decreasing");
                  return decreasing && spread(c_sup) <= 3.0 && spread(c_grad) <= 3.0;
                });

  // 14. Determinism: rerunning the reference study reproduces sweep.csv.
  run_criterion(14, "determinism: rerun yields byte-identical sweep.csv",
                [&](std::string& detail) {
                  if (!run8_ok) {
                    detail = "reference study unavailable";
                    return false;
                  }
                  StudyConfig cfg = run8_cfg;
                  cfg.output_dir = work + "/checkerboard_cubic_rerun";
                  const StudyReport rerun = run_study(cfg);
                  emit_outputs(rerun, cfg.output_dir);
                  const std::string a = slurp(run8_cfg.output_dir + "/sweep.csv");
                  const std::string b = slurp(cfg.output_dir + "/sweep.csv");
                  detail = a.empty() ? "missing csv"
                                     : (a == b ? "identical bytes" : "csv differs");
                  return !a.empty() && a == b;
                });

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
