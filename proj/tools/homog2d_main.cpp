// Command-line harness: cell solves, single solves, epsilon sweeps and
// local-uniqueness probes driven by a key-value config file.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "homog2d/study.hpp"

using namespace homog2d;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int seed = -1;
  bool no_cache = false;
  std::string variant;
};

StudyConfig load_config(const CommonOpts& opts) {
  StudyConfig cfg = parse_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.seed = static_cast<unsigned>(opts.seed);
  if (opts.no_cache) cfg.use_cache = false;
  if (!opts.variant.empty()) {
    if (opts.variant != "smoothed" && opts.variant != "direct")
      throw ConfigError("--variant: expected smoothed or direct");
    cfg.expansion_variant = opts.variant;
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("config", opts.config_path, "config file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", opts.seed, "RNG seed (overrides seed)");
  cmd->add_flag("--no-cache", opts.no_cache, "ignore the corrector cache");
  cmd->add_option("--variant", opts.variant, "expansion variant: smoothed|direct");
}

int run_cell(const StudyConfig& cfg) {
  const PeriodicCoefficientField field = cfg.coefficient_field();
  const std::string cache_path = cfg.output_dir + "/corrector_cache.bin";
  std::filesystem::create_directories(cfg.output_dir);

  CellRunResult cell;
  FluxCorrectorSet fx;
  if (!cfg.use_cache ||
      !load_corrector_cache(cache_path, field.descriptor, cfg.cell_resolution,
                            cell.correctors, cell.ahat, &fx)) {
    cell = run_cell_stage(cfg);
    fx = flux_correctors(field, cell.correctors, cell.ahat);
    if (cfg.use_cache)
      save_corrector_cache(cache_path, field.descriptor, cell.correctors, cell.ahat, &fx);
  } else {
    cell.from_cache = true;
  }
  const std::string path = cfg.output_dir + "/cell_report.txt";
  std::ofstream os(path, std::ios::binary);
  os << "coefficients " << field.descriptor << "\n";
  os << "cell_resolution " << cfg.cell_resolution << "\n";
  os << (cell.from_cache ? "source cache\n" : "source solve\n");
  const int n = cell.ahat.n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
          os << "ahat " << i << " " << j << " " << al << " " << be << " "
             << format_double(cell.ahat(i, j, al, be)) << "\n";
  os << "coercivity_certificate " << format_double(cell.ahat.coercivity_lower_bound)
     << "\n";
  os << "corrector_residual " << format_double(cell.correctors.residual_inf) << "\n";
  double mean_b = 0, mean_c = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be) {
          mean_b = std::max(mean_b, std::abs(fx.b_mean(i, j, al, be)));
          mean_c = std::max(mean_c, std::abs(fx.c_mean(i, j, al, be)));
        }
  os << "flux_b_mean_max " << format_double(mean_b) << "\n";
  os << "flux_c_mean_max " << format_double(mean_c) << "\n";
  os << "flux_identity_residual " << format_double(fx.identity_residual) << "\n";
  std::cout << "cell report written to " << path << "\n";
  return 0;
}

int run_solve(const StudyConfig& cfg) {
  CellRunResult cell = run_cell_stage(cfg);
  const DomainSpec domain = cfg.domain();
  const NonlinearityModel model = cfg.nonlinearity(cell.ahat);
  const Mesh mesh = mesh_with_pitch(domain, 1.0 / cfg.homogenized_resolution);
  const ProblemSpec spec = ProblemSpec::homogenized_problem(domain, cell.ahat, model);
  ProblemWorkspace ws(spec, mesh);
  auto [u0, rep] = newton_solve(ws, ws.make_field(), cfg.newton_mode_enum(),
                                cfg.newton_tol, cfg.newton_max_iter);
  const double sigma = rep.converged ? check_nondegeneracy(ws, u0) : 0.0;

  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/solve_report.txt";
  std::ofstream os(path, std::ios::binary);
  os << "converged " << (rep.converged ? 1 : 0) << "\n";
  os << "newton_iters " << rep.iterations << "\n";
  for (size_t i = 0; i < rep.residual_norms.size(); ++i)
    os << "residual " << i << " " << format_double(rep.residual_norms[i]) << "\n";
  os << "sigma_min " << format_double(sigma) << "\n";
  os << "sup_norm " << format_double(sup_norm(u0)) << "\n";
  std::ofstream sol(cfg.output_dir + "/solution.txt", std::ios::binary);
  for (int al = 0; al < u0.n; ++al)
    for (int i = 0; i < mesh.num_nodes(); ++i)
      sol << al << " " << i << " " << format_double(u0.at(al, i)) << "\n";
  std::ofstream mesh_out(cfg.output_dir + "/mesh.txt", std::ios::binary);
  mesh_out << export_mesh_text(mesh);
  std::cout << "solve report written to " << path << "\n";
  return rep.converged ? 0 : 2;
}

int run_study_cmd(const StudyConfig& cfg) {
  if (cfg.epsilon_list.empty())
    throw ConfigError("study requires a non-empty epsilon.list");
  StudyReport report = run_study(cfg);
  const auto files = emit_outputs(report, cfg.output_dir);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  int failures = 0;
  for (const auto& r : report.records)
    if (!r.converged) {
      ++failures;
      std::cerr << "epsilon " << r.epsilon << " failed: " << r.error << "\n";
    }
  if (report.sup_rate.valid)
    std::cout << "sup error slope " << report.sup_rate.slope << " (residual "
              << report.sup_rate.residual << ")\n";
  return failures == 0 ? 0 : 2;
}

int run_probe(const StudyConfig& cfg) {
  CellRunResult cell = run_cell_stage(cfg);
  const DomainSpec domain = cfg.domain();
  const NonlinearityModel model = cfg.nonlinearity(cell.ahat);
  const PeriodicCoefficientField field = cfg.coefficient_field();
  const double eps = cfg.probe_epsilon;

  const Mesh coarse = mesh_with_pitch(domain, 1.0 / cfg.homogenized_resolution);
  const ProblemSpec hom_spec = ProblemSpec::homogenized_problem(domain, cell.ahat, model);
  ProblemWorkspace hom_ws(hom_spec, coarse);
  auto [u0, hom_rep] = newton_solve(hom_ws, hom_ws.make_field(), NewtonMode::FullNewton,
                                    cfg.newton_tol, cfg.newton_max_iter);
  if (!hom_rep.converged) throw NumericError("homogenized solve did not converge");

  const Mesh fine = mesh_with_pitch(domain, eps / cfg.kappa);
  const ProblemSpec osc_spec = ProblemSpec::oscillatory_problem(domain, field, eps, model);
  ProblemWorkspace osc_ws(osc_spec, fine);
  const SolutionField ubar =
      build_expansion(cfg.recipe(eps), u0, cell.correctors, domain, fine);
  auto [uref, rep] = newton_solve(osc_ws, ubar, NewtonMode::FullNewton, cfg.newton_tol,
                                  cfg.newton_max_iter);
  if (!rep.converged) throw NumericError("reference oscillatory solve did not converge");

  const ProbeReport probe = local_uniqueness_probe(
      osc_ws, uref, cfg.probe_radius, cfg.probe_trials, cfg.seed, cfg.newton_tol,
      cfg.newton_max_iter);

  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/probe_report.txt";
  std::ofstream os(path, std::ios::binary);
  os << "epsilon " << format_double(eps) << "\n";
  os << "radius " << format_double(cfg.probe_radius) << "\n";
  os << "trials " << cfg.probe_trials << "\n";
  for (size_t t = 0; t < probe.trials.size(); ++t)
    os << "trial " << t << " converged=" << (probe.trials[t].converged ? 1 : 0)
       << " deviation=" << format_double(probe.trials[t].deviation) << "\n";
  os << "all_converged " << (probe.all_converged ? 1 : 0) << "\n";
  os << "all_agree " << (probe.all_agree ? 1 : 0) << "\n";
  os << "max_deviation " << format_double(probe.max_deviation) << "\n";
  os << "verdict " << (probe.all_agree ? "consistent with local uniqueness"
                                       : "disagreement recorded")
     << "\n";
  std::cout << "probe report written to " << path << "\n";
  return probe.all_agree ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D periodic homogenization toolkit"};
  app.require_subcommand(1);

  CommonOpts cell_opts, solve_opts, study_opts, probe_opts;
  CLI::App* cell = app.add_subcommand("cell", "cell problems and effective tensor");
  add_common(cell, cell_opts);
  CLI::App* solve = app.add_subcommand("solve", "one homogenized solve");
  add_common(solve, solve_opts);
  CLI::App* study = app.add_subcommand("study", "full epsilon sweep");
  add_common(study, study_opts);
  CLI::App* probe = app.add_subcommand("probe", "local uniqueness probe");
  add_common(probe, probe_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cell->parsed()) return run_cell(load_config(cell_opts));
    if (solve->parsed()) return run_solve(load_config(solve_opts));
    if (study->parsed()) return run_study_cmd(load_config(study_opts));
    if (probe->parsed()) return run_probe(load_config(probe_opts));
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
