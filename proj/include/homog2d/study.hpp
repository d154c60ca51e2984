#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homog2d/expansion.hpp"
#include "homog2d/newton.hpp"

namespace homog2d {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key-value configuration with dotted sections; see README for the
/// grammar. Unknown keys are hard errors.
struct StudyConfig {
  // domain
  std::string domain_kind = "rectangle";
  std::vector<double> rect = {0, 0, 1, 1};
  std::vector<Vec2> vertices;
  std::vector<int> robin_edges;  // resolved edge indices
  // coefficients
  std::string coeff_type = "checkerboard";
  double coeff_p1 = 1.0, coeff_p2 = 4.0;
  // model
  std::string model_type = "cubic_manufactured";
  double model_amplitude = 1.0;
  std::string robin_model = "none";  // none | one_minus_u
  // sweep
  std::vector<double> epsilon_list;
  double kappa = 8.0;
  int cell_resolution = 128;
  int homogenized_resolution = 128;
  // newton
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  std::string newton_mode = "full";  // full | frozen
  // expansion
  std::string expansion_variant = "smoothed";  // smoothed | direct
  std::string delta_rule = "power";            // power | inv_log
  double delta_exponent = 0.25;
  // probe
  double probe_epsilon = 1.0 / 32.0;
  double probe_radius = 0.05;
  int probe_trials = 8;
  // misc
  std::string output_dir = "out";
  unsigned seed = 1234;
  bool use_cache = true;

  DomainSpec domain() const;
  PeriodicCoefficientField coefficient_field() const;
  NonlinearityModel nonlinearity(const HomogenizedTensor& ahat) const;
  ExpansionRecipe recipe(double eps) const;
  NewtonMode newton_mode_enum() const;
  void validate() const;  // throws ConfigError listing offending fields
};

StudyConfig parse_config(const std::string& path);
StudyConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");

struct RateFit {
  double slope = 0, intercept = 0, residual = 0;
  int points = 0;
  bool valid = false;
  std::string note;
};

/// Least squares on (log eps, log error); non-positive errors are excluded
/// with a note; needs at least 3 usable pairs.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

struct EpsilonRecord {
  double epsilon = 0;
  double h = 0;
  bool converged = false;
  std::string error;           // failure description when not converged
  double sup_err = 0;          // ||u_eps - u0||_inf after transfer
  double w12_err = 0;          // ||u_eps - u_bar||_{W^{1,2}}
  double discrepancy = 0;      // dual norm of F_eps(u_bar), seed variant
  double discrepancy_alt = 0;  // same for the other expansion variant
  int newton_iters = 0;
  double apriori_ratio = 0;    // w12_err / discrepancy
};

struct StudyReport {
  std::string coeff_descriptor;
  int cell_resolution = 0;
  HomogenizedTensor ahat;
  double corrector_residual = 0;
  double sigma_min = 0;
  int homogenized_newton_iters = 0;
  std::string seed_variant;
  std::vector<EpsilonRecord> records;
  RateFit sup_rate, discrepancy_rate, discrepancy_alt_rate;

  bool all_converged() const;
};

/// Full pipeline: cell solves (cached), homogenized solve, non-degeneracy
/// check, epsilon sweep seeded at the expansion. Per-epsilon failures are
/// recorded without aborting the remaining entries.
StudyReport run_study(const StudyConfig& config);

/// sweep.csv (fixed header, LF endings), a structured-text report and an
/// SVG log-log plot. Returns the paths written.
std::vector<std::string> emit_outputs(const StudyReport& report, const std::string& dir);

/// Helpers shared by the CLI subcommands.
struct CellRunResult {
  HomogenizedTensor ahat;
  CorrectorSet correctors;
  bool from_cache = false;
};
CellRunResult run_cell_stage(const StudyConfig& config);

std::string format_double(double v);  // %.17g, used for deterministic output

/// Structured mesh of the domain with the given cell pitch (rectangle fast
/// path; rectilinear polygons via the covering lattice).
Mesh mesh_with_pitch(const DomainSpec& domain, double pitch);

}  // namespace homog2d
