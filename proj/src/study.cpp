#include "homog2d/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace homog2d {

namespace {

double parse_number(const std::string& s, const std::string& key) {
  // Accepts plain decimals and fractions like 1/8.
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      const double a = std::stod(s.substr(0, slash));
      const double b = std::stod(s.substr(slash + 1));
      if (b == 0) throw std::runtime_error("division by zero");
      return a / b;
    }
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': cannot parse number '" + s + "'");
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    // Allow comma separators as well.
    std::string cur;
    for (char c : tok) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "domain.kind",       "domain.rect",          "domain.vertices",
      "domain.robin_edges", "coeff.type",          "coeff.p1",
      "coeff.p2",          "model.type",           "model.amplitude",
      "model.robin",       "epsilon.list",         "mesh.kappa",
      "cell.resolution",   "homogenized.resolution", "newton.tol",
      "newton.max_iter",   "newton.mode",          "expansion.variant",
      "expansion.delta_rule", "expansion.delta_exponent", "probe.epsilon",
      "probe.radius",      "probe.trials",         "output.dir",
      "seed",              "cache.enabled"};
  return keys;
}

}  // namespace

StudyConfig parse_config_text(const std::string& text, const std::string& origin) {
  StudyConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    if (kv.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                        "'");
    kv[key] = value;
  }

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = take("domain.kind")) cfg.domain_kind = *v;
  if (auto v = take("domain.rect")) {
    const auto toks = split_ws(*v);
    if (toks.size() != 4) throw ConfigError("domain.rect: expected 4 numbers");
    cfg.rect.clear();
    for (const auto& t : toks) cfg.rect.push_back(parse_number(t, "domain.rect"));
  }
  if (auto v = take("domain.vertices")) {
    const auto toks = split_ws(*v);
    if (toks.size() < 6 || toks.size() % 2 != 0)
      throw ConfigError("domain.vertices: expected an even list of >= 6 numbers");
    cfg.vertices.clear();
    for (size_t i = 0; i < toks.size(); i += 2)
      cfg.vertices.push_back({parse_number(toks[i], "domain.vertices"),
                              parse_number(toks[i + 1], "domain.vertices")});
  }
  std::string robin_spec = "none";
  if (auto v = take("domain.robin_edges")) robin_spec = *v;
  if (auto v = take("coeff.type")) cfg.coeff_type = *v;
  if (auto v = take("coeff.p1")) cfg.coeff_p1 = parse_number(*v, "coeff.p1");
  if (auto v = take("coeff.p2")) cfg.coeff_p2 = parse_number(*v, "coeff.p2");
  if (auto v = take("model.type")) cfg.model_type = *v;
  if (auto v = take("model.amplitude"))
    cfg.model_amplitude = parse_number(*v, "model.amplitude");
  if (auto v = take("model.robin")) cfg.robin_model = *v;
  if (auto v = take("epsilon.list")) {
    cfg.epsilon_list.clear();
    for (const auto& t : split_ws(*v))
      cfg.epsilon_list.push_back(parse_number(t, "epsilon.list"));
  }
  if (auto v = take("mesh.kappa")) cfg.kappa = parse_number(*v, "mesh.kappa");
  if (auto v = take("cell.resolution"))
    cfg.cell_resolution = static_cast<int>(parse_number(*v, "cell.resolution"));
  if (auto v = take("homogenized.resolution"))
    cfg.homogenized_resolution =
        static_cast<int>(parse_number(*v, "homogenized.resolution"));
  if (auto v = take("newton.tol")) cfg.newton_tol = parse_number(*v, "newton.tol");
  if (auto v = take("newton.max_iter"))
    cfg.newton_max_iter = static_cast<int>(parse_number(*v, "newton.max_iter"));
  if (auto v = take("newton.mode")) cfg.newton_mode = *v;
  if (auto v = take("expansion.variant")) cfg.expansion_variant = *v;
  if (auto v = take("expansion.delta_rule")) cfg.delta_rule = *v;
  if (auto v = take("expansion.delta_exponent"))
    cfg.delta_exponent = parse_number(*v, "expansion.delta_exponent");
  if (auto v = take("probe.epsilon")) cfg.probe_epsilon = parse_number(*v, "probe.epsilon");
  if (auto v = take("probe.radius")) cfg.probe_radius = parse_number(*v, "probe.radius");
  if (auto v = take("probe.trials"))
    cfg.probe_trials = static_cast<int>(parse_number(*v, "probe.trials"));
  if (auto v = take("output.dir")) cfg.output_dir = *v;
  if (auto v = take("seed")) cfg.seed = static_cast<unsigned>(parse_number(*v, "seed"));
  if (auto v = take("cache.enabled")) {
    if (*v == "true" || *v == "1")
      cfg.use_cache = true;
    else if (*v == "false" || *v == "0")
      cfg.use_cache = false;
    else
      throw ConfigError("cache.enabled: expected true/false");
  }

  // Resolve robin edge names against the domain.
  cfg.robin_edges.clear();
  if (robin_spec != "none" && !robin_spec.empty()) {
    const int ne = cfg.domain_kind == "rectangle"
                       ? 4
                       : static_cast<int>(cfg.vertices.size());
    if (robin_spec == "all") {
      for (int e = 0; e < ne; ++e) cfg.robin_edges.push_back(e);
    } else {
      static const std::map<std::string, int> names = {
          {"bottom", 0}, {"right", 1}, {"top", 2}, {"left", 3}};
      for (const auto& t : split_ws(robin_spec)) {
        auto it = names.find(t);
        if (it != names.end() && cfg.domain_kind == "rectangle") {
          cfg.robin_edges.push_back(it->second);
        } else {
          const double e = parse_number(t, "domain.robin_edges");
          cfg.robin_edges.push_back(static_cast<int>(e));
        }
      }
    }
  }
  cfg.validate();
  return cfg;
}

StudyConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

void StudyConfig::validate() const {
  std::vector<std::string> errs;
  if (domain_kind != "rectangle" && domain_kind != "polygon")
    errs.push_back("domain.kind: expected rectangle or polygon");
  if (domain_kind == "rectangle" &&
      (rect.size() != 4 || !(rect[2] > rect[0]) || !(rect[3] > rect[1])))
    errs.push_back("domain.rect: degenerate extents");
  if (domain_kind == "polygon" && vertices.size() < 3)
    errs.push_back("domain.vertices: need at least 3 vertices");
  if (epsilon_list.empty()) {
    // Allowed: cell/solve subcommands do not sweep.
  } else {
    for (double e : epsilon_list)
      if (!(e > 0 && e < 0.5)) {
        errs.push_back("epsilon.list: entries must lie in (0, 1/2)");
        break;
      }
    for (size_t i = 1; i < epsilon_list.size(); ++i)
      if (!(epsilon_list[i] < epsilon_list[i - 1])) {
        errs.push_back("epsilon.list: not strictly decreasing");
        break;
      }
  }
  if (!(kappa >= 8)) errs.push_back("mesh.kappa: must be >= 8");
  if (cell_resolution < 8) errs.push_back("cell.resolution: must be >= 8");
  if (homogenized_resolution < 2) errs.push_back("homogenized.resolution: must be >= 2");
  if (!(newton_tol > 0)) errs.push_back("newton.tol: must be positive");
  if (newton_max_iter < 1) errs.push_back("newton.max_iter: must be >= 1");
  if (newton_mode != "full" && newton_mode != "frozen")
    errs.push_back("newton.mode: expected full or frozen");
  if (expansion_variant != "smoothed" && expansion_variant != "direct")
    errs.push_back("expansion.variant: expected smoothed or direct");
  if (delta_rule != "power" && delta_rule != "inv_log")
    errs.push_back("expansion.delta_rule: expected power or inv_log");
  if (delta_rule == "power" && !(delta_exponent > 0 && delta_exponent < 0.5))
    errs.push_back("expansion.delta_exponent: must lie in (0, 1/2)");
  if (!(probe_epsilon > 0 && probe_epsilon < 0.5))
    errs.push_back("probe.epsilon: must lie in (0, 1/2)");
  if (probe_radius < 0) errs.push_back("probe.radius: must be >= 0");
  if (probe_trials < 1) errs.push_back("probe.trials: must be >= 1");
  const int ne = domain_kind == "rectangle" ? 4 : static_cast<int>(vertices.size());
  for (int e : robin_edges)
    if (e < 0 || e >= ne) {
      errs.push_back("domain.robin_edges: index out of range");
      break;
    }
  // Robin on the whole boundary needs the pointwise Legendre condition.
  if (static_cast<int>(robin_edges.size()) == ne && ne > 0 && !robin_edges.empty()) {
    try {
      if (!coefficient_field().legendre)
        errs.push_back("domain.robin_edges: 'all' requires a Legendre-positive field");
    } catch (const std::exception& ex) {
      errs.push_back(std::string("coeff: ") + ex.what());
    }
  }
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

DomainSpec StudyConfig::domain() const {
  DomainSpec d;
  if (domain_kind == "rectangle") {
    d = DomainSpec::rectangle(rect[0], rect[1], rect[2], rect[3]);
  } else {
    d.vertices = vertices;
  }
  d.robin_edges = robin_edges;
  d.validate();
  return d;
}

PeriodicCoefficientField StudyConfig::coefficient_field() const {
  if (coeff_type == "constant") return fields::constant_scalar(coeff_p1);
  return fields::by_name(coeff_type, coeff_p1, coeff_p2);
}

NonlinearityModel StudyConfig::nonlinearity(const HomogenizedTensor& ahat) const {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  if (ahat.n == 1) m = ahat.matrix2();
  NonlinearityModel model = models::by_name(model_type, m, model_amplitude);
  if (robin_model == "one_minus_u") model = models::with_robin_one_minus_u(model);
  else if (robin_model != "none")
    throw ConfigError("model.robin: expected none or one_minus_u");
  return model;
}

ExpansionRecipe StudyConfig::recipe(double eps) const {
  ExpansionRecipe r;
  r.variant = expansion_variant == "direct" ? ExpansionVariant::Direct
                                            : ExpansionVariant::Smoothed;
  r.epsilon = eps;
  r.delta_rule = delta_rule == "inv_log" ? ExpansionRecipe::DeltaRule::InverseLog
                                         : ExpansionRecipe::DeltaRule::Power;
  r.delta_exponent = delta_exponent;
  return r;
}

NewtonMode StudyConfig::newton_mode_enum() const {
  return newton_mode == "frozen" ? NewtonMode::FrozenAtInitial : NewtonMode::FullNewton;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  RateFit fit;
  std::vector<std::pair<double, double>> logs;
  int dropped = 0;
  for (const auto& [eps, err] : pairs) {
    if (err > 0 && eps > 0)
      logs.push_back({std::log(eps), std::log(err)});
    else
      ++dropped;
  }
  if (dropped) fit.note = std::to_string(dropped) + " non-positive entries excluded";
  fit.points = static_cast<int>(logs.size());
  if (fit.points < 3) {
    fit.note += (fit.note.empty() ? "" : "; ");
    fit.note += "insufficient data";
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double np = fit.points;
  const double denom = np * sxx - sx * sx;
  fit.slope = (np * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / np;
  double ss = 0;
  for (const auto& [x, y] : logs) {
    const double r = y - (fit.slope * x + fit.intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / np);
  fit.valid = true;
  return fit;
}

bool StudyReport::all_converged() const {
  if (records.empty()) return false;
  return std::all_of(records.begin(), records.end(),
                     [](const EpsilonRecord& r) { return r.converged; });
}

Mesh mesh_with_pitch(const DomainSpec& domain, double pitch) {
  if (domain.is_rectangle()) {
    const double w = domain.vertices[1].x() - domain.vertices[0].x();
    const double h = domain.vertices[2].y() - domain.vertices[1].y();
    return build_rectangle_mesh(domain,
                                std::max(1, static_cast<int>(std::lround(w / pitch))),
                                std::max(1, static_cast<int>(std::lround(h / pitch))));
  }
  return build_domain_mesh(domain, pitch * (1 + 1e-12));
}

CellRunResult run_cell_stage(const StudyConfig& config) {
  CellRunResult result;
  const PeriodicCoefficientField field = config.coefficient_field();
  const std::string cache_path = config.output_dir + "/corrector_cache.bin";
  if (config.use_cache &&
      load_corrector_cache(cache_path, field.descriptor, config.cell_resolution,
                           result.correctors, result.ahat)) {
    result.from_cache = true;
    return result;
  }
  result.correctors = solve_cell_problems(field, config.cell_resolution);
  result.ahat = homogenized_tensor(field, result.correctors);
  if (config.use_cache) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    save_corrector_cache(cache_path, field.descriptor, result.correctors, result.ahat);
  }
  return result;
}

StudyReport run_study(const StudyConfig& config) {
  config.validate();
  StudyReport report;
  const PeriodicCoefficientField field = config.coefficient_field();
  report.coeff_descriptor = field.descriptor;
  report.cell_resolution = config.cell_resolution;
  report.seed_variant = config.expansion_variant;

  CellRunResult cell = run_cell_stage(config);
  report.ahat = cell.ahat;
  report.corrector_residual = cell.correctors.residual_inf;

  const DomainSpec domain = config.domain();
  const NonlinearityModel model = config.nonlinearity(report.ahat);

  // Homogenized solve from zero start.
  const Mesh coarse = mesh_with_pitch(domain, 1.0 / config.homogenized_resolution);
  const ProblemSpec hom_spec =
      ProblemSpec::homogenized_problem(domain, report.ahat, model);
  ProblemWorkspace hom_ws(hom_spec, coarse);
  auto [u0, hom_rep] = newton_solve(hom_ws, hom_ws.make_field(), NewtonMode::FullNewton,
                                    config.newton_tol, config.newton_max_iter);
  if (!hom_rep.converged)
    throw NumericError("homogenized solve did not converge; cannot seed the sweep");
  report.homogenized_newton_iters = hom_rep.iterations;
  report.sigma_min = check_nondegeneracy(hom_ws, u0);

  for (double eps : config.epsilon_list) {
    EpsilonRecord rec;
    rec.epsilon = eps;
    try {
      const Mesh fine = mesh_with_pitch(domain, eps / config.kappa);
      rec.h = fine.h;

      const ProblemSpec osc_spec =
          ProblemSpec::oscillatory_problem(domain, field, eps, model);
      ProblemWorkspace osc_ws(osc_spec, fine);

      ExpansionRecipe seed_recipe = config.recipe(eps);
      ExpansionRecipe alt_recipe = seed_recipe;
      alt_recipe.variant = seed_recipe.variant == ExpansionVariant::Smoothed
                               ? ExpansionVariant::Direct
                               : ExpansionVariant::Smoothed;
      const SolutionField ubar =
          build_expansion(seed_recipe, u0, cell.correctors, domain, fine);
      const SolutionField ubar_alt =
          build_expansion(alt_recipe, u0, cell.correctors, domain, fine);
      rec.discrepancy = discrepancy(osc_ws, ubar);
      rec.discrepancy_alt = discrepancy(osc_ws, ubar_alt);

      auto [ueps, nrep] = newton_solve(osc_ws, ubar, config.newton_mode_enum(),
                                       config.newton_tol, config.newton_max_iter);
      rec.newton_iters = nrep.iterations;
      if (!nrep.converged) {
        rec.error = "newton did not converge in " +
                    std::to_string(config.newton_max_iter) + " iterations";
      } else {
        rec.converged = true;
        // Transfer u0 to the fine mesh for the sup comparison.
        double sup = 0;
        for (int node = 0; node < fine.num_nodes(); ++node)
          for (int al = 0; al < hom_spec.n; ++al)
            sup = std::max(sup, std::abs(ueps.at(al, node) -
                                         u0.eval(al, fine.nodes[node])));
        rec.sup_err = sup;
        SolutionField diff = ueps;
        diff.values -= ubar.values;
        rec.w12_err = w1p_norm(diff, 2.0);
        rec.apriori_ratio = rec.discrepancy > 0 ? rec.w12_err / rec.discrepancy : 0.0;
      }
    } catch (const std::exception& ex) {
      rec.error = ex.what();
      rec.converged = false;
    }
    report.records.push_back(rec);
  }

  std::vector<std::pair<double, double>> sup_pairs, disc_pairs, alt_pairs;
  for (const auto& r : report.records)
    if (r.converged) {
      sup_pairs.push_back({r.epsilon, r.sup_err});
      disc_pairs.push_back({r.epsilon, r.discrepancy});
      alt_pairs.push_back({r.epsilon, r.discrepancy_alt});
    }
  report.sup_rate = fit_rate(sup_pairs);
  report.discrepancy_rate = fit_rate(disc_pairs);
  report.discrepancy_alt_rate = fit_rate(alt_pairs);
  return report;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_svg_plot(const StudyReport& report, const std::string& path) {
  std::vector<std::pair<double, double>> sup, disc;
  for (const auto& r : report.records)
    if (r.converged && r.sup_err > 0 && r.discrepancy > 0) {
      sup.push_back({r.epsilon, r.sup_err});
      disc.push_back({r.epsilon, r.discrepancy});
    }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  const int W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& series : {sup, disc})
    for (const auto& [e, v] : series) {
      xmin = std::min(xmin, std::log10(e));
      xmax = std::max(xmax, std::log10(e));
      ymin = std::min(ymin, std::log10(v));
      ymax = std::max(ymax, std::log10(v));
    }
  if (sup.empty()) {
    xmin = -2;
    xmax = 0;
    ymin = -2;
    ymax = 0;
  }
  if (xmax - xmin < 1e-9) xmax = xmin + 1;
  if (ymax - ymin < 1e-9) ymax = ymin + 1;
  auto X = [&](double le) {
    return ml + (le - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto Y = [&](double lv) {
    return H - mb - (lv - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
     << "\" font-size=\"13\" text-anchor=\"middle\">log10(epsilon)</text>\n";
  os << "<text x=\"16\" y=\"" << (H / 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (H / 2) << ")\">log10(value)</text>\n";
  auto draw_series = [&](const std::vector<std::pair<double, double>>& s,
                         const char* color, const char* label, int label_y,
                         const RateFit& fit) {
    if (s.empty()) return;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& [e, v] : s) os << X(std::log10(e)) << "," << Y(std::log10(v)) << " ";
    os << "\"/>\n";
    for (const auto& [e, v] : s)
      os << "<circle cx=\"" << X(std::log10(e)) << "\" cy=\"" << Y(std::log10(v))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    if (fit.valid) {
      // Fitted line in natural log converted to log10 axes.
      const double l10 = std::log(10.0);
      auto yfit = [&](double le10) {
        return (fit.slope * (le10 * l10) + fit.intercept) / l10;
      };
      os << "<line x1=\"" << X(xmin) << "\" y1=\"" << Y(yfit(xmin)) << "\" x2=\""
         << X(xmax) << "\" y2=\"" << Y(yfit(xmax)) << "\" stroke=\"" << color
         << "\" stroke-dasharray=\"5,4\"/>\n";
    }
    os << "<text x=\"" << (W - mr - 8) << "\" y=\"" << label_y
       << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << color << "\">" << label;
    if (fit.valid) os << " (slope " << format_double(fit.slope).substr(0, 6) << ")";
    os << "</text>\n";
  };
  draw_series(sup, "#c0392b", "sup error", mt + 16, report.sup_rate);
  draw_series(disc, "#2980b9", "discrepancy", mt + 34, report.discrepancy_rate);
  os << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_outputs(const StudyReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("output directory is not writable: " + dir);
  std::vector<std::string> written;

  const std::string csv_path = dir + "/sweep.csv";
  {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + csv_path);
    os << "epsilon,h,sup_err,w12_err_vs_expansion,discrepancy,newton_iters,apriori_ratio\n";
    for (const auto& r : report.records) {
      if (!r.converged) continue;
      os << format_double(r.epsilon) << "," << format_double(r.h) << ","
         << format_double(r.sup_err) << "," << format_double(r.w12_err) << ","
         << format_double(r.discrepancy) << "," << r.newton_iters << ","
         << format_double(r.apriori_ratio) << "\n";
    }
  }
  written.push_back(csv_path);

  const std::string rep_path = dir + "/report.txt";
  {
    std::ofstream os(rep_path, std::ios::binary);
    os << "coefficients " << report.coeff_descriptor << "\n";
    os << "cell_resolution " << report.cell_resolution << "\n";
    const int n = report.ahat.n;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int al = 0; al < n; ++al)
          for (int be = 0; be < n; ++be)
            os << "ahat " << i << " " << j << " " << al << " " << be << " "
               << format_double(report.ahat(i, j, al, be)) << "\n";
    os << "coercivity_certificate " << format_double(report.ahat.coercivity_lower_bound)
       << "\n";
    os << "certificate_kind sufficient_not_equivalent\n";
    os << "corrector_residual " << format_double(report.corrector_residual) << "\n";
    os << "sigma_min " << format_double(report.sigma_min) << "\n";
    os << "seed_variant " << report.seed_variant << "\n";
    for (const auto& r : report.records) {
      os << "record eps=" << format_double(r.epsilon);
      if (r.converged) {
        os << " h=" << format_double(r.h) << " sup_err=" << format_double(r.sup_err)
           << " w12_err=" << format_double(r.w12_err)
           << " discrepancy=" << format_double(r.discrepancy)
           << " discrepancy_alt=" << format_double(r.discrepancy_alt)
           << " newton_iters=" << r.newton_iters
           << " apriori_ratio=" << format_double(r.apriori_ratio) << "\n";
      } else {
        os << " failed \"" << r.error << "\"\n";
      }
    }
    auto write_fit = [&](const char* name, const RateFit& f) {
      os << "slope " << name;
      if (f.valid)
        os << " value=" << format_double(f.slope)
           << " intercept=" << format_double(f.intercept)
           << " residual=" << format_double(f.residual) << " points=" << f.points;
      else
        os << " insufficient data";
      if (!f.note.empty()) os << " note=\"" << f.note << "\"";
      os << "\n";
    };
    write_fit("sup_err", report.sup_rate);
    write_fit("discrepancy", report.discrepancy_rate);
    write_fit("discrepancy_alt", report.discrepancy_alt_rate);
    os << "note dual norms use the computable p=2 surrogate sqrt(f^T K^{-1} f)\n";
    os << "note uniqueness probes are consistency checks, not certificates\n";
  }
  written.push_back(rep_path);

  const std::string svg_path = dir + "/plot.svg";
  write_svg_plot(report, svg_path);
  written.push_back(svg_path);
  return written;
}

}  // namespace homog2d
