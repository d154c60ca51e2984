#include "homog2d/expansion.hpp"

#include <cmath>

namespace homog2d {

double ExpansionRecipe::delta() const {
  if (delta_rule == DeltaRule::InverseLog) return -1.0 / std::log(epsilon);
  return std::pow(epsilon, delta_exponent);
}

void ExpansionRecipe::validate() const {
  if (!(epsilon > 0)) throw GeometryError("expansion recipe: epsilon must be positive");
  if (delta_rule == DeltaRule::Power &&
      !(delta_exponent > 0 && delta_exponent < 0.5))
    throw GeometryError("expansion recipe: delta exponent must lie in (0, 1/2)");
  const double d = delta();
  if (!(d > 0 && d < 1)) throw GeometryError("expansion recipe: delta outside (0,1)");
}

double smoothstep5(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double cutoff(const DomainSpec& spec, double eps, const Vec2& x) {
  const double d = boundary_distance(spec, x);
  return smoothstep5((d - eps) / eps);
}

Eigen::VectorXd recovered_gradient(const SolutionField& u, int comp, int dir) {
  const Mesh& mesh = *u.mesh;
  const int N = mesh.num_nodes();
  Eigen::VectorXd g(N);
  const bool full_lattice =
      mesh.cell_of_lattice.empty() && mesh.nx > 0 && N == (mesh.nx + 1) * (mesh.ny + 1);
  if (full_lattice) {
    const int np = mesh.nx + 1;
    const double h = dir == 0 ? mesh.dx : mesh.dy;
    auto val = [&](int ix, int iy) { return u.at(comp, iy * np + ix); };
    for (int iy = 0; iy <= mesh.ny; ++iy)
      for (int ix = 0; ix <= mesh.nx; ++ix) {
        const int i = dir == 0 ? ix : iy;
        const int count = dir == 0 ? mesh.nx : mesh.ny;
        double d;
        auto sample = [&](int k) { return dir == 0 ? val(k, iy) : val(ix, k); };
        if (i == 0)
          d = (-3.0 * sample(0) + 4.0 * sample(1) - sample(2)) / (2.0 * h);
        else if (i == count)
          d = (3.0 * sample(count) - 4.0 * sample(count - 1) + sample(count - 2)) /
              (2.0 * h);
        else
          d = (sample(i + 1) - sample(i - 1)) / (2.0 * h);
        g[iy * np + ix] = d;
      }
  } else {
    for (int i = 0; i < N; ++i) {
      const Vec2 gr = u.eval_grad(comp, mesh.nodes[i]);
      g[i] = dir == 0 ? gr.x() : gr.y();
    }
  }
  return g;
}

namespace {

/// Per-(component, direction) gradient factor evaluator for the expansion.
/// The smoothed variant tabulates the mollified gradient on a delta-scaled
/// lattice (the field is smooth at scale delta) and interpolates; the direct
/// variant interpolates the recovered nodal gradient.
class GradientFactor {
 public:
  GradientFactor(const ExpansionRecipe& recipe, const SolutionField& u0,
                 const DomainSpec& domain)
      : u0_(&u0) {
    const Mesh& coarse = *u0.mesh;
    n_ = u0.n;
    if (recipe.variant == ExpansionVariant::Smoothed) {
      const double delta = recipe.delta();
      Vec2 lo = domain.vertices[0], hi = domain.vertices[0];
      for (const auto& v : domain.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      tab_origin_ = lo;
      tab_pitch_ = delta / 32.0;
      tab_nx_ = static_cast<int>(std::ceil((hi.x() - lo.x()) / tab_pitch_)) + 1;
      tab_ny_ = static_cast<int>(std::ceil((hi.y() - lo.y()) / tab_pitch_)) + 1;
      const double int_pitch = std::max(coarse.dx, coarse.dy);
      for (int comp = 0; comp < n_; ++comp)
        for (int dir = 0; dir < 2; ++dir) {
          auto sampler = [&u0, comp, dir](const Vec2& x) {
            const Vec2 g = u0.eval_grad(comp, x);
            return dir == 0 ? g.x() : g.y();
          };
          const MollifiedField field(
              SampleLattice::from_sampler(domain, int_pitch, sampler), delta);
          std::vector<double>& tab = tables_.emplace_back();
          tab.resize(static_cast<size_t>(tab_nx_) * tab_ny_);
          for (int iy = 0; iy < tab_ny_; ++iy)
            for (int ix = 0; ix < tab_nx_; ++ix)
              tab[iy * tab_nx_ + ix] =
                  field.eval(lo + Vec2(ix * tab_pitch_, iy * tab_pitch_));
        }
    } else {
      for (int comp = 0; comp < n_; ++comp)
        for (int dir = 0; dir < 2; ++dir)
          recovered_.push_back(recovered_gradient(u0, comp, dir));
    }
  }

  double operator()(int comp, int dir, const Vec2& x) const {
    if (!tables_.empty()) {
      const double fx = std::clamp((x.x() - tab_origin_.x()) / tab_pitch_, 0.0,
                                   tab_nx_ - 1.0);
      const double fy = std::clamp((x.y() - tab_origin_.y()) / tab_pitch_, 0.0,
                                   tab_ny_ - 1.0);
      const int ix = std::min(static_cast<int>(fx), tab_nx_ - 2);
      const int iy = std::min(static_cast<int>(fy), tab_ny_ - 2);
      const double tx = fx - ix, ty = fy - iy;
      const std::vector<double>& t = tables_[comp * 2 + dir];
      return (1 - tx) * (1 - ty) * t[iy * tab_nx_ + ix] +
             tx * (1 - ty) * t[iy * tab_nx_ + ix + 1] +
             tx * ty * t[(iy + 1) * tab_nx_ + ix + 1] +
             (1 - tx) * ty * t[(iy + 1) * tab_nx_ + ix];
    }
    // Bilinear interpolation of the recovered nodal gradient.
    Vec2 ref;
    const Mesh& mesh = *u0_->mesh;
    const int e = mesh.locate(x, ref);
    const auto& el = mesh.elements[e];
    const double xi = ref.x(), eta = ref.y();
    const double N[4] = {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta),
                         0.25 * (1 + xi) * (1 + eta), 0.25 * (1 - xi) * (1 + eta)};
    const Eigen::VectorXd& g = recovered_[comp * 2 + dir];
    double s = 0;
    for (int a = 0; a < 4; ++a) s += N[a] * g[el[a]];
    return s;
  }

 private:
  int n_ = 1;
  std::vector<std::vector<double>> tables_;
  Vec2 tab_origin_{0, 0};
  double tab_pitch_ = 0;
  int tab_nx_ = 0, tab_ny_ = 0;
  std::vector<Eigen::VectorXd> recovered_;
  const SolutionField* u0_ = nullptr;
};

}  // namespace

SolutionField build_expansion(const ExpansionRecipe& recipe, const SolutionField& u0,
                              const CorrectorSet& correctors, const DomainSpec& domain,
                              const Mesh& fine_mesh) {
  recipe.validate();
  if (correctors.node_values.empty()) throw GeometryError("build_expansion: missing correctors");
  const int n = u0.n;
  if (correctors.n != n) throw GeometryError("build_expansion: corrector component mismatch");

  const GradientFactor grad(recipe, u0, domain);
  const double eps = recipe.epsilon;

  SolutionField ubar(fine_mesh, n);
  for (int node = 0; node < fine_mesh.num_nodes(); ++node) {
    const Vec2& x = fine_mesh.nodes[node];
    const double eta = cutoff(domain, eps, x);
    double gfac[2 * 8];  // dir-major per component
    if (eta > 0)
      for (int ga = 0; ga < n; ++ga)
        for (int k = 0; k < 2; ++k) gfac[ga * 2 + k] = grad(ga, k, x);
    const Vec2 y = x / eps;
    for (int al = 0; al < n; ++al) {
      double v = u0.eval(al, x);
      if (eta > 0) {
        double corr = 0;
        for (int ga = 0; ga < n; ++ga)
          for (int k = 0; k < 2; ++k)
            corr += gfac[ga * 2 + k] * correctors.value(k, ga, al, y);
        v += eps * eta * corr;
      }
      ubar.at(al, node) = v;
    }
  }
  constrain_dirichlet_boundary(ubar);
  return ubar;
}

double discrepancy(const ProblemWorkspace& ws, const SolutionField& u_bar) {
  return ws.dual_residual_norm(u_bar);
}

}  // namespace homog2d
