#include "homog2d/nonlinearity.hpp"

#include <cmath>

namespace homog2d {

namespace models {

NonlinearityModel zero(int n) {
  NonlinearityModel m;
  m.n = n;
  m.name = "zero";
  m.affine = true;
  return m;
}

NonlinearityModel linear_mass(double c, int n) {
  NonlinearityModel m;
  m.n = n;
  m.name = "linear_mass";
  m.affine = true;
  m.reaction = [c, n](const Vec2&, const double* u, double* out) {
    for (int a = 0; a < n; ++a) out[a] = c * u[a];
  };
  m.reaction_du = [c, n](const Vec2&, const double*, double* out) {
    for (int k = 0; k < n * n; ++k) out[k] = 0;
    for (int a = 0; a < n; ++a) out[a * n + a] = c;
  };
  return m;
}

NonlinearityModel cubic_manufactured(const Eigen::Matrix2d& ahat, double amplitude) {
  NonlinearityModel m;
  m.n = 1;
  m.name = "cubic_manufactured";
  const double A = amplitude;
  const double tr = ahat(0, 0) + ahat(1, 1);
  const double off = ahat(0, 1) + ahat(1, 0);
  auto u_star = [A](const Vec2& x) {
    return A * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
  };
  auto div_flux = [A, tr, off](const Vec2& x) {
    const double s = A * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
    const double c = A * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
    return -M_PI * M_PI * tr * s + M_PI * M_PI * off * c;
  };
  m.reaction = [u_star, div_flux](const Vec2& x, const double* u, double* out) {
    const double us = u_star(x);
    out[0] = u[0] * u[0] * u[0] - (us * us * us - div_flux(x));
  };
  m.reaction_du = [](const Vec2&, const double* u, double* out) {
    out[0] = 3.0 * u[0] * u[0];
  };
  return m;
}

NonlinearityModel sine_reaction() {
  NonlinearityModel m;
  m.n = 1;
  m.name = "sine_reaction";
  m.reaction = [](const Vec2& x, const double* u, double* out) {
    out[0] = (1.0 + x.x()) * std::sin(u[0]);
  };
  m.reaction_du = [](const Vec2& x, const double* u, double* out) {
    out[0] = (1.0 + x.x()) * std::cos(u[0]);
  };
  return m;
}

NonlinearityModel exp_reaction() {
  NonlinearityModel m;
  m.n = 1;
  m.name = "exp_reaction";
  m.reaction = [](const Vec2& x, const double* u, double* out) {
    out[0] = std::cos(M_PI * x.x()) * (std::exp(u[0]) - 1.0);
  };
  m.reaction_du = [](const Vec2& x, const double* u, double* out) {
    out[0] = std::cos(M_PI * x.x()) * std::exp(u[0]);
  };
  return m;
}

NonlinearityModel drift_mix() {
  NonlinearityModel m;
  m.n = 1;
  m.name = "drift_mix";
  m.reaction = [](const Vec2&, const double* u, double* out) {
    out[0] = u[0] * u[0] * u[0];
  };
  m.reaction_du = [](const Vec2&, const double* u, double* out) {
    out[0] = 3.0 * u[0] * u[0];
  };
  m.drift = [](const Vec2& x, const double* u, double* out) {
    out[0] = 0.3 * x.y() * std::sin(u[0]);
    out[1] = 0.2 * x.x() * u[0];
  };
  m.drift_du = [](const Vec2& x, const double* u, double* out) {
    out[0] = 0.3 * x.y() * std::cos(u[0]);
    out[1] = 0.2 * x.x();
  };
  return m;
}

NonlinearityModel coupled_cubic() {
  NonlinearityModel m;
  m.n = 2;
  m.name = "coupled_cubic";
  m.reaction = [](const Vec2& x, const double* u, double* out) {
    out[0] = u[0] * u[0] * u[0] + 0.5 * u[1] - std::sin(M_PI * x.x());
    out[1] = u[1] * u[1] * u[1] - 0.5 * u[0] + std::cos(M_PI * x.y());
  };
  m.reaction_du = [](const Vec2&, const double* u, double* out) {
    out[0 * 2 + 0] = 3.0 * u[0] * u[0];
    out[0 * 2 + 1] = 0.5;
    out[1 * 2 + 0] = -0.5;
    out[1 * 2 + 1] = 3.0 * u[1] * u[1];
  };
  return m;
}

NonlinearityModel with_robin_one_minus_u(NonlinearityModel base) {
  const int n = base.n;
  base.name += "+robin_one_minus_u";
  base.robin = [n](const Vec2&, const double* u, double* out) {
    for (int a = 0; a < n; ++a) out[a] = 1.0 - u[a];
  };
  base.robin_du = [n](const Vec2&, const double*, double* out) {
    for (int k = 0; k < n * n; ++k) out[k] = 0;
    for (int a = 0; a < n; ++a) out[a * n + a] = -1.0;
  };
  return base;
}

std::vector<std::string> builtin_names() {
  return {"zero",         "linear_mass", "cubic_manufactured", "sine_reaction",
          "exp_reaction", "drift_mix",   "coupled_cubic"};
}

NonlinearityModel by_name(const std::string& name, const Eigen::Matrix2d& ahat,
                          double amplitude) {
  if (name == "zero") return zero();
  if (name == "linear_mass") return linear_mass(amplitude);
  if (name == "cubic_manufactured") return cubic_manufactured(ahat, amplitude);
  if (name == "sine_reaction") return sine_reaction();
  if (name == "exp_reaction") return exp_reaction();
  if (name == "drift_mix") return drift_mix();
  if (name == "coupled_cubic") return coupled_cubic();
  throw std::runtime_error("unknown nonlinearity model: " + name);
}

}  // namespace models

double derivative_check(const NonlinearityModel& model, const Vec2& x,
                        const Eigen::VectorXd& u) {
  const int n = model.n;
  const double step = 1e-6;
  double worst = 0;
  std::vector<double> up(u.data(), u.data() + n), um(up), vp(2 * n), vm(2 * n),
      d(2 * n * n);
  auto check_block = [&](const NonlinearityModel::Callback& value,
                         const NonlinearityModel::Callback& deriv, int rows) {
    if (!value || !deriv) return;
    deriv(x, u.data(), d.data());
    for (int g = 0; g < n; ++g) {
      up.assign(u.data(), u.data() + n);
      um.assign(u.data(), u.data() + n);
      up[g] += step;
      um[g] -= step;
      value(x, up.data(), vp.data());
      value(x, um.data(), vm.data());
      for (int r = 0; r < rows; ++r) {
        const double fd = (vp[r] - vm[r]) / (2 * step);
        const double an = d[r * n + g];
        const double scale = std::max({1.0, std::abs(fd), std::abs(an)});
        worst = std::max(worst, std::abs(fd - an) / scale);
      }
    }
  };
  check_block(model.reaction, model.reaction_du, n);
  check_block(model.drift, model.drift_du, 2 * n);
  check_block(model.robin, model.robin_du, n);
  return worst;
}

}  // namespace homog2d
