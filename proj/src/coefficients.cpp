#include "homog2d/coefficients.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace homog2d {

TensorSampler PeriodicCoefficientField::oscillatory(double eps) const {
  auto self = *this;
  if (eps > 0)
    return [self, eps](const Vec2& x, double* a) { self.sample(x / eps, a); };
  return [self](const Vec2& x, double* a) { self.sample(x, a); };
}

namespace fields {

namespace {

PeriodicCoefficientField scalar_field(std::string descriptor,
                                      std::function<double(const Vec2&)> value, double lo,
                                      double hi) {
  PeriodicCoefficientField f;
  f.n = 1;
  f.descriptor = std::move(descriptor);
  f.inf_bound = lo;
  f.sup_bound = hi;
  f.symmetric = true;
  f.legendre = lo > 0;
  f.sampler = [value](const Vec2& y, double* a) {
    const double v = value(y);
    a[tensor_index(1, 0, 0, 0, 0)] = v;
    a[tensor_index(1, 0, 1, 0, 0)] = 0;
    a[tensor_index(1, 1, 0, 0, 0)] = 0;
    a[tensor_index(1, 1, 1, 0, 0)] = v;
  };
  return f;
}

}  // namespace

PeriodicCoefficientField constant_scalar(double a) {
  std::ostringstream d;
  d << "constant_scalar(" << a << ")";
  return scalar_field(d.str(), [a](const Vec2&) { return a; }, a, a);
}

PeriodicCoefficientField constant_tensor(int n, const std::vector<double>& a) {
  if (static_cast<int>(a.size()) != 4 * n * n)
    throw GeometryError("constant_tensor: expected 4*n*n entries");
  PeriodicCoefficientField f;
  f.n = n;
  double lo = a[0], hi = a[0];
  for (double v : a) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  f.inf_bound = lo;
  f.sup_bound = hi;
  std::ostringstream d;
  d << "constant_tensor(n=" << n;
  for (double v : a) d << "," << v;
  d << ")";
  f.descriptor = d.str();
  f.symmetric = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
          if (a[tensor_index(n, i, j, al, be)] != a[tensor_index(n, j, i, be, al)])
            f.symmetric = false;
  f.legendre = legendre_minimum_constant(a, n) > 0;
  f.sampler = [a](const Vec2&, double* out) {
    std::copy(a.begin(), a.end(), out);
  };
  return f;
}

PeriodicCoefficientField laminate(double a1, double a2) {
  std::ostringstream d;
  d << "laminate(" << a1 << "," << a2 << ")";
  return scalar_field(
      d.str(), [a1, a2](const Vec2& y) { return y.x() < 0.5 ? a1 : a2; },
      std::min(a1, a2), std::max(a1, a2));
}

PeriodicCoefficientField checkerboard(double a1, double a2) {
  std::ostringstream d;
  d << "checkerboard(" << a1 << "," << a2 << ")";
  return scalar_field(
      d.str(),
      [a1, a2](const Vec2& y) { return (y.x() < 0.5) == (y.y() < 0.5) ? a1 : a2; },
      std::min(a1, a2), std::max(a1, a2));
}

PeriodicCoefficientField trigonometric(double c0, double c1) {
  if (!(c0 > std::abs(c1)))
    throw CoercivityError("trigonometric field requires c0 > |c1|");
  std::ostringstream d;
  d << "trigonometric(" << c0 << "," << c1 << ")";
  return scalar_field(
      d.str(),
      [c0, c1](const Vec2& y) {
        return c0 + c1 * std::sin(2 * M_PI * y.x()) * std::sin(2 * M_PI * y.y());
      },
      c0 - std::abs(c1), c0 + std::abs(c1));
}

PeriodicCoefficientField tabulated(int k, const std::vector<double>& values) {
  if (k < 1 || static_cast<int>(values.size()) != k * k)
    throw GeometryError("tabulated: expected k*k values");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::ostringstream d;
  d << "tabulated(k=" << k;
  for (double v : values) d << "," << v;
  d << ")";
  return scalar_field(
      d.str(),
      [k, values](const Vec2& y) {
        const int ix = std::min(k - 1, static_cast<int>(y.x() * k));
        const int iy = std::min(k - 1, static_cast<int>(y.y() * k));
        return values[iy * k + ix];
      },
      lo, hi);
}

PeriodicCoefficientField coupled_system() {
  // 2-component system with constant cross diffusion. Diagonal blocks 2*I,
  // off-diagonal coupling 0.3 on matching directions.
  const int n = 2;
  std::vector<double> a(4 * n * n, 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int al = 0; al < n; ++al) a[tensor_index(n, i, i, al, al)] = 2.0;
    a[tensor_index(n, i, i, 0, 1)] = 0.3;
    a[tensor_index(n, i, i, 1, 0)] = 0.3;
  }
  PeriodicCoefficientField f = constant_tensor(n, a);
  f.descriptor = "coupled_system";
  return f;
}

std::vector<std::string> builtin_names() {
  return {"constant", "laminate", "checkerboard", "trigonometric", "coupled_system"};
}

PeriodicCoefficientField by_name(const std::string& name, double p1, double p2) {
  if (name == "constant") return constant_scalar(p1);
  if (name == "laminate") return laminate(p1, p2);
  if (name == "checkerboard") return checkerboard(p1, p2);
  if (name == "trigonometric") return trigonometric(p1, p2);
  if (name == "coupled_system") return coupled_system();
  throw GeometryError("unknown coefficient field: " + name);
}

}  // namespace fields

double legendre_minimum_constant(const std::vector<double>& tensor, int n) {
  // Legendre form on xi_i^a: M[(i,a),(j,b)] = a_ij^{ab}, symmetrized.
  Eigen::MatrixXd M(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int al = 0; al < n; ++al)
        for (int be = 0; be < n; ++be)
          M(i * n + al, j * n + be) = tensor[tensor_index(n, i, j, al, be)];
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  return es.eigenvalues().minCoeff();
}

double legendre_minimum(const PeriodicCoefficientField& field, int grid) {
  std::vector<double> a(4 * field.n * field.n);
  double lo = std::numeric_limits<double>::max();
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      const Vec2 y{(ix + 0.5) / grid, (iy + 0.5) / grid};
      field.sample(y, a.data());
      lo = std::min(lo, legendre_minimum_constant(a, field.n));
    }
  return lo;
}

}  // namespace homog2d
