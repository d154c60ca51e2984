#include "homog2d/mollifier.hpp"

#include <cmath>

namespace homog2d {

namespace {

double bump_raw(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

}  // namespace

double Mollifier::bump_normalization() {
  // 2 pi int_0^1 r exp(-1/(1-r^2)) dr by composite Gauss; computed once.
  static const double z = [] {
    const double g = std::sqrt(3.0 / 5.0);
    const double gp[3] = {-g, 0.0, g};
    const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const int panels = 2000;
    double acc = 0;
    for (int p = 0; p < panels; ++p) {
      const double a = static_cast<double>(p) / panels;
      const double b = static_cast<double>(p + 1) / panels;
      for (int k = 0; k < 3; ++k) {
        const double r = 0.5 * (a + b) + 0.5 * (b - a) * gp[k];
        acc += 0.5 * (b - a) * gw[k] * r * bump_raw(r * r);
      }
    }
    return 2.0 * M_PI * acc;
  }();
  return z;
}

Mollifier::Mollifier(double d) : delta(d) {
  if (!(d > 0)) throw GeometryError("mollifier radius must be positive");
}

double Mollifier::rho(const Vec2& z) const {
  const Vec2 s = z / delta;
  return bump_raw(s.squaredNorm()) / (bump_normalization() * delta * delta);
}

Vec2 Mollifier::rho_grad(const Vec2& z) const {
  const Vec2 s = z / delta;
  const double r2 = s.squaredNorm();
  if (r2 >= 1.0) return {0, 0};
  const double f = bump_raw(r2);
  const double d = 1.0 - r2;
  // d/ds of exp(-1/(1-|s|^2)) = f * (-2 s / (1-|s|^2)^2)
  const Vec2 g = f * (-2.0 / (d * d)) * s;
  return g / (bump_normalization() * delta * delta * delta);
}

SampleLattice SampleLattice::from_sampler(const DomainSpec& domain, double pitch,
                                          const std::function<double(const Vec2&)>& f) {
  if (!(pitch > 0)) throw GeometryError("lattice pitch must be positive");
  Vec2 lo = domain.vertices[0], hi = domain.vertices[0];
  for (const auto& v : domain.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  SampleLattice lat;
  lat.origin = lo;
  lat.pitch = pitch;
  lat.nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / pitch - 1e-12)));
  lat.ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / pitch - 1e-12)));
  lat.values.assign(static_cast<size_t>(lat.nx) * lat.ny, 0.0);
  lat.inside.assign(static_cast<size_t>(lat.nx) * lat.ny, 0);
  for (int iy = 0; iy < lat.ny; ++iy)
    for (int ix = 0; ix < lat.nx; ++ix) {
      const Vec2 c = lo + Vec2((ix + 0.5) * pitch, (iy + 0.5) * pitch);
      if (point_inside(domain, c)) {
        lat.inside[iy * lat.nx + ix] = 1;
        lat.values[iy * lat.nx + ix] = f(c);
      }
    }
  return lat;
}

MollifiedField::MollifiedField(SampleLattice lattice, double delta)
    : lattice_(std::move(lattice)), kernel_(delta) {
  under_resolved_ = delta <= 2.0 * lattice_.pitch;
}

double MollifiedField::eval(const Vec2& x) const {
  const double p = lattice_.pitch;
  const double cell = p * p;
  const int ix0 = static_cast<int>(std::floor((x.x() - kernel_.delta - lattice_.origin.x()) / p));
  const int ix1 = static_cast<int>(std::ceil((x.x() + kernel_.delta - lattice_.origin.x()) / p));
  const int iy0 = static_cast<int>(std::floor((x.y() - kernel_.delta - lattice_.origin.y()) / p));
  const int iy1 = static_cast<int>(std::ceil((x.y() + kernel_.delta - lattice_.origin.y()) / p));
  double num = 0, den = 0;
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Vec2 c = lattice_.origin + Vec2((ix + 0.5) * p, (iy + 0.5) * p);
      const double w = kernel_.rho(x - c) * cell;
      if (w == 0.0) continue;
      den += w;  // virtual lattice: every covered cell weighs in
      if (ix >= 0 && ix < lattice_.nx && iy >= 0 && iy < lattice_.ny &&
          lattice_.inside[iy * lattice_.nx + ix])
        num += w * lattice_.values[iy * lattice_.nx + ix];
    }
  return den > 0 ? num / den : 0.0;
}

Vec2 MollifiedField::eval_grad(const Vec2& x) const {
  const double p = lattice_.pitch;
  const double cell = p * p;
  const int ix0 = static_cast<int>(std::floor((x.x() - kernel_.delta - lattice_.origin.x()) / p));
  const int ix1 = static_cast<int>(std::ceil((x.x() + kernel_.delta - lattice_.origin.x()) / p));
  const int iy0 = static_cast<int>(std::floor((x.y() - kernel_.delta - lattice_.origin.y()) / p));
  const int iy1 = static_cast<int>(std::ceil((x.y() + kernel_.delta - lattice_.origin.y()) / p));
  double num = 0, den = 0;
  Vec2 gnum{0, 0}, gden{0, 0};
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const Vec2 c = lattice_.origin + Vec2((ix + 0.5) * p, (iy + 0.5) * p);
      const double w = kernel_.rho(x - c) * cell;
      const Vec2 gw = kernel_.rho_grad(x - c) * cell;
      if (w == 0.0 && gw.squaredNorm() == 0.0) continue;
      den += w;
      gden += gw;
      if (ix >= 0 && ix < lattice_.nx && iy >= 0 && iy < lattice_.ny &&
          lattice_.inside[iy * lattice_.nx + ix]) {
        num += w * lattice_.values[iy * lattice_.nx + ix];
        gnum += gw * lattice_.values[iy * lattice_.nx + ix];
      }
    }
  if (!(den > 0)) return {0, 0};
  return (gnum * den - num * gden) / (den * den);
}

}  // namespace homog2d
