#include "homog2d/cell.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "homog2d/assembly.hpp"
#include "homog2d/quadrature.hpp"

namespace homog2d {

Eigen::Matrix2d HomogenizedTensor::matrix2() const {
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = (*this)(i, j, 0, 0);
  return m;
}

TensorSampler HomogenizedTensor::sampler() const {
  auto coeffs = a;
  return [coeffs](const Vec2&, double* out) {
    std::copy(coeffs.begin(), coeffs.end(), out);
  };
}

double CorrectorSet::value(int j, int beta, int alpha, const Vec2& y) const {
  const Vec2 f = detail::fold_unit(y);
  const int m = cell->m;
  const int np = m + 1;
  int ix = std::min(static_cast<int>(f.x() * m), m - 1);
  int iy = std::min(static_cast<int>(f.y() * m), m - 1);
  const double tx = f.x() * m - ix;
  const double ty = f.y() * m - iy;
  const Eigen::VectorXd& vals = node_values[j * n + beta];
  const int base = alpha * cell->mesh.num_nodes();
  const double v00 = vals[base + iy * np + ix];
  const double v10 = vals[base + iy * np + ix + 1];
  const double v11 = vals[base + (iy + 1) * np + ix + 1];
  const double v01 = vals[base + (iy + 1) * np + ix];
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + tx * ty * v11 +
         (1 - tx) * ty * v01;
}

double CorrectorSet::sup() const {
  double s = 0;
  for (const auto& v : node_values) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

double CorrectorSet::mean(int j, int beta, int alpha) const {
  const QuadCache qc(cell->mesh);
  const Eigen::VectorXd& vals = node_values[j * n + beta];
  const int base = alpha * cell->mesh.num_nodes();
  double acc = 0;
  for (int e = 0; e < cell->mesh.num_elements(); ++e) {
    const auto& el = cell->mesh.elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      double v = 0;
      for (int a = 0; a < 4; ++a) v += q.N[a] * vals[base + el[a]];
      acc += v * q.w;
    });
  }
  return acc;
}

namespace {

// Pins DOF 0 of every component: identity row/column, zero rhs entry.
std::vector<char> pin_mask(int n, int dofs_per_comp) {
  std::vector<char> mask(static_cast<size_t>(n) * dofs_per_comp, 0);
  for (int al = 0; al < n; ++al) mask[al * dofs_per_comp] = 1;
  return mask;
}

}  // namespace

CorrectorSet solve_cell_problems(const PeriodicCoefficientField& a, int m) {
  if (m < 8) throw GeometryError("solve_cell_problems: resolution must be >= 8");
  if (legendre_minimum(a, 64) <= 0)
    throw CoercivityError("coefficient field violates the Legendre condition");

  CorrectorSet cs;
  cs.cell = std::make_shared<PeriodicMesh>(build_unit_cell_mesh(m));
  cs.n = a.n;
  const int n = a.n;
  const PeriodicMesh& pm = *cs.cell;
  const int Nd = pm.num_dofs;
  const auto layout = periodic_layout(pm);

  SparseOperator K = assemble_diffusion(pm.mesh, a.oscillatory(0.0), n, layout, a.symmetric);
  const Eigen::SparseMatrix<double> K_raw = K.mat;

  // Right-hand sides: -integral a_ij^{ab} d_i psi dy for each (beta, j).
  std::vector<Eigen::VectorXd> rhs(2 * n, Eigen::VectorXd::Zero(n * Nd));
  std::vector<double> coeff(4 * n * n);
  const QuadCache qc(pm.mesh);
  for (int e = 0; e < pm.mesh.num_elements(); ++e) {
    const auto& el = pm.mesh.elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      a.sample(q.x, coeff.data());
      for (int tn = 0; tn < 4; ++tn) {
        const int dof = layout.dof(el[tn]);
        for (int j = 0; j < 2; ++j)
          for (int be = 0; be < n; ++be)
            for (int al = 0; al < n; ++al) {
              double s = 0;
              for (int i = 0; i < 2; ++i)
                s += coeff[tensor_index(n, i, j, al, be)] * q.grad[tn][i];
              rhs[j * n + be][al * Nd + dof] -= s * q.w;
            }
      }
    });
  }

  const auto mask = pin_mask(n, Nd);
  pin_constrained(K, mask);
  FactorizedOperator fac(K);

  // Scalar periodic mass for the discrete means.
  const SparseOperator M1 = assemble_mass(pm.mesh, 1, layout);

  cs.dof_values.resize(2 * n);
  cs.node_values.resize(2 * n);
  double res_inf = 0;
  for (int k = 0; k < 2 * n; ++k) {
    Eigen::VectorXd b = rhs[k];
    zero_constrained(b, mask);
    Eigen::VectorXd v = fac.solve(b);
    // Subtract the discrete mean per component (exact mean-zero enforcement).
    for (int al = 0; al < n; ++al) {
      const Eigen::VectorXd comp = v.segment(al * Nd, Nd);
      const double mean = (M1.mat * comp).sum();  // integral of v^al over the cell
      v.segment(al * Nd, Nd).array() -= mean;
    }
    const Eigen::VectorXd r = K_raw * v - rhs[k];
    res_inf = std::max(res_inf, r.cwiseAbs().maxCoeff());
    cs.dof_values[k] = v;
    Eigen::VectorXd nodal(n * pm.mesh.num_nodes());
    for (int al = 0; al < n; ++al)
      nodal.segment(al * pm.mesh.num_nodes(), pm.mesh.num_nodes()) =
          pm.expand_to_nodes(v.segment(al * Nd, Nd));
    cs.node_values[k] = nodal;
  }
  cs.residual_inf = res_inf;
  return cs;
}

HomogenizedTensor homogenized_tensor(const PeriodicCoefficientField& a,
                                     const CorrectorSet& correctors) {
  const int n = a.n;
  const PeriodicMesh& pm = *correctors.cell;
  HomogenizedTensor t;
  t.n = n;
  t.a.assign(4 * n * n, 0.0);
  std::vector<double> comp(4 * n * n, 0.0);  // Kahan compensation
  std::vector<double> coeff(4 * n * n);
  const int N = pm.mesh.num_nodes();
  const QuadCache qc(pm.mesh);
  for (int e = 0; e < pm.mesh.num_elements(); ++e) {
    const auto& el = pm.mesh.elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      a.sample(q.x, coeff.data());
      for (int j = 0; j < 2; ++j)
        for (int be = 0; be < n; ++be) {
          const Eigen::VectorXd& vn = correctors.node_values[j * n + be];
          double gv[2][8];  // direction, component
          for (int ga = 0; ga < n; ++ga) {
            double gx = 0, gy = 0;
            for (int tn = 0; tn < 4; ++tn) {
              const double c = vn[ga * N + el[tn]];
              gx += q.grad[tn][0] * c;
              gy += q.grad[tn][1] * c;
            }
            gv[0][ga] = gx;
            gv[1][ga] = gy;
          }
          for (int i = 0; i < 2; ++i)
            for (int al = 0; al < n; ++al) {
              double s = coeff[tensor_index(n, i, j, al, be)];
              for (int k = 0; k < 2; ++k)
                for (int ga = 0; ga < n; ++ga)
                  s += coeff[tensor_index(n, i, k, al, ga)] * gv[k][ga];
              const int idx = tensor_index(n, i, j, al, be);
              const double y = s * q.w - comp[idx];
              const double tt = t.a[idx] + y;
              comp[idx] = (tt - t.a[idx]) - y;
              t.a[idx] = tt;
            }
        }
    });
  }
  t.coercivity_lower_bound = verify_coercivity(t);
  if (!(t.coercivity_lower_bound > 0))
    throw CoercivityError("homogenized tensor lost coercivity");
  return t;
}

double verify_coercivity(const HomogenizedTensor& ahat) {
  return legendre_minimum_constant(ahat.a, ahat.n);
}

namespace {

/// Flattened per-quadrature-point data of the periodic cell mesh: weights,
/// shape values/gradients (congruent elements) and DOF indices per element.
struct CellQuadTables {
  int qpe = 0;
  std::vector<double> w;       // qpe
  std::vector<double> N;       // qpe*4
  std::vector<double> g1, g2;  // qpe*4
  std::vector<int> dof;        // E*4

  explicit CellQuadTables(const PeriodicMesh& pm) {
    const ElementQuad eq(pm.mesh, 0, QuadRule::gauss3());
    qpe = static_cast<int>(eq.pts.size());
    w.resize(qpe);
    N.resize(qpe * 4);
    g1.resize(qpe * 4);
    g2.resize(qpe * 4);
    for (int q = 0; q < qpe; ++q) {
      w[q] = eq.pts[q].w;
      for (int a = 0; a < 4; ++a) {
        N[q * 4 + a] = eq.pts[q].N[a];
        g1[q * 4 + a] = eq.pts[q].grad[a][0];
        g2[q * 4 + a] = eq.pts[q].grad[a][1];
      }
    }
    dof.resize(static_cast<size_t>(pm.mesh.num_elements()) * 4);
    for (int e = 0; e < pm.mesh.num_elements(); ++e)
      for (int a = 0; a < 4; ++a) dof[e * 4 + a] = pm.dof_map[pm.mesh.elements[e][a]];
  }
};

/// Weak relations tying a quadrature stream field to the loads of b:
/// (T psi)_1[l] = sum w psi d2 w_l,  (T psi)_2[l] = -sum w psi d1 w_l.
struct StreamSystem {
  const CellQuadTables& tab;
  int elements;
  int dofs;

  void apply(const Eigen::VectorXd& psi, Eigen::VectorXd& out1,
             Eigen::VectorXd& out2) const {
    out1.setZero(dofs);
    out2.setZero(dofs);
    const int qpe = tab.qpe;
    for (int e = 0; e < elements; ++e)
      for (int q = 0; q < qpe; ++q) {
        const double v = psi[e * qpe + q] * tab.w[q];
        for (int a = 0; a < 4; ++a) {
          const int d = tab.dof[e * 4 + a];
          out1[d] += v * tab.g2[q * 4 + a];
          out2[d] -= v * tab.g1[q * 4 + a];
        }
      }
  }

  void apply_adjoint(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                     Eigen::VectorXd& psi) const {
    psi.setZero(static_cast<Eigen::Index>(elements) * tab.qpe);
    const int qpe = tab.qpe;
    for (int e = 0; e < elements; ++e)
      for (int q = 0; q < qpe; ++q) {
        double s = 0;
        for (int a = 0; a < 4; ++a) {
          const int d = tab.dof[e * 4 + a];
          s += mu1[d] * tab.g2[q * 4 + a] - mu2[d] * tab.g1[q * 4 + a];
        }
        psi[e * qpe + q] = s * tab.w[q];
      }
  }
};

/// CGLS: minimizes ||T psi - rhs||_2 over the quadrature field psi. The
/// system may be (slightly) inconsistent -- the discrete b field carries
/// single-variable profile moments of size O(h^3) for smooth coefficients --
/// so the least-squares form is required; the minimizer leaves exactly that
/// obstruction as the residual floor.
Eigen::VectorXd solve_stream_correction(const StreamSystem& sys,
                                        const Eigen::VectorXd& rhs1,
                                        const Eigen::VectorXd& rhs2, double tol) {
  const Eigen::Index len = static_cast<Eigen::Index>(sys.elements) * sys.tab.qpe;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(len);
  Eigen::VectorXd r1 = rhs1, r2 = rhs2;
  Eigen::VectorXd s(len), p(len), q1(sys.dofs), q2(sys.dofs);
  sys.apply_adjoint(r1, r2, s);
  p = s;
  double gamma = s.squaredNorm();
  const double gamma_stop = std::max(tol * tol * gamma, 1e-300);
  for (int it = 0; it < 20000 && gamma > gamma_stop; ++it) {
    sys.apply(p, q1, q2);
    const double qq = q1.squaredNorm() + q2.squaredNorm();
    if (!(qq > 0)) break;
    const double alpha = gamma / qq;
    d += alpha * p;
    r1 -= alpha * q1;
    r2 -= alpha * q2;
    sys.apply_adjoint(r1, r2, s);
    const double gamma_new = s.squaredNorm();
    p = s + (gamma_new / gamma) * p;
    gamma = gamma_new;
  }
  return d;
}

}  // namespace

double FluxCorrectorSet::b_mean(int i, int j, int alpha, int beta) const {
  const CellQuadTables tab(*cell);
  const Eigen::VectorXd& bf = b_quad[bidx(i, j, alpha, beta)];
  double acc = 0;
  for (int e = 0; e < cell->mesh.num_elements(); ++e)
    for (int q = 0; q < qpe; ++q) acc += bf[e * qpe + q] * tab.w[q];
  return acc;
}

double FluxCorrectorSet::c_mean(int i, int j, int alpha, int beta) const {
  const CellQuadTables tab(*cell);
  const PeriodicMesh& pm = *cell;
  const Eigen::VectorXd nodal = pm.expand_to_nodes(c[bidx(i, j, alpha, beta)]);
  double acc = 0;
  for (int e = 0; e < pm.mesh.num_elements(); ++e) {
    const auto& el = pm.mesh.elements[e];
    for (int q = 0; q < qpe; ++q) {
      double v = 0;
      for (int a = 0; a < 4; ++a) v += tab.N[q * 4 + a] * nodal[el[a]];
      acc += v * tab.w[q];
    }
  }
  return acc;
}

double FluxCorrectorSet::max_weak_identity_residual() const {
  const CellQuadTables tab(*cell);
  const StreamSystem sys{tab, cell->mesh.num_elements(), cell->num_dofs};
  double worst = 0;
  Eigen::VectorXd t1, t2;
  for (int j = 0; j < 2; ++j)
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        sys.apply(psi_quad[pidx(j, al, be)], t1, t2);
        Eigen::VectorXd f1 = Eigen::VectorXd::Zero(cell->num_dofs);
        Eigen::VectorXd f2 = Eigen::VectorXd::Zero(cell->num_dofs);
        const Eigen::VectorXd& b1 = b_quad[bidx(0, j, al, be)];
        const Eigen::VectorXd& b2 = b_quad[bidx(1, j, al, be)];
        for (int e = 0; e < cell->mesh.num_elements(); ++e)
          for (int q = 0; q < qpe; ++q) {
            const double w1 = b1[e * qpe + q] * tab.w[q];
            const double w2 = b2[e * qpe + q] * tab.w[q];
            for (int a = 0; a < 4; ++a) {
              const int d = tab.dof[e * 4 + a];
              f1[d] += w1 * tab.N[q * 4 + a];
              f2[d] += w2 * tab.N[q * 4 + a];
            }
          }
        worst = std::max(worst, (t1 - f1).cwiseAbs().maxCoeff());
        worst = std::max(worst, (t2 - f2).cwiseAbs().maxCoeff());
      }
  return worst;
}

FluxCorrectorSet flux_correctors(const PeriodicCoefficientField& a,
                                 const CorrectorSet& correctors,
                                 const HomogenizedTensor& ahat) {
  const int n = a.n;
  const PeriodicMesh& pm = *correctors.cell;
  const CellQuadTables tab(pm);
  const int qpe = tab.qpe;
  const int Ne = pm.mesh.num_elements();
  const int Nn = pm.mesh.num_nodes();
  const int Nd = pm.num_dofs;
  const auto layout = periodic_layout(pm);
  const QuadCache qc(pm.mesh);

  FluxCorrectorSet fx;
  fx.cell = correctors.cell;
  fx.n = n;
  fx.qpe = qpe;
  fx.b_quad.assign(4 * n * n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(Ne) * qpe));

  // b_ij^{ab} = a_ij^{ab} + a_ik^{ag} d_k v_j^{gb} - ahat_ij^{ab} at quadrature.
  std::vector<double> coeff(4 * n * n);
  for (int e = 0; e < Ne; ++e) {
    const auto& el = pm.mesh.elements[e];
    qc.for_each(e, [&](int q, const ElementQuad::QPoint& qp) {
      a.sample(qp.x, coeff.data());
      for (int j = 0; j < 2; ++j)
        for (int be = 0; be < n; ++be) {
          const Eigen::VectorXd& vn = correctors.node_values[j * n + be];
          double gv[2][8];
          for (int ga = 0; ga < n; ++ga) {
            double gx = 0, gy = 0;
            for (int tn = 0; tn < 4; ++tn) {
              const double c = vn[ga * Nn + el[tn]];
              gx += qp.grad[tn][0] * c;
              gy += qp.grad[tn][1] * c;
            }
            gv[0][ga] = gx;
            gv[1][ga] = gy;
          }
          for (int i = 0; i < 2; ++i)
            for (int al = 0; al < n; ++al) {
              double s = coeff[tensor_index(n, i, j, al, be)] - ahat(i, j, al, be);
              for (int k = 0; k < 2; ++k)
                for (int ga = 0; ga < n; ++ga)
                  s += coeff[tensor_index(n, i, k, al, ga)] * gv[k][ga];
              fx.b_quad[fx.bidx(i, j, al, be)][e * qpe + q] = s;
            }
        }
    });
  }

  // c_ij^{ab}: periodic Poisson  int grad c . grad w = -int b w, mean zero.
  SparseOperator L = assemble_diffusion(
      pm.mesh,
      [](const Vec2&, double* out) {
        out[0] = 1;
        out[1] = 0;
        out[2] = 0;
        out[3] = 1;
      },
      1, layout, true);
  std::vector<char> mask(Nd, 0);
  mask[0] = 1;
  pin_constrained(L, mask);
  FactorizedOperator Lfac(L);
  const SparseOperator M1 = assemble_mass(pm.mesh, 1, layout);
  FactorizedOperator Mfac(M1);

  fx.c.assign(4 * n * n, Eigen::VectorXd());
  for (int idx = 0; idx < 4 * n * n; ++idx) {
    Eigen::VectorXd load = Eigen::VectorXd::Zero(Nd);
    const Eigen::VectorXd& bf = fx.b_quad[idx];
    for (int e = 0; e < Ne; ++e)
      for (int q = 0; q < qpe; ++q) {
        const double v = bf[e * qpe + q] * tab.w[q];
        for (int tn = 0; tn < 4; ++tn)
          load[tab.dof[e * 4 + tn]] -= v * tab.N[q * 4 + tn];
      }
    zero_constrained(load, mask);
    Eigen::VectorXd cv = Lfac.solve(load);
    cv.array() -= (M1.mat * cv).sum();
    fx.c[idx] = cv;
  }

  // Stream functions: seed with the FE curl of c, then a minimum-norm
  // quadrature-space correction making the weak identity exact.
  const StreamSystem sys{tab, Ne, Nd};
  fx.psi_quad.assign(2 * n * n, Eigen::VectorXd());
  fx.psi_nodes.assign(2 * n * n, Eigen::VectorXd());
  for (int j = 0; j < 2; ++j)
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        Eigen::VectorXd psi0(static_cast<Eigen::Index>(Ne) * qpe);
        const Eigen::VectorXd c1 = pm.expand_to_nodes(fx.c[fx.bidx(0, j, al, be)]);
        const Eigen::VectorXd c2 = pm.expand_to_nodes(fx.c[fx.bidx(1, j, al, be)]);
        for (int e = 0; e < Ne; ++e) {
          const auto& el = pm.mesh.elements[e];
          for (int q = 0; q < qpe; ++q) {
            double d1c2 = 0, d2c1 = 0;
            for (int tn = 0; tn < 4; ++tn) {
              d1c2 += tab.g1[q * 4 + tn] * c2[el[tn]];
              d2c1 += tab.g2[q * 4 + tn] * c1[el[tn]];
            }
            psi0[e * qpe + q] = d1c2 - d2c1;
          }
        }
        // Loads of b against the periodic basis for the two weak relations.
        Eigen::VectorXd t1, t2;
        sys.apply(psi0, t1, t2);
        Eigen::VectorXd f1 = Eigen::VectorXd::Zero(Nd), f2 = Eigen::VectorXd::Zero(Nd);
        const Eigen::VectorXd& b1 = fx.b_quad[fx.bidx(0, j, al, be)];
        const Eigen::VectorXd& b2 = fx.b_quad[fx.bidx(1, j, al, be)];
        for (int e = 0; e < Ne; ++e)
          for (int q = 0; q < qpe; ++q) {
            const double w1 = b1[e * qpe + q] * tab.w[q];
            const double w2 = b2[e * qpe + q] * tab.w[q];
            for (int tn = 0; tn < 4; ++tn) {
              const int d = tab.dof[e * 4 + tn];
              f1[d] += w1 * tab.N[q * 4 + tn];
              f2[d] += w2 * tab.N[q * 4 + tn];
            }
          }
        const Eigen::VectorXd psi =
            psi0 + solve_stream_correction(sys, f1 - t1, f2 - t2, 1e-9);
        fx.psi_quad[fx.pidx(j, al, be)] = psi;

        // Nodal L2 projection for export; mean zero for definiteness.
        Eigen::VectorXd pl = Eigen::VectorXd::Zero(Nd);
        for (int e = 0; e < Ne; ++e)
          for (int q = 0; q < qpe; ++q) {
            const double v = psi[e * qpe + q] * tab.w[q];
            for (int tn = 0; tn < 4; ++tn)
              pl[tab.dof[e * 4 + tn]] += v * tab.N[q * 4 + tn];
          }
        Eigen::VectorXd pn = Mfac.solve(pl);
        pn.array() -= (M1.mat * pn).sum();
        fx.psi_nodes[fx.pidx(j, al, be)] = pn;
      }

  fx.identity_residual = fx.max_weak_identity_residual();
  return fx;
}

namespace {

constexpr char kCacheMagic[9] = "H2DCOR01";

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_vec(std::ostream& os, const Eigen::VectorXd& v) {
  write_u64(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}
bool read_u64(std::istream& is, std::uint64_t& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return static_cast<bool>(is);
}
bool read_vec(std::istream& is, Eigen::VectorXd& v) {
  std::uint64_t len = 0;
  if (!read_u64(is, len)) return false;
  v.resize(static_cast<Eigen::Index>(len));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(len * sizeof(double)));
  return static_cast<bool>(is);
}

}  // namespace

void save_corrector_cache(const std::string& path, const std::string& descriptor,
                          const CorrectorSet& correctors, const HomogenizedTensor& ahat,
                          const FluxCorrectorSet* flux) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write corrector cache: " + path);
  os.write(kCacheMagic, 8);
  write_u64(os, descriptor.size());
  os.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
  write_u64(os, static_cast<std::uint64_t>(correctors.cell->m));
  write_u64(os, static_cast<std::uint64_t>(correctors.n));
  Eigen::VectorXd ah(static_cast<Eigen::Index>(ahat.a.size()));
  for (size_t i = 0; i < ahat.a.size(); ++i) ah[static_cast<Eigen::Index>(i)] = ahat.a[i];
  write_vec(os, ah);
  Eigen::VectorXd cert(1);
  cert[0] = ahat.coercivity_lower_bound;
  write_vec(os, cert);
  write_u64(os, correctors.dof_values.size());
  for (const auto& v : correctors.dof_values) write_vec(os, v);
  write_u64(os, flux ? 1 : 0);
  if (flux) {
    write_u64(os, static_cast<std::uint64_t>(flux->qpe));
    Eigen::VectorXd res(1);
    res[0] = flux->identity_residual;
    write_vec(os, res);
    for (const auto& v : flux->b_quad) write_vec(os, v);
    for (const auto& v : flux->c) write_vec(os, v);
    for (const auto& v : flux->psi_quad) write_vec(os, v);
    for (const auto& v : flux->psi_nodes) write_vec(os, v);
  }
}

bool load_corrector_cache(const std::string& path, const std::string& descriptor, int m,
                          CorrectorSet& correctors, HomogenizedTensor& ahat,
                          FluxCorrectorSet* flux) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCacheMagic, 8) != 0) return false;
  std::uint64_t dlen = 0;
  if (!read_u64(is, dlen)) return false;
  std::string d(dlen, '\0');
  is.read(d.data(), static_cast<std::streamsize>(dlen));
  if (!is || d != descriptor) return false;
  std::uint64_t mm = 0, nn = 0;
  if (!read_u64(is, mm) || static_cast<int>(mm) != m) return false;
  if (!read_u64(is, nn)) return false;
  Eigen::VectorXd ah, cert;
  if (!read_vec(is, ah) || !read_vec(is, cert)) return false;
  std::uint64_t count = 0;
  if (!read_u64(is, count)) return false;
  std::vector<Eigen::VectorXd> dofs(count);
  for (auto& v : dofs)
    if (!read_vec(is, v)) return false;

  const int n = static_cast<int>(nn);
  correctors.cell = std::make_shared<PeriodicMesh>(build_unit_cell_mesh(m));
  correctors.n = n;
  correctors.dof_values = std::move(dofs);
  correctors.node_values.resize(correctors.dof_values.size());
  const PeriodicMesh& pm = *correctors.cell;
  for (size_t k = 0; k < correctors.dof_values.size(); ++k) {
    Eigen::VectorXd nodal(n * pm.mesh.num_nodes());
    for (int al = 0; al < n; ++al)
      nodal.segment(al * pm.mesh.num_nodes(), pm.mesh.num_nodes()) =
          pm.expand_to_nodes(correctors.dof_values[k].segment(al * pm.num_dofs, pm.num_dofs));
    correctors.node_values[k] = nodal;
  }
  correctors.residual_inf = 0;
  ahat.n = n;
  ahat.a.assign(ah.data(), ah.data() + ah.size());
  ahat.coercivity_lower_bound = cert[0];

  std::uint64_t has_flux = 0;
  if (!read_u64(is, has_flux)) return !flux;  // older records end here
  if (flux) {
    if (!has_flux) return false;  // flux requested but not recorded
    std::uint64_t qpe = 0;
    Eigen::VectorXd res;
    if (!read_u64(is, qpe) || !read_vec(is, res)) return false;
    flux->cell = correctors.cell;
    flux->n = n;
    flux->qpe = static_cast<int>(qpe);
    flux->identity_residual = res[0];
    flux->b_quad.assign(4 * n * n, Eigen::VectorXd());
    flux->c.assign(4 * n * n, Eigen::VectorXd());
    flux->psi_quad.assign(2 * n * n, Eigen::VectorXd());
    flux->psi_nodes.assign(2 * n * n, Eigen::VectorXd());
    for (auto& v : flux->b_quad)
      if (!read_vec(is, v)) return false;
    for (auto& v : flux->c)
      if (!read_vec(is, v)) return false;
    for (auto& v : flux->psi_quad)
      if (!read_vec(is, v)) return false;
    for (auto& v : flux->psi_nodes)
      if (!read_vec(is, v)) return false;
  }
  return true;
}

}  // namespace homog2d
