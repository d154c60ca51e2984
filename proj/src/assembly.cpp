#include "homog2d/assembly.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace homog2d {

namespace {

void check_finite_sample(const double* a, int count, const Vec2& x) {
  for (int k = 0; k < count; ++k)
    if (!std::isfinite(a[k])) {
      std::ostringstream os;
      os << "coefficient sampler returned non-finite value at (" << x.x() << ", " << x.y()
         << ")";
      throw AssemblyError(os.str());
    }
}

}  // namespace

SparseOperator assemble_diffusion(const Mesh& mesh, const TensorSampler& coeff, int n,
                                  const DofLayout& layout, bool symmetric_hint,
                                  const QuadRule& rule) {
  const int N = layout.dofs_per_component;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements()) * 16 * n * n);
  std::vector<double> a(4 * n * n);
  const QuadCache qc(mesh, rule);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      coeff(q.x, a.data());
      check_finite_sample(a.data(), 4 * n * n, q.x);
      for (int ta = 0; ta < 4; ++ta)
        for (int tb = 0; tb < 4; ++tb)
          for (int al = 0; al < n; ++al)
            for (int be = 0; be < n; ++be) {
              double s = 0;
              for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                  s += a[tensor_index(n, i, j, al, be)] * q.grad[tb][j] * q.grad[ta][i];
              local(ta * n + al, tb * n + be) += s * q.w;
            }
    });
    for (int ta = 0; ta < 4; ++ta)
      for (int tb = 0; tb < 4; ++tb)
        for (int al = 0; al < n; ++al)
          for (int be = 0; be < n; ++be)
            trips.emplace_back(al * N + layout.dof(el[ta]), be * N + layout.dof(el[tb]),
                               local(ta * n + al, tb * n + be));
  }
  Eigen::SparseMatrix<double> mat(n * N, n * N);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return SparseOperator(std::move(mat), symmetric_hint);
}

SparseOperator assemble_diffusion(const Mesh& mesh, const TensorSampler& coeff, int n,
                                  bool symmetric_hint) {
  return assemble_diffusion(mesh, coeff, n, identity_layout(mesh), symmetric_hint);
}

SparseOperator assemble_mass(const Mesh& mesh, int n, const DofLayout& layout,
                             const QuadRule& rule) {
  const int N = layout.dofs_per_component;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements()) * 16 * n);
  const QuadCache qc(mesh, rule);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    double local[4][4] = {};
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      for (int ta = 0; ta < 4; ++ta)
        for (int tb = 0; tb < 4; ++tb) local[ta][tb] += q.N[ta] * q.N[tb] * q.w;
    });
    for (int ta = 0; ta < 4; ++ta)
      for (int tb = 0; tb < 4; ++tb)
        for (int al = 0; al < n; ++al)
          trips.emplace_back(al * N + layout.dof(el[ta]), al * N + layout.dof(el[tb]),
                             local[ta][tb]);
  }
  Eigen::SparseMatrix<double> mat(n * N, n * N);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return SparseOperator(std::move(mat), true);
}

SparseOperator assemble_mass(const Mesh& mesh, int n) {
  return assemble_mass(mesh, n, identity_layout(mesh));
}

SparseOperator assemble_h1(const Mesh& mesh, int n) {
  const int nn = n;
  TensorSampler identity = [nn](const Vec2&, double* a) {
    for (int k = 0; k < 4 * nn * nn; ++k) a[k] = 0;
    for (int i = 0; i < 2; ++i)
      for (int al = 0; al < nn; ++al) a[tensor_index(nn, i, i, al, al)] = 1.0;
  };
  SparseOperator K = assemble_diffusion(mesh, identity, n, true);
  SparseOperator M = assemble_mass(mesh, n);
  K.mat += M.mat;
  K.mat.makeCompressed();
  K.symmetric = true;
  return K;
}

Eigen::VectorXd assemble_semilinear(const SolutionField& u, const NonlinearityModel& model,
                                    const Mesh& mesh, const QuadRule& rule) {
  if (u.mesh != &mesh) throw AssemblyError("assemble_semilinear: field/mesh mismatch");
  const int n = u.n;
  const int N = mesh.num_nodes();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n * N);
  if (!model.has_reaction() && !model.has_drift() && !model.has_robin()) return r;
  std::vector<double> uq(n), b(n), bi(2 * n);
  const QuadCache qc(mesh, rule);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      for (int al = 0; al < n; ++al) {
        double s = 0;
        for (int a = 0; a < 4; ++a) s += q.N[a] * u.at(al, el[a]);
        uq[al] = s;
      }
      if (model.has_reaction()) {
        model.reaction(q.x, uq.data(), b.data());
        check_finite_sample(b.data(), n, q.x);
        for (int a = 0; a < 4; ++a)
          for (int al = 0; al < n; ++al) r[al * N + el[a]] += b[al] * q.N[a] * q.w;
      }
      if (model.has_drift()) {
        model.drift(q.x, uq.data(), bi.data());
        check_finite_sample(bi.data(), 2 * n, q.x);
        for (int a = 0; a < 4; ++a)
          for (int al = 0; al < n; ++al)
            r[al * N + el[a]] +=
                (bi[0 * n + al] * q.grad[a][0] + bi[1 * n + al] * q.grad[a][1]) * q.w;
      }
    });
  }
  if (model.has_robin()) {
    std::vector<double> b0(n);
    for (const auto& f : mesh.boundary_facets) {
      if (f.tag != FacetTag::Robin) continue;
      const FacetQuad fq(mesh, f);
      for (const auto& q : fq.pts) {
        for (int al = 0; al < n; ++al)
          uq[al] = q.Na * u.at(al, f.a) + q.Nb * u.at(al, f.b);
        model.robin(q.x, uq.data(), b0.data());
        check_finite_sample(b0.data(), n, q.x);
        for (int al = 0; al < n; ++al) {
          r[al * N + f.a] -= b0[al] * q.Na * q.w;
          r[al * N + f.b] -= b0[al] * q.Nb * q.w;
        }
      }
    }
  }
  return r;
}

SparseOperator assemble_linearization(const SolutionField& u, const NonlinearityModel& model,
                                      const Mesh& mesh, const QuadRule& rule) {
  if (u.mesh != &mesh) throw AssemblyError("assemble_linearization: field/mesh mismatch");
  const int n = u.n;
  const int N = mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> uq(n), db(n * n), dbi(2 * n * n);
  if (model.reaction_du || model.drift_du) {
    const QuadCache qc(mesh, rule);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.elements[e];
      qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
        for (int al = 0; al < n; ++al) {
          double s = 0;
          for (int a = 0; a < 4; ++a) s += q.N[a] * u.at(al, el[a]);
          uq[al] = s;
        }
        if (model.reaction_du) {
          model.reaction_du(q.x, uq.data(), db.data());
          check_finite_sample(db.data(), n * n, q.x);
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              for (int al = 0; al < n; ++al)
                for (int ga = 0; ga < n; ++ga)
                  trips.emplace_back(al * N + el[a], ga * N + el[b],
                                     db[al * n + ga] * q.N[a] * q.N[b] * q.w);
        }
        if (model.drift_du) {
          model.drift_du(q.x, uq.data(), dbi.data());
          check_finite_sample(dbi.data(), 2 * n * n, q.x);
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              for (int al = 0; al < n; ++al)
                for (int ga = 0; ga < n; ++ga) {
                  const double v = (dbi[(0 * n + al) * n + ga] * q.grad[a][0] +
                                    dbi[(1 * n + al) * n + ga] * q.grad[a][1]) *
                                   q.N[b] * q.w;
                  trips.emplace_back(al * N + el[a], ga * N + el[b], v);
                }
        }
      });
    }
  }
  if (model.robin_du) {
    std::vector<double> db0(n * n);
    for (const auto& f : mesh.boundary_facets) {
      if (f.tag != FacetTag::Robin) continue;
      const FacetQuad fq(mesh, f);
      for (const auto& q : fq.pts) {
        for (int al = 0; al < n; ++al)
          uq[al] = q.Na * u.at(al, f.a) + q.Nb * u.at(al, f.b);
        model.robin_du(q.x, uq.data(), db0.data());
        const int nodes[2] = {f.a, f.b};
        const double shape[2] = {q.Na, q.Nb};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int al = 0; al < n; ++al)
              for (int ga = 0; ga < n; ++ga)
                trips.emplace_back(al * N + nodes[a], ga * N + nodes[b],
                                   -db0[al * n + ga] * shape[a] * shape[b] * q.w);
      }
    }
  }
  Eigen::SparseMatrix<double> mat(n * N, n * N);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return SparseOperator(std::move(mat), false);
}

void pin_constrained(SparseOperator& A, const std::vector<char>& constrained) {
  if (static_cast<int>(constrained.size()) != A.dim())
    throw AssemblyError("pin_constrained: mask size mismatch");
  for (int k = 0; k < A.mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A.mat, k); it; ++it)
      if (constrained[it.row()] || constrained[it.col()])
        it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
  A.mat.prune([&](int r, int c, double v) {
    return v != 0.0 || (r == c && constrained[r]);
  });
  // Make sure every constrained DOF has its unit diagonal present.
  for (int d = 0; d < A.dim(); ++d)
    if (constrained[d] && A.mat.coeff(d, d) == 0.0) A.mat.coeffRef(d, d) = 1.0;
  A.mat.makeCompressed();
}

void zero_constrained(Eigen::VectorXd& v, const std::vector<char>& constrained) {
  for (int d = 0; d < v.size(); ++d)
    if (constrained[d]) v[d] = 0.0;
}

Eigen::VectorXd assemble_scalar_load(const Mesh& mesh,
                                     const std::function<double(const Vec2&)>& f,
                                     const DofLayout& layout, const QuadRule& rule) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(layout.dofs_per_component);
  const QuadCache qc(mesh, rule);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    qc.for_each(e, [&](int, const ElementQuad::QPoint& q) {
      const double v = f(q.x);
      for (int a = 0; a < 4; ++a) r[layout.dof(el[a])] += v * q.N[a] * q.w;
    });
  }
  return r;
}

}  // namespace homog2d
