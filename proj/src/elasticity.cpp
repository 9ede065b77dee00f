#include "igac/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "igac/errors.hpp"

namespace igac {

Material::Material(Model m, double E_, double nu_) : model(m), E(E_), nu(nu_) {
  if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in [0, 0.5)");
}

SparseMatrix stiffness_pattern(const PrimalSpace& space) {
  const NurbsPatch& patch = space.patch();
  const auto& basis = patch.basis();
  const auto& map = space.dofs();
  const int d = space.dim();
  std::vector<std::vector<int>> adj(map.num_nodes);
  for (int i = 0; i < basis.size(); ++i) {
    const auto m = basis.multi(i);
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int dir = 0; dir < d; ++dir) {
      const int p = patch.degree(dir);
      lo[dir] = std::max(0, m[dir] - p);
      hi[dir] = std::min(basis.count(dir) - 1, m[dir] + p);
    }
    auto& row = adj[map.node_of_cp[i]];
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        for (int l = lo[0]; l <= hi[0]; ++l) row.push_back(map.node_of_cp[basis.flat({l, j, k})]);
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int a = 0; a < map.num_nodes; ++a) {
    auto& row = adj[a];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (int b : row) {
      for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) trip.emplace_back(a * d + i, b * d + k, 0.0);
      }
    }
  }
  SparseMatrix K(map.num_dofs(), map.num_dofs());
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  return K;
}

namespace {

void scatter(SparseMatrix& K, const std::vector<int>& dofs, const Eigen::MatrixXd& Ke) {
  const int n = static_cast<int>(dofs.size());
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      if (Ke(a, b) != 0.0) K.coeffRef(dofs[a], dofs[b]) += Ke(a, b);
    }
  }
}

std::vector<int> local_dofs(const PrimalSpace& space, const PointShape& s) {
  const int d = space.dim();
  std::vector<int> dofs(s.index.size() * d);
  for (std::size_t a = 0; a < s.index.size(); ++a) {
    for (int c = 0; c < d; ++c) dofs[a * d + c] = space.dofs().dof(s.index[a], c);
  }
  return dofs;
}

SparseMatrix zero_pattern(const PrimalSpace& space, const SparseMatrix* pattern) {
  SparseMatrix K = pattern ? *pattern : stiffness_pattern(space);
  std::fill(K.valuePtr(), K.valuePtr() + K.nonZeros(), 0.0);
  return K;
}

struct NhPoint {
  Eigen::MatrixXd F, Finv;
  double J = 1.0;
  double lnJ = 0.0;
};

NhPoint kinematics(const PrimalSpace& space, const PointShape& s, const Eigen::VectorXd& u) {
  const int d = space.dim();
  NhPoint k;
  k.F = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t a = 0; a < s.index.size(); ++a) {
    for (int i = 0; i < d; ++i) {
      const double ua = u(space.dofs().dof(s.index[a], i));
      for (int J = 0; J < d; ++J) k.F(i, J) += ua * s.dN_dx(a, J);
    }
  }
  k.J = k.F.determinant();
  if (!(k.J > 0.0)) {
    throw NonPhysicalState("deformation gradient with det F = " + std::to_string(k.J));
  }
  k.lnJ = std::log(k.J);
  k.Finv = k.F.inverse();
  return k;
}

}  // namespace

AssembledOperator assemble_linear(const PrimalSpace& space, const Material& mat,
                                  const QuadratureRule& quad, const SparseMatrix* pattern) {
  const int d = space.dim();
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  AssembledOperator op;
  op.matrix = zero_pattern(space, pattern);
  op.rhs = Eigen::VectorXd::Zero(space.dofs().num_dofs());
  ShapeEvaluator ev(space.patch());
  std::vector<QuadPoint> pts;
  Eigen::MatrixXd Ke;
  std::vector<int> dofs;
  for (int e = 0; e < quad.num_elements(); ++e) {
    quad.element_points(e, pts);
    bool first = true;
    for (const auto& q : pts) {
      const auto& s = ev.eval(std::span<const double>(q.xi.data(), d), true);
      const int nloc = static_cast<int>(s.index.size());
      if (first) {
        dofs = local_dofs(space, s);
        Ke = Eigen::MatrixXd::Zero(nloc * d, nloc * d);
        first = false;
      }
      const double wd = q.weight * s.det;
      const auto& G = s.dN_dx;
      for (int b = 0; b < nloc; ++b) {
        for (int a = 0; a < nloc; ++a) {
          const double dot = G.row(a).dot(G.row(b));
          for (int i = 0; i < d; ++i) {
            for (int k = 0; k < d; ++k) {
              double v = lam * G(a, i) * G(b, k) + mu * G(a, k) * G(b, i);
              if (i == k) v += mu * dot;
              Ke(a * d + i, b * d + k) += wd * v;
            }
          }
        }
      }
    }
    scatter(op.matrix, dofs, Ke);
  }
  return op;
}

Eigen::VectorXd assemble_neumann_pressure(const PrimalSpace& space, const BoundaryFace& face, double P) {
  const int d = space.dim();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(space.dofs().num_dofs());
  if (P == 0.0) return f;
  const auto rule = gauss_rule(face, space.degree() + 1);
  ShapeEvaluator ev(space.patch());
  std::vector<QuadPoint> pts;
  const int fd = d - 1;
  for (int e = 0; e < rule.num_elements(); ++e) {
    rule.element_points(e, pts);
    for (const auto& q : pts) {
      const auto xi = face.to_volume(std::span<const double>(q.xi.data(), fd));
      const auto& s = ev.eval(std::span<const double>(xi.data(), d), false);
      const FrameEval fr = boundary_frame(face, s);
      const double dG = fr.measure * q.weight;
      for (std::size_t a = 0; a < s.index.size(); ++a) {
        for (int c = 0; c < d; ++c) {
          f(space.dofs().dof(s.index[a], c)) -= P * fr.normal(c) * s.N(a) * dG;
        }
      }
    }
  }
  return f;
}

NeoHookeanSystem assemble_neo_hookean(const PrimalSpace& space, const Material& mat,
                                      const QuadratureRule& quad, const Eigen::VectorXd& u,
                                      const SparseMatrix* pattern, bool with_tangent) {
  const int d = space.dim();
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  NeoHookeanSystem out;
  out.residual = Eigen::VectorXd::Zero(space.dofs().num_dofs());
  if (with_tangent) out.tangent = zero_pattern(space, pattern);
  ShapeEvaluator ev(space.patch());
  std::vector<QuadPoint> pts;
  Eigen::MatrixXd Ke, Q;
  std::vector<int> dofs;
  for (int e = 0; e < quad.num_elements(); ++e) {
    quad.element_points(e, pts);
    bool first = true;
    for (const auto& q : pts) {
      const auto& s = ev.eval(std::span<const double>(q.xi.data(), d), true);
      const int nloc = static_cast<int>(s.index.size());
      if (first) {
        dofs = local_dofs(space, s);
        if (with_tangent) Ke = Eigen::MatrixXd::Zero(nloc * d, nloc * d);
        first = false;
      }
      const NhPoint k = kinematics(space, s, u);
      const double wd = q.weight * s.det;
      const Eigen::MatrixXd FinvT = k.Finv.transpose();
      const Eigen::MatrixXd P = mu * (k.F - FinvT) + lam * k.lnJ * FinvT;
      const auto& G = s.dN_dx;
      for (int a = 0; a < nloc; ++a) {
        for (int i = 0; i < d; ++i) out.residual(dofs[a * d + i]) += wd * P.row(i).dot(G.row(a));
      }
      if (!with_tangent) continue;
      // Q(a, i) = sum_J Finv(J, i) dN_a/dX_J
      Q.noalias() = G * k.Finv;
      const double c2 = mu - lam * k.lnJ;
      for (int b = 0; b < nloc; ++b) {
        for (int a = 0; a < nloc; ++a) {
          const double dot = G.row(a).dot(G.row(b));
          for (int i = 0; i < d; ++i) {
            for (int kk = 0; kk < d; ++kk) {
              double v = c2 * Q(a, kk) * Q(b, i) + lam * Q(a, i) * Q(b, kk);
              if (i == kk) v += mu * dot;
              Ke(a * d + i, b * d + kk) += wd * v;
            }
          }
        }
      }
    }
    if (with_tangent) scatter(out.tangent, dofs, Ke);
  }
  return out;
}

double neo_hookean_energy(const PrimalSpace& space, const Material& mat, const QuadratureRule& quad,
                          const Eigen::VectorXd& u) {
  const int d = space.dim();
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  ShapeEvaluator ev(space.patch());
  std::vector<QuadPoint> pts;
  double W = 0.0;
  for (int e = 0; e < quad.num_elements(); ++e) {
    quad.element_points(e, pts);
    for (const auto& q : pts) {
      const auto& s = ev.eval(std::span<const double>(q.xi.data(), d), true);
      const NhPoint k = kinematics(space, s, u);
      const double trC = (k.F.transpose() * k.F).trace();
      W += q.weight * s.det *
           (0.5 * mu * (trC - d) - mu * k.lnJ + 0.5 * lam * k.lnJ * k.lnJ);
    }
  }
  return W;
}

std::vector<Eigen::MatrixXd> eval_stress(const PrimalSpace& space, const Material& mat,
                                         const Eigen::VectorXd& u,
                                         const std::vector<std::array<double, 3>>& points) {
  const int d = space.dim();
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  ShapeEvaluator ev(space.patch());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(points.size());
  for (const auto& xi : points) {
    const auto& s = ev.eval(std::span<const double>(xi.data(), d), true);
    if (mat.model == Material::Model::NeoHookean) {
      const NhPoint k = kinematics(space, s, u);
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      out.push_back((mu / k.J) * (k.F * k.F.transpose() - I) + (lam * k.lnJ / k.J) * I);
    } else {
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d, d);
      for (std::size_t a = 0; a < s.index.size(); ++a) {
        for (int i = 0; i < d; ++i) {
          const double ua = u(space.dofs().dof(s.index[a], i));
          for (int J = 0; J < d; ++J) grad(i, J) += ua * s.dN_dx(a, J);
        }
      }
      const Eigen::MatrixXd eps = 0.5 * (grad + grad.transpose());
      out.push_back(lam * eps.trace() * Eigen::MatrixXd::Identity(d, d) + 2.0 * mu * eps);
    }
  }
  return out;
}

}  // namespace igac
