#include "igac/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "igac/errors.hpp"

namespace igac {

namespace {

std::vector<int> tie_coincident(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  const double extent = (C.colwise().maxCoeff() - C.colwise().minCoeff()).maxCoeff();
  const double tol = 1e-10 * std::max(extent, 1.0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return C(a, 0) < C(b, 0); });

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int s = 0; s < n; ++s) {
    const int i = order[s];
    for (int t = s + 1; t < n && C(order[t], 0) - C(i, 0) <= tol; ++t) {
      const int j = order[t];
      if ((C.row(i) - C.row(j)).cwiseAbs().maxCoeff() <= tol) {
        const int ri = root(i), rj = root(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  // Nodes numbered by their smallest control point index.
  std::vector<int> node(n, -1), node_of_root(n, -1);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const int r = root(i);
    if (node_of_root[r] < 0) node_of_root[r] = count++;
    node[i] = node_of_root[r];
  }
  return node;
}

}  // namespace

PrimalSpace::PrimalSpace(std::shared_ptr<const NurbsPatch> patch, std::vector<DirichletSpec> dirichlet)
    : patch_(std::move(patch)), dirichlet_(std::move(dirichlet)) {
  if (!patch_) throw std::invalid_argument("primal space without a patch");
  const int d = patch_->dim();
  map_.dim = d;
  map_.node_of_cp = tie_coincident(patch_->control_points());
  map_.num_nodes = *std::max_element(map_.node_of_cp.begin(), map_.node_of_cp.end()) + 1;
  const int ndof = map_.num_dofs();
  map_.constrained.assign(ndof, 0);
  map_.prescribed = Eigen::VectorXd::Zero(ndof);

  for (const auto& spec : dirichlet_) {
    BoundaryFace face(patch_, spec.face);  // validates the face
    for (int c : spec.components) {
      if (c < 0 || c >= d) {
        throw std::invalid_argument("Dirichlet component " + std::to_string(c) + " out of range");
      }
    }
    for (int cp : face.layer()) {
      for (int c : spec.components) {
        const int k = map_.dof(cp, c);
        if (map_.constrained[k] && map_.prescribed(k) != spec.value) {
          throw std::invalid_argument("conflicting Dirichlet values on a shared degree of freedom");
        }
        map_.constrained[k] = 1;
        map_.prescribed(k) = spec.value;
      }
    }
  }
  if (dirichlet_.empty()) {
    warnings_.push_back("no Dirichlet boundary: the elastic problem is only determined up to rigid motions");
  }
  map_.free_index.assign(ndof, -1);
  for (int k = 0; k < ndof; ++k) {
    if (!map_.constrained[k]) {
      map_.free_index[k] = static_cast<int>(map_.free_dofs.size());
      map_.free_dofs.push_back(k);
    }
  }
}

Eigen::VectorXd PrimalSpace::lifting(double factor) const { return factor * map_.prescribed; }

Eigen::VectorXd PrimalSpace::evaluate(const Eigen::VectorXd& u, std::span<const double> xi) const {
  ShapeEvaluator ev(*patch_);
  const auto& s = ev.eval(xi, false);
  const int d = dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (std::size_t a = 0; a < s.index.size(); ++a) {
    for (int c = 0; c < d; ++c) out(c) += s.N(a) * u(map_.dof(s.index[a], c));
  }
  return out;
}

PrimalSpace build_primal(std::shared_ptr<const NurbsPatch> patch, std::vector<DirichletSpec> dirichlet) {
  return PrimalSpace(std::move(patch), std::move(dirichlet));
}

DualSpace::DualSpace(BoundaryFace face, int primal_degree) : face_(std::move(face)) {
  if (primal_degree < 2) {
    throw UnsupportedDegree("multiplier space needs primal degree >= 2, got " +
                            std::to_string(primal_degree));
  }
  std::vector<KnotVector> kvs;
  for (int dir : face_.face_dirs()) {
    const KnotVector& kv = face_.patch().knots(dir);
    if (kv.degree() != primal_degree) {
      throw std::invalid_argument("patch degree differs from the requested primal degree");
    }
    kvs.push_back(trim_for_dual(kv));
  }
  basis_ = TensorBasis(std::move(kvs));

  const int nK = basis_.size();
  measure_ = Eigen::VectorXd::Zero(nK);
  support_.assign(nK, {});
  const auto rule = gauss_rule(face_, primal_degree + 1);
  ShapeEvaluator ev(face_.patch());
  std::vector<QuadPoint> pts;
  DualEval de;
  const int fd = basis_.dim();
  for (int e = 0; e < rule.num_elements(); ++e) {
    rule.element_points(e, pts);
    for (const auto& q : pts) {
      const auto xi = face_.to_volume(std::span<const double>(q.xi.data(), fd));
      const auto& s = ev.eval(std::span<const double>(xi.data(), face_.patch().dim()), false);
      const double dG = boundary_frame(face_, s).measure * q.weight;
      eval(std::span<const double>(q.xi.data(), fd), de);
      for (std::size_t k = 0; k < de.index.size(); ++k) measure_(de.index[k]) += de.value[k] * dG;
    }
    // Support from the element midpoint, where every supported function is positive.
    const auto m = rule.element_multi(e);
    double mid[2];
    for (int k = 0; k < fd; ++k) {
      const auto& b = basis_.dir(k).breakpoints();
      mid[k] = 0.5 * (b[m[k]] + b[m[k] + 1]);
    }
    eval(std::span<const double>(mid, fd), de);
    for (std::size_t k = 0; k < de.index.size(); ++k) {
      if (de.value[k] > 0.0) support_[de.index[k]].push_back(e);
    }
  }
  for (int K = 0; K < nK; ++K) {
    if (!(measure_(K) > 0.0)) {
      throw DegenerateGeometry("multiplier basis function " + std::to_string(K) + " has zero measure");
    }
  }
}

std::array<double, 2> DualSpace::greville(int K) const {
  const auto m = basis_.multi(K);
  std::array<double, 2> g{0.0, 0.0};
  for (int k = 0; k < basis_.dim(); ++k) g[k] = basis_.dir(k).greville()[m[k]];
  return g;
}

void DualSpace::eval(std::span<const double> xi_face, DualEval& out) const {
  const int fd = basis_.dim();
  int span[2] = {0, 0};
  int q[2] = {0, 0};
  double v[2][kMaxDegree + 1];
  for (int k = 0; k < fd; ++k) {
    const KnotVector& kv = basis_.dir(k);
    q[k] = kv.degree();
    Eigen::Map<Eigen::MatrixXd> row(v[k], 1, q[k] + 1);
    eval_basis_into(kv, xi_face[k], 0, span[k], row);
  }
  const int n0 = q[0] + 1;
  const int n1 = fd == 2 ? q[1] + 1 : 1;
  out.index.resize(n0 * n1);
  out.value.resize(n0 * n1);
  int a = 0;
  for (int j = 0; j < n1; ++j) {
    for (int i = 0; i < n0; ++i, ++a) {
      std::array<int, 3> m{span[0] - q[0] + i, 0, 0};
      double val = v[0][i];
      if (fd == 2) {
        m[1] = span[1] - q[1] + j;
        val *= v[1][j];
      }
      out.index[a] = basis_.flat(m);
      out.value[a] = val;
    }
  }
}

DualEval DualSpace::eval(std::span<const double> xi_face) const {
  DualEval out;
  eval(xi_face, out);
  return out;
}

DualSpace build_dual(const BoundaryFace& face, int primal_degree) { return DualSpace(face, primal_degree); }

NormalTrace::NormalTrace(const PrimalSpace& space, BoundaryFace face, Eigen::VectorXd normal)
    : space_(&space), face_(std::move(face)), n_(std::move(normal)) {
  if (face_.patch_ptr() != space.patch_ptr()) {
    throw std::invalid_argument("trace face does not belong to the space's patch");
  }
  if (n_.size() != space.dim()) throw std::invalid_argument("normal has the wrong dimension");
}

std::vector<std::pair<int, double>> NormalTrace::row(std::span<const double> xi_face) const {
  ShapeEvaluator ev(space_->patch());
  const auto xi = face_.to_volume(xi_face);
  const auto& s = ev.eval(std::span<const double>(xi.data(), space_->dim()), false);
  std::vector<std::pair<int, double>> out;
  for (std::size_t a = 0; a < s.index.size(); ++a) {
    if (s.N(a) == 0.0) continue;
    for (int c = 0; c < space_->dim(); ++c) {
      if (n_(c) != 0.0) out.emplace_back(space_->dofs().dof(s.index[a], c), s.N(a) * n_(c));
    }
  }
  return out;
}

double NormalTrace::eval(const Eigen::VectorXd& v, std::span<const double> xi_face) const {
  double out = 0.0;
  for (const auto& [k, c] : row(xi_face)) out += c * v(k);
  return out;
}

NormalTrace trace_normal(const PrimalSpace& space, const BoundaryFace& face, const Eigen::VectorXd& n) {
  return NormalTrace(space, face, n);
}

}  // namespace igac
