#include "igac/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "igac/errors.hpp"

namespace igac {

RigidPlane::RigidPlane(Eigen::VectorXd n, double off) : normal(std::move(n)), offset(off) {
  const double len = normal.norm();
  if (!(std::abs(len - 1.0) < 1e-12)) throw std::invalid_argument("rigid plane normal must be a unit vector");
}

AugmentedParams make_params(double r0, const BoundaryFace& contact_face) {
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  return AugmentedParams{r0, max_element_diameter(contact_face)};
}

ContactSurface::ContactSurface(const PrimalSpace& space, const DualSpace& dual, RigidPlane plane,
                               int points_per_dir)
    : space_(&space), dual_(&dual), plane_(std::move(plane)) {
  const BoundaryFace& face = dual.face();
  if (face.patch_ptr() != space.patch_ptr()) {
    throw std::invalid_argument("multiplier space and displacement space use different patches");
  }
  const int d = space.dim();
  if (plane_.normal.size() != d) throw std::invalid_argument("plane normal has the wrong dimension");
  const int n = points_per_dir > 0 ? points_per_dir : space.degree() + 1;
  const int nK = dual.size();
  const int ndof = space.dofs().num_dofs();
  const int fd = d - 1;

  measure_ = Eigen::VectorXd::Zero(nK);
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(nK);
  std::vector<Eigen::Triplet<double>> tb, tm;
  const auto rule = gauss_rule(face, n);
  ShapeEvaluator ev(space.patch());
  std::vector<QuadPoint> pts;
  DualEval de;
  elem_funcs_.resize(rule.num_elements());
  elem_min_gap_.assign(rule.num_elements(), std::numeric_limits<double>::infinity());

  for (int e = 0; e < rule.num_elements(); ++e) {
    rule.element_points(e, pts);
    for (const auto& q : pts) {
      const std::span<const double> xf(q.xi.data(), fd);
      const auto xi = face.to_volume(xf);
      const auto& s = ev.eval(std::span<const double>(xi.data(), d), false);
      const FrameEval fr = boundary_frame(face, s);
      const double dG = fr.measure * q.weight;
      dual.eval(xf, de);
      const double g = plane_.gap(s.x);
      elem_min_gap_[e] = std::min(elem_min_gap_[e], g);
      for (std::size_t k = 0; k < de.index.size(); ++k) {
        const int K = de.index[k];
        const double BK = de.value[k];
        if (BK == 0.0) continue;
        measure_(K) += BK * dG;
        g0(K) += g * BK * dG;
        for (std::size_t a = 0; a < s.index.size(); ++a) {
          for (int c = 0; c < d; ++c) {
            const double v = BK * s.N(a) * plane_.normal(c) * dG;
            if (v != 0.0) tb.emplace_back(K, space.dofs().dof(s.index[a], c), v);
          }
        }
        for (std::size_t l = 0; l < de.index.size(); ++l) {
          tm.emplace_back(K, de.index[l], BK * de.value[l] * dG);
        }
      }
      qx_.push_back(s.x);
      qw_.push_back(dG);
      qdual_.push_back(de);
    }
    // Gap at the element corners as well, the quadrature points miss the pole.
    const auto m = rule.element_multi(e);
    for (int c = 0; c < (1 << fd); ++c) {
      double xc[2];
      for (int k = 0; k < fd; ++k) {
        const auto& b = space.patch().knots(face.face_dirs()[k]).breakpoints();
        xc[k] = b[m[k] + ((c >> k) & 1)];
      }
      const auto xi = face.to_volume(std::span<const double>(xc, fd));
      const auto& s = ev.eval(std::span<const double>(xi.data(), d), false);
      elem_min_gap_[e] = std::min(elem_min_gap_[e], plane_.gap(s.x));
    }
    double mid[2];
    for (int k = 0; k < fd; ++k) {
      const auto& b = space.patch().knots(face.face_dirs()[k]).breakpoints();
      mid[k] = 0.5 * (b[m[k]] + b[m[k] + 1]);
    }
    dual.eval(std::span<const double>(mid, fd), de);
    for (std::size_t k = 0; k < de.index.size(); ++k) {
      if (de.value[k] > 0.0) elem_funcs_[e].push_back(de.index[k]);
    }
  }
  for (int K = 0; K < nK; ++K) {
    if (!(measure_(K) > 0.0)) throw DegenerateGeometry("multiplier basis function with zero measure");
  }
  coupling_.resize(nK, ndof);
  coupling_.setFromTriplets(tb.begin(), tb.end());
  coupling_.makeCompressed();
  mass_.resize(nK, nK);
  mass_.setFromTriplets(tm.begin(), tm.end());
  mass_.makeCompressed();
  gap0_ = g0.cwiseQuotient(measure_);
}

Eigen::VectorXd ContactSurface::projected_gap(const Eigen::VectorXd& u) const {
  return gap0_ + (coupling_ * u).cwiseQuotient(measure_);
}

Eigen::VectorXd ContactSurface::project(const std::function<double(const Eigen::VectorXd& x)>& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (std::size_t q = 0; q < qx_.size(); ++q) {
    const double vq = v(qx_[q]) * qw_[q];
    const auto& de = qdual_[q];
    for (std::size_t k = 0; k < de.index.size(); ++k) out(de.index[k]) += vq * de.value[k];
  }
  return out.cwiseQuotient(measure_);
}

ActiveSet ContactSurface::initial_active_set(double tol) const {
  ActiveSet act(size(), 0);
  for (std::size_t e = 0; e < elem_funcs_.size(); ++e) {
    if (elem_min_gap_[e] <= tol) {
      for (int K : elem_funcs_[e]) act[K] = 1;
    }
  }
  return act;
}

Eigen::VectorXd project(const DualSpace& dual,
                        const std::function<double(const Eigen::VectorXd& x)>& v, int points_per_dir) {
  const BoundaryFace& face = dual.face();
  const int d = face.patch().dim();
  const int fd = d - 1;
  Eigen::VectorXd num = Eigen::VectorXd::Zero(dual.size());
  Eigen::VectorXd den = Eigen::VectorXd::Zero(dual.size());
  const auto rule = gauss_rule(face, points_per_dir);
  ShapeEvaluator ev(face.patch());
  std::vector<QuadPoint> pts;
  DualEval de;
  for (int e = 0; e < rule.num_elements(); ++e) {
    rule.element_points(e, pts);
    for (const auto& q : pts) {
      const std::span<const double> xf(q.xi.data(), fd);
      const auto xi = face.to_volume(xf);
      const auto& s = ev.eval(std::span<const double>(xi.data(), d), false);
      const double dG = boundary_frame(face, s).measure * q.weight;
      const double vq = v(s.x);
      dual.eval(xf, de);
      for (std::size_t k = 0; k < de.index.size(); ++k) {
        num(de.index[k]) += vq * de.value[k] * dG;
        den(de.index[k]) += de.value[k] * dG;
      }
    }
  }
  if ((den.array() <= 0.0).any()) throw DegenerateGeometry("multiplier basis function with zero measure");
  return num.cwiseQuotient(den);
}

ActiveSet update_active_set(const Eigen::VectorXd& lambda, const Eigen::VectorXd& projected_gap, double r) {
  ActiveSet act(lambda.size(), 0);
  for (Eigen::Index K = 0; K < lambda.size(); ++K) act[K] = (lambda(K) + r * projected_gap(K) < 0.0) ? 1 : 0;
  return act;
}

ContactResidual contact_residual(const ContactSurface& s, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& lambda, double r, const ActiveSet& active,
                                 MultiplierRows rows) {
  const int nK = s.size();
  const Eigen::VectorXd G = s.projected_gap(u);
  const auto& m = s.measures();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nK);
  Eigen::VectorXd w(nK);  // act*G - inact*lambda/r
  for (int K = 0; K < nK; ++K) {
    if (active[K]) {
      c(K) = lambda(K) + r * G(K);
      w(K) = G(K);
    } else {
      w(K) = -lambda(K) / r;
    }
  }
  ContactResidual out;
  out.u = s.coupling().transpose() * c;
  out.lambda = rows == MultiplierRows::Lumped ? Eigen::VectorXd(m.cwiseProduct(w))
                                             : Eigen::VectorXd(s.mass() * w);
  return out;
}

ContactTangent contact_tangent(const ContactSurface& s, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& lambda, double r, const ActiveSet& active,
                               MultiplierRows rows) {
  (void)u;
  (void)lambda;
  const int nK = s.size();
  const auto& m = s.measures();
  const SparseMatrix& B = s.coupling();
  Eigen::VectorXd act(nK), inact(nK);
  for (int K = 0; K < nK; ++K) {
    act(K) = active[K] ? 1.0 : 0.0;
    inact(K) = active[K] ? 0.0 : 1.0;
  }
  ContactTangent t;
  // Rows of inactive K vanish in the couplings.
  const SparseMatrix Ba = act.asDiagonal() * B;
  const SparseMatrix Bs = (act.cwiseQuotient(m) * r).asDiagonal() * B;
  t.uu = SparseMatrix(Ba.transpose() * Bs);
  t.ul = Ba.transpose();
  if (rows == MultiplierRows::Lumped) {
    t.lu = Ba;
    t.ll = SparseMatrix(nK, nK);
    std::vector<Eigen::Triplet<double>> tl;
    for (int K = 0; K < nK; ++K) {
      if (!active[K]) tl.emplace_back(K, K, -m(K) / r);
    }
    t.ll.setFromTriplets(tl.begin(), tl.end());
  } else {
    const SparseMatrix scaled = act.cwiseQuotient(m).asDiagonal() * B;
    t.lu = SparseMatrix(s.mass() * scaled);
    t.ll = SparseMatrix(s.mass() * (inact * (-1.0 / r)).asDiagonal());
  }
  t.uu.prune(0.0);
  t.ul.prune(0.0);
  t.lu.prune(0.0);
  t.ll.prune(0.0);
  return t;
}

double contact_energy(const ContactSurface& s, const Eigen::VectorXd& u, const Eigen::VectorXd& lambda,
                      double r) {
  const Eigen::VectorXd G = s.projected_gap(u);
  const auto& m = s.measures();
  double E = 0.0;
  for (int K = 0; K < s.size(); ++K) {
    const double c = neg_part(lambda(K) + r * G(K));
    E += m(K) * (c * c - lambda(K) * lambda(K));
  }
  return E / (2.0 * r);
}

}  // namespace igac
